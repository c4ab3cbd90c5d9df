//! Radially symmetric scattering media: a contrast profile `q(r)` with
//! compact support, plus metadata the adaptive partitioner needs
//! (support radius, radii where `q` is discontinuous or kinked).

use std::sync::Arc;

use crate::rng::SplitMix64;
use crate::Error;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// A radial contrast profile `q(r)`, identically zero outside its support.
#[derive(Clone)]
pub struct RadialPotential {
    label: String,
    support: f64,
    breakpoints: Vec<f64>,
    identically_zero: bool,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for RadialPotential {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("RadialPotential")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl RadialPotential {
    /// Wrap a profile; the wrapper clips to exactly 0 outside `support`.
    /// Breakpoints must be sorted, distinct, and strictly inside `(0, support)`.
    pub fn new(
        label: impl Into<String>,
        support: f64,
        breakpoints: Vec<f64>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(support > 0.0, "support radius must be positive");
        for (i, &p) in breakpoints.iter().enumerate() {
            assert!(p > 0.0 && p < support, "breakpoint {p} outside (0, {support})");
            if i > 0 {
                assert!(p > breakpoints[i - 1], "breakpoints must be sorted and distinct");
            }
        }
        RadialPotential {
            label: label.into(),
            support,
            breakpoints,
            identically_zero: false,
            f: Arc::new(f),
        }
    }

    /// True only for media constructed by [`zero`]; lets solvers skip work
    /// they can prove produces nothing.
    pub fn is_identically_zero(&self) -> bool {
        self.identically_zero
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r > self.support {
            0.0
        } else {
            (self.f)(r)
        }
    }

    /// Support radius `b`: `q(r) = 0` for all `r > b`.
    pub fn support_radius(&self) -> f64 {
        self.support
    }

    /// Radii in `(0, b)` where `q` jumps or loses smoothness; the partitioner
    /// never places these inside a panel.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// `q(r) = e^{-r²}`, supported on `r ≤ 2π`. The clip at the support edge is
/// `e^{-4π²} ≈ 7e-18`, below working precision.
pub fn gaussian_bump() -> RadialPotential {
    RadialPotential::new("gaussian", TWO_PI, Vec::new(), |r| (-r * r).exp())
}

/// Piecewise-constant medium: 20 radii drawn uniformly in `[0, 2π]` from a
/// seeded deterministic generator, sorted; `q` alternates 0, 1, 0, ...
/// starting at 0 inside the first radius. Equal seeds give bit-identical
/// media on every platform.
pub fn random_discontinuous(seed: u64) -> RadialPotential {
    let mut rng = SplitMix64::new(seed);
    let mut pts: Vec<f64> = (0..20).map(|_| rng.next_f64() * TWO_PI).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("uniform draws are finite"));
    let inside = pts.clone();
    RadialPotential::new(format!("random-{seed}"), TWO_PI, pts, move |r| {
        // Number of switch radii at or below r decides the current level.
        let crossed = inside.partition_point(|&p| p <= r);
        if crossed % 2 == 1 {
            1.0
        } else {
            0.0
        }
    })
}

/// Smallest radius the singular lens profile is evaluated at; below this the
/// value is frozen (quadrature nodes never reach it).
const EATON_FLOOR_FRACTION: f64 = 1e-14;

/// Eaton lens: `1 + q = 2π/(√(1+q) r) + sqrt((2π/(√(1+q) r))² - 1)`, solved
/// pointwise for `s = √(1+q) ∈ [1, 2π/r]`. The profile is singular at the
/// origin (q ~ r^{-2/3}) and decays to 0 at the rim `r = 2π`.
pub fn eaton_lens() -> RadialPotential {
    RadialPotential::new("eaton", TWO_PI, Vec::new(), |r| {
        let r = r.max(EATON_FLOOR_FRACTION * TWO_PI);
        eaton_q(r).expect("Eaton profile solvable on (0, 2π]")
    })
}

fn eaton_q(r: f64) -> Result<f64, Error> {
    if !(0.0..=TWO_PI).contains(&r) || r == 0.0 {
        return Err(Error::InvalidConfig(format!(
            "Eaton profile is defined on (0, 2π]; asked at r = {r}"
        )));
    }
    // g(s) = s² - 2π/(sr) - sqrt((2π/(sr))² - 1) is increasing on the
    // bracket [1, 2π/r]: g(1) ≤ 0, g(2π/r) ≥ 0.
    let g = |s: f64| {
        let t = TWO_PI / (s * r);
        s * s - t - (t * t - 1.0).max(0.0).sqrt()
    };
    let (mut lo, mut hi) = (1.0, TWO_PI / r);
    if g(hi) < 0.0 || g(lo) > 0.0 {
        // Only reachable through floating-point degeneracy at r = 2π.
        return Ok(0.0);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    let mut s = 0.5 * (lo + hi);
    // Newton polish; the bracket keeps it safe.
    for _ in 0..4 {
        let t = TWO_PI / (s * r);
        let root = (t * t - 1.0).max(0.0).sqrt();
        let val = s * s - t - root;
        let dt = -t / s;
        let droot = if root > 0.0 { t * dt / root } else { 0.0 };
        let deriv = 2.0 * s - dt - droot;
        let step = val / deriv;
        let next = s - step;
        if next.is_finite() && next >= lo && next <= hi {
            s = next;
        } else {
            break;
        }
    }
    Ok(s * s - 1.0)
}

/// Luneburg lens: `q(r) = 1 - r²/(4π²)` on `r ≤ 2π`, continuous at the rim
/// (the derivative kink there always falls on a partition endpoint).
pub fn luneburg_lens() -> RadialPotential {
    RadialPotential::new("luneburg", TWO_PI, Vec::new(), |r| 1.0 - (r / TWO_PI).powi(2))
}

/// Constant contrast `c` on a disk of radius `b`. Requires `1 + c > 0`
/// (positive squared wave speed).
pub fn constant_disk(c: f64, b: f64) -> RadialPotential {
    assert!(1.0 + c > 0.0, "contrast must satisfy 1 + c > 0");
    RadialPotential::new(format!("disk(c={c}, b={b})"), b, Vec::new(), move |_| c)
}

/// The trivial medium `q ≡ 0` with nominal support `b`.
pub fn zero(b: f64) -> RadialPotential {
    let mut q = RadialPotential::new("zero", b, Vec::new(), |_| 0.0);
    q.identically_zero = true;
    q
}

/// A tabulated profile: natural cubic-spline interpolation of `(r, q)`
/// samples, split into independent splines at the declared breakpoints.
/// Radii must be strictly increasing, starting at 0 and ending at the
/// support radius, with at least two samples strictly between consecutive
/// breakpoints.
pub fn from_table(
    radii: &[f64],
    values: &[f64],
    breakpoints: Vec<f64>,
    label: impl Into<String>,
) -> Result<RadialPotential, Error> {
    if radii.len() != values.len() {
        return Err(Error::InvalidConfig("table radii/values length mismatch".into()));
    }
    if radii.len() < 2 {
        return Err(Error::InvalidConfig("table needs at least two samples".into()));
    }
    if radii[0] != 0.0 {
        return Err(Error::InvalidConfig("table must start at r = 0".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("table radii must be strictly increasing".into()));
    }
    let b = *radii.last().expect("nonempty");
    for (i, &p) in breakpoints.iter().enumerate() {
        if !(p > 0.0 && p < b) || (i > 0 && p <= breakpoints[i - 1]) {
            return Err(Error::InvalidConfig(
                "table breakpoints must be sorted, distinct, inside (0, b)".into(),
            ));
        }
    }

    // Segment boundaries: 0, breakpoints, b. Each segment gets its own
    // spline so jumps and kinks at breakpoints are representable.
    let mut bounds = vec![0.0];
    bounds.extend_from_slice(&breakpoints);
    bounds.push(b);

    let mut splines = Vec::new();
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let idx: Vec<usize> =
            (0..radii.len()).filter(|&i| radii[i] >= lo && radii[i] <= hi).collect();
        if idx.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "table segment [{lo}, {hi}] has fewer than two samples"
            )));
        }
        let xs: Vec<f64> = idx.iter().map(|&i| radii[i]).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        splines.push(CubicSpline::natural(xs, ys));
    }

    let seg_bounds = bounds.clone();
    Ok(RadialPotential::new(label, b, breakpoints, move |r| {
        // Find the segment; ties at a breakpoint go to the right segment.
        let k = seg_bounds[1..seg_bounds.len() - 1]
            .iter()
            .position(|&p| r < p)
            .unwrap_or(splines.len() - 1);
        splines[k].eval(r)
    }))
}

/// Natural cubic spline through strictly increasing knots.
struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots (zero at both ends).
    m: Vec<f64>,
}

impl CubicSpline {
    fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives.
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            // Thomas elimination over 1..n-1 (ends already zero).
            for i in 2..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let w = h0 / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                let carry = if i + 1 < n - 1 { upper[i] * m[i + 1] } else { 0.0 };
                m[i] = (rhs[i] - carry) / diag[i];
            }
        }
        CubicSpline { xs, ys, m }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let x = x.clamp(self.xs[0], self.xs[n - 1]);
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).expect("finite")) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}
