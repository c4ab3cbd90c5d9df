//! Per-mode radial engine.
//!
//! Angular mode `m` of the scattered field obeys, on the support of the
//! contrast `q`,
//!
//! ```text
//! ρ(r) + k² q(r) ∫₀^b G_m(r,t) ρ(t) dt = -k² q(r) J_m(kr),
//! ```
//!
//! a second-kind equation for the density `ρ` whose radial potential
//! `u_m = ∫ G_m ρ` solves the scattered-mode ODE. The outgoing Green's kernel
//! is `G_m(r,t) = -(iπ/2) J_m(k·min) H_m(k·max) · t`, so `ρ` inherits the
//! support of `q` exactly.
//!
//! Discretization: the support is cut into adaptive Chebyshev panels. On one
//! panel the kernel splits at the diagonal into left and right separable
//! parts, and both partial integrals are applied through spectral indefinite
//! integration of the interpolant; this keeps full spectral accuracy despite
//! the kernel's derivative jump at `t = r`. Panels talk to each other only
//! through two moments of `ρ` each (a `J`-weighted and an `H`-weighted one),
//! which lets panels be solved locally and coupled by 2x2 scattering
//! matrices merged pairwise into a global solve, followed by a downward pass
//! that recovers the per-panel incoming coefficients.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Matrix4x2, Vector2, Vector4};

use crate::bessel;
use crate::cheb::{self, cheb_ref, ChebRef, Panel, PANEL_N};
use crate::potential::RadialPotential;
use crate::{C64, Error};

/// `-(iπ/2)`, the prefactor carried by the outgoing kernel and by every
/// `H`-restriction below.
fn neg_i_half_pi() -> C64 {
    C64::new(0.0, -std::f64::consts::FRAC_PI_2)
}

/// Largest modulus over the entries of a complex matrix or vector.
fn max_abs<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `H̃_m(x) = -(iπ/2) (J_m + i Y_m)(x)`.
fn h_tilde(m: u32, x: f64) -> C64 {
    neg_i_half_pi() * bessel::hankel1(m, x)
}

/// Outgoing radial Green's kernel
/// `G_m(r,t) = -(iπ/2) J_m(k·min(r,t)) H_m(k·max(r,t)) · t`.
pub fn kernel(m: u32, k: f64, r: f64, t: f64) -> C64 {
    assert!(r > 0.0 && t > 0.0, "kernel arguments must be positive");
    let (lo, hi) = if t <= r { (t, r) } else { (r, t) };
    let j = bessel::bessel_j(m, k * lo);
    let h = bessel::hankel1(m, k * hi);
    neg_i_half_pi() * j * h * t
}

/// `u(r) = ∫₀^support G_m(r,t) g(t) dt` by composite quadrature, splitting at
/// `t = r` where the kernel loses smoothness and refining dyadically toward
/// the origin where `H_m` is singular. Used as the free-space solve: the
/// radial Helmholtz operator applied to the result returns `g`.
pub fn greens_apply(
    m: u32,
    k: f64,
    g: &(dyn Fn(f64) -> C64 + Sync),
    support: f64,
    r: f64,
) -> C64 {
    assert!(r > 0.0, "evaluation radius must be positive");
    let (xs, ws) = crate::gauss::gauss_legendre(24);
    let quad = |lo: f64, hi: f64, f: &dyn Fn(f64) -> C64| -> C64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in xs.iter().zip(&ws) {
            acc += *w * f(mid + half * x);
        }
        acc * half
    };
    // Composite rule with panels no longer than a quarter wavelength, and a
    // dyadic cascade toward `lo` when the integrand is singular there.
    let composite = |lo: f64, hi: f64, f: &dyn Fn(f64) -> C64, dyadic_at_lo: bool| -> C64 {
        if hi <= lo {
            return C64::new(0.0, 0.0);
        }
        let step = (std::f64::consts::PI / k).min((hi - lo) / 4.0).max((hi - lo) * 1e-6);
        let mut acc = C64::new(0.0, 0.0);
        let mut cut = hi;
        while cut > lo {
            let mut next = (cut - step).max(lo);
            if dyadic_at_lo && next <= 2.0 * lo.max(hi * 1e-14) {
                // Final stretch: halve toward lo so log-type behavior near
                // the lower endpoint is resolved.
                next = (0.5 * (cut + lo)).max(lo);
                if cut - next < 1e-13 * hi {
                    next = lo;
                }
            }
            acc += quad(next, cut, f);
            cut = next;
        }
        acc
    };

    let b = support;
    let jr = bessel::bessel_j(m, k * r);
    let hr = h_tilde(m, k * r);
    // Left part: t < min(r, b), integrand J_m(kt) g(t) t (smooth at 0).
    let left_hi = r.min(b);
    let left = composite(0.0, left_hi, &|t| bessel::bessel_j(m, k * t) * g(t) * t, false);
    // Right part: r < t < b, integrand H̃_m(kt) g(t) t (singular at t -> 0).
    let right = if r < b {
        composite(r, b, &|t| h_tilde(m, k * t) * g(t) * t, true)
    } else {
        C64::new(0.0, 0.0)
    };
    hr * left + jr * right
}

/// Panel partition of the working radial interval for one mode.
#[derive(Clone, Debug)]
pub struct Partition {
    /// Largest radius below which `|J_m(kr)| < ε/10` everywhere (0 when the
    /// mode is active at the origin). Source and kernel are negligible
    /// inside it.
    pub r_min: f64,
    /// Innermost partition edge: `max(r_min, tiny floor)`, the floor keeping
    /// the `H_m` log singularity out of reach for small `m`.
    pub r_start: f64,
    /// Increasing panel edges, `edges[0] = r_start`, last = support radius.
    pub edges: Vec<f64>,
}

impl Partition {
    pub fn panel_count(&self) -> usize {
        self.edges.len().saturating_sub(1)
    }
}

/// Radius below which `|J_m(kx)| < threshold` for every smaller radius
/// (monotone growth of `J_m` up to its first maximum makes this well
/// defined); 0 if `J_m` already exceeds the threshold at the origin.
fn j_threshold_radius(m: u32, k: f64, threshold: f64) -> f64 {
    if m == 0 {
        return 0.0; // J_0(0) = 1
    }
    let mf = f64::from(m);
    // First maximum of J_m sits just past the turning point x = m.
    let peak = mf + 1.2 * mf.cbrt() + 2.0;
    if bessel::bessel_j(m, peak).abs() <= threshold {
        // Entire first hump below threshold cannot happen for threshold
        // around 1e-14 and m in range, but stay safe.
        return peak / k;
    }
    let (mut lo, mut hi) = (0.0f64, peak);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bessel::bessel_j(m, mid).abs() < threshold {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo / k
}

/// Minimum panel length, relative to the support radius, before the
/// partitioner declares the data unresolvable.
const STALL_FRACTION: f64 = 1e-14;

/// Remainders shorter than this fraction of the support are absorbed into
/// the neighboring panel instead of becoming their own sliver.
const SLIVER_FRACTION: f64 = 1e-12;

/// Build the panel partition for mode `m`: march inward from the support
/// radius in steps of at most a half wavelength, halving each candidate
/// panel until the Chebyshev tails of `q`, `J_m(k·)` and `H_m(k·)` are below
/// `eps/10` relative to their local scale. Panel edges are forced onto every
/// breakpoint of the potential.
pub fn adaptive_partition(
    m: u32,
    k: f64,
    q: &RadialPotential,
    eps: f64,
) -> Result<Partition, Error> {
    assert!(k > 0.0 && eps > 0.0);
    let b = q.support_radius();
    let r_min = j_threshold_radius(m, k, eps / 10.0);
    // Keep the innermost edge away from the origin: below this radius the
    // source is O(eps/100) small in its weighted integrals, and the kernel's
    // log singularity stays out of the quadrature's reach.
    let r_floor = 0.1 * eps.sqrt() / k;
    let r_start = r_min.max(r_floor);
    if r_start >= b * (1.0 - 1e-12) || q.is_identically_zero() {
        // Mode inactive on the whole support (or no contrast to resolve).
        return Ok(Partition { r_min, r_start: b, edges: Vec::new() });
    }

    let reference = cheb_ref(PANEL_N);
    let mut edges_desc = vec![b];
    let mut cur = b;
    while cur > r_start {
        let barrier = q
            .breakpoints()
            .iter()
            .rev()
            .find(|&&p| p < cur && p > r_start)
            .copied()
            .unwrap_or(r_start);
        let mut lo = (cur - std::f64::consts::PI / k).max(barrier);
        loop {
            if panel_resolved(m, k, q, lo, cur, eps, &reference) {
                break;
            }
            let next = 0.5 * (cur + lo);
            if cur - next < STALL_FRACTION * b {
                return Err(Error::RefinementStalled { m, r: cur, len: cur - next });
            }
            lo = next;
        }
        if lo - r_start < SLIVER_FRACTION * b {
            lo = r_start;
        }
        edges_desc.push(lo);
        cur = lo;
    }
    let edges: Vec<f64> = edges_desc.into_iter().rev().collect();
    Ok(Partition { r_min, r_start, edges })
}

/// Combined resolution test on a candidate panel: Chebyshev tail of the
/// interpolants of `q`, `J_m(kr)` and `H̃_m(kr)`, each normalized by a dense
/// scan of the function's magnitude over the panel.
fn panel_resolved(
    m: u32,
    k: f64,
    q: &RadialPotential,
    lo: f64,
    hi: f64,
    eps: f64,
    reference: &ChebRef,
) -> bool {
    let panel = Panel::new(lo, hi, reference);
    let len = panel.len();
    let tol = eps / 10.0;

    let q_samples: Vec<f64> = panel.nodes.iter().map(|&r| q.eval(r)).collect();
    let q_scale = scan_max_abs(|r| q.eval(r), lo, hi);
    if q_scale == 0.0 && q_samples.iter().all(|&v| v == 0.0) {
        // Zero contrast: the panel is an exact identity no matter how the
        // Bessel factors behave, so there is nothing left to resolve.
        return true;
    }
    let eq = cheb::tail_measure(&reference.coeffs(&q_samples), len, q_scale);
    if eq > tol {
        return false;
    }

    let j_samples: Vec<f64> = panel.nodes.iter().map(|&r| bessel::bessel_j(m, k * r)).collect();
    let j_scale = bessel::scan_max_j(m, k * lo, k * hi);
    let ej = cheb::tail_measure(&reference.coeffs(&j_samples), len, j_scale);
    if ej > tol {
        return false;
    }

    let h_samples: Vec<C64> = panel.nodes.iter().map(|&r| h_tilde(m, k * r)).collect();
    let h_scale = std::f64::consts::FRAC_PI_2 * bessel::scan_max_h(m, k * lo, k * hi);
    let eh = cheb::tail_measure_c(&reference.coeffs_c(&h_samples), len, h_scale);
    eh <= tol
}

fn scan_max_abs(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let samples = 128;
    let mut best: f64 = 0.0;
    for i in 0..=samples {
        let x = lo + (hi - lo) * i as f64 / samples as f64;
        best = best.max(f(x).abs());
    }
    best
}

/// One panel's local solve data.
pub struct IntervalData {
    pub panel: Panel,
    /// `q`, `J_m(kr)`, `H̃_m(kr)` at the panel nodes.
    pub q_nodes: Vec<f64>,
    pub j_nodes: Vec<f64>,
    pub h_nodes: Vec<C64>,
    /// Responses of the local second-kind solve to the two incoming waves:
    /// `w_h = F⁻¹(k²q H̃)`, `w_j = F⁻¹(k²q J)`. The unit-source density is
    /// `ρ = -w_j - φ_ℓ w_h - φ_r w_j`.
    pub w_h: DVector<C64>,
    pub w_j: DVector<C64>,
    /// Scattering matrix: outgoing moments `(⟨J,ρ⟩, ⟨H̃,ρ⟩)` produced by unit
    /// incoming coefficients, source excluded.
    pub s: Matrix2<C64>,
    /// Outgoing moments produced by the unit source alone.
    pub chi: Vector2<C64>,
    /// Incoming coefficients `(φ_ℓ, φ_r)`, filled by the downward pass.
    pub phi: Vector2<C64>,
    /// Outgoing moments `(⟨J,ρ⟩, ⟨H̃,ρ⟩)` of this panel's density.
    pub alpha: Vector2<C64>,
}

/// Discretize and solve the local panel problem (`n` from `reference`).
///
/// The Nyström matrix applies the kernel through left/right spectral
/// integration: `(Gρ)(r_i) = H̃_i ∫_a^{r_i} J t ρ + J_i ∫_{r_i}^{b} H̃ t ρ`,
/// each partial integral exact on the interpolant.
pub fn build_interval(
    m: u32,
    k: f64,
    lo: f64,
    hi: f64,
    q: &RadialPotential,
    reference: &ChebRef,
) -> Result<IntervalData, Error> {
    let n = reference.n;
    let panel = Panel::new(lo, hi, reference);
    let q_nodes: Vec<f64> = panel.nodes.iter().map(|&r| q.eval(r)).collect();
    let j_nodes: Vec<f64> = panel.nodes.iter().map(|&r| bessel::bessel_j(m, k * r)).collect();
    let h_nodes: Vec<C64> = panel.nodes.iter().map(|&r| h_tilde(m, k * r)).collect();

    if q_nodes.iter().all(|&v| v == 0.0) {
        // No contrast: the local equation is the identity and the panel
        // scatters nothing.
        return Ok(IntervalData {
            panel,
            q_nodes,
            j_nodes,
            h_nodes,
            w_h: DVector::zeros(n),
            w_j: DVector::zeros(n),
            s: Matrix2::zeros(),
            chi: Vector2::zeros(),
            phi: Vector2::zeros(),
            alpha: Vector2::zeros(),
        });
    }

    let half = 0.5 * (hi - lo);
    let k2 = k * k;
    let mut f = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        let qi = k2 * q_nodes[i];
        for l in 0..n {
            let g_il = h_nodes[i] * (half * reference.int_left[(i, l)]) * (j_nodes[l] * panel.nodes[l])
                + j_nodes[i] * (half * reference.int_right[(i, l)]) * (h_nodes[l] * panel.nodes[l]);
            f[(i, l)] = qi * g_il;
        }
        f[(i, i)] += C64::new(1.0, 0.0);
    }

    let rhs_h = DVector::from_iterator(n, (0..n).map(|i| k2 * q_nodes[i] * h_nodes[i]));
    let rhs_j =
        DVector::from_iterator(n, (0..n).map(|i| C64::new(k2 * q_nodes[i] * j_nodes[i], 0.0)));
    let lu = f.lu();
    let w_h = lu.solve(&rhs_h).ok_or(Error::SingularSystem {
        context: "panel solve (H response)",
        m,
        k,
    })?;
    let w_j = lu.solve(&rhs_j).ok_or(Error::SingularSystem {
        context: "panel solve (J response)",
        m,
        k,
    })?;

    // Weighted moments with measure r dr on the panel (bilinear, no
    // conjugation).
    let dot = |a: &dyn Fn(usize) -> C64, v: &DVector<C64>| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..n {
            acc += panel.weights[l] * a(l) * v[l] * panel.nodes[l];
        }
        acc
    };
    let jw = |l: usize| C64::new(j_nodes[l], 0.0);
    let hw = |l: usize| h_nodes[l];
    let s = Matrix2::new(
        -dot(&jw, &w_h),
        -dot(&jw, &w_j),
        -dot(&hw, &w_h),
        -dot(&hw, &w_j),
    );
    // The source response is V = -w_j, so its moments equal S's second
    // column.
    let chi = Vector2::new(s[(0, 1)], s[(1, 1)]);

    Ok(IntervalData {
        panel,
        q_nodes,
        j_nodes,
        h_nodes,
        w_h,
        w_j,
        s,
        chi,
        phi: Vector2::zeros(),
        alpha: Vector2::zeros(),
    })
}

/// Result of merging two adjacent intervals (A immediately left of B), with
/// the operators needed later by the downward pass.
pub struct MergeNode {
    pub s: Matrix2<C64>,
    pub chi: Vector2<C64>,
    /// `K⁻¹ · vstack(S_A, S_B)`: maps the union's incoming coefficients to
    /// the four interior outgoing moments.
    pub down_s: Matrix4x2<C64>,
    /// `K⁻¹ · (χ_A; χ_B)`.
    pub down_chi: Vector4<C64>,
}

/// Couple two adjacent panels. The interior consistency relations are
/// `φ_ℓ(A) = φ_ℓ(U)`, `φ_r(B) = φ_r(U)`, `φ_r(A) = φ_r(U) + α_H(B)`,
/// `φ_ℓ(B) = φ_ℓ(U) + α_J(A)`; eliminating the φ's leaves a 4x4 system `K α
/// = vstack(S_A, S_B) φ(U) + (χ_A; χ_B)` for the four interior moments.
pub fn merge(
    s_a: &Matrix2<C64>,
    chi_a: &Vector2<C64>,
    s_b: &Matrix2<C64>,
    chi_b: &Vector2<C64>,
) -> Result<MergeNode, Error> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    #[rustfmt::skip]
    let kk = Matrix4::new(
        one,           zero, zero, -s_a[(0, 1)],
        zero,          one,  zero, -s_a[(1, 1)],
        -s_b[(0, 0)],  zero, one,  zero,
        -s_b[(1, 0)],  zero, zero, one,
    );
    let k_inv = kk.try_inverse().ok_or(Error::SingularSystem {
        context: "interval merge coupling",
        m: 0,
        k: 0.0,
    })?;
    let stacked = Matrix4x2::new(
        s_a[(0, 0)], s_a[(0, 1)],
        s_a[(1, 0)], s_a[(1, 1)],
        s_b[(0, 0)], s_b[(0, 1)],
        s_b[(1, 0)], s_b[(1, 1)],
    );
    let chi_vec = Vector4::new(chi_a[0], chi_a[1], chi_b[0], chi_b[1]);
    let down_s = k_inv * stacked;
    let down_chi = k_inv * chi_vec;
    // S_U = Lᵀ K⁻¹ vstack(S) and χ_U = Lᵀ K⁻¹ χ with Lᵀ summing the A and B
    // rows componentwise.
    let s = Matrix2::new(
        down_s[(0, 0)] + down_s[(2, 0)],
        down_s[(0, 1)] + down_s[(2, 1)],
        down_s[(1, 0)] + down_s[(3, 0)],
        down_s[(1, 1)] + down_s[(3, 1)],
    );
    let chi = Vector2::new(down_chi[0] + down_chi[2], down_chi[1] + down_chi[3]);
    Ok(MergeNode { s, chi, down_s, down_chi })
}

/// Global per-mode solution for a unit incident coefficient (`f_m = J_m`).
/// The physical mode is this scaled by the incident coefficient `c_m`.
pub struct UnitModeSolution {
    pub m: u32,
    pub k: f64,
    pub b: f64,
    pub r_min: f64,
    pub r_start: f64,
    /// Increasing panel edges (empty when the mode is inactive).
    pub edges: Vec<f64>,
    panels: Vec<ModePanel>,
    /// Coefficient of the plain outgoing `H_m(kr)` for `r ≥ b`.
    pub mu_unit: C64,
    /// Coefficient of `J_m(kr)` for `r ≤ r_start`.
    pub beta_unit: C64,
    /// Max-norm of the density over all nodes (solution scale for residual
    /// tests).
    pub rho_scale: f64,
    /// Largest defect of the merge-consistency relations observed in the
    /// downward pass, relative to the outgoing-moment scale.
    pub merge_defect: f64,
}

struct ModePanel {
    lo: f64,
    hi: f64,
    rho: Vec<C64>,
    u: Vec<C64>,
}

/// Solve one mode end to end for a unit incident coefficient.
pub fn solve_mode_unit(
    m: u32,
    k: f64,
    q: &RadialPotential,
    eps: f64,
) -> Result<UnitModeSolution, Error> {
    let reference = cheb_ref(PANEL_N);
    let partition = adaptive_partition(m, k, q, eps)?;
    let b = q.support_radius();
    if partition.edges.is_empty() {
        return Ok(UnitModeSolution {
            m,
            k,
            b,
            r_min: partition.r_min,
            r_start: partition.r_start,
            edges: Vec::new(),
            panels: Vec::new(),
            mu_unit: C64::new(0.0, 0.0),
            beta_unit: C64::new(0.0, 0.0),
            rho_scale: 0.0,
            merge_defect: 0.0,
        });
    }

    let n_panels = partition.edges.len() - 1;
    let mut intervals = Vec::with_capacity(n_panels);
    for w in partition.edges.windows(2) {
        intervals.push(build_interval(m, k, w[0], w[1], q, &reference)?);
    }

    // Upward sweep: fold panels into the union from the outside in, keeping
    // each coupling for the downward pass. After the fold, `unions[i]`
    // describes the union of panels i..n.
    let mut nodes: Vec<MergeNode> = Vec::with_capacity(n_panels.saturating_sub(1));
    let mut s_u = intervals[n_panels - 1].s;
    let mut chi_u = intervals[n_panels - 1].chi;
    for i in (0..n_panels.saturating_sub(1)).rev() {
        let node = merge(&intervals[i].s, &intervals[i].chi, &s_u, &chi_u)?;
        s_u = node.s;
        chi_u = node.chi;
        nodes.push(node);
    }
    let root_s = s_u;
    let root_chi = chi_u;

    // Downward pass. The root has no incoming field: everything outside the
    // support is outgoing, everything inside the start radius negligible.
    let mut merge_defect = 0.0f64;
    let moment_scale = max_abs(root_chi.iter()).max(1e-300);
    let mut phi_u = Vector2::<C64>::zeros();
    let mut alpha_u = root_s * phi_u + root_chi;
    for (step, node) in nodes.iter().rev().enumerate() {
        let i = step; // node with A = panel i, B = union of i+1..
        let a_vec = node.down_s * phi_u + node.down_chi;
        intervals[i].phi = Vector2::new(phi_u[0], phi_u[1] + a_vec[3]);
        intervals[i].alpha = Vector2::new(a_vec[0], a_vec[1]);
        // Conservation at the node: the union's moments split between parts.
        let defect = ((a_vec[0] + a_vec[2]) - alpha_u[0]).norm()
            + ((a_vec[1] + a_vec[3]) - alpha_u[1]).norm();
        merge_defect = merge_defect.max(defect / moment_scale);
        // Local relation α(A) = S_A φ(A) + χ_A.
        let local =
            intervals[i].s * intervals[i].phi + intervals[i].chi - intervals[i].alpha;
        merge_defect = merge_defect.max(max_abs(local.iter()) / moment_scale);
        phi_u = Vector2::new(phi_u[0] + a_vec[0], phi_u[1]);
        alpha_u = Vector2::new(a_vec[2], a_vec[3]);
    }
    let last = n_panels - 1;
    intervals[last].phi = phi_u;
    intervals[last].alpha = intervals[last].s * phi_u + intervals[last].chi;
    let defect = max_abs((intervals[last].alpha - alpha_u).iter());
    merge_defect = merge_defect.max(defect / moment_scale);

    // Per-panel density and field. With unit source,
    // ρ = -w_j - φ_ℓ w_h - φ_r w_j and
    // u(r_i) = H̃_i (φ_ℓ + ∫_a^{r_i} J t ρ) + J_i (φ_r + ∫_{r_i}^{b} H̃ t ρ).
    let n = reference.n;
    let mut panels = Vec::with_capacity(n_panels);
    let mut rho_scale = 0.0f64;
    for iv in &intervals {
        let phi_l = iv.phi[0];
        let phi_r = iv.phi[1];
        let rho: Vec<C64> =
            (0..n).map(|i| -iv.w_j[i] - phi_l * iv.w_h[i] - phi_r * iv.w_j[i]).collect();
        for v in &rho {
            rho_scale = rho_scale.max(v.norm());
        }
        let half = 0.5 * iv.panel.len();
        let jt: Vec<C64> = (0..n).map(|i| iv.j_nodes[i] * iv.panel.nodes[i] * rho[i]).collect();
        let ht: Vec<C64> = (0..n).map(|i| iv.h_nodes[i] * iv.panel.nodes[i] * rho[i]).collect();
        let mut u = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut left = C64::new(0.0, 0.0);
            let mut right = C64::new(0.0, 0.0);
            for l in 0..n {
                left += reference.int_left[(i, l)] * jt[l];
                right += reference.int_right[(i, l)] * ht[l];
            }
            u[i] = iv.h_nodes[i] * (phi_l + half * left) + iv.j_nodes[i] * (phi_r + half * right);
        }
        panels.push(ModePanel {
            lo: iv.panel.a,
            hi: iv.panel.b,
            rho: reference.coeffs_c(&rho),
            u: reference.coeffs_c(&u),
        });
    }

    // Root moments with φ(root) = 0: α(root) = χ(root).
    let mu_unit = neg_i_half_pi() * root_chi[0];
    let beta_unit = root_chi[1];

    Ok(UnitModeSolution {
        m,
        k,
        b,
        r_min: partition.r_min,
        r_start: partition.r_start,
        edges: partition.edges,
        panels,
        mu_unit,
        beta_unit,
        rho_scale,
        merge_defect,
    })
}

/// Reference solution of one mode: density samples from a single dense
/// Nyström system over the whole partition.
pub struct DenseModeSolution {
    pub edges: Vec<f64>,
    /// All panel nodes, ascending, `48` per panel.
    pub nodes: Vec<f64>,
    /// Density at `nodes`.
    pub rho: Vec<C64>,
}

/// Solve one mode with a unit incident coefficient as one global dense
/// Nyström system `(I + k² q G) ρ = -k² q J_m(kr)` over the same adaptive
/// partition used by [`solve_mode_unit`]. The kernel integral keeps the split
/// spectral integration inside the node's own panel and uses full-panel
/// interpolatory quadrature across panels, so any disagreement with the
/// hierarchical path isolates the merge algebra. Cost is cubic in the total
/// node count; this is a validation path, not a production one.
pub fn solve_mode_dense(
    m: u32,
    k: f64,
    q: &RadialPotential,
    eps: f64,
) -> Result<DenseModeSolution, Error> {
    let reference = cheb_ref(PANEL_N);
    let partition = adaptive_partition(m, k, q, eps)?;
    if partition.edges.is_empty() {
        return Ok(DenseModeSolution { edges: Vec::new(), nodes: Vec::new(), rho: Vec::new() });
    }
    let n = reference.n;
    let panels: Vec<Panel> =
        partition.edges.windows(2).map(|w| Panel::new(w[0], w[1], &reference)).collect();
    let np = panels.len();
    let total = np * n;

    let mut nodes = Vec::with_capacity(total);
    let mut jv = Vec::with_capacity(total);
    let mut hv = Vec::with_capacity(total);
    let mut qv = Vec::with_capacity(total);
    for p in &panels {
        for &r in &p.nodes {
            nodes.push(r);
            jv.push(bessel::bessel_j(m, k * r));
            hv.push(h_tilde(m, k * r));
            qv.push(q.eval(r));
        }
    }

    let k2 = k * k;
    let mut a = DMatrix::<C64>::zeros(total, total);
    for (pi, panel) in panels.iter().enumerate() {
        let half = 0.5 * panel.len();
        for i in 0..n {
            let row = pi * n + i;
            let qi = k2 * qv[row];
            // Within the node's panel: split integration at r_i.
            for l in 0..n {
                let col = pi * n + l;
                let g = hv[row] * (half * reference.int_left[(i, l)]) * (jv[col] * panel.nodes[l])
                    + jv[row] * (half * reference.int_right[(i, l)]) * (hv[col] * panel.nodes[l]);
                a[(row, col)] = qi * g;
            }
            // Panels entirely below r_i contribute H̃(r_i) ∫ J t ρ, panels
            // entirely above contribute J(r_i) ∫ H̃ t ρ.
            for (pl, other) in panels.iter().enumerate() {
                if pl == pi {
                    continue;
                }
                for l in 0..n {
                    let col = pl * n + l;
                    let w = other.weights[l] * other.nodes[l];
                    let g = if pl < pi {
                        hv[row] * w * jv[col]
                    } else {
                        jv[row] * w * hv[col]
                    };
                    a[(row, col)] = qi * g;
                }
            }
            a[(row, row)] += C64::new(1.0, 0.0);
        }
    }

    let rhs =
        DVector::from_iterator(total, (0..total).map(|i| C64::new(-k2 * qv[i] * jv[i], 0.0)));
    let rho = a.lu().solve(&rhs).ok_or(Error::SingularSystem {
        context: "dense reference solve",
        m,
        k,
    })?;
    Ok(DenseModeSolution {
        edges: partition.edges,
        nodes,
        rho: rho.iter().copied().collect(),
    })
}

impl UnitModeSolution {
    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    fn panel_index(&self, r: f64) -> usize {
        // edges is increasing; pick the panel whose interval contains r.
        let i = self.edges.partition_point(|&e| e < r);
        i.saturating_sub(1).min(self.panels.len() - 1)
    }

    /// Scattered radial mode for a unit incident coefficient, on all of
    /// `(0, ∞)`: outgoing `μ H_m(kr)` beyond the support, `β J_m(kr)` inside
    /// the inactive core, panel expansions in between.
    pub fn eval_u(&self, r: f64) -> C64 {
        assert!(r > 0.0, "radius must be positive");
        if self.panels.is_empty() {
            return C64::new(0.0, 0.0);
        }
        if r >= self.b {
            return self.mu_unit * bessel::hankel1(self.m, self.k * r);
        }
        if r <= self.r_start {
            return self.beta_unit * bessel::bessel_j(self.m, self.k * r);
        }
        let p = &self.panels[self.panel_index(r)];
        let s = (2.0 * r - p.lo - p.hi) / (p.hi - p.lo);
        cheb::cheb_eval_c(&p.u, s)
    }

    /// Density of the integral representation; identically zero outside the
    /// panels (its support is contained in the support of `q`).
    pub fn eval_rho(&self, r: f64) -> C64 {
        if self.panels.is_empty() || r <= self.r_start || r >= self.b {
            return C64::new(0.0, 0.0);
        }
        let p = &self.panels[self.panel_index(r)];
        let s = (2.0 * r - p.lo - p.hi) / (p.hi - p.lo);
        cheb::cheb_eval_c(&p.rho, s)
    }

    /// Off-node residual of the defining integral equation at radius `r`,
    /// with the kernel integral re-evaluated by dense independent
    /// quadrature: `|ρ(r) + k²q(r) ([Gρ](r) + J_m(kr))|`.
    pub fn integral_residual(&self, q: &RadialPotential, r: f64) -> f64 {
        if self.panels.is_empty() {
            return 0.0;
        }
        let (m, k) = (self.m, self.k);
        let (xs, ws) = crate::gauss::gauss_legendre(64);
        let quad = |lo: f64, hi: f64, f: &dyn Fn(f64) -> C64| -> C64 {
            if hi <= lo {
                return C64::new(0.0, 0.0);
            }
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut acc = C64::new(0.0, 0.0);
            for (x, w) in xs.iter().zip(&ws) {
                acc += *w * f(mid + half * x);
            }
            acc * half
        };
        // Accumulate the two kernel moments panel by panel, splitting the
        // panel containing r.
        let mut left = C64::new(0.0, 0.0); // ∫_{r_start}^{r} J t ρ
        let mut right = C64::new(0.0, 0.0); // ∫_{r}^{b} H̃ t ρ
        let jf = |t: f64| bessel::bessel_j(m, k * t) * t * self.eval_rho(t);
        let hf = |t: f64| h_tilde(m, k * t) * t * self.eval_rho(t);
        for p in &self.panels {
            if p.hi <= r {
                left += quad(p.lo, p.hi, &jf);
            } else if p.lo >= r {
                right += quad(p.lo, p.hi, &hf);
            } else {
                left += quad(p.lo, r, &jf);
                right += quad(r, p.hi, &hf);
            }
        }
        let g_rho = h_tilde(m, k * r) * left + bessel::bessel_j(m, k * r) * right;
        let defect =
            self.eval_rho(r) + k * k * q.eval(r) * (g_rho + bessel::bessel_j(m, k * r));
        defect.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential;
    use crate::rng::SplitMix64;

    #[test]
    fn kernel_is_continuous_at_diagonal_and_symmetric_unweighted() {
        let (m, k, r) = (3u32, 2.0, 1.3);
        let below = kernel(m, k, r, r - 1e-12);
        let above = kernel(m, k, r, r + 1e-12);
        assert!((below - above).norm() < 1e-9);
        // After removing the t weight the kernel is symmetric.
        let a = kernel(m, k, 0.7, 1.9) / 1.9;
        let b = kernel(m, k, 1.9, 0.7) / 0.7;
        assert!((a - b).norm() < 1e-15);
        // Branch check: t < r picks J at t, H at r.
        let want = neg_i_half_pi()
            * bessel::bessel_j(0, 1.0)
            * bessel::hankel1(0, 2.0);
        assert!((kernel(0, 1.0, 2.0, 1.0) - want).norm() < 1e-15);
    }

    /// Apply the radial Helmholtz operator by second-order finite
    /// differences and compare with the data fed to greens_apply.
    fn greens_ode_defect(m: u32, k: f64, h: f64) -> f64 {
        let b = 2.0 * std::f64::consts::PI;
        let g = move |t: f64| {
            let z = (t - 2.5) / 0.4;
            C64::new((-z * z).exp(), 0.5 * (-z * z).exp() * z)
        };
        let mut worst = 0.0f64;
        for i in 0..12 {
            let r = 1.2 + 2.6 * i as f64 / 11.0;
            let um = greens_apply(m, k, &g, b, r - h);
            let u0 = greens_apply(m, k, &g, b, r);
            let up = greens_apply(m, k, &g, b, r + h);
            let d2 = (um - 2.0 * u0 + up) / (h * h);
            let d1 = (up - um) / (2.0 * h);
            let mf = f64::from(m);
            let lhs = d2 + d1 / r + (k * k - mf * mf / (r * r)) * u0;
            worst = worst.max((lhs - g(r)).norm());
        }
        worst
    }

    #[test]
    fn greens_apply_inverts_the_radial_operator() {
        for &(m, k) in &[(0u32, 2.5), (3, 2.5)] {
            let e1 = greens_ode_defect(m, k, 2e-3);
            let e2 = greens_ode_defect(m, k, 1e-3);
            // Second-order convergence: halving h divides the defect by ~4.
            let order = (e1 / e2).log2();
            assert!(
                (1.6..=2.4).contains(&order),
                "m={m}: defects {e1:.3e} -> {e2:.3e}, order {order:.2}"
            );
            assert!(e2 < 1e-4, "m={m}: absolute defect {e2:.3e}");
        }
    }

    #[test]
    fn greens_apply_is_outgoing_beyond_the_data() {
        // Past the support the field is exactly proportional to H_m(kr).
        let g = |t: f64| C64::new((-(t - 1.0) * (t - 1.0) * 30.0).exp(), 0.0);
        let (m, k, b) = (2u32, 3.0, 2.0);
        let ratio0 = greens_apply(m, k, &g, b, 2.5) / bessel::hankel1(m, k * 2.5);
        for &r in &[3.0, 4.7, 6.1] {
            let ratio = greens_apply(m, k, &g, b, r) / bessel::hankel1(m, k * r);
            assert!((ratio - ratio0).norm() < 1e-10 * ratio0.norm());
        }
    }

    #[test]
    fn threshold_radius_properties() {
        assert_eq!(j_threshold_radius(0, 10.0, 1e-14), 0.0);
        let k = 30.0;
        let r200 = j_threshold_radius(200, k, 1e-14);
        assert!(r200 > 0.0);
        assert!(bessel::bessel_j(200, k * r200 * 0.999).abs() < 1e-14);
        assert!(bessel::bessel_j(200, k * r200 * 1.2).abs() > 1e-14);
    }

    #[test]
    fn partition_respects_breakpoints_and_support() {
        let q = potential::random_discontinuous(1234);
        let part = adaptive_partition(0, 5.0, &q, 1e-13).expect("partition");
        let edges = &part.edges;
        assert_eq!(*edges.last().unwrap(), q.support_radius());
        for &p in q.breakpoints() {
            assert!(
                edges.iter().any(|&e| (e - p).abs() < 1e-14),
                "breakpoint {p} not a panel edge"
            );
        }
        for w in edges.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn zero_contrast_panel_scatters_nothing() {
        let q = potential::zero(2.0);
        let reference = cheb_ref(PANEL_N);
        let iv = build_interval(4, 3.0, 0.5, 1.5, &q, &reference).expect("build");
        assert_eq!(iv.s, Matrix2::zeros());
        assert_eq!(iv.chi, Vector2::zeros());
        assert!(iv.w_h.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dense_reference_matches_the_hierarchy() {
        // One global LU against the merged panel cascade: agreement here
        // means the merge algebra transports moments exactly.
        let q = potential::gaussian_bump();
        let (k, eps) = (6.0, 1e-12);
        for m in [0u32, 3, 11] {
            let dense = solve_mode_dense(m, k, &q, eps).expect("dense");
            let fast = solve_mode_unit(m, k, &q, eps).expect("fast");
            assert_eq!(dense.edges, fast.edges);
            let scale = dense.rho.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(scale > 0.0);
            let mut worst = 0.0f64;
            for (&r, &want) in dense.nodes.iter().zip(&dense.rho) {
                worst = worst.max((fast.eval_rho(r) - want).norm());
            }
            assert!(worst <= 1e-12 * scale, "m={m}: rho mismatch {worst:.3e} vs scale {scale:.3e}");
        }
    }

    #[test]
    fn interval_solve_is_stable_under_node_refinement() {
        // The same panel discretized at 48 and 96 nodes gives the same
        // scattering matrix: the discretization has converged.
        let q = potential::gaussian_bump();
        let (m, k) = (0u32, 1.0);
        let coarse = build_interval(m, k, 0.5, 1.0, &q, &cheb_ref(48)).expect("coarse");
        let fine = build_interval(m, k, 0.5, 1.0, &q, &cheb_ref(96)).expect("fine");
        let scale = max_abs(fine.s.iter());
        assert!(max_abs((coarse.s - fine.s).iter()) <= 1e-12 * scale.max(1.0));
        assert!(max_abs((coarse.chi - fine.chi).iter()) <= 1e-12 * scale.max(1.0));
    }

    fn random_s(rng: &mut SplitMix64) -> (Matrix2<C64>, Vector2<C64>) {
        let mut c = || C64::new(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
        (Matrix2::new(c(), c(), c(), c()), Vector2::new(c(), c()))
    }

    #[test]
    fn merge_identity_and_associativity() {
        // Zero scatterers just add their source moments.
        let chi_a = Vector2::new(C64::new(0.1, 0.2), C64::new(-0.3, 0.05));
        let chi_b = Vector2::new(C64::new(0.7, -0.1), C64::new(0.0, 0.4));
        let z = Matrix2::zeros();
        let node = merge(&z, &chi_a, &z, &chi_b).expect("merge");
        assert!(max_abs(node.s.iter()) < 1e-15);
        assert!(max_abs((node.chi - (chi_a + chi_b)).iter()) < 1e-15);

        // Associativity on random couplings.
        let mut rng = SplitMix64::new(99);
        for _ in 0..25 {
            let (sa, xa) = random_s(&mut rng);
            let (sb, xb) = random_s(&mut rng);
            let (sc, xc) = random_s(&mut rng);
            let ab = merge(&sa, &xa, &sb, &xb).expect("ab");
            let ab_c = merge(&ab.s, &ab.chi, &sc, &xc).expect("ab_c");
            let bc = merge(&sb, &xb, &sc, &xc).expect("bc");
            let a_bc = merge(&sa, &xa, &bc.s, &bc.chi).expect("a_bc");
            assert!(max_abs((ab_c.s - a_bc.s).iter()) < 1e-12);
            assert!(max_abs((ab_c.chi - a_bc.chi).iter()) < 1e-12);
        }
    }

    #[test]
    fn downward_data_solves_the_coupling_system() {
        // For random panel data and union coefficients, the retained
        // operators must reproduce the defining relations
        // α(A) = S_A φ(A) + χ_A (and likewise for B) with the φ's tied to
        // the union through the interior moments.
        let mut rng = SplitMix64::new(123);
        for _ in 0..20 {
            let (sa, xa) = random_s(&mut rng);
            let (sb, xb) = random_s(&mut rng);
            let node = merge(&sa, &xa, &sb, &xb).expect("merge");
            let phi_u = Vector2::new(
                C64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)),
                C64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)),
            );
            let a = node.down_s * phi_u + node.down_chi;
            let phi_a = Vector2::new(phi_u[0], phi_u[1] + a[3]);
            let phi_b = Vector2::new(phi_u[0] + a[0], phi_u[1]);
            let alpha_a = Vector2::new(a[0], a[1]);
            let alpha_b = Vector2::new(a[2], a[3]);
            assert!(max_abs((sa * phi_a + xa - alpha_a).iter()) < 1e-12);
            assert!(max_abs((sb * phi_b + xb - alpha_b).iter()) < 1e-12);
            // The merged moments are the sums.
            let alpha_u = node.s * phi_u + node.chi;
            assert!(max_abs((alpha_a + alpha_b - alpha_u).iter()) < 1e-12);
        }
    }

    #[test]
    fn zero_potential_mode_is_identically_zero() {
        let q = potential::zero(2.0 * std::f64::consts::PI);
        for m in [0u32, 3] {
            let sol = solve_mode_unit(m, 7.0, &q, 1e-13).expect("solve");
            assert_eq!(sol.mu_unit, C64::new(0.0, 0.0));
            assert_eq!(sol.beta_unit, C64::new(0.0, 0.0));
            assert_eq!(sol.rho_scale, 0.0);
            for &r in &[0.3, 1.0, 4.0, 9.0] {
                assert_eq!(sol.eval_u(r), C64::new(0.0, 0.0));
            }
        }
    }

    /// Closed-form scattered mode for a constant-contrast disk: interior
    /// total field A J_m(k₁ r) with k₁ = k√(1+c), exterior total field
    /// J_m(kr) + μ H_m(kr); A and μ from matching value and derivative at
    /// the rim.
    fn disk_mode_oracle(m: u32, k: f64, c: f64, b: f64) -> (C64, C64) {
        let k1 = k * (1.0 + c).sqrt();
        let pi = bessel::bessel_jy(m, k1 * b);
        let po = bessel::bessel_jy(m, k * b);
        let j1 = C64::new(pi.j, 0.0);
        let dj1 = C64::new(k1 * pi.jp, 0.0);
        let h = C64::new(po.j, po.y);
        let dh = C64::new(k * po.jp, k * po.yp);
        let j = C64::new(po.j, 0.0);
        let dj = C64::new(k * po.jp, 0.0);
        // [j1, -h; dj1, -dh] (A, μ)ᵀ = (j, dj)ᵀ
        let det = j1 * (-dh) - (-h) * dj1;
        let a = (j * (-dh) - (-h) * dj) / det;
        let mu = (j1 * dj - j * dj1) / det;
        (a, mu)
    }

    #[test]
    fn constant_disk_modes_match_transmission_oracle() {
        let (c, b, k) = (0.5, 1.0, 10.0);
        let q = potential::constant_disk(c, b);
        let k1 = k * (1.0 + c as f64).sqrt();
        for m in (0..=20).step_by(4) {
            let sol = solve_mode_unit(m, k, &q, 1e-13).expect("solve");
            let (a_coef, mu) = disk_mode_oracle(m, k, c, b);
            // Scale for relative comparison: the incident mode is O(|J_m|).
            let scale = bessel::scan_max_j(m, 0.0, k * 2.0).max(1e-3);
            // Exterior: scattered = μ H_m(kr).
            for &r in &[1.2, 1.5, 1.9] {
                let want = mu * bessel::hankel1(m, k * r);
                let got = sol.eval_u(r);
                assert!(
                    (got - want).norm() <= 1e-10 * scale,
                    "m={m} exterior r={r}: got {got}, want {want}"
                );
            }
            // Interior: scattered = A J_m(k₁ r) - J_m(kr).
            for &r in &[0.2, 0.55, 0.85] {
                let want = a_coef * bessel::bessel_j(m, k1 * r) - bessel::bessel_j(m, k * r);
                let got = sol.eval_u(r);
                assert!(
                    (got - want).norm() <= 1e-10 * scale,
                    "m={m} interior r={r}: got {got}, want {want}"
                );
            }
            assert!(sol.merge_defect < 1e-12, "merge defect {}", sol.merge_defect);
        }
    }

    #[test]
    fn solution_is_continuous_at_the_support_edge() {
        let q = potential::gaussian_bump();
        let (m, k) = (2u32, 3.0);
        let sol = solve_mode_unit(m, k, &q, 1e-13).expect("solve");
        let b = q.support_radius();
        // Same radius, two representations: the outermost panel expansion
        // extrapolated to its right endpoint against the outgoing wave.
        let inside = sol.eval_u(b * (1.0 - 1e-15));
        let outside = sol.mu_unit * bessel::hankel1(m, k * b);
        let scale = inside.norm().max(outside.norm());
        assert!(
            (inside - outside).norm() < 2e-10 * scale,
            "jump {:.3e} vs scale {:.3e}",
            (inside - outside).norm(),
            scale
        );
        // And at the inner truncation radius.
        let at_start_in = sol.eval_u(sol.r_start * 1.0000001);
        let at_start_out = sol.eval_u(sol.r_start * 0.9999999);
        assert!((at_start_in - at_start_out).norm() < 1e-9 * sol.rho_scale.max(1e-10));
    }

    #[test]
    fn density_vanishes_where_the_contrast_does() {
        // Discontinuous medium: ρ must be exactly zero on q = 0 bands.
        let q = potential::random_discontinuous(7);
        let sol = solve_mode_unit(1, 4.0, &q, 1e-13).expect("solve");
        assert!(sol.rho_scale > 0.0);
        let mut rng = SplitMix64::new(5);
        for _ in 0..200 {
            let r = rng.uniform(sol.r_start * 1.01, sol.b * 0.999);
            if q.eval(r) == 0.0 && q.eval(r * 0.999999) == 0.0 && q.eval(r * 1.000001) == 0.0 {
                assert_eq!(
                    sol.eval_rho(r),
                    C64::new(0.0, 0.0),
                    "density leaked outside supp q at r = {r}"
                );
            }
        }
    }

    #[test]
    fn integral_equation_residual_is_small_off_nodes() {
        let q = potential::gaussian_bump();
        let sol = solve_mode_unit(3, 2.0, &q, 1e-13).expect("solve");
        let mut rng = SplitMix64::new(77);
        let mut worst = 0.0f64;
        for _ in 0..30 {
            let r = rng.uniform(0.05, sol.b * 0.999);
            worst = worst.max(sol.integral_residual(&q, r));
        }
        assert!(
            worst <= 1e-11 * sol.rho_scale,
            "residual {worst:.3e} vs scale {:.3e}",
            sol.rho_scale
        );
    }

    #[test]
    fn exterior_coefficient_is_consistent_with_field() {
        let q = potential::luneburg_lens();
        let (m, k) = (5u32, 2.0);
        let sol = solve_mode_unit(m, k, &q, 1e-13).expect("solve");
        // u just inside b must match μ H_m(kb).
        let b = sol.b;
        let inside = sol.eval_u(b - 1e-12);
        let want = sol.mu_unit * bessel::hankel1(m, k * b);
        assert!((inside - want).norm() <= 1e-10 * want.norm().max(1e-12));
    }
}
