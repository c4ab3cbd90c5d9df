//! Chebyshev panels: interpolation nodes of the first kind (no endpoints),
//! Fejér quadrature, coefficient transforms, and spectral indefinite
//! integration matrices.
//!
//! All reference-interval objects depend only on the node count and are
//! cached; panels carry just their endpoints and mapped nodes/weights.
//! Open nodes matter here: panel data is sampled at the nodes only, so
//! integrands may be singular at a panel endpoint (the radial kernel has a
//! logarithmic singularity at the origin).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use once_cell::sync::Lazy;

use crate::C64;

/// Nodes per panel used by the solver.
pub const PANEL_N: usize = 48;

/// First coefficient index counted toward the unresolved-tail measure.
pub const TAIL_START: usize = 12;

/// Reference-interval data for an `n`-node panel.
pub struct ChebRef {
    pub n: usize,
    /// First-kind points `-cos((2j+1)π/(2n))`, increasing, all interior.
    pub nodes: Vec<f64>,
    /// Fejér quadrature weights (positive, sum 2, exact through degree n-1).
    pub weights: Vec<f64>,
    /// Samples at the nodes -> Chebyshev coefficients (n x n).
    pub coeff: DMatrix<f64>,
    /// Samples -> values of `∫_{-1}^{s_i} f` at the nodes (n x n).
    pub int_left: DMatrix<f64>,
    /// Samples -> values of `∫_{s_i}^{1} f` at the nodes (n x n).
    pub int_right: DMatrix<f64>,
}

static REF_CACHE: Lazy<Mutex<HashMap<usize, Arc<ChebRef>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Reference data for `n` nodes, built once per process.
pub fn cheb_ref(n: usize) -> Arc<ChebRef> {
    let mut cache = REF_CACHE.lock().expect("cheb reference cache poisoned");
    cache.entry(n).or_insert_with(|| Arc::new(ChebRef::build(n))).clone()
}

impl ChebRef {
    fn build(n: usize) -> Self {
        assert!(n >= 2, "panel needs at least two nodes");
        let angles: Vec<f64> =
            (0..n).map(|j| (2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).collect();
        let nodes: Vec<f64> = angles.iter().map(|phi| -phi.cos()).collect();

        // Closed-form Fejér weights for first-kind points.
        let weights: Vec<f64> = angles
            .iter()
            .map(|phi| {
                let mut s = 0.0;
                for k in 1..=n / 2 {
                    s += (2.0 * k as f64 * phi).cos() / ((4 * k * k - 1) as f64);
                }
                2.0 / n as f64 * (1.0 - 2.0 * s)
            })
            .collect();

        // Discrete orthogonality at first-kind points:
        // c_k = (2 - δ_{k0})/n Σ_j f_j T_k(s_j), T_k(s_j) = (-1)^k cos(k φ_j).
        let coeff = DMatrix::from_fn(n, n, |k, j| {
            let scale = if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            scale * sign * (k as f64 * angles[j]).cos()
        });

        // Antiderivative in coefficient space: row k of B maps series coeffs
        // c_0..c_{n-1} to the T_k coefficient of an antiderivative
        // (k = 1..n; the T_0 row stays zero and is fixed by an endpoint
        // condition below).
        let mut anti = DMatrix::zeros(n + 1, n);
        for k in 1..=n {
            let kf = 2.0 * k as f64;
            // generic (c_{k-1} - c_{k+1})/(2k); the k = 1 row uses 2 c_0.
            anti[(k, k - 1)] = if k == 1 { 1.0 } else { 1.0 / kf };
            if k + 1 <= n - 1 {
                anti[(k, k + 1)] = -1.0 / kf;
            }
        }

        // Values of T_0..T_n at the nodes.
        let eval = DMatrix::from_fn(n, n + 1, |i, k| cheb_t(k, nodes[i]));
        let at_minus1 = DMatrix::from_fn(1, n + 1, |_, k| if k % 2 == 0 { 1.0 } else { -1.0 });
        let at_plus1 = DMatrix::from_fn(1, n + 1, |_, k| {
            let _ = k;
            1.0
        });
        let ones = DMatrix::from_element(n, 1, 1.0);

        let int_left = (&eval - &ones * at_minus1) * &anti * &coeff;
        let int_right = (&ones * at_plus1 - &eval) * &anti * &coeff;

        ChebRef { n, nodes, weights, coeff, int_left, int_right }
    }

    /// Chebyshev coefficients of the interpolant through real samples.
    pub fn coeffs(&self, samples: &[f64]) -> Vec<f64> {
        assert_eq!(samples.len(), self.n);
        let mut out = vec![0.0; self.n];
        for k in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.coeff[(k, j)] * samples[j];
            }
            out[k] = acc;
        }
        out
    }

    /// Chebyshev coefficients of the interpolant through complex samples.
    pub fn coeffs_c(&self, samples: &[C64]) -> Vec<C64> {
        assert_eq!(samples.len(), self.n);
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for k in 0..self.n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.n {
                acc += self.coeff[(k, j)] * samples[j];
            }
            out[k] = acc;
        }
        out
    }
}

/// `T_k(s)` by recurrence.
fn cheb_t(k: usize, s: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = s;
    for _ in 1..k {
        let next = 2.0 * s * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Clenshaw evaluation of `Σ c_k T_k(s)`. Accepts a hair of slack outside
/// `[-1, 1]` for endpoint rounding.
pub fn cheb_eval(coeffs: &[f64], s: f64) -> f64 {
    debug_assert!(s.abs() <= 1.0 + 1e-12, "evaluation point {s} outside panel");
    let s = s.clamp(-1.0, 1.0);
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().rev() {
        let b0 = 2.0 * s * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    b1 - s * b2
}

/// Clenshaw evaluation for complex coefficients.
pub fn cheb_eval_c(coeffs: &[C64], s: f64) -> C64 {
    debug_assert!(s.abs() <= 1.0 + 1e-12, "evaluation point {s} outside panel");
    let s = s.clamp(-1.0, 1.0);
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = b1;
    for &c in coeffs.iter().rev() {
        let b0 = 2.0 * s * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    b1 - s * b2
}

/// Unresolved-tail measure of an interpolant: panel length times the largest
/// high-order coefficient, relative to the function's global scale. Zero
/// scale means an identically negligible function, which counts as resolved.
pub fn tail_measure(coeffs: &[f64], len: f64, fn_max: f64) -> f64 {
    if fn_max == 0.0 {
        return 0.0;
    }
    assert!(coeffs.len() > TAIL_START, "panel too short for a tail estimate");
    let tail = coeffs[TAIL_START..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    len * tail / fn_max
}

/// Tail measure for complex coefficients.
pub fn tail_measure_c(coeffs: &[C64], len: f64, fn_max: f64) -> f64 {
    if fn_max == 0.0 {
        return 0.0;
    }
    assert!(coeffs.len() > TAIL_START, "panel too short for a tail estimate");
    let tail = coeffs[TAIL_START..].iter().fold(0.0f64, |m, c| m.max(c.norm()));
    len * tail / fn_max
}

/// A panel `[a, b]` with mapped nodes and quadrature weights.
#[derive(Clone, Debug)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Panel {
    pub fn new(a: f64, b: f64, r: &ChebRef) -> Self {
        assert!(b > a, "degenerate panel [{a}, {b}]");
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        Panel {
            a,
            b,
            nodes: r.nodes.iter().map(|s| mid + half * s).collect(),
            weights: r.weights.iter().map(|w| half * w).collect(),
        }
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Map a radius in `[a, b]` to the reference coordinate in `[-1, 1]`.
    pub fn to_ref(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }
}
