//! Gauss-Legendre quadrature rules of arbitrary order.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton's
//! method from the Chebyshev-based initial guess; weights follow from the
//! derivative. Rules are deterministic and accurate to machine precision for
//! the orders used here (up to a few hundred points).

use once_cell::sync::Lazy;

/// Nodes and weights on the reference interval [-1, 1], nodes increasing.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Only the lower half needs solving; the rule is symmetric.
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        // One clean-up iteration after convergence.
        let (p, d) = legendre_and_derivative(n, x);
        x -= p / d;
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let mid = n / 2;
        nodes[mid] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[mid] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// Rule mapped onto [lo, hi].
pub fn gauss_legendre_on(lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(hi > lo, "empty interval");
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    )
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 64-point reference rule (seed integrals in `bessel`, test oracles).
pub static GL64: Lazy<(Vec<f64>, Vec<f64>)> = Lazy::new(|| gauss_legendre(64));
