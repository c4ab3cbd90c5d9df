//! Fast invariant checks over the numerical core, for the `selftest` CLI
//! mode: each check exercises one structural property end to end and reports
//! a measured figure against its bound. The full validation lives in the
//! test suite; this is the field diagnostic.

use crate::incident::plane_wave;
use crate::potential;
use crate::radial::{greens_apply, solve_mode_dense, solve_mode_unit};
use crate::rng::SplitMix64;
use crate::solver::solve_scattering;
use crate::{bessel, C64};

/// Outcome of one check: the measured figure, its bound, and the verdict.
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Run every check; order is fixed and failures do not abort the rest.
pub fn run_all() -> Vec<CheckReport> {
    vec![
        wronskian_check(),
        greens_check(),
        zero_potential_check(),
        dense_reference_check(),
        disk_oracle_check(),
    ]
}

fn report(name: &'static str, passed: bool, detail: String) -> CheckReport {
    CheckReport { name, passed, detail }
}

/// `J_{m+1} Y_m - J_m Y_{m+1} = 2/(πx)` on random orders and arguments.
fn wronskian_check() -> CheckReport {
    let mut rng = SplitMix64::new(0x5e1f7e57);
    let mut worst = 0.0f64;
    let mut kept = 0;
    while kept < 2000 {
        let m = (rng.uniform(0.0, 120.0)) as u32;
        let x = 10f64.powf(rng.uniform(-2.0, 2.7));
        let j0 = bessel::bessel_j(m, x);
        let j1 = bessel::bessel_j(m + 1, x);
        let y0 = bessel::bessel_y(m, x);
        let y1 = bessel::bessel_y(m + 1, x);
        if j0 == 0.0 || j1 == 0.0 || !y0.is_finite() || !y1.is_finite() {
            // Underflowed J or overflowed Y: each product in the identity is
            // O(1/m) even when one factor is at the floor, so a flushed or
            // saturated factor erases a term no f64 evaluation can keep.
            continue;
        }
        kept += 1;
        let want = 2.0 / (std::f64::consts::PI * x);
        worst = worst.max(((j1 * y0 - j0 * y1) - want).abs() / want.abs());
    }
    report(
        "bessel-wronskian",
        worst <= 1e-12,
        format!("max relative defect {worst:.3e} over 2000 samples (bound 1e-12)"),
    )
}

/// The radial Helmholtz operator applied (by finite differences) to
/// `greens_apply(g)` recovers `g` at second order as the step halves.
fn greens_check() -> CheckReport {
    let (m, k, b) = (2u32, 3.0f64, 2.0f64);
    let g = |r: f64| C64::new((-(r - 1.0) * (r - 1.0) * 6.0).exp(), 0.3 * (1.5 * r).sin());
    let op = |h: f64, r: f64| {
        let um = greens_apply(m, k, &g, b, r - h);
        let u0 = greens_apply(m, k, &g, b, r);
        let up = greens_apply(m, k, &g, b, r + h);
        let d2 = (up - 2.0 * u0 + um) / (h * h);
        let d1 = (up - um) / (2.0 * h);
        d2 + d1 / r + (k * k - (f64::from(m) * f64::from(m)) / (r * r)) * u0
    };
    let mut orders = Vec::new();
    for &r in &[0.7, 1.3] {
        let want = g(r);
        let e1 = (op(0.02, r) - want).norm();
        let e2 = (op(0.01, r) - want).norm();
        orders.push((e1 / e2).log2());
    }
    let ok = orders.iter().all(|&p| (1.7..=2.3).contains(&p));
    report(
        "greens-identity",
        ok,
        format!(
            "finite-difference recovery orders {:.2}, {:.2} (want 2.0 ± 0.3)",
            orders[0], orders[1]
        ),
    )
}

/// No contrast, no scattering: the solver returns a numerically zero field.
fn zero_potential_check() -> CheckReport {
    let eps = 1e-13;
    let q = potential::zero(2.0 * std::f64::consts::PI);
    let src = plane_wave(10.0, 0.4);
    let state = match solve_scattering(&q, &src, eps) {
        Ok(s) => s,
        Err(e) => return report("zero-potential", false, format!("solve failed: {e}")),
    };
    let mut rng = SplitMix64::new(42);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let x = rng.uniform(-9.0, 9.0);
        let y = rng.uniform(-9.0, 9.0);
        worst = worst.max(state.eval_scattered_point(x, y).norm());
    }
    report(
        "zero-potential",
        worst <= 10.0 * eps,
        format!("max |u_s| = {worst:.3e} over 200 points (bound {:.0e})", 10.0 * eps),
    )
}

/// Hierarchical merges against one dense global solve of the same system.
fn dense_reference_check() -> CheckReport {
    let q = potential::gaussian_bump();
    let (m, k, eps) = (2u32, 6.0, 1e-12);
    let run = || -> Result<(f64, f64), crate::Error> {
        let dense = solve_mode_dense(m, k, &q, eps)?;
        let fast = solve_mode_unit(m, k, &q, eps)?;
        let scale = dense.rho.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for (&r, &want) in dense.nodes.iter().zip(&dense.rho) {
            worst = worst.max((fast.eval_rho(r) - want).norm());
        }
        Ok((worst, scale))
    };
    match run() {
        Ok((worst, scale)) => report(
            "dense-reference",
            worst <= 1e-11 * scale,
            format!("max |Δρ| = {worst:.3e} against scale {scale:.3e} (bound 1e-11 relative)"),
        ),
        Err(e) => report("dense-reference", false, format!("solve failed: {e}")),
    }
}

/// Total field for the constant disk against closed-form transmission
/// matching per mode.
fn disk_oracle_check() -> CheckReport {
    let (c, b, k) = (0.5f64, 1.0f64, 10.0f64);
    let q = potential::constant_disk(c, b);
    let src = plane_wave(k, 0.0);
    let state = match solve_scattering(&q, &src, 1e-13) {
        Ok(s) => s,
        Err(e) => return report("disk-oracle", false, format!("solve failed: {e}")),
    };
    let k_in = k * (1.0 + c).sqrt();
    // Continuity of u and u' at the rim for each mode: interior a J_m(k_in r),
    // exterior i^m (J_m(kr) + s H_m(kr)).
    let mode_pair = |m: u32| -> (C64, C64) {
        let jb = bessel::bessel_j(m, k_in * b);
        let djb = k_in * bessel_jp(m, k_in * b);
        let j = bessel::bessel_j(m, k * b);
        let dj = k * bessel_jp(m, k * b);
        let h = bessel::hankel1(m, k * b);
        let dh = k * hankel1p(m, k * b);
        let det = C64::new(jb, 0.0) * dh - C64::new(djb, 0.0) * h;
        let s = (C64::new(djb * j - jb * dj, 0.0)) / det;
        let a = (C64::new(j, 0.0) + s * h) / jb;
        (a, s)
    };
    let m_max = 40usize;
    let mut rng = SplitMix64::new(7);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for _ in 0..50 {
        let r = rng.uniform(0.05, 2.0);
        let th = rng.uniform(0.0, 2.0 * std::f64::consts::PI);
        let (x, y) = (r * th.cos(), r * th.sin());
        let mut want = C64::new(0.0, 0.0);
        for m in -(m_max as i64)..=(m_max as i64) {
            let ma = m.unsigned_abs() as u32;
            let (aa, ss) = mode_pair(ma);
            let radial = if r <= b {
                aa * bessel::bessel_j(ma, k_in * r)
            } else {
                C64::new(bessel::bessel_j(ma, k * r), 0.0) + ss * bessel::hankel1(ma, k * r)
            };
            let ip = match m.rem_euclid(4) {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            // i^m J_{-m} = i^{|m|} (-1)^m J_{|m|}: fold the parity into the
            // angular factor.
            let sign = if m < 0 && m.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            want += sign * ip * radial * C64::from_polar(1.0, m as f64 * th);
        }
        let got = state.eval_total_point(x, y);
        worst = worst.max((got - want).norm());
        scale = scale.max(want.norm());
    }
    report(
        "disk-oracle",
        worst <= 1e-9 * scale,
        format!("max |Δu| = {worst:.3e} against scale {scale:.3e} (bound 1e-9 relative)"),
    )
}

/// `J_m'(x) = J_{m-1}(x) - (m/x) J_m(x)`, with `J_{-1} = -J_1`.
fn bessel_jp(m: u32, x: f64) -> f64 {
    let prev = if m == 0 { -bessel::bessel_j(1, x) } else { bessel::bessel_j(m - 1, x) };
    prev - f64::from(m) / x * bessel::bessel_j(m, x)
}

fn hankel1p(m: u32, x: f64) -> C64 {
    let prev = if m == 0 { -bessel::hankel1(1, x) } else { bessel::hankel1(m - 1, x) };
    prev - f64::from(m) / x * bessel::hankel1(m, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for check in run_all() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }
}
