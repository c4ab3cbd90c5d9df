//! Acceptance gate: every contract the solver ships under, checked end to
//! end at its stated tolerance. One test per contract so the harness prints
//! one verdict line each; a shared lock serializes them because the heavy
//! cases assume exclusive use of the machine. Each test also prints its
//! measured figures (visible with `--nocapture`, or on failure).

use std::sync::{Mutex, MutexGuard, OnceLock};

use radscat::bessel;
use radscat::incident::{plane_wave, ring_modes};
use radscat::potential;
use radscat::radial::{greens_apply, solve_mode_dense, solve_mode_unit};
use radscat::rng::SplitMix64;
use radscat::solver::{residual_map, solve_scattering, Grid};
use radscat::timedomain::{build_sweep, free_space_reference, SourceSpectrum, SweepRule};
use radscat::C64;

const TWO_PI: f64 = std::f64::consts::TAU;

fn gate() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(())).lock().unwrap_or_else(|e| e.into_inner())
}

/// A medium with no contrast scatters nothing: the solver's scattered field
/// stays at the tolerance floor for small, medium and large wavenumbers.
#[test]
fn a01_zero_contrast_scatters_nothing() {
    let _gate = gate();
    let eps = 1e-13;
    let q = potential::zero(TWO_PI);
    let mut worst = 0.0f64;
    for k in [1.0, 10.0, 30.0] {
        let state = solve_scattering(&q, &plane_wave(k, 0.3), eps).expect("solve");
        let mut rng = SplitMix64::new(0xa01);
        for _ in 0..1000 {
            let (x, y) = (rng.uniform(-9.0, 9.0), rng.uniform(-9.0, 9.0));
            worst = worst.max(state.eval_scattered_point(x, y).norm());
        }
    }
    println!("max |u_s| {worst:.3e} over 1000 points at k = 1, 10, 30 (bound 1.0e-12)");
    assert!(worst <= 10.0 * eps, "max |u_s| {worst:.3e} above 10 eps");
}

fn bessel_jp(m: u32, x: f64) -> f64 {
    let prev = if m == 0 { -bessel::bessel_j(1, x) } else { bessel::bessel_j(m - 1, x) };
    prev - f64::from(m) / x * bessel::bessel_j(m, x)
}

fn hankel1p(m: u32, x: f64) -> C64 {
    let prev = if m == 0 { -bessel::hankel1(1, x) } else { bessel::hankel1(m - 1, x) };
    prev - f64::from(m) / x * bessel::hankel1(m, x)
}

/// Constant-contrast disk against the closed-form transmission series:
/// per-mode 2x2 continuity matching at the rim, an oracle that shares no
/// code with the integral-equation path.
#[test]
fn a02_constant_disk_matches_transmission_series() {
    let _gate = gate();
    let (c, b, k) = (0.5f64, 1.0f64, 10.0f64);
    let q = potential::constant_disk(c, b);
    let state = solve_scattering(&q, &plane_wave(k, 0.0), 1e-13).expect("solve");
    let k_in = k * (1.0 + c).sqrt();
    // Interior a J_m(k_in r) and exterior J_m(kr) + s H_m(kr) joined C^1 at
    // the rim.
    let mode_pair = |m: u32| -> (C64, C64) {
        let jb = bessel::bessel_j(m, k_in * b);
        let djb = k_in * bessel_jp(m, k_in * b);
        let j = bessel::bessel_j(m, k * b);
        let dj = k * bessel_jp(m, k * b);
        let h = bessel::hankel1(m, k * b);
        let dh = k * hankel1p(m, k * b);
        let det = C64::new(jb, 0.0) * dh - C64::new(djb, 0.0) * h;
        let s = C64::new(djb * j - jb * dj, 0.0) / det;
        let a = (C64::new(j, 0.0) + s * h) / jb;
        (a, s)
    };
    let m_max = 40i64;
    let mut rng = SplitMix64::new(0xa02);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for _ in 0..200 {
        let r = rng.uniform(0.05, 2.0);
        let th = rng.uniform(0.0, TWO_PI);
        let (x, y) = (r * th.cos(), r * th.sin());
        let mut want = C64::new(0.0, 0.0);
        for m in -m_max..=m_max {
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
            // i^m J_{-m} = i^{|m|} (-1)^m J_{|m|}: parity folds into the sign.
            let sign = if m < 0 && m.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            want += sign * ip * radial * C64::from_polar(1.0, m as f64 * th);
        }
        worst = worst.max((state.eval_total_point(x, y) - want).norm());
        scale = scale.max(want.norm());
    }
    println!("max |u - series| {worst:.3e} against scale {scale:.3e} (bound 1e-9 relative)");
    assert!(worst <= 1e-9 * scale, "disk series defect {worst:.3e} vs scale {scale:.3e}");
}

/// Applying the radial Helmholtz operator (by centered differences) to the
/// Green's-function image of a random smooth source recovers the source at
/// the stencil's second order.
#[test]
fn a03_greens_image_inverts_the_radial_operator() {
    let _gate = gate();
    let b = 2.0f64;
    let mut rng = SplitMix64::new(0xa03);
    let mut orders = Vec::new();
    for _ in 0..10 {
        let m = rng.uniform(0.0, 6.0) as u32;
        let k = rng.uniform(2.0, 6.0);
        let coef: Vec<C64> =
            (0..6).map(|_| C64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))).collect();
        let g = move |r: f64| {
            let s = 2.0 * r / b - 1.0;
            let (mut t0, mut t1) = (1.0, s);
            let mut acc = coef[0] + coef[1] * t1;
            for &cj in &coef[2..] {
                let t2 = 2.0 * s * t1 - t0;
                acc += cj * t2;
                (t0, t1) = (t1, t2);
            }
            acc
        };
        let op = |h: f64, r: f64| {
            let um = greens_apply(m, k, &g, b, r - h);
            let u0 = greens_apply(m, k, &g, b, r);
            let up = greens_apply(m, k, &g, b, r + h);
            let d2 = (up - 2.0 * u0 + um) / (h * h);
            let d1 = (up - um) / (2.0 * h);
            d2 + d1 / r + (k * k - f64::from(m * m) / (r * r)) * u0
        };
        // Probe where the source has some size so the relative recovery is
        // meaningful.
        let r = loop {
            let r = rng.uniform(0.5, 1.5);
            if g(r).norm() > 0.3 {
                break r;
            }
        };
        let want = g(r);
        let e1 = (op(0.02, r) - want).norm();
        let e2 = (op(0.01, r) - want).norm();
        assert!(
            e2 <= 0.05 * want.norm(),
            "operator image at h = 0.01 misses the source: |defect| {e2:.3e} vs |g| {:.3e}",
            want.norm()
        );
        orders.push((e1 / e2).log2());
    }
    let lo = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = orders.iter().copied().fold(0.0, f64::max);
    println!("observed stencil orders in [{lo:.2}, {hi:.2}] over 10 random sources (want 2.0 +- 0.2)");
    assert!(
        orders.iter().all(|&p| (1.8..=2.2).contains(&p)),
        "orders {orders:?} outside 2.0 +- 0.2"
    );
}

/// The panel hierarchy and a single dense solve over the same partition are
/// the same linear problem; their densities must agree far below the solve
/// tolerance. This pins every sign and index in the merge algebra.
#[test]
fn a04_hierarchical_merge_matches_dense_reference() {
    let _gate = gate();
    let (k, eps) = (20.0, 1e-12);
    let q = potential::gaussian_bump();
    let mut detail = Vec::new();
    for m in [0u32, 5, 17] {
        let fast = solve_mode_unit(m, k, &q, eps).expect("hierarchical solve");
        let dense = solve_mode_dense(m, k, &q, eps).expect("dense solve");
        assert_eq!(fast.edges, dense.edges, "partitions diverged for mode {m}");
        let scale = dense.rho.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for (&r, &want) in dense.nodes.iter().zip(&dense.rho) {
            worst = worst.max((fast.eval_rho(r) - want).norm());
        }
        detail.push(format!("m={m}: {worst:.3e} of {scale:.3e}"));
        assert!(
            worst <= 1e-11 * scale,
            "mode {m}: |rho_fast - rho_dense| {worst:.3e} above 1e-11 of {scale:.3e}"
        );
    }
    println!("density defects {} (bound 1e-11 relative)", detail.join(", "));
}

/// Retained angular orders for the plane wave on the standard ring, plus the
/// wall-clock cost of the matching full solves. The counts are pinned to
/// +-5%; the times are informational (hardware-dependent) and only reported.
#[test]
fn a05_retained_mode_counts_at_reference_wavenumbers() {
    let _gate = gate();
    let eps = 1e-13;
    // The retained count is the truncation order itself: orders 0..m_max are
    // solved and |m| <= m_max synthesized.
    let count100 = ring_modes(&plane_wave(100.0, 0.0), TWO_PI, eps, 4000).expect("ring").m_max;
    let count30 = ring_modes(&plane_wave(30.0, 0.0), TWO_PI, eps, 4000).expect("ring").m_max;

    let s100 = solve_scattering(&potential::gaussian_bump(), &plane_wave(100.0, 0.0), eps)
        .expect("solve k=100");
    let s30 = solve_scattering(&potential::random_discontinuous(7), &plane_wave(30.0, 0.0), eps)
        .expect("solve k=30");
    println!(
        "k=100: {count100} modes (expect 711 +- 5%), smooth-bump solve {:.2} s; \
         k=30: {count30} modes (expect 245 +- 5%), discontinuous solve {:.2} s",
        s100.build_seconds(),
        s30.build_seconds()
    );
    assert!(
        (676..=746).contains(&count100),
        "k=100 retained count {count100} outside 711 +- 5%"
    );
    assert!((233..=257).contains(&count30), "k=30 retained count {count30} outside 245 +- 5%");
}

/// Pointwise Helmholtz defect of the assembled total field on a grid finer
/// than 15 points per wavelength: after subtracting the documented stencil
/// floor, at least 95% of points sit below 1e-8. A no-contrast control run
/// first validates the floor model against the pure stencil error of the
/// exact incident wave.
#[test]
fn a06_helmholtz_defect_sits_at_the_stencil_floor() {
    let _gate = gate();
    let (k, eps, theta0) = (30.0, 1e-13, 0.3);
    let h = TWO_PI / (150.0 * k);

    let control =
        solve_scattering(&potential::zero(TWO_PI), &plane_wave(k, theta0), eps).expect("control");
    let cmap = residual_map(&control, &Grid::centered(145, 145, 4.0), h);
    let cover = cmap
        .values
        .iter()
        .zip(&cmap.fd_floor)
        .filter(|&(&e, &fl)| e > fl)
        .count();
    assert_eq!(
        cover, 0,
        "floor model fails on the control field at {cover} of {} points",
        cmap.values.len()
    );

    // 575 points across [-4, 4] is 15.03 samples per wavelength at k = 30.
    let state = solve_scattering(&potential::gaussian_bump(), &plane_wave(k, theta0), eps)
        .expect("solve");
    let map = residual_map(&state, &Grid::centered(575, 575, 4.0), h);
    let mut checked = 0usize;
    let mut over = 0usize;
    for i in 0..map.values.len() {
        if map.excluded[i] {
            continue;
        }
        checked += 1;
        if map.values[i] - map.fd_floor[i] > 1e-8 {
            over += 1;
        }
    }
    let frac = over as f64 / checked as f64;
    println!(
        "defect above floor + 1e-8 at {over} of {checked} points ({:.2}%; allowed 5%)",
        100.0 * frac
    );
    assert!(frac <= 0.05, "defect exceeds the floor at {:.2}% of points", 100.0 * frac);
}

/// Twenty random contrast jumps: the per-mode density still satisfies its
/// integral equation between the nodes, and the assembled scattered field is
/// continuous across every jump radius.
#[test]
fn a07_discontinuous_medium_keeps_residual_and_continuity() {
    let _gate = gate();
    let (k, eps) = (30.0, 1e-13);
    let q = potential::random_discontinuous(7);
    let mut detail = Vec::new();
    for m in [0u32, 10, 100] {
        let sol = solve_mode_unit(m, k, &q, eps).expect("mode solve");
        let mut rng = SplitMix64::new(0xa07 + u64::from(m));
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let r = rng.uniform(sol.r_start.max(1e-3), sol.b);
            worst = worst.max(sol.integral_residual(&q, r));
        }
        detail.push(format!("m={m}: {worst:.3e} of {:.3e}", sol.rho_scale));
        assert!(
            worst <= 1e-10 * sol.rho_scale,
            "mode {m}: off-node residual {worst:.3e} above 1e-10 of {:.3e}",
            sol.rho_scale
        );
    }
    println!("off-node residuals {} (bound 1e-10 relative)", detail.join(", "));

    let state = solve_scattering(&q, &plane_wave(k, 0.55), eps).expect("solve");
    let mut rng = SplitMix64::new(0xa77);
    let mut scale = 0.0f64;
    for _ in 0..100 {
        let (x, y) = (rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0));
        scale = scale.max(state.eval_scattered_point(x, y).norm());
    }
    let mut radii = q.breakpoints().to_vec();
    radii.push(q.support_radius());
    let mut worst = 0.0f64;
    for &rb in &radii {
        for i in 0..5 {
            let th = 0.2 + 1.17 * f64::from(i);
            let eval = |rr: f64| state.eval_scattered_point(rr * th.cos(), rr * th.sin());
            worst = worst.max((eval(rb * (1.0 + 1e-13)) - eval(rb * (1.0 - 1e-13))).norm());
        }
    }
    println!("max jump across {} interfaces {worst:.3e} vs field scale {scale:.3e}", radii.len());
    assert!(worst <= 1e-10 * scale, "interface jump {worst:.3e} above 1e-10 of {scale:.3e}");
}

/// Broadband pulse on the graded lens: frames are real, silent before the
/// earliest possible arrival, stable under doubling the frequency nodes, and
/// the no-contrast synthesis matches the closed-form free propagator. The
/// lens also sheds the pulse: late frames decay to the contract level.
#[test]
fn a08_pulse_synthesis_is_causal_and_converged() {
    let _gate = gate();
    let eps = 1e-12;
    let q = potential::luneburg_lens();
    let pulse = SourceSpectrum::gaussian_pulse();
    let rule = SweepRule::default();

    // Sample points across the lens disk (support radius 2 pi).
    let mut targets: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for &r in &[1.5, 3.0, 4.5, 6.0] {
        for i in 0..4 {
            let th = std::f64::consts::FRAC_PI_4 + f64::from(i) * std::f64::consts::FRAC_PI_2;
            targets.push((r * th.cos(), r * th.sin()));
        }
    }
    let sweep = build_sweep(&pulse, &q, eps, &rule, &targets).expect("sweep");
    println!(
        "lens sweep: {} nodes, up to {} modes, {:.1} s of solves",
        sweep.nodes().len(),
        sweep.mode_counts().iter().copied().max().unwrap_or(0),
        sweep.solve_seconds()
    );

    let mut peak = 0.0f64;
    let mut residue = 0.0f64;
    for &t in &[19.0, 22.0, 25.0, 28.0, 31.0, 34.0] {
        let f = sweep.synthesize(t);
        residue = residue.max(f.imag_residue.abs());
        peak = peak.max(f.values.iter().fold(0.0f64, |a, &v| a.max(v.abs())));
    }
    assert!(peak > 1e-3, "transit peak {peak:.3e} implausibly small");

    // Conjugate-symmetric two-sided synthesis cancels imaginary parts term
    // by term, so the reported residue must be identically zero.
    println!("imaginary residue {residue:.3e} of peak {peak:.3e} (bound 1e-10 relative)");
    assert!(residue <= 1e-10 * peak);

    // Nothing may arrive before straight-line vacuum transit from the source
    // (the lens only slows propagation). The 2.5 margin keeps the pulse tail
    // below the tolerance.
    let dist = |&(x, y): &(f64, f64)| ((x - pulse.x0).powi(2) + (y - pulse.y0).powi(2)).sqrt();
    let mut pre = 0.0f64;
    let mut pre_samples = 0usize;
    for &t in &[12.0, 14.0, 16.0, 17.5] {
        let f = sweep.synthesize(t);
        for (i, p) in targets.iter().enumerate() {
            if t <= pulse.t0 + dist(p) - 2.5 {
                pre = pre.max(f.values[i].abs());
                pre_samples += 1;
            }
        }
    }
    println!("pre-arrival max {pre:.3e} over {pre_samples} samples (bound {:.3e})", 1e-6 * peak);
    assert!(pre <= 1e-6 * peak, "acausal energy {pre:.3e} above 1e-6 of peak {peak:.3e}");

    // Doubling both quadrature densities must not move the frames.
    let doubled_rule = SweepRule {
        outer_points: 2 * rule.outer_points,
        inner_points: 2 * rule.inner_points,
        levels: rule.levels,
    };
    let doubled = build_sweep(&pulse, &q, eps, &doubled_rule, &targets).expect("doubled sweep");
    let mut shift = 0.0f64;
    for &t in &[19.0, 26.0, 33.0] {
        let a = sweep.synthesize(t);
        let b = doubled.synthesize(t);
        for (va, vb) in a.values.iter().zip(&b.values) {
            shift = shift.max((va - vb).abs());
        }
    }
    println!("node-doubling shift {shift:.3e} (bound {:.3e})", 1e-8 * peak);
    assert!(shift <= 1e-8 * peak, "node doubling moved frames by {shift:.3e}");

    let late = sweep.synthesize(pulse.t0 + 40.0);
    let late_max = late.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    println!("late-frame max {late_max:.3e} (bound {:.3e})", 1e-4 * peak);
    assert!(late_max <= 1e-4 * peak, "pulse has not left the lens: {late_max:.3e}");

    // Free propagation: synthesis against the direct convolution of the
    // pulse with the 2D free-space propagator, five spacetime samples.
    let free_pts = [(4.0, 3.0), (-2.0, 1.0), (0.0, -5.0)];
    let fsweep = build_sweep(&pulse, &potential::zero(TWO_PI), eps, &rule, &free_pts)
        .expect("free sweep");
    let mut free_defect = 0.0f64;
    for &(i, t) in &[(0usize, 18.0), (0, 22.0), (1, 25.0), (2, 29.0), (2, 35.0)] {
        let f = fsweep.synthesize(t);
        let want = free_space_reference(&pulse, free_pts[i].0, free_pts[i].1, t);
        free_defect = free_defect.max((f.values[i] - want).abs());
    }
    println!("free-space defect {free_defect:.3e} over 5 spacetime points (bound 1e-6)");
    assert!(free_defect <= 1e-6, "free-space synthesis off by {free_defect:.3e}");
}

/// Cross-product identity J_m(x) Y_m'(x) - J_m'(x) Y_m(x) = 2/(pi x) over
/// random orders and arguments. Pairs whose J underflowed to zero or whose Y
/// left the representable range are redrawn: each product in the identity is
/// O(1/m) even when one factor is at the floating-point floor, so no f64
/// evaluation retains those terms.
#[test]
fn a09_bessel_wronskian_identity() {
    let _gate = gate();
    let mut rng = SplitMix64::new(0xa09);
    let mut kept = 0u32;
    let mut skipped = 0u32;
    let mut worst = 0.0f64;
    while kept < 10_000 {
        let m = rng.uniform(0.0, 201.0) as u32;
        let x = 10f64.powf(rng.uniform(-2.0, 2e3f64.log10()));
        let p = bessel::bessel_jy(m, x);
        if p.j == 0.0 || !p.y.is_finite() || !p.yp.is_finite() {
            skipped += 1;
            continue;
        }
        kept += 1;
        let want = 2.0 / (std::f64::consts::PI * x);
        worst = worst.max((p.j * p.yp - p.jp * p.y - want).abs() / want);
    }
    println!(
        "max relative defect {worst:.3e} over 10000 samples, m <= 200, x in [1e-2, 2e3] \
         ({skipped} unrepresentable pairs redrawn; bound 1e-12)"
    );
    assert!(skipped < kept, "redraw dominated the sample budget");
    assert!(worst <= 1e-12, "Wronskian defect {worst:.3e} above 1e-12");
}

/// Two runs of the same configuration produce byte-identical artifacts.
/// Wall-clock timings are quarantined in their own sidecar so everything
/// else can be diffed directly.
#[test]
fn a10_identical_runs_produce_identical_bytes() {
    let _gate = gate();
    let exe = env!("CARGO_BIN_EXE_radscat");
    let dir = tempfile::tempdir().expect("tempdir");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(exe)
            .args(["solve", "--preset", "gaussian-k100", "--grid", "32", "32", "12", "--out"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .expect("launch solver binary");
        assert!(status.success(), "solver run failed");
        out
    };
    let d1 = run("first");
    let d2 = run("second");
    for f in ["total.grid", "scattered.grid", "modes.csv", "meta.json"] {
        let b1 = std::fs::read(d1.join(f)).expect("read first");
        let b2 = std::fs::read(d2.join(f)).expect("read second");
        assert!(!b1.is_empty(), "{f} is empty");
        assert!(b1 == b2, "{f} differs between identical runs");
    }
    assert!(d1.join("timings.json").exists(), "timing sidecar missing");
    println!("total.grid, scattered.grid, modes.csv, meta.json byte-identical across reruns");
}
