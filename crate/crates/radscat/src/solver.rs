//! Full two-dimensional solve: ring transform of the incident field, one
//! radial solve per retained mode, and assembly of scattered and total fields
//! on arbitrary points and Cartesian grids.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::bessel;
use crate::incident::{self, IncidentField, RingModes};
use crate::potential::RadialPotential;
use crate::radial::{solve_mode_unit, UnitModeSolution};
use crate::{C64, Error};

/// Default number of ring samples before any doubling.
pub const RING_SAMPLES: usize = 4000;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Immutable result of a full scattering solve. Evaluation methods take
/// `&self` and are safe to call from many threads.
pub struct SolverState {
    k: f64,
    eps: f64,
    q: RadialPotential,
    incident: IncidentField,
    ring: RingModes,
    modes: Vec<UnitModeSolution>,
    build_seconds: f64,
}

/// Solve the scattering problem for `src` hitting `q`: extract the incident
/// mode band on rings at the support radius, then solve each radial mode
/// problem for a unit coefficient. Mode builds run in parallel; the stored
/// order (and therefore every later evaluation) does not depend on the thread
/// count.
pub fn solve_scattering(
    q: &RadialPotential,
    src: &IncidentField,
    eps: f64,
) -> Result<SolverState, Error> {
    let t0 = Instant::now();
    let ring = incident::ring_modes(src, q.support_radius(), eps, RING_SAMPLES)?;
    finish_build(q, src, eps, ring, t0)
}

/// Same solve with the truncation order forced instead of detected; used to
/// confirm that enlarging the band only moves the field at tail level.
pub fn solve_scattering_with_order(
    q: &RadialPotential,
    src: &IncidentField,
    eps: f64,
    m_max: usize,
) -> Result<SolverState, Error> {
    let t0 = Instant::now();
    let ring = incident::ring_modes_with_order(src, q.support_radius(), m_max, RING_SAMPLES);
    finish_build(q, src, eps, ring, t0)
}

fn finish_build(
    q: &RadialPotential,
    src: &IncidentField,
    eps: f64,
    ring: RingModes,
    t0: Instant,
) -> Result<SolverState, Error> {
    let k = src.k;
    let modes: Result<Vec<_>, Error> = (0..=ring.m_max as u32)
        .into_par_iter()
        .map(|m| solve_mode_unit(m, k, q, eps))
        .collect();
    Ok(SolverState {
        k,
        eps,
        q: q.clone(),
        incident: src.clone(),
        ring,
        modes: modes?,
        build_seconds: t0.elapsed().as_secs_f64(),
    })
}

impl SolverState {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Truncation order M; the field sums modes `-M ≤ m ≤ M`.
    pub fn mode_count(&self) -> usize {
        self.ring.m_max
    }

    pub fn ring(&self) -> &RingModes {
        &self.ring
    }

    pub fn potential(&self) -> &RadialPotential {
        &self.q
    }

    pub fn incident(&self) -> &IncidentField {
        &self.incident
    }

    /// Radial solve for `|m|` with a unit incident coefficient.
    pub fn unit_mode(&self, m_abs: usize) -> &UnitModeSolution {
        &self.modes[m_abs]
    }

    pub fn build_seconds(&self) -> f64 {
        self.build_seconds
    }

    /// Chebyshev panels per retained order, the radial cost profile of the
    /// solve.
    pub fn panel_counts(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.panel_count()).collect()
    }

    /// Scattered field at one point, `(1/2π) Σ_m c_m u_{|m|}(r) e^{imθ}`.
    ///
    /// Outside the support every mode is `μ_m H_m(kr)`, so one pair of
    /// J/Y recurrences serves the whole sum; inside, panel expansions are
    /// evaluated directly and the inactive core of each mode falls back to
    /// `β_m J_m(kr)`. The mode sum runs in a fixed order.
    pub fn eval_scattered_point(&self, x: f64, y: f64) -> C64 {
        let m_max = self.ring.m_max;
        let r = x.hypot(y);
        let kr = self.k * r;
        let b = self.q.support_radius();
        let mut vals = vec![C64::new(0.0, 0.0); m_max + 1];
        if r >= b {
            let j = bessel::bessel_j_seq(m_max as u32, kr);
            let yv = bessel::bessel_y_seq(m_max as u32, kr);
            for (m, v) in vals.iter_mut().enumerate() {
                let mu = self.modes[m].mu_unit;
                if mu != C64::new(0.0, 0.0) {
                    *v = mu * C64::new(j[m], yv[m]);
                }
            }
        } else {
            let j = bessel::bessel_j_seq(m_max as u32, kr);
            for (m, v) in vals.iter_mut().enumerate() {
                let mode = &self.modes[m];
                if mode.edges.is_empty() {
                    continue;
                }
                *v = if r <= mode.r_start {
                    mode.beta_unit * j[m]
                } else {
                    mode.eval_u(r)
                };
            }
        }
        let theta = y.atan2(x);
        let rot = C64::from_polar(1.0, theta);
        let mut phase = C64::new(1.0, 0.0);
        let mut acc = self.ring.coeff(0) * vals[0];
        for (m, &v) in vals.iter().enumerate().skip(1) {
            phase *= rot;
            let c_pos = self.ring.coeff(m as i64);
            let c_neg = self.ring.coeff(-(m as i64));
            acc += v * (c_pos * phase + c_neg * phase.conj());
        }
        acc / TWO_PI
    }

    pub fn eval_total_point(&self, x: f64, y: f64) -> C64 {
        self.eval_scattered_point(x, y) + self.incident.eval(x, y)
    }

    /// Scattered field on a batch of points, parallel with output order
    /// matching input order.
    pub fn eval_scattered(&self, points: &[(f64, f64)]) -> Vec<C64> {
        points.par_iter().map(|&(x, y)| self.eval_scattered_point(x, y)).collect()
    }

    pub fn eval_total(&self, points: &[(f64, f64)]) -> Vec<C64> {
        points.par_iter().map(|&(x, y)| self.eval_total_point(x, y)).collect()
    }

    /// Net outgoing energy flux `Im ∮ ū_s ∂_r u_s R dθ` through the circle of
    /// radius `radius ≥ b`, from the exterior modal form (the angular
    /// integral collapses by orthogonality). For a real potential at real
    /// wavenumber this is independent of the radius.
    pub fn outgoing_flux(&self, radius: f64) -> f64 {
        let b = self.q.support_radius();
        assert!(radius >= b, "flux circle must enclose the support");
        let m_max = self.ring.m_max;
        let x = self.k * radius;
        let j = bessel::bessel_j_seq(m_max as u32 + 1, x);
        let yv = bessel::bessel_y_seq(m_max as u32 + 1, x);
        let h = |m: usize| C64::new(j[m], yv[m]);
        let mut total = 0.0;
        for m in 0..=m_max as i64 {
            let hm = h(m as usize);
            // H'_m = H_{m-1} - (m/x) H_m, with H_{-1} = -H_1.
            let hprev = if m == 0 { -h(1) } else { h(m as usize - 1) };
            let dh = hprev - (m as f64 / x) * hm;
            let mut weight = (self.ring.coeff(m) * self.modes[m as usize].mu_unit).norm_sqr();
            if m > 0 {
                weight += (self.ring.coeff(-m) * self.modes[m as usize].mu_unit).norm_sqr();
            }
            total += weight * (hm.conj() * dh).im;
        }
        total * self.k * radius / TWO_PI
    }

    /// Root-mean-square residual of the radial integral equation for order
    /// `m_abs`, sampled at `n` radii spread over the active band. Dense
    /// independent quadrature per sample, so this is a diagnostic, not a
    /// cheap call.
    pub fn mode_residual(&self, m_abs: usize, n: usize) -> f64 {
        let mode = &self.modes[m_abs];
        if mode.edges.is_empty() || n == 0 {
            return 0.0;
        }
        let lo = mode.r_start;
        let hi = mode.b;
        let mut acc = 0.0;
        for i in 0..n {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            acc += mode.integral_residual(&self.q, r).powi(2);
        }
        (acc / n as f64).sqrt()
    }
}

/// Cartesian evaluation lattice, endpoints included in both directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Grid {
        assert!(nx >= 2 && ny >= 2, "grid needs at least 2 points per axis");
        assert!(xmax > xmin && ymax > ymin, "grid extent must be positive");
        Grid { nx, ny, xmin, xmax, ymin, ymax }
    }

    /// Square grid on `[-extent, extent]²`.
    pub fn centered(nx: usize, ny: usize, extent: f64) -> Grid {
        Grid::new(nx, ny, -extent, extent, -extent, extent)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        let x = self.xmin + (self.xmax - self.xmin) * ix as f64 / (self.nx - 1) as f64;
        let y = self.ymin + (self.ymax - self.ymin) * iy as f64 / (self.ny - 1) as f64;
        (x, y)
    }

    /// All lattice points, y-major: the x index varies fastest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(self.point(ix, iy));
            }
        }
        out
    }
}

/// Complex field sampled on a grid.
pub struct WaveField {
    pub grid: Grid,
    pub k: f64,
    pub values: Vec<C64>,
}

/// Which field a grid evaluation assembles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Scattered,
    Total,
    Incident,
}

impl SolverState {
    pub fn eval_grid(&self, grid: &Grid, kind: FieldKind) -> WaveField {
        let pts = grid.points();
        let values: Vec<C64> = match kind {
            FieldKind::Scattered => self.eval_scattered(&pts),
            FieldKind::Total => self.eval_total(&pts),
            FieldKind::Incident => {
                pts.par_iter().map(|&(x, y)| self.incident.eval(x, y)).collect()
            }
        };
        WaveField { grid: *grid, k: self.k, values }
    }
}

/// Pointwise PDE defect of the assembled total field,
/// `E = |(1/k²) Δ_h u + (1 + q) u|` with a 5-point Laplacian of step `h`.
///
/// `fd_floor` holds the stencil's own truncation scale `(kh)²/2 · |u|` (the
/// constant covers curvature up to `|1+q| ≈ 2`); entries within `2h` of a
/// breakpoint radius of the potential are flagged `excluded` because the
/// defect is not defined pointwise at a jump.
pub struct ResidualMap {
    pub grid: Grid,
    pub k: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub fd_floor: Vec<f64>,
    pub excluded: Vec<bool>,
}

impl ResidualMap {
    /// Largest defect over points that are not excluded.
    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.excluded)
            .filter(|&(_, &ex)| !ex)
            .map(|(&v, _)| v)
            .fold(0.0, f64::max)
    }
}

pub fn residual_map(state: &SolverState, grid: &Grid, h: f64) -> ResidualMap {
    assert!(h > 0.0);
    let k = state.k;
    let breaks: Vec<f64> = {
        let mut v = state.q.breakpoints().to_vec();
        v.push(state.q.support_radius());
        v
    };
    let pts = grid.points();
    let rows: Vec<(f64, f64, bool)> = pts
        .par_iter()
        .map(|&(x, y)| {
            let r = x.hypot(y);
            if breaks.iter().any(|&rb| (r - rb).abs() < 2.0 * h) {
                return (0.0, 0.0, true);
            }
            let u0 = state.eval_total_point(x, y);
            let lap = (state.eval_total_point(x + h, y)
                + state.eval_total_point(x - h, y)
                + state.eval_total_point(x, y + h)
                + state.eval_total_point(x, y - h)
                - 4.0 * u0)
                / (h * h);
            let e = (lap / (k * k) + (1.0 + state.q.eval(r)) * u0).norm();
            let floor = 0.5 * (k * h) * (k * h) * u0.norm();
            (e, floor, false)
        })
        .collect();
    let mut values = Vec::with_capacity(rows.len());
    let mut fd_floor = Vec::with_capacity(rows.len());
    let mut excluded = Vec::with_capacity(rows.len());
    for (e, f, ex) in rows {
        values.push(e);
        fd_floor.push(f);
        excluded.push(ex);
    }
    ResidualMap { grid: *grid, k, h, values, fd_floor, excluded }
}

fn grid_header(w: &mut impl std::io::Write, grid: &Grid, tag: f64) -> std::io::Result<()> {
    writeln!(
        w,
        "# {} {} {:e} {:e} {:e} {:e} {:e}",
        grid.nx, grid.ny, grid.xmin, grid.xmax, grid.ymin, grid.ymax, tag
    )
}

/// Scalar companion to [`WaveField::write_text`]: same header, rows
/// `x y value`. The trailing header slot carries `tag` (the wavenumber for
/// harmonic maps, the frame time for synthesized snapshots).
pub fn write_scalar_grid(path: &Path, grid: &Grid, tag: f64, values: &[f64]) -> Result<(), Error> {
    assert_eq!(values.len(), grid.len());
    let mut w = BufWriter::new(File::create(path)?);
    grid_header(&mut w, grid, tag)?;
    for ((x, y), v) in grid.points().into_iter().zip(values) {
        writeln!(w, "{:e} {:e} {:e}", x, y, v)?;
    }
    Ok(())
}

impl WaveField {
    /// Text format: header `# nx ny xmin xmax ymin ymax k`, then one
    /// `x y re im` row per lattice point in `Grid::points` order. Numbers are
    /// shortest round-trip scientific notation, so identical runs produce
    /// identical bytes.
    pub fn write_text(&self, path: &Path) -> Result<(), Error> {
        let mut w = BufWriter::new(File::create(path)?);
        grid_header(&mut w, &self.grid, self.k)?;
        for ((x, y), v) in self.grid.points().into_iter().zip(&self.values) {
            writeln!(w, "{:e} {:e} {:e} {:e}", x, y, v.re, v.im)?;
        }
        Ok(())
    }
}

impl ResidualMap {
    /// Same layout as `WaveField::write_text` with rows `x y value`.
    pub fn write_text(&self, path: &Path) -> Result<(), Error> {
        write_scalar_grid(path, &self.grid, self.k, &self.values)
    }

    /// Stencil floor companion, rows `x y floor`.
    pub fn write_floor_text(&self, path: &Path) -> Result<(), Error> {
        write_scalar_grid(path, &self.grid, self.k, &self.fd_floor)
    }
}
