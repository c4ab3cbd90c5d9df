//! Run configuration: a TOML document (or a named preset) describing one
//! solver run, plus builders that turn the validated description into live
//! potential / incident-field / sweep objects.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::incident::{self, IncidentField};
use crate::potential::{self, RadialPotential};
use crate::timedomain::{SourceSpectrum, SweepRule};
use crate::{C64, Error};

/// Which pipeline a run executes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Time-harmonic solve at a single wavenumber; writes field grids.
    Solve,
    /// Frequency sweep and time synthesis; writes one grid per frame time.
    Timedomain,
    /// Time-harmonic solve plus a Helmholtz-residual map of the total field.
    Residual,
    /// Invariant checks on the numerical core; no artifacts.
    Selftest,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Solve => "solve",
            Mode::Timedomain => "timedomain",
            Mode::Residual => "residual",
            Mode::Selftest => "selftest",
        };
        f.write_str(s)
    }
}

/// Scattering medium description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `q(r) = e^{-r²}` on `r ≤ 2π`.
    Gaussian,
    /// `q(r) = 1 - r²/(4π²)` on `r ≤ 2π`.
    Luneburg,
    /// Eaton lens on `r ≤ 2π` (singular at the origin).
    Eaton,
    /// Constant contrast on a disk.
    Disk { contrast: f64, radius: f64 },
    /// Seeded piecewise-constant medium with 20 random switch radii in
    /// `[0, 2π]`.
    Random { seed: u64 },
    /// No scatterer; the support radius still frames the mode extraction.
    Zero { radius: f64 },
    /// Cubic-spline interpolation of `r,q` samples from a two-column text
    /// file (comma or whitespace separated; `#` comments).
    Table {
        path: PathBuf,
        #[serde(default)]
        breakpoints: Vec<f64>,
    },
}

/// Incident field description for the time-harmonic modes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Unit plane wave from direction `angle` (radians).
    Plane {
        #[serde(default)]
        angle: f64,
    },
    /// The complex-source-point beam with fixed geometry (focused near
    /// `(-16, 0)`, propagating along +x).
    Beam,
    /// Monochromatic point source, real amplitude, strictly outside the
    /// support.
    Point {
        x0: f64,
        y0: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Cartesian evaluation grid, centered at the origin: `nx × ny` points on
/// `[-extent, extent]²`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub extent: f64,
}

/// Residual-map controls. `h = 0` means the default step `2π/(150 k)`
/// (ten per-wavelength refinements below the usual plotting resolution).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualSpec {
    pub h: f64,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        ResidualSpec { h: 0.0 }
    }
}

/// Pulse and sweep controls for the time-dependent pipeline. Defaults
/// reproduce the shipped pulse `√8 δ(x-10) δ(y-10) e^{-4(t-10)²}` and its
/// frame times.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeDomainSpec {
    pub times: Vec<f64>,
    pub x0: f64,
    pub y0: f64,
    pub amplitude: f64,
    pub t0: f64,
    pub rate: f64,
    pub band_limit: f64,
    pub outer_points: usize,
    pub inner_points: usize,
    pub levels: u32,
}

impl Default for TimeDomainSpec {
    fn default() -> Self {
        let p = SourceSpectrum::gaussian_pulse();
        let r = SweepRule::default();
        TimeDomainSpec {
            times: vec![13.6, 19.0, 28.0, 34.0, 37.0],
            x0: p.x0,
            y0: p.y0,
            amplitude: p.amplitude,
            t0: p.t0,
            rate: p.rate,
            band_limit: p.band_limit,
            outer_points: r.outer_points,
            inner_points: r.inner_points,
            levels: r.levels,
        }
    }
}

/// One complete run description; the TOML schema is this struct verbatim.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Wavenumber for `solve` / `residual`; ignored by `timedomain`.
    #[serde(default)]
    pub k: f64,
    /// Worker threads; 0 keeps the library default (all cores).
    #[serde(default)]
    pub threads: usize,
    pub potential: PotentialSpec,
    pub source: SourceSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub residual: ResidualSpec,
    #[serde(default)]
    pub timedomain: TimeDomainSpec,
}

fn default_eps() -> f64 {
    1e-13
}

/// Names accepted by `--preset`, in display order.
pub const PRESET_NAMES: [&str; 5] =
    ["gaussian-k100", "random-k30", "eaton-k30", "disk-k10", "luneburg-td"];

/// Built-in experiment configurations.
pub fn preset(name: &str) -> Result<RunConfig, Error> {
    let base = |potential, source, k, grid| RunConfig {
        mode: Mode::Solve,
        eps: 1e-13,
        k,
        threads: 0,
        potential,
        source,
        grid,
        residual: ResidualSpec::default(),
        timedomain: TimeDomainSpec::default(),
    };
    let square = |nx, extent| GridSpec { nx, ny: nx, extent };
    match name {
        "gaussian-k100" => Ok(base(
            PotentialSpec::Gaussian,
            SourceSpec::Plane { angle: 0.0 },
            100.0,
            square(200, 12.0),
        )),
        "random-k30" => Ok(base(
            PotentialSpec::Random { seed: 7 },
            SourceSpec::Plane { angle: 0.0 },
            30.0,
            square(200, 12.0),
        )),
        "eaton-k30" => Ok(base(PotentialSpec::Eaton, SourceSpec::Beam, 30.0, square(200, 12.0))),
        "disk-k10" => Ok(base(
            PotentialSpec::Disk { contrast: 0.5, radius: 1.0 },
            SourceSpec::Plane { angle: 0.0 },
            10.0,
            square(200, 3.0),
        )),
        "luneburg-td" => {
            let mut c = base(
                PotentialSpec::Luneburg,
                SourceSpec::Plane { angle: 0.0 },
                0.0,
                square(100, 12.0),
            );
            c.mode = Mode::Timedomain;
            c.eps = 1e-12;
            Ok(c)
        }
        other => Err(Error::InvalidConfig(format!(
            "unknown preset `{other}`; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

impl RunConfig {
    /// Parse a TOML document; syntax errors carry line/column positions.
    pub fn from_toml(text: &str) -> Result<RunConfig, Error> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, Error> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Range and existence checks; every failure names the offending field.
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eps > 1e-15 && self.eps < 1e-1) {
            return fail(format!("eps = {:e} outside (1e-15, 1e-1)", self.eps));
        }
        if matches!(self.mode, Mode::Solve | Mode::Residual) && !(self.k > 0.0) {
            return fail(format!("k = {} must be positive for mode {}", self.k, self.mode));
        }
        if self.grid.nx < 2 || self.grid.ny < 2 {
            return fail(format!("grid {}x{} needs at least 2 points per axis", self.grid.nx, self.grid.ny));
        }
        if !(self.grid.extent > 0.0) {
            return fail(format!("grid.extent = {} must be positive", self.grid.extent));
        }
        match &self.potential {
            PotentialSpec::Disk { contrast, radius } => {
                if !(1.0 + contrast > 0.0) {
                    return fail(format!("potential.contrast = {contrast} needs 1 + contrast > 0"));
                }
                if !(*radius > 0.0) {
                    return fail(format!("potential.radius = {radius} must be positive"));
                }
            }
            PotentialSpec::Zero { radius } => {
                if !(*radius > 0.0) {
                    return fail(format!("potential.radius = {radius} must be positive"));
                }
            }
            PotentialSpec::Table { path, breakpoints } => {
                if !path.is_file() {
                    return fail(format!("potential.path `{}` does not exist", path.display()));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return fail("potential.breakpoints must be strictly increasing".into());
                }
            }
            _ => {}
        }
        if self.mode == Mode::Timedomain {
            let td = &self.timedomain;
            if td.times.is_empty() || td.times.iter().any(|t| !t.is_finite()) {
                return fail("timedomain.times must be a nonempty list of finite times".into());
            }
            if !(td.band_limit > 2.0) {
                return fail(format!("timedomain.band_limit = {} must exceed 2", td.band_limit));
            }
            if !(td.rate > 0.0) {
                return fail(format!("timedomain.rate = {} must be positive", td.rate));
            }
            if td.outer_points == 0 || td.inner_points == 0 || td.levels == 0 {
                return fail("timedomain sweep needs positive outer_points, inner_points, levels".into());
            }
        }
        Ok(())
    }

    pub fn build_potential(&self) -> Result<RadialPotential, Error> {
        match &self.potential {
            PotentialSpec::Gaussian => Ok(potential::gaussian_bump()),
            PotentialSpec::Luneburg => Ok(potential::luneburg_lens()),
            PotentialSpec::Eaton => Ok(potential::eaton_lens()),
            PotentialSpec::Disk { contrast, radius } => {
                Ok(potential::constant_disk(*contrast, *radius))
            }
            PotentialSpec::Random { seed } => Ok(potential::random_discontinuous(*seed)),
            PotentialSpec::Zero { radius } => Ok(potential::zero(*radius)),
            PotentialSpec::Table { path, breakpoints } => {
                let (radii, values) = read_table(path)?;
                potential::from_table(&radii, &values, breakpoints.clone(), "table")
            }
        }
    }

    /// Incident field at wavenumber `k` (the run's `k` for time-harmonic
    /// modes; sweep nodes pass their own).
    pub fn build_incident(&self, k: f64, support: f64) -> Result<IncidentField, Error> {
        match &self.source {
            SourceSpec::Plane { angle } => Ok(incident::plane_wave(k, *angle)),
            SourceSpec::Beam => Ok(incident::gaussian_beam(k)),
            SourceSpec::Point { x0, y0, amplitude } => {
                incident::point_source(k, *x0, *y0, C64::new(*amplitude, 0.0), support)
            }
        }
    }

    pub fn pulse(&self) -> SourceSpectrum {
        let td = &self.timedomain;
        SourceSpectrum {
            x0: td.x0,
            y0: td.y0,
            amplitude: td.amplitude,
            t0: td.t0,
            rate: td.rate,
            band_limit: td.band_limit,
        }
    }

    pub fn sweep_rule(&self) -> SweepRule {
        let td = &self.timedomain;
        SweepRule {
            outer_points: td.outer_points,
            inner_points: td.inner_points,
            levels: td.levels,
        }
    }

    /// Finite-difference step for residual maps; `2π/(150 k)` unless pinned.
    pub fn residual_step(&self) -> f64 {
        if self.residual.h > 0.0 {
            self.residual.h
        } else {
            2.0 * std::f64::consts::PI / (150.0 * self.k)
        }
    }
}

/// Two-column numeric table: `r q` per line, comma or whitespace separated,
/// blank lines and `#` comments skipped.
fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let text = std::fs::read_to_string(path)?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut cols = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let bad = |what: &str| {
            Error::InvalidConfig(format!(
                "{}:{}: expected `r q`, {what}",
                path.display(),
                lineno + 1
            ))
        };
        let r: f64 = cols
            .next()
            .ok_or_else(|| bad("found empty line"))?
            .parse()
            .map_err(|_| bad("first column is not a number"))?;
        let q: f64 = cols
            .next()
            .ok_or_else(|| bad("missing second column"))?
            .parse()
            .map_err(|_| bad("second column is not a number"))?;
        if cols.next().is_some() {
            return Err(bad("more than two columns"));
        }
        radii.push(r);
        values.push(q);
    }
    Ok((radii, values))
}
