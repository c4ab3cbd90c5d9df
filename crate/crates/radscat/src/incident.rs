//! Incident fields and their decomposition into angular modes.
//!
//! Every driver is a solution of the free Helmholtz equation in a
//! neighborhood of the potential's support, so on any circle of radius
//! `R ≥ b` its angular Fourier coefficients are `ũ_m(R) = c_m J_{|m|}(kR)`
//! under the unnormalized transform `ũ_m = ∫₀^{2π} e^{-imθ} u dθ`. The
//! solver consumes the `c_m`; [`ring_modes`] recovers them by FFT on
//! sampling rings, picking the truncation order from the spectral tail.

use std::sync::Arc;

use rustfft::FftPlanner;

use crate::bessel;
use crate::{C64, Error};

/// Power of the imaginary unit, `i^n` for `n ≥ 0`.
fn i_pow(n: u32) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[derive(Clone)]
enum Kind {
    /// Unit plane wave from direction angle θ₀.
    PlaneWave { theta0: f64 },
    /// Complex-source-point beam
    /// `H_0⁽¹⁾(k √((x+16-8i)² + y²)) e^{-7.859 k}`, focused near (-16, 0)
    /// and propagating along the x axis.
    GaussianBeam,
    /// Free-space response to a monochromatic point source:
    /// `u = -(i/4) A H_0⁽¹⁾(k·dist)`, so that `(Δ + k²) u = A δ`.
    PointSource { x0: f64, y0: f64, amplitude: C64 },
    /// Arbitrary user-supplied field (must satisfy the free equation for
    /// `r ≥ b` if fed to the mode extractor).
    Custom { label: &'static str, f: Arc<dyn Fn(f64, f64) -> C64 + Send + Sync> },
}

/// A monochromatic incident field at a fixed wavenumber.
#[derive(Clone)]
pub struct IncidentField {
    pub k: f64,
    kind: Kind,
}

impl IncidentField {
    pub fn eval(&self, x: f64, y: f64) -> C64 {
        match &self.kind {
            Kind::PlaneWave { theta0 } => {
                let phase = self.k * (x * theta0.cos() + y * theta0.sin());
                C64::new(phase.cos(), phase.sin())
            }
            Kind::GaussianBeam => {
                let s = C64::new(x + 16.0, -8.0);
                let arg = s * s + C64::new(y * y, 0.0);
                if arg.im == 0.0 && arg.re <= 0.0 {
                    // On the branch cut of the square root (the focal
                    // segment x = -16, |y| ≤ 8) the beam is ambiguous;
                    // reported as NaN rather than silently picking a side.
                    return C64::new(f64::NAN, f64::NAN);
                }
                // Principal branch: Re w > 0 off the cut, giving decay away
                // from the beam axis.
                let w = arg.sqrt();
                bessel::hankel1_0_complex(self.k * w) * (-7.859 * self.k).exp()
            }
            Kind::PointSource { x0, y0, amplitude } => {
                let d = (x - x0).hypot(y - y0);
                C64::new(0.0, -0.25) * amplitude * bessel::hankel1(0, self.k * d)
            }
            Kind::Custom { f, .. } => f(x, y),
        }
    }

    /// Closed-form mode coefficients, available for the plane wave only:
    /// `c_m = 2π i^{|m|} e^{-i m θ₀}` (index `m + m_max`).
    pub fn analytic_modes(&self, m_max: usize) -> Option<Vec<C64>> {
        let Kind::PlaneWave { theta0 } = self.kind else {
            return None;
        };
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut out = Vec::with_capacity(2 * m_max + 1);
        for m in -(m_max as i64)..=(m_max as i64) {
            let phase = -(m as f64) * theta0;
            out.push(two_pi * i_pow(m.unsigned_abs() as u32) * C64::new(phase.cos(), phase.sin()));
        }
        Some(out)
    }

    pub fn label(&self) -> &'static str {
        match &self.kind {
            Kind::PlaneWave { .. } => "plane-wave",
            Kind::GaussianBeam => "gaussian-beam",
            Kind::PointSource { .. } => "point-source",
            Kind::Custom { label, .. } => label,
        }
    }
}

/// Unit plane wave `exp(ik(x cos θ₀ + y sin θ₀))`.
pub fn plane_wave(k: f64, theta0: f64) -> IncidentField {
    assert!(k > 0.0);
    IncidentField { k, kind: Kind::PlaneWave { theta0 } }
}

/// The complex-source beam with the fixed geometry above.
pub fn gaussian_beam(k: f64) -> IncidentField {
    assert!(k > 0.0);
    IncidentField { k, kind: Kind::GaussianBeam }
}

/// Point source at `(x0, y0)` with complex amplitude (spectrum value);
/// must lie strictly outside the support of the potential.
pub fn point_source(
    k: f64,
    x0: f64,
    y0: f64,
    amplitude: C64,
    support: f64,
) -> Result<IncidentField, Error> {
    assert!(k > 0.0);
    let dist = x0.hypot(y0);
    if dist <= support {
        return Err(Error::SourceInsideSupport { dist, support });
    }
    Ok(IncidentField { k, kind: Kind::PointSource { x0, y0, amplitude } })
}

/// Field from an arbitrary closure, for tests and embedding.
pub fn from_closure(
    k: f64,
    label: &'static str,
    f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static,
) -> IncidentField {
    IncidentField { k, kind: Kind::Custom { label, f: Arc::new(f) } }
}

/// Angular mode data extracted on sampling rings.
pub struct RingModes {
    /// Truncation order: every ring Fourier coefficient with `|m| ≥ m_max`
    /// is below the tail threshold.
    pub m_max: usize,
    /// Ring sample count that resolved the field.
    pub n_samples: usize,
    coeffs: Vec<C64>,
}

impl RingModes {
    /// Coefficient of the mode `c_m J_{|m|}(kr) e^{imθ}` (zero outside the
    /// retained band).
    pub fn coeff(&self, m: i64) -> C64 {
        let idx = m + self.m_max as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }
}

/// Unnormalized ring Fourier coefficients `ũ_m = (2π/n) Σ_j u(θ_j) e^{-imθ_j}`
/// at radius `radius` (bin `j` holds mode `j` for `j ≤ n/2` and `j - n`
/// above), together with the rms sample magnitude on the ring.
fn ring_fft(u: &IncidentField, radius: f64, n: usize) -> (Vec<C64>, f64) {
    let mut buf: Vec<C64> = (0..n)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            u.eval(radius * theta.cos(), radius * theta.sin())
        })
        .collect();
    let sample_rms = (buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 2.0 * std::f64::consts::PI / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    (buf, sample_rms)
}

/// Multiplier on the ring-sampling rounding floor `ε_mach · kR · rms|u|`.
/// Evaluating a field whose phase winds `kR` times around the ring cannot be
/// more accurate than that, so spectrum bins below the floor are sampling
/// noise, not recoverable signal.
const RING_NOISE_GUARD: f64 = 2.0;

/// Smallest `M` such that every bin with `|m| ≥ M` is below `tol`;
/// `None` when the spectrum is still above `tol` at the Nyquist mode.
fn band_cutoff(tilde: &[C64], tol: f64) -> Option<usize> {
    let n = tilde.len();
    let mut worst: Option<usize> = None;
    for (j, v) in tilde.iter().enumerate() {
        if v.norm() >= tol {
            let m_abs = j.min(n - j);
            worst = Some(worst.map_or(m_abs, |w| w.max(m_abs)));
        }
    }
    match worst {
        None => Some(0),
        Some(w) if w + 1 <= n / 2 => Some(w + 1),
        Some(_) => None,
    }
}

/// Extract the truncation order and mode coefficients of `u` from rings of
/// radius `radius` (the support radius), `1.05·radius` and `1.15·radius`.
///
/// The sample count starts at `n0` and doubles (at most 4 times) until the
/// spectral tail on the base ring drops below the larger of `eps/10` of the
/// peak bin and the ring-sampling rounding floor (see `RING_NOISE_GUARD`).
/// Each coefficient is recovered by least squares over the three rings,
/// `c_m = Σ_i ũ_m(R_i) J_{|m|}(kR_i) / Σ_i J_{|m|}(kR_i)²`, which stays
/// stable when `J_{|m|}` has a zero near one of the radii.
pub fn ring_modes(
    u: &IncidentField,
    radius: f64,
    eps: f64,
    n0: usize,
) -> Result<RingModes, Error> {
    assert!(radius > 0.0 && eps > 0.0 && n0 >= 4);
    let mut n = n0;
    for doubling in 0..=4 {
        let (base, sample_rms) = ring_fft(u, radius, n);
        let bin_max = base.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = RING_NOISE_GUARD * f64::EPSILON * u.k * radius * sample_rms;
        let tol = (eps / 10.0 * bin_max).max(floor);
        if bin_max == 0.0 {
            return Ok(RingModes { m_max: 0, n_samples: n, coeffs: vec![C64::new(0.0, 0.0)] });
        }
        if let Some(m_max) = band_cutoff(&base, tol) {
            return Ok(recover_band(u, radius, n, m_max, Some(base)));
        }
        if doubling < 4 {
            n *= 2;
        }
    }
    Err(Error::RingNotResolved { max_samples: n })
}

/// Same ring recovery with the truncation order fixed by the caller instead
/// of detected from the spectral tail; coefficients past the natural band
/// come out at noise level.
pub fn ring_modes_with_order(
    u: &IncidentField,
    radius: f64,
    m_max: usize,
    n0: usize,
) -> RingModes {
    assert!(radius > 0.0 && n0 >= 4);
    let mut n = n0;
    while n < 2 * m_max + 2 {
        n *= 2;
    }
    recover_band(u, radius, n, m_max, None)
}

/// Least-squares coefficient recovery over the three probe rings for the band
/// `|m| ≤ m_max`, reusing a precomputed base-ring spectrum when available.
fn recover_band(
    u: &IncidentField,
    radius: f64,
    n: usize,
    m_max: usize,
    base: Option<Vec<C64>>,
) -> RingModes {
    let probes = [radius, 1.05 * radius, 1.15 * radius];
    let base = base.unwrap_or_else(|| ring_fft(u, radius, n).0);
    let spectra = [base, ring_fft(u, probes[1], n).0, ring_fft(u, probes[2], n).0];
    let mut coeffs = Vec::with_capacity(2 * m_max + 1);
    for m in -(m_max as i64)..=(m_max as i64) {
        let bin = m.rem_euclid(n as i64) as usize;
        let order = m.unsigned_abs() as u32;
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for (spec, &r) in spectra.iter().zip(&probes) {
            let j = bessel::bessel_j(order, u.k * r);
            num += spec[bin] * j;
            den += j * j;
        }
        coeffs.push(if den > 0.0 { num / den } else { C64::new(0.0, 0.0) });
    }
    RingModes { m_max, n_samples: n, coeffs }
}
