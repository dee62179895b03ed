//! Discrete frequency/time grids, Gaussian photon-wavepackets, Fourier
//! duality and inner products.
//!
//! Conventions: a wavepacket is a complex spectral amplitude sampled on a
//! uniform grid and normalized so that `sum |xi(w_i)|^2 * d_omega = 1`.
//! The time-domain amplitude is the symmetric-kernel transform
//! `xi(t) = (2*pi)^(-1/2) * Integral xi(w) e^{-i w t} dw`, realized as a
//! Riemann sum over the grid (an FFT up to phase factors).

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{QcdmaError, Result};

/// Uniform angular-frequency grid centered on a carrier.
///
/// Samples run inclusively from `omega0 - span_sigmas*delta` to
/// `omega0 + span_sigmas*delta` with spacing
/// `d_omega = 2*span_sigmas*delta/(n_samples-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega0: f64,
    pub delta: f64,
    pub span_sigmas: f64,
    pub n_samples: usize,
}

impl FrequencyGrid {
    pub fn new(omega0: f64, delta: f64, span_sigmas: f64, n_samples: usize) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(QcdmaError::InvalidGrid(format!("delta must be positive, got {delta}")));
        }
        if !(span_sigmas > 0.0 && span_sigmas.is_finite()) {
            return Err(QcdmaError::InvalidGrid(format!(
                "span_sigmas must be positive, got {span_sigmas}"
            )));
        }
        if !omega0.is_finite() {
            return Err(QcdmaError::InvalidGrid(format!("omega0 must be finite, got {omega0}")));
        }
        if n_samples < 2 || !n_samples.is_power_of_two() {
            return Err(QcdmaError::NotPowerOfTwo("n_samples", n_samples));
        }
        Ok(Self { omega0, delta, span_sigmas, n_samples })
    }

    /// Default grid: 10-sigma window, 8192 samples. Gaussian tail mass
    /// beyond the window is below 1e-21 and there are >= 128 samples per
    /// chip up to Nc = 63.
    pub fn default_grid() -> Self {
        Self { omega0: 100.0, delta: 1.0, span_sigmas: 10.0, n_samples: 8192 }
    }

    pub fn d_omega(&self) -> f64 {
        2.0 * self.span_sigmas * self.delta / (self.n_samples as f64 - 1.0)
    }

    pub fn omega_start(&self) -> f64 {
        self.omega0 - self.span_sigmas * self.delta
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.omega_start() + i as f64 * self.d_omega()
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(|i| self.omega(i))
    }

    /// Conjugate time-grid spacing; the full time window spans
    /// `2*pi/d_omega`.
    pub fn d_t(&self) -> f64 {
        2.0 * PI / (self.n_samples as f64 * self.d_omega())
    }

    /// Time sample `m`, centered so that `t = 0` is the sample at `m = n/2`.
    pub fn time(&self, m: usize) -> f64 {
        (m as f64 - self.n_samples as f64 / 2.0) * self.d_t()
    }

    pub fn index_nearest_time(&self, t: f64) -> usize {
        let m = (t / self.d_t() + self.n_samples as f64 / 2.0).round();
        (m.max(0.0) as usize).min(self.n_samples - 1)
    }

    pub fn index_nearest_omega(&self, omega: f64) -> usize {
        let i = ((omega - self.omega_start()) / self.d_omega()).round();
        (i.max(0.0) as usize).min(self.n_samples - 1)
    }
}

/// Complex spectral amplitude on a [`FrequencyGrid`], unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWavepacket {
    grid: FrequencyGrid,
    amplitudes: Vec<Complex64>,
}

impl SpectralWavepacket {
    /// Wraps raw samples, renormalizing to unit discrete L2 norm.
    pub fn from_samples(grid: FrequencyGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_samples {
            return Err(QcdmaError::LengthMismatch { left: amplitudes.len(), right: grid.n_samples });
        }
        let mut wp = Self { grid, amplitudes };
        let norm = wp.norm();
        if norm < 1e-12 {
            return Err(QcdmaError::DegenerateSuperposition(norm));
        }
        let inv = 1.0 / norm;
        for a in &mut wp.amplitudes {
            *a *= inv;
        }
        Ok(wp)
    }

    pub(crate) fn from_samples_unchecked(grid: FrequencyGrid, amplitudes: Vec<Complex64>) -> Self {
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.d_omega()).sqrt()
    }

    /// Per-sample energy `|xi(w_i)|^2 * d_omega`.
    pub fn sample_energy(&self, i: usize) -> f64 {
        self.amplitudes[i].norm_sqr() * self.grid.d_omega()
    }

    pub fn max_sample_energy(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .fold(0.0f64, f64::max)
            * self.grid.d_omega()
    }
}

/// Gaussian spectral wavepacket
/// `xi(w) = (2 pi delta^2)^(-1/4) e^{-(w-w0)^2/(4 delta^2)} e^{i w t0} e^{-i w0 t0 / 2}`
/// sampled on `grid` and renormalized to absorb window truncation.
pub fn gaussian_spectral(grid: &FrequencyGrid, t0: f64) -> Result<SpectralWavepacket> {
    if !t0.is_finite() {
        return Err(QcdmaError::Config(format!("central time must be finite, got {t0}")));
    }
    let norm_const = (2.0 * PI * grid.delta * grid.delta).powf(-0.25);
    let global = Complex64::from_polar(1.0, -grid.omega0 * t0 / 2.0);
    let amplitudes: Vec<Complex64> = grid
        .omegas()
        .map(|w| {
            let envelope = norm_const * (-(w - grid.omega0).powi(2) / (4.0 * grid.delta * grid.delta)).exp();
            Complex64::from_polar(envelope, w * t0) * global
        })
        .collect();
    SpectralWavepacket::from_samples(*grid, amplitudes)
}

/// Pointwise linear combination of wavepackets on one grid, renormalized.
/// Returns the combination and its pre-normalization norm so callers can
/// check unitarity of the coefficients.
pub fn superpose(terms: &[(Complex64, &SpectralWavepacket)]) -> Result<(SpectralWavepacket, f64)> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| QcdmaError::Config("superpose needs at least one term".into()))?;
    let grid = *first.grid();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.n_samples];
    for (coeff, wp) in terms {
        if wp.grid() != &grid {
            return Err(QcdmaError::GridMismatch);
        }
        for (a, x) in acc.iter_mut().zip(wp.amplitudes()) {
            *a += coeff * x;
        }
    }
    let pre_norm = (acc.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.d_omega()).sqrt();
    if pre_norm < 1e-12 {
        return Err(QcdmaError::DegenerateSuperposition(pre_norm));
    }
    let inv = 1.0 / pre_norm;
    for a in &mut acc {
        *a *= inv;
    }
    Ok((SpectralWavepacket::from_samples_unchecked(grid, acc), pre_norm))
}

/// Riemann-sum inner product `<a|b> = sum conj(a_i) b_i d_omega`.
pub fn inner_product(a: &SpectralWavepacket, b: &SpectralWavepacket) -> Result<Complex64> {
    if a.grid() != b.grid() {
        return Err(QcdmaError::GridMismatch);
    }
    let s: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(s * a.grid().d_omega())
}

/// Complex temporal amplitude on the conjugate time grid.
#[derive(Debug, Clone)]
pub struct TemporalWavepacket {
    times: Vec<f64>,
    d_t: f64,
    amplitudes: Vec<Complex64>,
    /// Frequency grid this trace was transformed from, when applicable.
    source_grid: Option<FrequencyGrid>,
}

impl TemporalWavepacket {
    /// Wraps raw time samples (uniform spacing `d_t`); used directly only by
    /// synthetic traces in tests and tools.
    pub fn from_samples(times: Vec<f64>, d_t: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if times.len() != amplitudes.len() {
            return Err(QcdmaError::LengthMismatch { left: times.len(), right: amplitudes.len() });
        }
        if !d_t.is_finite() || d_t <= 0.0 {
            return Err(QcdmaError::Config(format!("d_t must be positive, got {d_t}")));
        }
        Ok(Self { times, d_t, amplitudes, source_grid: None })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn d_t(&self) -> f64 {
        self.d_t
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.d_t).sqrt()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn index_nearest(&self, t: f64) -> usize {
        if self.times.is_empty() {
            return 0;
        }
        let m = ((t - self.times[0]) / self.d_t).round();
        (m.max(0.0) as usize).min(self.times.len() - 1)
    }

    pub fn sample_nearest(&self, t: f64) -> Complex64 {
        self.amplitudes[self.index_nearest(t)]
    }

    /// Inverse participation ratio duration
    /// `(sum |xi|^2 d_t)^2 / sum |xi|^4 d_t`; equals the window length for a
    /// flat-modulus pulse and `sqrt(pi) * tau_p` for a Gaussian of effective
    /// duration `tau_p`.
    pub fn effective_duration(&self) -> Result<f64> {
        let p2: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.d_t;
        let p4: f64 = self.amplitudes.iter().map(|a| a.norm_sqr().powi(2)).sum::<f64>() * self.d_t;
        if p4 <= 0.0 {
            return Err(QcdmaError::Config("effective_duration of an all-zero trace".into()));
        }
        Ok(p2 * p2 / p4)
    }

    /// Transforms back to the spectral domain; exact inverse of [`to_time`].
    pub fn to_spectral(&self) -> Result<SpectralWavepacket> {
        let grid = self
            .source_grid
            .ok_or_else(|| QcdmaError::Config("temporal trace has no source frequency grid".into()))?;
        let n = grid.n_samples;
        let dt = self.d_t;
        let t0 = self.times[0];
        let w0 = grid.omega_start();
        let mut buf: Vec<Complex64> = (0..n)
            .map(|m| self.amplitudes[m] * Complex64::from_polar(1.0, w0 * (t0 + m as f64 * dt)))
            .collect();
        fft_inverse(&mut buf);
        let scale = dt / (2.0 * PI).sqrt();
        let dw = grid.d_omega();
        let out: Vec<Complex64> = buf
            .iter()
            .enumerate()
            .map(|(i, z)| z * scale * Complex64::from_polar(1.0, i as f64 * dw * t0))
            .collect();
        Ok(SpectralWavepacket::from_samples_unchecked(grid, out))
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(buf: &mut [Complex64]) {
    let fft: Arc<dyn Fft<f64>> = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

fn fft_inverse(buf: &mut [Complex64]) {
    let fft: Arc<dyn Fft<f64>> = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
}

/// Discrete transform `xi(t_m) = (2 pi)^(-1/2) sum_i xi(w_i) e^{-i w_i t_m} d_omega`
/// on the conjugate time grid `t_m = (m - n/2) * d_t`, `d_t = 2 pi/(n d_omega)`.
pub fn to_time(wp: &SpectralWavepacket) -> TemporalWavepacket {
    let grid = *wp.grid();
    let n = grid.n_samples;
    let dw = grid.d_omega();
    let dt = grid.d_t();
    let t_first = grid.time(0);
    let mut buf: Vec<Complex64> = wp
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, x)| x * Complex64::from_polar(1.0, -(i as f64) * dw * t_first))
        .collect();
    fft_forward(&mut buf);
    let scale = dw / (2.0 * PI).sqrt();
    let w_first = grid.omega_start();
    let times: Vec<f64> = (0..n).map(|m| grid.time(m)).collect();
    let amplitudes: Vec<Complex64> = buf
        .iter()
        .zip(&times)
        .map(|(z, &t)| z * scale * Complex64::from_polar(1.0, -w_first * t))
        .collect();
    TemporalWavepacket { times, d_t: dt, amplitudes, source_grid: Some(grid) }
}

/// Evaluates the semi-discrete transform of `wp` at an arbitrary time
/// (O(n) direct sum). Agrees with [`to_time`] at the grid times.
pub fn time_amplitude_at(wp: &SpectralWavepacket, t: f64) -> Complex64 {
    let grid = wp.grid();
    let s: Complex64 = wp
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, x)| x * Complex64::from_polar(1.0, -grid.omega(i) * t))
        .sum();
    s * grid.d_omega() / (2.0 * PI).sqrt()
}

/// Applies the spectral linear phase `e^{i w tau}`, shifting the temporal
/// pulse by `+tau` while leaving `|xi(w)|` untouched.
pub fn time_shift(wp: &SpectralWavepacket, tau: f64) -> SpectralWavepacket {
    let grid = *wp.grid();
    let shifted: Vec<Complex64> = wp
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, x)| x * Complex64::from_polar(1.0, grid.omega(i) * tau))
        .collect();
    SpectralWavepacket::from_samples_unchecked(grid, shifted)
}
