//! Uniform time grids and the unitary transform pair between time-domain
//! envelopes and detuning spectra.
//!
//! Conventions used throughout the crate:
//!
//! * time samples sit at `t_j = t_start + j * dt`, `j = 0..n`;
//! * spectrum bin `k` holds detuning `Δ_k = 2π k' / (n dt)` with `k'` the
//!   signed index in `(-n/2, n/2]`;
//! * the forward transform uses the kernel `exp(+iΔt)` and the inverse
//!   `exp(-iΔt)`, both scaled by `1/√n`. With this sign a factor
//!   `exp(iΔτ)` delays a signal by `τ`, and a medium with `Im χ > 0`
//!   absorbs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Fraction of the grid reserved as a guard interval on each side of the
/// requested content span.
pub const GUARD_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(
                "dt",
                format!("must be positive and finite, got {dt}"),
            ));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid(
                "n",
                format!("must be a power of two >= 2, got {n}"),
            ));
        }
        if !t_start.is_finite() {
            return Err(invalid("t_start", "must be finite"));
        }
        Ok(Self { t_start, dt, n })
    }

    /// Smallest power-of-two grid whose span holds `content` seconds with a
    /// guard of [`GUARD_FRACTION`] of the total span on either side. The
    /// leading guard is an integer number of samples, so `t = 0` is a sample.
    pub fn with_guards(dt: f64, content: f64) -> Result<Self> {
        if !(content > 0.0 && content.is_finite()) {
            return Err(invalid("span", format!("must be positive, got {content}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(
                "dt",
                format!("must be positive and finite, got {dt}"),
            ));
        }
        let needed = content / (1.0 - 2.0 * GUARD_FRACTION) / dt;
        if needed > (1u64 << 40) as f64 {
            return Err(invalid(
                "span",
                format!("{needed:e} samples is not representable"),
            ));
        }
        let n = (needed.ceil() as usize).max(2).next_power_of_two();
        let guard_samples = (GUARD_FRACTION * n as f64).ceil() as usize;
        Self::new(-(guard_samples as f64) * dt, dt, n)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn span(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.span()
    }

    /// Length of the interval before `t = 0`.
    pub fn leading_guard(&self) -> f64 {
        (-self.t_start).max(0.0)
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t_start + j as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.time(j))
    }

    /// Index of the sample closest to `t`, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        let j = ((t - self.t_start) / self.dt).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn signed_index(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Detuning of spectrum bin `k` in rad/s.
    pub fn detuning(&self, k: usize) -> f64 {
        2.0 * PI * self.signed_index(k) as f64 / self.span()
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.detuning(k)).collect()
    }

    /// Largest representable detuning, π/dt.
    pub fn nyquist(&self) -> f64 {
        PI / self.dt
    }

    pub fn detuning_step(&self) -> f64 {
        2.0 * PI / self.span()
    }
}

/// Complex field envelope sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: TimeGrid,
    samples: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        check_len(grid.len(), samples.len())?;
        check_finite("signal", &samples)?;
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Instantaneous intensity `|E(t)|²`.
    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }

    /// `Σ|E|² dt`
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dt
    }
}

/// Detuning-domain representation of a [`Signal`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TimeGrid,
    amplitudes: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: TimeGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_len(grid.len(), amplitudes.len())?;
        check_finite("spectrum", &amplitudes)?;
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Spectral energy under the unitary convention, `Σ|A|² dt`, which
    /// equals [`Signal::energy`] of the inverse.
    pub fn energy(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dt
    }

    /// Multiplies every bin by `f(Δ_k)`.
    pub fn apply<F>(&self, mut f: F) -> Spectrum
    where
        F: FnMut(f64) -> Complex64,
    {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * f(self.grid.detuning(k)))
            .collect();
        Spectrum {
            grid: self.grid,
            amplitudes,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Circular delay by `m` samples, `exp(iΔ m dt)` with the phase reduced
    /// modulo a full turn before it is evaluated.
    pub fn shift_samples(&self, m: i64) -> Spectrum {
        let n = self.grid.len() as i64;
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let turns = (self.grid.signed_index(k) * m).rem_euclid(n);
                a * Complex64::from_polar(1.0, 2.0 * PI * turns as f64 / n as f64)
            })
            .collect();
        Spectrum {
            grid: self.grid,
            amplitudes,
        }
    }

    /// Bin-wise `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &Spectrum, b: Complex64) -> Result<Spectrum> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Spectrum {
            grid: self.grid,
            amplitudes,
        })
    }

    /// Estimate of the continuous transform `∫ E(t) exp(iΔ_k t) dt` at bin `k`.
    pub fn continuous_amplitude(&self, k: usize) -> Complex64 {
        let delta = self.grid.detuning(k);
        let n = self.grid.len() as f64;
        self.amplitudes[k]
            * self.grid.dt
            * n.sqrt()
            * Complex64::from_polar(1.0, delta * self.grid.t_start)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

fn check_finite(context: &'static str, values: &[Complex64]) -> Result<()> {
    match values
        .iter()
        .position(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        Some(index) => Err(Error::NonFinite { context, index }),
        None => Ok(()),
    }
}

fn unitary_fft(data: &mut [Complex64], direction: FftDirection) {
    let n = data.len();
    let fft = FftPlanner::new().plan_fft(n, direction);
    fft.process(data);
    let norm = 1.0 / (n as f64).sqrt();
    for v in data.iter_mut() {
        *v *= norm;
    }
}

pub fn forward_transform(s: &Signal) -> Result<Spectrum> {
    check_finite("signal", &s.samples)?;
    let mut data = s.samples.clone();
    // rustfft's inverse direction carries the exp(+i...) kernel
    unitary_fft(&mut data, FftDirection::Inverse);
    Ok(Spectrum {
        grid: s.grid,
        amplitudes: data,
    })
}

pub fn inverse_transform(sp: &Spectrum) -> Result<Signal> {
    check_len(sp.grid.len(), sp.amplitudes.len())?;
    let mut data = sp.amplitudes.clone();
    unitary_fft(&mut data, FftDirection::Forward);
    Ok(Signal {
        grid: sp.grid,
        samples: data,
    })
}

/// `|IFT(sp)|²` without keeping the intermediate [`Signal`].
pub fn inverse_intensity(sp: &Spectrum) -> Result<Vec<f64>> {
    check_len(sp.grid.len(), sp.amplitudes.len())?;
    let mut data = sp.amplitudes.clone();
    unitary_fft(&mut data, FftDirection::Forward);
    Ok(data.into_iter().map(|v| v.norm_sqr()).collect())
}
