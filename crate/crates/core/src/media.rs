//! Linear susceptibilities of the probe crystal, the filter crystal and the
//! passive host, and the propagation factors they induce.
//!
//! All transfer functions are relative to the host: the common phase
//! `exp(i k0 z)` shared by both interferometer arms is factored out.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum wavelength of the probed transition.
pub const TRANSITION_WAVELENGTH: f64 = 879.705e-9;

pub const ALPHA0: f64 = 4130.0;
pub const K0: f64 = 1.55e7;
pub const DELTA1: f64 = 2.0 * PI * 1.0e6;
pub const GAMMA12: f64 = 2.0 * PI * 200.0;
/// Coupling Rabi frequency used when none is given.
pub const OMEGA_C: f64 = 2.0 * PI * 4.0e6;

/// `2πc/λ` in rad/s.
pub fn carrier_angular_frequency(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// Host refractive index implied by `k0 = n0 ω/c`.
pub fn host_index(k0: f64, omega31: f64) -> f64 {
    k0 * SPEED_OF_LIGHT / omega31
}

/// How the wavenumber is formed from the susceptibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// `k = k0 (1 + χ/2)`
    #[default]
    Linearized,
    /// `k = k0 √(1 + χ)`
    ExactRoot,
}

pub trait Susceptibility {
    fn chi(&self, delta: f64) -> Result<Complex64>;
    fn k0(&self) -> f64;
    fn validate(&self) -> Result<()>;

    /// `exp(i (k(Δ) - k0) z)`
    fn transfer(&self, z: f64, delta: f64, propagation: Propagation) -> Result<Complex64> {
        let chi = self.chi(delta)?;
        Ok((Complex64::i() * wavenumber_excess(self.k0(), chi, propagation) * z).exp())
    }
}

fn wavenumber_excess(k0: f64, chi: Complex64, propagation: Propagation) -> Complex64 {
    match propagation {
        Propagation::Linearized => chi * (0.5 * k0),
        Propagation::ExactRoot => ((chi + 1.0).sqrt() - 1.0) * k0,
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be non-negative and finite, got {v}"),
        ))
    }
}

/// Optically pumped Λ system under a coupling field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EitThreeLevel {
    pub alpha0: f64,
    pub k0: f64,
    pub delta1: f64,
    pub gamma12: f64,
    pub omega_c: f64,
}

impl Default for EitThreeLevel {
    fn default() -> Self {
        Self {
            alpha0: ALPHA0,
            k0: K0,
            delta1: DELTA1,
            gamma12: GAMMA12,
            omega_c: OMEGA_C,
        }
    }
}

impl Susceptibility for EitThreeLevel {
    /// `(α0/k0)·4(Δ+iγ12)δ1 / (Ωc² − 4(Δ+iγ12)(Δ+iδ1))`
    fn chi(&self, delta: f64) -> Result<Complex64> {
        let coherence = Complex64::new(delta, self.gamma12);
        let optical = Complex64::new(delta, self.delta1);
        let denom = self.omega_c * self.omega_c - 4.0 * coherence * optical;
        if denom.norm_sqr() == 0.0 {
            return Err(Error::SingularSusceptibility { delta });
        }
        Ok(self.alpha0 / self.k0 * 4.0 * coherence * self.delta1 / denom)
    }

    fn k0(&self) -> f64 {
        self.k0
    }

    fn validate(&self) -> Result<()> {
        positive("alpha0", self.alpha0)?;
        positive("k0", self.k0)?;
        positive("delta1", self.delta1)?;
        non_negative("gamma12", self.gamma12)?;
        non_negative("omega_c", self.omega_c)
    }
}

/// Broad pumped absorption line used as the wideband filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelFilter {
    pub alpha0: f64,
    pub k0: f64,
    pub delta2: f64,
}

impl Susceptibility for TwoLevelFilter {
    /// `(α0/k0)·δ2 / (−(Δ+iδ2))`
    fn chi(&self, delta: f64) -> Result<Complex64> {
        Ok(self.alpha0 / self.k0 * self.delta2 / -Complex64::new(delta, self.delta2))
    }

    fn k0(&self) -> f64 {
        self.k0
    }

    fn validate(&self) -> Result<()> {
        positive("alpha0", self.alpha0)?;
        positive("k0", self.k0)?;
        positive("delta2", self.delta2)
    }
}

/// Undoped host crystal; its response is the reference everything else is
/// measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassiveHost {
    pub k0: f64,
}

impl Default for PassiveHost {
    fn default() -> Self {
        Self { k0: K0 }
    }
}

impl Susceptibility for PassiveHost {
    fn chi(&self, _delta: f64) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }

    fn k0(&self) -> f64 {
        self.k0
    }

    fn validate(&self) -> Result<()> {
        positive("k0", self.k0)
    }

    fn transfer(&self, _z: f64, _delta: f64, _propagation: Propagation) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MediumModel {
    Eit(EitThreeLevel),
    Filter(TwoLevelFilter),
    Host(PassiveHost),
}

impl Susceptibility for MediumModel {
    fn chi(&self, delta: f64) -> Result<Complex64> {
        match self {
            MediumModel::Eit(m) => m.chi(delta),
            MediumModel::Filter(m) => m.chi(delta),
            MediumModel::Host(m) => m.chi(delta),
        }
    }

    fn k0(&self) -> f64 {
        match self {
            MediumModel::Eit(m) => m.k0,
            MediumModel::Filter(m) => m.k0,
            MediumModel::Host(m) => m.k0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MediumModel::Eit(m) => m.validate(),
            MediumModel::Filter(m) => m.validate(),
            MediumModel::Host(m) => m.validate(),
        }
    }

    fn transfer(&self, z: f64, delta: f64, propagation: Propagation) -> Result<Complex64> {
        match self {
            MediumModel::Eit(m) => m.transfer(z, delta, propagation),
            MediumModel::Filter(m) => m.transfer(z, delta, propagation),
            MediumModel::Host(m) => m.transfer(z, delta, propagation),
        }
    }
}

impl From<EitThreeLevel> for MediumModel {
    fn from(m: EitThreeLevel) -> Self {
        MediumModel::Eit(m)
    }
}

impl From<TwoLevelFilter> for MediumModel {
    fn from(m: TwoLevelFilter) -> Self {
        MediumModel::Filter(m)
    }
}

impl From<PassiveHost> for MediumModel {
    fn from(m: PassiveHost) -> Self {
        MediumModel::Host(m)
    }
}

/// One point of a single-frequency phase/transmission scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub delta: f64,
    /// `Re[k − k0]·z`, rad
    pub phase: f64,
    /// `exp(−2 Im[k − k0]·z)`
    pub intensity: f64,
}

pub fn phase_scan<M: Susceptibility + ?Sized>(
    model: &M,
    z: f64,
    deltas: &[f64],
    propagation: Propagation,
) -> Result<Vec<PhasePoint>> {
    non_negative("z", z)?;
    deltas
        .iter()
        .map(|&delta| {
            let excess = wavenumber_excess(model.k0(), model.chi(delta)?, propagation) * z;
            Ok(PhasePoint {
                delta,
                phase: excess.re,
                intensity: (-2.0 * excess.im).exp(),
            })
        })
        .collect()
}

/// Slow-light delay of the main field, `2 α0 z δ1 / Ωc²`.
pub fn group_delay_estimate(model: &EitThreeLevel, z: f64) -> Result<f64> {
    if model.omega_c == 0.0 {
        return Err(Error::UndefinedGroupDelay);
    }
    Ok(2.0 * model.alpha0 * z * model.delta1 / (model.omega_c * model.omega_c))
}
