//! Dual-path polarization interferometer.
//!
//! The H arm crosses the dispersive probe crystal, the V arm an equal length
//! of undoped host. The arms are recombined into the |±⟩ = (|H⟩ ± |V⟩)/√2
//! ports; the dark |−⟩ port can additionally pass a wideband absorption
//! filter before detection.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::media::{
    carrier_angular_frequency, EitThreeLevel, MediumModel, PassiveHost, Propagation,
    Susceptibility, TwoLevelFilter, TRANSITION_WAVELENGTH,
};
use crate::pulse::{pulse_spectrum, InputPulseSpec};
use crate::spectral::{inverse_intensity, Spectrum, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    /// Medium in the H arm; normally [`EitThreeLevel`].
    pub probe: MediumModel,
    pub host: PassiveHost,
    pub filter: Option<TwoLevelFilter>,
    pub z1: f64,
    /// Filter length; `0` disables the filter.
    pub z2: f64,
    /// Injected delay of the H arm; positive means H arrives late.
    pub tau_d: f64,
    pub omega31: f64,
    /// Include the constant `exp(iω31 τd)` of the absolute-frequency delay.
    pub include_carrier_phase: bool,
    pub propagation: Propagation,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        Self {
            probe: EitThreeLevel::default().into(),
            host: PassiveHost::default(),
            filter: None,
            z1: 0.01,
            z2: 0.0,
            tau_d: 0.0,
            omega31: carrier_angular_frequency(TRANSITION_WAVELENGTH),
            include_carrier_phase: true,
            propagation: Propagation::Linearized,
        }
    }
}

impl InterferometerConfig {
    pub fn validate(&self) -> Result<()> {
        self.probe.validate()?;
        self.host.validate()?;
        if !(self.z1 > 0.0 && self.z1.is_finite()) {
            return Err(invalid("z1", format!("must be positive, got {}", self.z1)));
        }
        if !(self.z2 >= 0.0 && self.z2.is_finite()) {
            return Err(invalid(
                "z2",
                format!("must be non-negative, got {}", self.z2),
            ));
        }
        if self.z2 > 0.0 {
            match &self.filter {
                Some(f) => f.validate()?,
                None => {
                    return Err(invalid(
                        "filter",
                        "z2 > 0 requires filter parameters (delta2)",
                    ))
                }
            }
        }
        if !self.tau_d.is_finite() {
            return Err(invalid("tau_d", "must be finite"));
        }
        if !(self.omega31 > 0.0 && self.omega31.is_finite()) {
            return Err(invalid("omega31", "must be positive"));
        }
        Ok(())
    }

    /// The filter, if it is present and has non-zero length.
    pub fn active_filter(&self) -> Option<&TwoLevelFilter> {
        self.filter.as_ref().filter(|_| self.z2 > 0.0)
    }

    fn delay_factor(&self, delta: f64) -> Complex64 {
        let omega = if self.include_carrier_phase {
            self.omega31 + delta
        } else {
            delta
        };
        Complex64::from_polar(1.0, omega * self.tau_d)
    }
}

/// Time-domain intensities at the detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceRecord {
    pub grid: TimeGrid,
    pub i_plus: Vec<f64>,
    /// Dark-port intensity; filtered when [`InterferenceRecord::filtered`].
    pub i_minus: Vec<f64>,
    pub e_h_intensity: Vec<f64>,
    pub e_v_intensity: Vec<f64>,
    pub filtered: bool,
}

/// Splits the input equally and propagates each half through its arm.
pub fn propagate_paths(
    cfg: &InterferometerConfig,
    input: &Spectrum,
) -> Result<(Spectrum, Spectrum)> {
    cfg.validate()?;
    let guard = input.grid().leading_guard();
    if cfg.tau_d.abs() >= guard {
        return Err(Error::GuardExceeded {
            tau_d: cfg.tau_d,
            guard,
        });
    }
    let split = input.scale(Complex64::new(FRAC_1_SQRT_2, 0.0));
    let mut fault = None;
    let e_h = split.apply(
        |delta| match cfg.probe.transfer(cfg.z1, delta, cfg.propagation) {
            Ok(t) => t * cfg.delay_factor(delta),
            Err(e) => {
                fault.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
    );
    let e_v = split.apply(
        |delta| match cfg.host.transfer(cfg.z1, delta, cfg.propagation) {
            Ok(t) => t,
            Err(e) => {
                fault.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
    );
    match fault {
        Some(e) => Err(e),
        None => Ok((e_h, e_v)),
    }
}

/// `(e_h − e_v)/√2`, the field reaching the dark port.
pub fn difference_spectrum(e_h: &Spectrum, e_v: &Spectrum) -> Result<Spectrum> {
    let w = Complex64::new(FRAC_1_SQRT_2, 0.0);
    e_h.combine(w, e_v, -w)
}

pub fn interfere(e_h: &Spectrum, e_v: &Spectrum) -> Result<InterferenceRecord> {
    let w = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let sum = e_h.combine(w, e_v, w)?;
    let diff = difference_spectrum(e_h, e_v)?;
    Ok(InterferenceRecord {
        grid: *e_h.grid(),
        i_plus: inverse_intensity(&sum)?,
        i_minus: inverse_intensity(&diff)?,
        e_h_intensity: inverse_intensity(e_h)?,
        e_v_intensity: inverse_intensity(e_v)?,
        filtered: false,
    })
}

/// Dark-port intensity after the difference field crosses `z2` of filter.
pub fn apply_filter(
    diff: &Spectrum,
    filter: &TwoLevelFilter,
    z2: f64,
    propagation: Propagation,
) -> Result<Vec<f64>> {
    if !(z2 >= 0.0 && z2.is_finite()) {
        return Err(invalid("z2", format!("must be non-negative, got {z2}")));
    }
    filter.validate()?;
    let filtered = diff.apply(|delta| {
        filter
            .transfer(z2, delta, propagation)
            .expect("two-level filter susceptibility is regular for delta2 > 0")
    });
    inverse_intensity(&filtered)
}

pub fn run_interferometer(
    cfg: &InterferometerConfig,
    pulse: &InputPulseSpec,
    grid: &TimeGrid,
) -> Result<InterferenceRecord> {
    let input = pulse_spectrum(pulse, grid)?;
    let (e_h, e_v) = propagate_paths(cfg, &input)?;
    let mut record = interfere(&e_h, &e_v)?;
    if let Some(filter) = cfg.active_filter() {
        let diff = difference_spectrum(&e_h, &e_v)?;
        record.i_minus = apply_filter(&diff, filter, cfg.z2, cfg.propagation)?;
        record.filtered = true;
    }
    Ok(record)
}
