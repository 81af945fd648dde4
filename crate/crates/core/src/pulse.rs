//! The input probe: a square envelope with finite rise and fall time.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{forward_transform, Signal, Spectrum, TimeGrid};

/// Shape of the 0 → 1 transition over one rise time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeProfile {
    #[default]
    LinearRamp,
    RaisedCosine,
}

impl EdgeProfile {
    /// Edge value for a normalised position `u` in `[0, 1]`.
    fn shape(self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            EdgeProfile::LinearRamp => u,
            EdgeProfile::RaisedCosine => 0.5 - 0.5 * (PI * u).cos(),
        }
    }
}

/// Rise begins at `t = 0` and completes at `tr`; the fall begins at `t0`
/// and reaches zero at `t0 + tr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPulseSpec {
    pub t0: f64,
    pub tr: f64,
    #[serde(default = "unit_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub edge_profile: EdgeProfile,
}

fn unit_amplitude() -> f64 {
    1.0
}

impl Default for InputPulseSpec {
    fn default() -> Self {
        Self {
            t0: 4.0e-6,
            tr: 0.1e-9,
            amplitude: 1.0,
            edge_profile: EdgeProfile::LinearRamp,
        }
    }
}

impl InputPulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(invalid("t0", format!("must be positive, got {}", self.t0)));
        }
        if !(self.tr > 0.0 && self.tr < self.t0) {
            return Err(invalid(
                "tr",
                format!("must satisfy 0 < tr < t0, got {}", self.tr),
            ));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(invalid(
                "amplitude",
                format!("must be positive, got {}", self.amplitude),
            ));
        }
        Ok(())
    }

    /// Time at which the trailing edge reaches zero.
    pub fn duration(&self) -> f64 {
        self.t0 + self.tr
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let rise = self.edge_profile.shape(t / self.tr);
        let fall = self.edge_profile.shape((self.t0 + self.tr - t) / self.tr);
        self.amplitude * rise * fall
    }

    fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        self.validate()?;
        let limit = self.tr / 10.0;
        if grid.dt() > limit * (1.0 + 1e-9) {
            return Err(Error::UnderResolvedEdge {
                dt: grid.dt(),
                limit,
            });
        }
        if grid.t_start() >= 0.0 || grid.t_end() <= self.duration() {
            return Err(Error::GridTooShort(format!(
                "grid spans [{:e}, {:e}) s but the pulse occupies [0, {:e}] s",
                grid.t_start(),
                grid.t_end(),
                self.duration()
            )));
        }
        Ok(())
    }
}

pub fn sample_pulse(spec: &InputPulseSpec, grid: &TimeGrid) -> Result<Signal> {
    spec.check_grid(grid)?;
    let samples = grid
        .times()
        .map(|t| Complex64::new(spec.envelope(t), 0.0))
        .collect();
    Signal::new(*grid, samples)
}

/// `E(0, Δ)`, the spectrum of the sampled input pulse.
pub fn pulse_spectrum(spec: &InputPulseSpec, grid: &TimeGrid) -> Result<Spectrum> {
    forward_transform(&sample_pulse(spec, grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Continuous transform of the linear-ramp trapezoid: a box of width t0
    /// convolved with a unit-area box of width tr.
    fn trapezoid_transform(spec: &InputPulseSpec, delta: f64) -> Complex64 {
        let i = Complex64::i();
        let boxft = |width: f64| -> Complex64 {
            if delta == 0.0 {
                Complex64::new(width, 0.0)
            } else {
                ((i * delta * width).exp() - 1.0) / (i * delta)
            }
        };
        spec.amplitude * boxft(spec.t0) * boxft(spec.tr) / spec.tr
    }

    fn fig_grid() -> TimeGrid {
        TimeGrid::with_guards(1.0e-11, 4.2e-6).unwrap()
    }

    #[test]
    fn envelope_landmarks() {
        let spec = InputPulseSpec::default();
        let g = fig_grid();
        let s = sample_pulse(&spec, &g).unwrap();
        let at = |t: f64| s.samples()[g.index_of(t)].re;
        assert_eq!(at(2.0e-6), 1.0);
        assert_eq!(at(-g.dt()), 0.0);
        assert_relative_eq!(at(spec.tr / 2.0), 0.5, epsilon = 1e-9);
        assert_eq!(at(spec.t0 + spec.tr + g.dt()), 0.0);
        assert_relative_eq!(at(spec.t0 + spec.tr / 2.0), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn raised_cosine_midpoint_and_bounds() {
        let spec = InputPulseSpec {
            edge_profile: EdgeProfile::RaisedCosine,
            ..Default::default()
        };
        assert_relative_eq!(spec.envelope(spec.tr / 2.0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            spec.envelope(spec.tr / 4.0),
            0.5 - 0.5 * (PI / 4.0).cos(),
            epsilon = 1e-12
        );
        for j in 0..1000 {
            let t = -1e-9 + j as f64 * 1e-11;
            let e = spec.envelope(t);
            assert!((0.0..=1.0).contains(&e));
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = [
            InputPulseSpec {
                t0: 0.0,
                ..Default::default()
            },
            InputPulseSpec {
                tr: 0.0,
                ..Default::default()
            },
            InputPulseSpec {
                tr: 5.0e-6,
                ..Default::default()
            },
            InputPulseSpec {
                amplitude: 0.0,
                ..Default::default()
            },
        ];
        for spec in bad {
            assert!(spec.validate().is_err(), "{spec:?}");
        }
    }

    #[test]
    fn under_resolved_edge_rejected() {
        let spec = InputPulseSpec::default();
        let g = TimeGrid::with_guards(2.0e-11, 4.2e-6).unwrap();
        assert!(matches!(
            sample_pulse(&spec, &g),
            Err(Error::UnderResolvedEdge { .. })
        ));
    }

    #[test]
    fn grid_must_cover_pulse() {
        let spec = InputPulseSpec::default();
        let g = TimeGrid::new(-1e-9, 1e-11, 1 << 16).unwrap();
        assert!(matches!(
            sample_pulse(&spec, &g),
            Err(Error::GridTooShort(_))
        ));
    }

    #[test]
    fn energy_within_trapezoid_bounds() {
        let spec = InputPulseSpec::default();
        let s = sample_pulse(&spec, &fig_grid()).unwrap();
        let e = s.energy();
        assert!(e >= spec.t0 - spec.tr && e <= spec.t0 + spec.tr, "{e}");
    }

    #[test]
    fn spectrum_follows_closed_form() {
        let spec = InputPulseSpec::default();
        let g = fig_grid();
        let sp = pulse_spectrum(&spec, &g).unwrap();
        let dc = sp.continuous_amplitude(0);
        assert_relative_eq!(dc.norm(), spec.t0, max_relative = 1e-3);
        for k in [1usize, 2, 3, 5, 8, 13, 21, 34, 55, 89] {
            let delta = g.detuning(k);
            let exact = trapezoid_transform(&spec, delta);
            let got = sp.continuous_amplitude(k);
            assert!(
                (got - exact).norm() < 1e-3 * exact.norm(),
                "bin {k}: got {got}, closed form {exact}"
            );
        }
    }

    #[test]
    fn far_detuned_tail_is_present() {
        let spec = InputPulseSpec::default();
        let g = fig_grid();
        let sp = pulse_spectrum(&spec, &g).unwrap();
        let k = (2.0 * PI * 10.0e9 / g.detuning_step()).round() as usize;
        let window = (2.0 * PI * 1.0e6 / g.detuning_step()) as usize;
        let peak = (k - window..k + window)
            .map(|j| sp.continuous_amplitude(j).norm())
            .fold(0.0, f64::max);
        assert!(peak > 0.0);
        assert!(peak > 1e-3 * trapezoid_transform(&spec, g.detuning(k)).norm().max(1e-30));
    }

    #[test]
    fn amplitude_is_linear() {
        let g = fig_grid();
        let a = pulse_spectrum(&InputPulseSpec::default(), &g).unwrap();
        let b = pulse_spectrum(
            &InputPulseSpec {
                amplitude: 2.0,
                ..Default::default()
            },
            &g,
        )
        .unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((2.0 * x - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }

    /// The linear ramp's edge factor peaks at Δ = (2m+1)π/tr, where the
    /// envelope is 4/(Δ² tr); the log-log slope through those peaks over
    /// 1–50 GHz is the asymptotic tail law. Sampled at 1 ps so that 50 GHz
    /// sits far below Nyquist; the top width does not enter the tail.
    #[test]
    fn linear_ramp_tail_decays_as_inverse_square() {
        let spec = InputPulseSpec {
            t0: 200.0e-9,
            ..Default::default()
        };
        let g = TimeGrid::with_guards(1.0e-12, 210.0e-9).unwrap();
        let sp = pulse_spectrum(&spec, &g).unwrap();
        let step = g.detuning_step();
        let half_width = (2.0 * PI * 10.0e6 / step).ceil() as usize;
        let mut pts = Vec::new();
        for m in 0.. {
            let delta = (2 * m + 1) as f64 * PI / spec.tr;
            if delta > 2.0 * PI * 50.0e9 {
                break;
            }
            if delta < 2.0 * PI * 1.0e9 {
                continue;
            }
            let k = (delta / step).round() as usize;
            let peak = (k - half_width..=k + half_width)
                .map(|j| sp.continuous_amplitude(j).norm())
                .fold(0.0, f64::max);
            pts.push((delta.ln(), peak.ln()));
        }
        assert!(pts.len() >= 4);
        let n = pts.len() as f64;
        let (mx, my) = (
            pts.iter().map(|p| p.0).sum::<f64>() / n,
            pts.iter().map(|p| p.1).sum::<f64>() / n,
        );
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 2.0).abs() < 0.1, "slope {slope}");
    }
}
