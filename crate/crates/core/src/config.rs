//! Scenario configuration schema.
//!
//! Config files are TOML with SI units. Angular frequencies may instead be
//! given in MHz with an implied factor 2π by suffixing the key with
//! `_MHz_x2pi` (`omega_c_MHz_x2pi = 4.0` means Ωc = 2π × 4 MHz). A file may
//! name a preset under `base`; its own keys then override that preset.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::detector::DetectorModel;
use crate::error::{invalid, Error, Result};
use crate::interferometer::InterferometerConfig;
use crate::media::{
    carrier_angular_frequency, EitThreeLevel, PassiveHost, Propagation, TwoLevelFilter, ALPHA0,
    DELTA1, GAMMA12, K0, OMEGA_C, TRANSITION_WAVELENGTH,
};
use crate::pulse::InputPulseSpec;

const MHZ_X2PI: f64 = 2.0 * PI * 1.0e6;
const MHZ_SUFFIX: &str = "_MHz_x2pi";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediaParams {
    pub alpha0: f64,
    pub k0: f64,
    pub delta1: f64,
    pub gamma12: f64,
    pub omega_c: f64,
    /// Filter half-bandwidth; required when `z2 > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(default)]
    pub propagation: Propagation,
}

impl Default for MediaParams {
    fn default() -> Self {
        Self {
            alpha0: ALPHA0,
            k0: K0,
            delta1: DELTA1,
            gamma12: GAMMA12,
            omega_c: OMEGA_C,
            delta2: None,
            propagation: Propagation::Linearized,
        }
    }
}

impl MediaParams {
    pub fn eit(&self) -> EitThreeLevel {
        EitThreeLevel {
            alpha0: self.alpha0,
            k0: self.k0,
            delta1: self.delta1,
            gamma12: self.gamma12,
            omega_c: self.omega_c,
        }
    }

    pub fn filter(&self) -> Option<TwoLevelFilter> {
        self.delta2.map(|delta2| TwoLevelFilter {
            alpha0: self.alpha0,
            k0: self.k0,
            delta2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathParams {
    pub z1: f64,
    #[serde(default)]
    pub z2: f64,
    #[serde(default)]
    pub tau_d: f64,
    pub omega31: f64,
    #[serde(default = "default_true")]
    pub include_carrier_phase: bool,
}

fn default_true() -> bool {
    true
}

impl Default for PathParams {
    fn default() -> Self {
        Self {
            z1: 0.01,
            z2: 0.0,
            tau_d: 0.0,
            omega31: carrier_angular_frequency(TRANSITION_WAVELENGTH),
            include_carrier_phase: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Simulate the whole pulse.
    #[default]
    FullPulse,
    /// Shorten the pulse top to `edge_window_span`, keeping both edges.
    EdgeWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub dt: f64,
    /// Minimum content span; the grid is padded up from this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default)]
    pub window_mode: WindowMode,
    #[serde(default = "default_edge_window")]
    pub edge_window_span: f64,
}

fn default_edge_window() -> f64 {
    20.0e-9
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            dt: 1.0e-11,
            span: None,
            window_mode: WindowMode::FullPulse,
            edge_window_span: default_edge_window(),
        }
    }
}

/// Time range over which summary maxima are taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisParams {
    pub t_from: f64,
    pub t_to: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            t_from: 0.0,
            t_to: 5.0e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanParams {
    /// Half-width of the detuning range, rad/s.
    pub detuning_span: f64,
    pub points: usize,
}

impl Default for PhaseScanParams {
    fn default() -> Self {
        Self {
            detuning_span: 10.0 * MHZ_X2PI,
            points: 2001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputParams {
    fn default() -> Self {
        Self {
            dir: None,
            csv: true,
            json: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub pulse: InputPulseSpec,
    pub media: MediaParams,
    pub interferometer: PathParams,
    pub detector: DetectorModel,
    pub grid: GridParams,
    pub analysis: AnalysisParams,
    pub phase_scan: PhaseScanParams,
    pub outputs: OutputParams,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.pulse.validate()?;
        self.detector.validate()?;
        self.interferometer_config().validate()?;
        if !(self.grid.dt > 0.0 && self.grid.dt.is_finite()) {
            return Err(invalid(
                "grid.dt",
                format!("must be positive, got {}", self.grid.dt),
            ));
        }
        if let Some(span) = self.grid.span {
            if !(span > 0.0 && span.is_finite()) {
                return Err(invalid(
                    "grid.span",
                    format!("must be positive, got {span}"),
                ));
            }
        }
        if self.grid.window_mode == WindowMode::EdgeWindow {
            let w = self.grid.edge_window_span;
            if w.is_nan() || w < 100.0 * self.pulse.tr {
                return Err(invalid(
                    "grid.edge_window_span",
                    format!(
                        "{w:e} s is shorter than 100·tr = {:e} s",
                        100.0 * self.pulse.tr
                    ),
                ));
            }
        }
        if self.analysis.t_to.partial_cmp(&self.analysis.t_from)
            != Some(std::cmp::Ordering::Greater)
        {
            return Err(invalid("analysis", "t_to must exceed t_from"));
        }
        if self.phase_scan.points < 2
            || !self.phase_scan.detuning_span.is_finite()
            || self.phase_scan.detuning_span <= 0.0
        {
            return Err(invalid(
                "phase_scan",
                "needs points >= 2 and a positive detuning_span",
            ));
        }
        Ok(())
    }

    /// Pulse actually simulated: in edge-window mode the top is shortened.
    pub fn simulated_pulse(&self) -> InputPulseSpec {
        match self.grid.window_mode {
            WindowMode::EdgeWindow if self.grid.edge_window_span < self.pulse.t0 => {
                InputPulseSpec {
                    t0: self.grid.edge_window_span,
                    ..self.pulse
                }
            }
            _ => self.pulse,
        }
    }

    pub fn interferometer_config(&self) -> InterferometerConfig {
        InterferometerConfig {
            probe: self.media.eit().into(),
            host: PassiveHost { k0: self.media.k0 },
            filter: self.media.filter(),
            z1: self.interferometer.z1,
            z2: self.interferometer.z2,
            tau_d: self.interferometer.tau_d,
            omega31: self.interferometer.omega31,
            include_carrier_phase: self.interferometer.include_carrier_phase,
            propagation: self.media.propagation,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a config file, layering it over its `base` preset (or the
    /// defaults when none is named).
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let base = match user.remove("base") {
            Some(toml::Value::String(name)) => crate::scenario::preset(&name)?,
            Some(other) => {
                return Err(Error::Config(format!(
                    "`base` must be a preset name, got {other}"
                )))
            }
            None => ScenarioConfig::default(),
        };
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        normalize_units(&mut user)?;
        merge(&mut merged, user);
        let cfg: ScenarioConfig = merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Rewrites `<key>_MHz_x2pi = v` into `<key> = 2π·v·10⁶` throughout.
fn normalize_units(table: &mut toml::Table) -> Result<()> {
    let keys: Vec<String> = table.keys().cloned().collect();
    for key in keys {
        if let Some(toml::Value::Table(inner)) = table.get_mut(&key) {
            normalize_units(inner)?;
            continue;
        }
        let Some(stem) = key.strip_suffix(MHZ_SUFFIX) else {
            continue;
        };
        if table.contains_key(stem) {
            return Err(Error::Config(format!("both `{stem}` and `{key}` given")));
        }
        let value = table.remove(&key).expect("key listed above");
        let mhz = match value {
            toml::Value::Float(v) => v,
            toml::Value::Integer(v) => v as f64,
            other => {
                return Err(Error::Config(format!(
                    "`{key}` must be numeric, got {other}"
                )))
            }
        };
        table.insert(stem.to_string(), toml::Value::Float(mhz * MHZ_X2PI));
    }
    Ok(())
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
