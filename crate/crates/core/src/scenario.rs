//! Figure presets, scenario execution, delay sweeps and result serialisation.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{AnalysisParams, ScenarioConfig, WindowMode};
use crate::detector::{
    boxcar_average, propagation_time, speed_bound, to_power, AveragedSeries, BoundReport,
};
use crate::error::{Error, Result};
use crate::interferometer::{run_interferometer, InterferenceRecord};
use crate::media::{group_delay_estimate, phase_scan, PhasePoint, DELTA1};
use crate::spectral::TimeGrid;

pub const PRESETS: [&str; 7] = ["fig1", "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig4d"];

/// Default cap on grid samples; override with `PRECURSOR_MAX_SAMPLES`.
pub const DEFAULT_SAMPLE_CAP: usize = 1 << 24;

pub fn sample_cap() -> usize {
    std::env::var("PRECURSOR_MAX_SAMPLES")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SAMPLE_CAP)
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig {
        name: name.to_string(),
        ..Default::default()
    };
    match name {
        "fig1" | "fig3a" => {
            cfg.interferometer.z1 = 0.01;
            cfg.analysis.t_to = 1.0e-9;
        }
        "fig3b" => {
            cfg.interferometer.z1 = 0.01;
            cfg.interferometer.z2 = 0.01;
            cfg.media.delta2 = Some(150.0 * DELTA1);
            cfg.analysis.t_to = 1.0e-9;
        }
        "fig4a" | "fig4b" | "fig4c" | "fig4d" => {
            cfg.interferometer.z1 = 0.055;
            cfg.interferometer.z2 = 0.08;
            cfg.media.delta2 = Some(1050.0 * DELTA1);
            cfg.grid.dt = 0.1e-12;
            cfg.grid.window_mode = WindowMode::EdgeWindow;
            cfg.interferometer.tau_d = match name {
                "fig4a" => 0.0,
                "fig4b" => -40.0e-15,
                "fig4c" => 40.0e-15,
                _ => 4.0e-12,
            };
        }
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESETS.join(", "),
            })
        }
    }
    Ok(cfg)
}

/// Grid sized for the simulated pulse plus the slow-light tail.
pub fn build_grid(cfg: &ScenarioConfig) -> Result<TimeGrid> {
    let pulse = cfg.simulated_pulse();
    let content = match cfg.grid.window_mode {
        WindowMode::EdgeWindow => 2.0 * pulse.duration(),
        WindowMode::FullPulse => {
            let tail = group_delay_estimate(&cfg.media.eit(), cfg.interferometer.z1).unwrap_or(0.0);
            pulse.duration() + tail.min(5.0 * pulse.duration())
        }
    };
    let content = cfg.grid.span.map_or(content, |s| s.max(content));
    TimeGrid::with_guards(cfg.grid.dt, content)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSummary {
    pub samples: usize,
    pub dt: f64,
    pub t_start: f64,
    pub analysis_from: f64,
    pub analysis_to: f64,
    pub max_i_minus_raw: f64,
    pub max_i_minus_avg: f64,
    pub max_i_plus: f64,
    pub max_power: f64,
    pub group_delay_estimate: Option<f64>,
    pub bound: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub record: InterferenceRecord,
    pub averaged: AveragedSeries,
    pub summary: RunSummary,
    pub provenance: Provenance,
}

fn max_between(grid: &TimeGrid, series: &[f64], window: &AnalysisParams) -> f64 {
    series
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            let t = grid.time(*j);
            t >= window.t_from && t < window.t_to
        })
        .map(|(_, v)| *v)
        .fold(0.0, f64::max)
}

pub fn run(config: &ScenarioConfig) -> Result<RunResult> {
    run_with_cap(config, sample_cap())
}

pub fn run_with_cap(config: &ScenarioConfig, cap: usize) -> Result<RunResult> {
    config.validate()?;
    let grid = build_grid(config)?;
    if grid.len() > cap {
        return Err(Error::GridTooLarge { n: grid.len(), cap });
    }
    let icfg = config.interferometer_config();
    let record = run_interferometer(&icfg, &config.simulated_pulse(), &grid)?;
    let averaged = boxcar_average(&record.i_minus, &grid, &config.detector)?;

    let window = &config.analysis;
    let max_avg = averaged.max_in(window.t_from, window.t_to);
    let max_power = to_power(max_avg, &config.detector);
    let t1 = propagation_time(icfg.z1, config.media.k0, icfg.omega31);
    let bound = speed_bound(max_power, &config.detector, t1, icfg.tau_d)?;
    let summary = RunSummary {
        samples: grid.len(),
        dt: grid.dt(),
        t_start: grid.t_start(),
        analysis_from: window.t_from,
        analysis_to: window.t_to,
        max_i_minus_raw: max_between(&grid, &record.i_minus, window),
        max_i_minus_avg: max_avg,
        max_i_plus: max_between(&grid, &record.i_plus, window),
        max_power,
        group_delay_estimate: group_delay_estimate(&config.media.eit(), icfg.z1).ok(),
        bound,
    };

    let mut hasher = HashWriter(Sha256::new());
    write_series_csv(&record, &averaged, &mut hasher)?;
    let provenance = Provenance {
        version: env!("CARGO_PKG_VERSION"),
        sha256: hex::encode(hasher.0.finalize()),
    };
    Ok(RunResult {
        config: config.clone(),
        record,
        averaged,
        summary,
        provenance,
    })
}

struct HashWriter(Sha256);

impl Write for HashWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

pub const SERIES_HEADER: &str = "t_s,i_plus,i_minus,i_minus_avg";

/// Writes the time series with shortest round-trip float formatting.
pub fn write_series_csv<W: Write>(
    record: &InterferenceRecord,
    averaged: &AveragedSeries,
    out: W,
) -> Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "{SERIES_HEADER}")?;
    for (j, t) in record.grid.times().enumerate() {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e}",
            t, record.i_plus[j], record.i_minus[j], averaged.per_sample[j]
        )?;
    }
    out.flush()?;
    Ok(())
}

/// JSON body describing one run.
#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub config: &'a ScenarioConfig,
    pub summary: &'a RunSummary,
    pub provenance: &'a Provenance,
}

impl RunResult {
    pub fn report(&self) -> RunReport<'_> {
        RunReport {
            config: &self.config,
            summary: &self.summary,
            provenance: &self.provenance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepValues {
    pub max_i_minus_avg: f64,
    pub max_power: f64,
    pub delta_v_over_v0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau_d: f64,
    #[serde(flatten)]
    pub values: Option<SweepValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Whether max averaged I− is non-decreasing in |τd| over successful rows.
    pub nondecreasing_in_abs_tau: bool,
    /// `(τd_a, τd_b)` pairs where |τd_a| < |τd_b| but I−(a) > I−(b).
    pub monotonicity_violations: Vec<(f64, f64)>,
}

pub fn delay_sweep(base: &ScenarioConfig, taus: &[f64]) -> SweepTable {
    let rows: Vec<SweepRow> = taus
        .par_iter()
        .map(|&tau_d| {
            let mut cfg = base.clone();
            cfg.interferometer.tau_d = tau_d;
            match run(&cfg) {
                Ok(r) => SweepRow {
                    tau_d,
                    values: Some(SweepValues {
                        max_i_minus_avg: r.summary.max_i_minus_avg,
                        max_power: r.summary.max_power,
                        delta_v_over_v0: r.summary.bound.delta_v_over_v0,
                    }),
                    error: None,
                },
                Err(e) => SweepRow {
                    tau_d,
                    values: None,
                    error: Some(format!("{}: {e}", e.class())),
                },
            }
        })
        .collect();

    let mut ok: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.values.map(|v| (r.tau_d, v.max_i_minus_avg)))
        .collect();
    ok.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let monotonicity_violations: Vec<(f64, f64)> = ok
        .windows(2)
        .filter(|w| w[0].0.abs() < w[1].0.abs() && w[1].1 < w[0].1)
        .map(|w| (w[0].0, w[1].0))
        .collect();
    SweepTable {
        rows,
        nondecreasing_in_abs_tau: monotonicity_violations.is_empty(),
        monotonicity_violations,
    }
}

/// Phase and transmission of the probe crystal over the configured detunings.
pub fn phase_scan_table(cfg: &ScenarioConfig) -> Result<Vec<PhasePoint>> {
    cfg.validate()?;
    let p = &cfg.phase_scan;
    let step = 2.0 * p.detuning_span / (p.points - 1) as f64;
    let deltas: Vec<f64> = (0..p.points)
        .map(|j| -p.detuning_span + j as f64 * step)
        .collect();
    phase_scan(
        &cfg.media.eit(),
        cfg.interferometer.z1,
        &deltas,
        cfg.media.propagation,
    )
}

pub const PHASE_SCAN_HEADER: &str = "delta_rad_s,phase_rad,intensity";

pub fn write_phase_scan_csv<W: Write>(points: &[PhasePoint], out: W) -> Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "{PHASE_SCAN_HEADER}")?;
    for p in points {
        writeln!(out, "{:e},{:e},{:e}", p.delta, p.phase, p.intensity)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a delay such as `40fs`, `-4ps`, `0.1ns` or plain seconds.
pub fn parse_seconds(text: &str) -> Result<f64> {
    let s = text.trim();
    let (num, exponent) = [("fs", -15), ("ps", -12), ("ns", -9), ("us", -6), ("s", 0)]
        .iter()
        .find_map(|(suffix, exp)| s.strip_suffix(suffix).map(|n| (n.trim(), *exp)))
        .unwrap_or((s, 0));
    let bad = || Error::Config(format!("cannot parse `{text}` as a time"));
    let mantissa: f64 = num.parse().map_err(|_| bad())?;
    if num.contains(['e', 'E']) || exponent == 0 {
        return Ok(mantissa * 10f64.powi(exponent));
    }
    // "40fs" parses as the literal 40e-15, not 40 * 1e-15
    format!("{num}e{exponent}").parse().map_err(|_| bad())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn preset_parameters() {
        let a = preset("fig3a").unwrap();
        assert_eq!(a.interferometer.z1, 0.01);
        assert_eq!(a.interferometer.z2, 0.0);
        assert_eq!(a.media.delta2, None);
        assert_eq!(a.grid.dt, 1.0e-11);
        assert_eq!(a.interferometer.tau_d, 0.0);

        let b = preset("fig4b").unwrap();
        assert_eq!(b.interferometer.tau_d, -40.0e-15);
        assert_eq!(b.interferometer.z1, 0.055);
        assert_eq!(b.interferometer.z2, 0.08);
        assert_relative_eq!(b.media.delta2.unwrap(), 1050.0 * DELTA1);
        assert_eq!(b.grid.dt, 0.1e-12);
        assert_eq!(b.grid.window_mode, WindowMode::EdgeWindow);

        assert_eq!(preset("fig1").unwrap().interferometer.z1, 0.01);
    }

    #[test]
    fn unknown_preset_lists_valid_names() {
        let err = preset("fig2").unwrap_err();
        assert!(err.to_string().contains("fig4d"));
        assert_eq!(err.class(), "unknown_preset");
    }

    #[test]
    fn grids_are_sized_for_content() {
        let g3 = build_grid(&preset("fig3a").unwrap()).unwrap();
        assert_eq!(g3.len(), 1 << 20);
        let g4 = build_grid(&preset("fig4a").unwrap()).unwrap();
        assert_eq!(g4.len(), 1 << 19);
        assert_eq!(g4.time(g4.index_of(0.0)), 0.0);
    }

    #[test]
    fn oversized_grid_is_rejected() {
        let mut cfg = preset("fig4a").unwrap();
        cfg.grid.window_mode = WindowMode::FullPulse;
        let err = run_with_cap(&cfg, 1 << 20).unwrap_err();
        assert!(matches!(err, Error::GridTooLarge { .. }));
        assert!(err.to_string().contains("edge_window"));
    }

    #[test]
    fn seconds_parser() {
        assert_eq!(parse_seconds("40fs").unwrap(), 40.0e-15);
        assert_eq!(parse_seconds("-4ps").unwrap(), -4.0e-12);
        assert_eq!(parse_seconds("4e-12").unwrap(), 4.0e-12);
        assert_eq!(parse_seconds(" 0 ").unwrap(), 0.0);
        assert!(parse_seconds("forty").is_err());
    }

    #[test]
    fn phase_scan_covers_range() {
        let pts = phase_scan_table(&preset("fig1").unwrap()).unwrap();
        assert_eq!(pts.len(), 2001);
        assert_relative_eq!(pts[0].delta, -2.0 * std::f64::consts::PI * 10.0e6);
        assert_eq!(pts[1000].delta, 0.0);
        let mut buf = Vec::new();
        write_phase_scan_csv(&pts, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with(PHASE_SCAN_HEADER));
    }
}
