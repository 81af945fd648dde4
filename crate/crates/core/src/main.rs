use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use precursor_sim::config::ScenarioConfig;
use precursor_sim::detector::{propagation_time, reference_delay, speed_bound};
use precursor_sim::scenario::{
    delay_sweep, parse_seconds, phase_scan_table, preset, run, write_phase_scan_csv,
    write_series_csv, PRESETS,
};
use precursor_sim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "precursor-sim",
    version,
    about = "Precursor-speed interferometry simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Named figure preset (fig1, fig3a, fig3b, fig4a..fig4d)
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML scenario file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides PRECURSOR_OUT_DIR and the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Drop the constant exp(iω31 τd) from the injected delay
    #[arg(long)]
    no_carrier_phase: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Phase and transmission of the probe crystal versus detuning
    PhaseScan(Source),
    /// Run one interferometer scenario
    Run(Source),
    /// Run a scenario once per injected delay
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Comma-separated delays, e.g. `0,-40fs,40fs,4ps`
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        taus: Vec<String>,
    },
    /// Turn a recorded dark-port power into a speed-difference bound
    Bound {
        #[command(flatten)]
        source: Source,
        /// Maximum recorded power in watts
        #[arg(long)]
        max_power: f64,
        /// Reference delay resolved by the setup
        #[arg(
            long,
            default_value = "40fs",
            allow_hyphen_values = true,
            conflicts_with = "calibrate"
        )]
        tau_ref: String,
        /// Derive the reference delay from a simulated calibration sweep
        #[arg(long)]
        calibrate: bool,
    },
    /// Print a preset as a TOML config
    Config {
        #[arg(long, default_value = "fig4a")]
        preset: String,
    },
}

fn load(source: &Source, default: &str) -> Result<ScenarioConfig> {
    let mut cfg = match (&source.preset, &source.config) {
        (_, Some(path)) => ScenarioConfig::from_toml(&fs::read_to_string(path)?)?,
        (Some(name), None) => preset(name)?,
        (None, None) => preset(default)?,
    };
    if source.no_carrier_phase {
        cfg.interferometer.include_carrier_phase = false;
    }
    Ok(cfg)
}

fn output_dir(source: &Source, cfg: &ScenarioConfig) -> PathBuf {
    source
        .out
        .clone()
        .or_else(|| std::env::var_os("PRECURSOR_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn stem(cfg: &ScenarioConfig) -> String {
    if cfg.name.is_empty() {
        "scenario".to_string()
    } else {
        cfg.name.clone()
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path)?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

fn execute(command: Command) -> Result<serde_json::Value> {
    match command {
        Command::PhaseScan(source) => {
            let cfg = load(&source, "fig1")?;
            let points = phase_scan_table(&cfg)?;
            let dir = output_dir(&source, &cfg);
            fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{}_phase_scan.csv", stem(&cfg)));
            write_phase_scan_csv(&points, File::create(&path)?)?;
            Ok(json!({ "points": points.len(), "z": cfg.interferometer.z1, "files": [path] }))
        }
        Command::Run(source) => {
            let cfg = load(&source, "fig4a")?;
            let result = run(&cfg)?;
            let dir = output_dir(&source, &cfg);
            fs::create_dir_all(&dir)?;
            let mut files = Vec::new();
            if cfg.outputs.csv {
                let path = dir.join(format!("{}.csv", stem(&cfg)));
                write_series_csv(&result.record, &result.averaged, File::create(&path)?)?;
                files.push(path);
            }
            if cfg.outputs.json {
                let path = dir.join(format!("{}.json", stem(&cfg)));
                write_json(&path, &result.report())?;
                files.push(path);
            }
            Ok(json!({ "report": result.report(), "files": files }))
        }
        Command::Sweep { source, taus } => {
            let cfg = load(&source, "fig4a")?;
            let taus = taus
                .iter()
                .map(|t| parse_seconds(t))
                .collect::<Result<Vec<_>>>()?;
            let table = delay_sweep(&cfg, &taus);
            let mut files = Vec::new();
            if cfg.outputs.json {
                let dir = output_dir(&source, &cfg);
                fs::create_dir_all(&dir)?;
                let path = dir.join(format!("{}_sweep.json", stem(&cfg)));
                write_json(&path, &table)?;
                files.push(path);
            }
            Ok(json!({ "sweep": table, "files": files }))
        }
        Command::Bound {
            source,
            max_power,
            tau_ref,
            calibrate,
        } => {
            let cfg = load(&source, "fig4a")?;
            let t1 = propagation_time(
                cfg.interferometer.z1,
                cfg.media.k0,
                cfg.interferometer.omega31,
            );
            let (tau_ref, calibration) = if calibrate {
                let taus = [-40e-15, 40e-15, -400e-15, 400e-15, -4e-12, 4e-12];
                let table = delay_sweep(&cfg, &taus);
                let cal: Vec<(f64, f64)> = table
                    .rows
                    .iter()
                    .filter_map(|r| r.values.map(|v| (r.tau_d, v.max_power)))
                    .collect();
                let tau = reference_delay(&cal, max_power).ok_or_else(|| {
                    Error::Config(format!(
                        "{max_power:e} W exceeds every calibrated delay; widen the sweep"
                    ))
                })?;
                (tau, Some(table))
            } else {
                (parse_seconds(&tau_ref)?, None)
            };
            let report = speed_bound(max_power, &cfg.detector, t1, tau_ref)?;
            Ok(json!({ "bound": report, "calibration": calibration }))
        }
        Command::Config { preset: name } => {
            let cfg = preset(&name)?;
            Ok(json!({ "toml": cfg.to_toml()? }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::PhaseScan(_) => "phase-scan",
        Command::Run(_) => "run",
        Command::Sweep { .. } => "sweep",
        Command::Bound { .. } => "bound",
        Command::Config { .. } => "config",
    };
    match execute(cli.command) {
        Ok(result) => {
            let envelope = json!({ "status": "ok", "command": name, "result": result });
            println!(
                "{}",
                serde_json::to_string_pretty(&envelope).expect("JSON values serialize")
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            let envelope = json!({
                "status": "error",
                "command": name,
                "error_class": e.class(),
                "message": e.to_string(),
                "valid_presets": PRESETS,
            });
            eprintln!("{envelope}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
