//! `geoflow` — verification suites and geodesic simulations from the command line.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage/config error, 3 blow-up.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use geoflow::config::RunConfig;
use geoflow::curvature::SurveyConfig;
use geoflow::flow::{simulate, MonitorRow, RunStatus, TimeSeries};
use geoflow::verify::{
    crosscheck_1d, default_resolution, verify_curvature, verify_identities, CrosscheckConfig,
    CrosscheckStatus,
};
use geoflow::GeoError;

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BLOWUP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "geoflow",
    version,
    about = "Curvature verification and geodesic flow on flat tori"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the operator-identity suites on seeded random inputs.
    VerifyIdentities {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Grid points per axis (default 128 on T¹, 64 on T²).
        #[arg(long)]
        points: Option<usize>,
        /// Band limit of the random inputs (default 21 on T¹, 10 on T²).
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample random 2-planes and compare their sectional curvature with 1/μ.
    VerifyCurvature {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        modes: Option<usize>,
        /// Default 1e-8 on T¹, 1e-6 on T².
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the geodesic equation from a JSON run configuration.
    Simulate {
        config: PathBuf,
        /// CSV time series destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the σ-formulation with the literal finite-difference solver on T¹.
    #[command(name = "crosscheck-1d")]
    Crosscheck1d {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long, default_value_t = 0.1)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Sup norm of the initial σ.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    #[serde(flatten)]
    report: &'a T,
    timestamp: String,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn emit(json: &impl Serialize, out: Option<&Path>) -> Result<(), u8> {
    let text = serde_json::to_string_pretty(json).map_err(usage)?;
    match out {
        Some(path) => {
            fs::write(path, text + "\n").map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn core_error(e: GeoError) -> u8 {
    match e {
        GeoError::Blowup { .. } => {
            eprintln!("error: {e}");
            EXIT_BLOWUP
        }
        _ => usage(e),
    }
}

fn configure_threads() -> Result<(), u8> {
    let Ok(value) = std::env::var("GEOFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "GEOFLOW_THREADS must be a positive integer, got {value:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(usage)
}

fn run(cli: Cli) -> Result<u8, u8> {
    configure_threads()?;
    match cli.command {
        Command::VerifyIdentities {
            dim,
            seed,
            samples,
            tol,
            points,
            modes,
            out,
        } => {
            if !(1..=2).contains(&dim) {
                return Err(usage("--dim must be 1 or 2"));
            }
            let (m, k) = default_resolution(dim);
            let report = verify_identities(
                dim,
                points.unwrap_or(m),
                modes.unwrap_or(k),
                seed,
                samples,
                tol,
            )
            .map_err(core_error)?;
            for suite in report.suites.iter().filter(|s| !s.pass) {
                eprintln!(
                    "FAIL {}: max residual {:e} > {:e}",
                    suite.name, suite.max_residual, suite.tolerance
                );
            }
            emit(
                &Stamped {
                    report: &report,
                    timestamp: timestamp(),
                },
                out.as_deref(),
            )?;
            Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::VerifyCurvature {
            dim,
            samples,
            seed,
            modes,
            tol,
            points,
            out,
        } => {
            if !(1..=2).contains(&dim) {
                return Err(usage("--dim must be 1 or 2"));
            }
            let mut config = SurveyConfig::for_dimension(dim, samples, seed);
            config.active_modes = modes.unwrap_or(config.active_modes);
            config.points_per_axis = points.unwrap_or(config.points_per_axis);
            let tol = tol.unwrap_or(if dim == 1 { 1e-8 } else { 1e-6 });
            let report = verify_curvature(&config, tol, timestamp()).map_err(core_error)?;
            emit(&report, out.as_deref())?;
            Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Crosscheck1d {
            seed,
            resolution,
            t_end,
            dt,
            amplitude,
            tol,
        } => {
            let config = CrosscheckConfig {
                seed,
                resolution,
                t_end,
                dt,
                amplitude,
                tolerance: tol,
            };
            let report = crosscheck_1d(&config).map_err(core_error)?;
            emit(
                &Stamped {
                    report: &report,
                    timestamp: timestamp(),
                },
                None,
            )?;
            Ok(match report.status {
                CrosscheckStatus::Pass => EXIT_PASS,
                CrosscheckStatus::Mismatch => EXIT_FAIL,
                CrosscheckStatus::Blowup => EXIT_BLOWUP,
            })
        }
    }
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    status: RunStatus,
    velocity_representative: &'static str,
    csv: String,
    rows: usize,
    initial: Option<&'a MonitorRow>,
    last: Option<&'a MonitorRow>,
    energy_drift: f64,
    mass_drift: f64,
    max_abs_mean_sigma: f64,
    tolerance: Option<f64>,
    energy_drift_within_tolerance: Option<bool>,
    blowup: Option<&'a geoflow::flow::BlowupInfo>,
    timestamp: String,
}

fn write_csv(path: &Path, series: &TimeSeries) -> Result<(), u8> {
    let io = |e: csv::Error| usage(format!("{}: {e}", path.display()));
    let mut writer = csv::Writer::from_path(path).map_err(io)?;
    writer.write_record(MonitorRow::HEADER).map_err(io)?;
    for row in &series.rows {
        writer.serialize(row.values()).map_err(io)?;
    }
    writer
        .flush()
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_simulate(config_path: &Path, out: &Path) -> Result<u8, u8> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| usage(format!("{}: {e}", config_path.display())))?;
    let config = RunConfig::from_json(&text).map_err(usage)?;
    let sim = config.sim_config().map_err(usage)?;
    let series = simulate(&sim).map_err(core_error)?;
    write_csv(out, &series)?;

    let drift = series.energy_drift();
    let summary = SimulationSummary {
        status: series.status,
        velocity_representative: series.velocity_representative,
        csv: out.display().to_string(),
        rows: series.rows.len(),
        initial: series.rows.first(),
        last: series.rows.last(),
        energy_drift: drift,
        mass_drift: series.mass_drift(),
        max_abs_mean_sigma: series.max_abs_mean_sigma(),
        tolerance: config.tolerance,
        energy_drift_within_tolerance: config.tolerance.map(|t| drift <= t),
        blowup: series.blowup.as_ref(),
        timestamp: timestamp(),
    };
    emit(&summary, None)?;
    Ok(match series.status {
        RunStatus::Completed => EXIT_PASS,
        RunStatus::Blowup => EXIT_BLOWUP,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli).unwrap_or_else(|code| code))
}
