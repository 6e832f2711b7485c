//! `sttrel`: run, sweep, validate and trace generation from the command line.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 invalid configuration,
//! 3 trace error, 4 validation failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use stt_reliability::oracle::OracleConfig;
use stt_reliability::run::{self, ConfigError, RunConfig};
use stt_reliability::trace::{generate, save_trace};
use stt_reliability::Error;

#[derive(Parser)]
#[command(
    name = "sttrel",
    version,
    about = "STT-MRAM cache reliability simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Trace file replacing the configured trace source.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace and report the reliability figures.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory; the JSON report goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Repeat a run over values of one numeric config field.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted config path, e.g. `cell.delta`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Compare the analytic figures against Monte Carlo fault injection.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Overrides `oracle.trials`.
        #[arg(long)]
        trials: Option<u64>,
        /// Overrides `oracle.scale_factor`.
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Write the configured synthetic workload as a trace file.
    GenTrace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Destination; gzip-compressed when the name ends in `.gz`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut config = RunConfig::from_path(&common.config)?;
    if let Some(t) = &common.trace {
        config.trace.file = Some(t.canonicalize().unwrap_or_else(|_| t.clone()));
        config.trace.synthetic = None;
    }
    if let Some(s) = common.seed {
        config.run.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_run(common: &Common, out: Option<&Path>, format: Format) -> Result<ExitCode, Error> {
    let config = load(common)?;
    let doc = run::run(&config)?;
    for w in &doc.warnings {
        warn!("{w}");
    }
    match (format, out) {
        (Format::Json, None) => print!("{}", doc.to_json()),
        (Format::Json, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("report.json"), doc.to_json())?;
        }
        (Format::Csv, None) => {
            return Err(ConfigError::Invalid {
                path: "--out".into(),
                reason: "CSV output needs a directory".into(),
            }
            .into())
        }
        (Format::Csv, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            for p in run::write_csv_tables(&doc, dir)? {
                info!("wrote {}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(
    common: &Common,
    param: &str,
    values: &[f64],
    out: Option<&Path>,
    format: Format,
) -> Result<ExitCode, Error> {
    let config = load(common)?;
    let table = run::sweep(&config, param, values)?;
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table).expect("sweep serialises");
            s.push('\n');
            s
        }
    };
    write_or_print(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(
    common: &Common,
    trials: Option<u64>,
    scale: Option<f64>,
) -> Result<ExitCode, Error> {
    let config = load(common)?;
    let mut oracle = config
        .oracle
        .clone()
        .unwrap_or_else(|| OracleConfig::new(100_000, config.run.seed, 1.0));
    if let Some(t) = trials {
        oracle.trials = t;
    }
    if let Some(s) = scale {
        oracle.scale_factor = s;
    }
    let report = run::validate(&config, &oracle)?;
    print!("{}", run::format_table(&report));
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    })
}

fn cmd_gen_trace(config: &Path, seed: Option<u64>, out: &Path) -> Result<ExitCode, Error> {
    let config = RunConfig::from_path(config)?;
    let spec = config
        .trace
        .synthetic
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid {
            path: "trace.synthetic".into(),
            reason: "gen-trace needs a synthetic workload section".into(),
        })?;
    let n = save_trace(out, generate(spec, seed.unwrap_or(config.run.seed))?)?;
    info!("wrote {n} records to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Param(_) | Error::Oracle(_) | Error::InvalidExecutionTime(_) => 2,
        Error::Trace(_) | Error::Access(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            common,
            out,
            format,
        } => cmd_run(common, out.as_deref(), *format),
        Command::Sweep {
            common,
            param,
            values,
            out,
            format,
        } => cmd_sweep(common, param, values, out.as_deref(), *format),
        Command::Validate {
            common,
            trials,
            scale,
        } => cmd_validate(common, *trials, *scale),
        Command::GenTrace { config, seed, out } => cmd_gen_trace(config, *seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
