use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use petzlab::bench::{
    apply_env_overrides, audit_invariants, emit_csv, parse_config, run_sweep, write_csv, Series,
    SweepConfig,
};
use petzlab::Error;

const EXIT_VIOLATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "petzlab", version, about = "Recovery-map fidelity sweeps and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate decoder fidelities and bounds on a p-grid and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Fill the seconds column with wall-clock times.
        #[arg(long)]
        timings: bool,
    },
    /// Check closed forms, inequality chains and the optimality bracket on a grid.
    Audit {
        #[arg(long)]
        setting: String,
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Skip the SDP and the bracket check.
        #[arg(long)]
        skip_optimal: bool,
    },
}

fn config_error(e: &Error) -> bool {
    matches!(e, Error::Parse { .. } | Error::Validation { .. })
}

fn fail(e: Error) -> ExitCode {
    eprintln!("petzlab: {e}");
    ExitCode::from(if config_error(&e) { EXIT_CONFIG } else { 1 })
}

fn sweep(config: PathBuf, timings: bool) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&config).map_err(|e| Error::Validation {
        field: "config".into(),
        message: format!("{}: {e}", config.display()),
    })?;
    let mut cfg = parse_config(&text)?;
    apply_env_overrides(&mut cfg)?;
    cfg.timings = timings;
    let points = run_sweep(&cfg)?;
    let failed = points.iter().filter(|p| p.failed()).count();
    if failed > 0 {
        eprintln!("petzlab: {failed} point(s) failed; see the flags column");
    }
    match &cfg.out {
        Some(path) => emit_csv(&points, path)?,
        None => write_csv(&points, std::io::stdout().lock())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn audit(setting: String, points: usize, skip_optimal: bool) -> Result<ExitCode, Error> {
    let mut cfg = SweepConfig::new(setting.parse()?);
    cfg.p_count = points;
    if skip_optimal {
        cfg.decoders.retain(|s| *s != Series::Optimal);
    }
    apply_env_overrides(&mut cfg)?;
    cfg.validate()?;
    let report = audit_invariants(&cfg)?;
    for line in report.lines() {
        println!("{line}");
    }
    let violations = report.violations().count();
    if violations > 0 {
        eprintln!("petzlab: {violations} violation(s)");
        return Ok(ExitCode::from(EXIT_VIOLATION));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep { config, timings } => sweep(config, timings),
        Command::Audit {
            setting,
            points,
            skip_optimal,
        } => audit(setting, points, skip_optimal),
    };
    result.unwrap_or_else(fail)
}
