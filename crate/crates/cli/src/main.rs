//! `ptt <scenario> --config <path> [--out <dir>] [--seed N] [--n N] [--dt X] [--t-max X]`

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ptt_core::harness::{
    error_exit_code, init_threads, parse_config_for, run_scenario, Scenario, ScenarioConfig, EXIT_CONFIG,
};
use ptt_core::PttError;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Blowup,
    Global,
    Linear,
    Verify,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Blowup => Scenario::Blowup,
            ScenarioArg::Global => Scenario::Global,
            ScenarioArg::Linear => Scenario::Linear,
            ScenarioArg::Verify => Scenario::Verify,
        }
    }
}

/// Pseudo-spectral PTT simulator and verification suite.
#[derive(Debug, Parser)]
#[command(name = "ptt", version)]
struct Cli {
    scenario: ScenarioArg,
    /// `key=value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, PttError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| PttError::Config {
            key: "--config".into(),
            line: 0,
            reason: format!("cannot read {}: {e}", path.display()),
        })?,
        None => String::new(),
    };
    let mut cfg = parse_config_for(&text, cli.scenario.into())?;
    let overrides = [
        ("output_dir", cli.out.as_ref().map(|p| p.display().to_string())),
        ("seed", cli.seed.map(|v| v.to_string())),
        ("n", cli.n.map(|v| v.to_string())),
        ("dt", cli.dt.map(|v| v.to_string())),
        ("t_max", cli.t_max.map(|v| v.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v, 0)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Err(e) = init_threads(cfg.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(error_exit_code(&e) as u8);
    }
    match run_scenario(&cfg) {
        Ok(report) => {
            for (k, v) in &report.facts {
                println!("{k}={v}");
            }
            for c in &report.checks {
                println!("{}", c.line());
            }
            for c in report.failures() {
                eprintln!("{}", c.line());
            }
            println!("summary={}", cfg.output_dir.join("summary.txt").display());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
