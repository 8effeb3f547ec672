//! `sisfront`: traveling fronts of the diffusive SIS model from the command line.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 internal error.

mod commands;
mod config;
mod error;
mod run;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sisfront::model::{validate_params, RawParams};

use crate::commands::SimArgs;
use crate::error::CliError;
use crate::run::execute;

#[derive(Debug, Parser)]
#[command(name = "sisfront", version, about = "Traveling fronts of the diffusive SIS model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibria, eigenvalues and speed bounds.
    Analyze(Common),
    /// Compute a front profile by shooting.
    Shoot {
        #[command(flatten)]
        common: Common,
        /// Use the reduced (eps = 0) system of the regime.
        #[arg(long)]
        reduced: bool,
    },
    /// Check the trapping triangle of the regime.
    Trap {
        #[command(flatten)]
        common: Common,
        /// Slope of the case-3 triangle; the midpoint of the admissible interval by default.
        #[arg(long)]
        r: Option<f64>,
        /// Samples per triangle side.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Integrate the reaction-diffusion system and measure the front speed.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run a batch described by a TOML file.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value = "sisfront-out")]
        out: PathBuf,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, visible_alias = "eps", allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// case1, case2 or case3.
    #[arg(long)]
    regime: Option<String>,
    /// Flat `key = value` parameter file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "sisfront-out")]
    out: PathBuf,
}

impl Common {
    fn resolve(&self) -> Result<RawParams, CliError> {
        let mut raw = RawParams::default();
        if let Some(path) = &self.config {
            config::load_flat(path, &mut raw)?;
        }
        let flags = [
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("sigma", self.sigma),
            ("c", self.c),
            ("epsilon", self.epsilon),
            ("alpha", self.alpha),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                config::apply(&mut raw, k, &v.to_string())?;
            }
        }
        if let Some(r) = &self.regime {
            config::apply(&mut raw, "regime", r)?;
        }
        Ok(raw)
    }
}

fn single<F>(name: &str, common: &Common, body: F) -> Result<u8, CliError>
where
    F: FnOnce(&sisfront::ModelParams, &std::path::Path) -> Result<run::Report, CliError>,
{
    let raw = common.resolve()?;
    let params = validate_params(&raw)?;
    let m = execute(name, &raw, &common.out, |out| body(&params, out))?;
    if m.exit_code == 0 {
        eprintln!("{name}: {}", m.summary);
    } else {
        eprintln!("{name} failed: {}", m.summary);
    }
    Ok(m.exit_code)
}

fn dispatch(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Analyze(common) => single("analyze", &common, commands::analyze),
        Command::Shoot { common, reduced } => single("shoot", &common, |p, out| commands::shoot(p, reduced, out)),
        Command::Trap { common, r, samples } => single("trap", &common, |p, out| commands::trap(p, r, samples, out)),
        Command::Simulate { common, sim } => single("simulate", &common, |p, out| commands::simulate_cmd(p, &sim, out)),
        Command::Sweep { file, out, jobs } => {
            let spec = sweep::load(&file)?;
            let index = sweep::sweep(&spec, &out, jobs)?;
            eprintln!("sweep: {} runs, {} passed, {} failed", index.runs.len(), index.passed, index.failed);
            Ok(if index.failed == 0 { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
