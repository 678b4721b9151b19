//! `blowup-lab`: experiment driver for the blow-up laboratory.
//!
//! Exit codes: 0 = all checks passed, 1 = invalid invocation or config,
//! 2 = numerical failure (a computation did not converge), 3 = a verified
//! invariant failed (artifacts are still written).

mod config;
mod report;
mod runners;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use config::{CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "blowup-lab",
    about = "Numerical laboratory for blow-up of damped semilinear waves",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config; BLOWUP_LAB_OUT overrides both).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweep points (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Threshold exponents and lifespan-rate classification.
    Exponents(RunArgs),
    /// Radial eigenfunctions: tails and the family envelope.
    Eigen(RunArgs),
    /// Kernel identities, bounds, and certificate functionals.
    Testfn(RunArgs),
    /// Lifespan measurements across data sizes, with a scaling fit.
    Sweep(RunArgs),
    /// Weak-form identity residual of a linear run under refinement.
    Duality(RunArgs),
    /// Every experiment the config supports, in a fixed order.
    All(RunArgs),
}

impl Cmd {
    fn kind(&self) -> ExperimentKind {
        match self {
            Cmd::Exponents(_) => ExperimentKind::Exponents,
            Cmd::Eigen(_) => ExperimentKind::Eigen,
            Cmd::Testfn(_) => ExperimentKind::Testfn,
            Cmd::Sweep(_) => ExperimentKind::Sweep,
            Cmd::Duality(_) => ExperimentKind::Duality,
            Cmd::All(_) => ExperimentKind::All,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Cmd::Exponents(a)
            | Cmd::Eigen(a)
            | Cmd::Testfn(a)
            | Cmd::Sweep(a)
            | Cmd::Duality(a)
            | Cmd::All(a) => a,
        }
    }
}

fn resolve_out(args: &RunArgs, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(env) = std::env::var_os("BLOWUP_LAB_OUT") {
        return PathBuf::from(env);
    }
    if let Some(out) = &args.out {
        return out.clone();
    }
    if let Some(out) = &cfg.out {
        return out.clone();
    }
    PathBuf::from("out")
}

fn dispatch(kind: ExperimentKind, cfg: &ExperimentConfig, out: &Path) -> Result<bool, CliError> {
    match kind {
        ExperimentKind::Exponents => runners::exponents::run(cfg, out),
        ExperimentKind::Eigen => runners::eigen::run(cfg, out),
        ExperimentKind::Testfn => runners::testfn::run(cfg, out),
        ExperimentKind::Sweep => runners::sweep::run(cfg, out),
        ExperimentKind::Duality => runners::duality::run(cfg, out),
        ExperimentKind::All => runners::run_all(cfg, out),
    }
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    let kind = cli.cmd.kind();
    let args = cli.cmd.args();
    let cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment != kind {
        return Err(CliError::Config(format!(
            "config declares experiment '{}' but the subcommand is '{}'",
            cfg.experiment.name(),
            kind.name()
        )));
    }
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        // ignore the error if a pool already exists (tests call run() twice)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let out = resolve_out(args, &cfg);

    let passed = dispatch(kind, &cfg, &out)?;
    println!(
        "{}: artifacts in {}",
        kind.name(),
        out.join(kind.name()).display()
    );
    if passed {
        println!("{}: all checks passed", kind.name());
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "{}: one or more checks failed (see summary.json)",
            kind.name()
        )))
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
