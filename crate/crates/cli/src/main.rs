use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use viscospec::experiment::{run_experiment, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "viscospec",
    version,
    about = "Spectral experiments for the incompressible viscoelastic system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Small-data run with time-integrability and amplitude-scaling checks
    Decay(Common),
    /// Mixed linear system against per-mode matrix exponentials
    Dispersion(Common),
    /// Statistical inequality probes and dyadic decomposition checks
    Probe(Common),
    /// Picard iteration against the direct integrator
    Contraction(Common),
    /// Perturbation growth at two scales and bitwise determinism
    Uniqueness(Common),
    /// Constraint propagation, negative controls and formulation consistency
    Constraints(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults to the experiment's preset
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for the initial data
    #[arg(long)]
    seed: Option<u64>,
    /// Points per axis
    #[arg(long, value_name = "P")]
    grid: Option<usize>,
    /// Spatial dimension (2 or 3)
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    dim: Option<u8>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    print_config: bool,
}

fn resolve(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => ExperimentConfig::preset(kind),
    };
    if cfg.experiment != kind {
        return Err(format!(
            "configuration is for experiment {:?}, not {:?}",
            cfg.experiment.name(),
            kind.name()
        ));
    }
    if let Some(o) = &args.out {
        cfg.output = o.clone();
    }
    if let Some(s) = args.seed {
        cfg.data.seed = s;
    }
    if let Some(n) = args.grid {
        cfg.grid.n = n;
    }
    if let Some(d) = args.dim {
        cfg.grid.dim = d as usize;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Decay(a) => (ExperimentKind::Decay, a),
        Command::Dispersion(a) => (ExperimentKind::Dispersion, a),
        Command::Probe(a) => (ExperimentKind::Probe, a),
        Command::Contraction(a) => (ExperimentKind::Contraction, a),
        Command::Uniqueness(a) => (ExperimentKind::Uniqueness, a),
        Command::Constraints(a) => (ExperimentKind::Constraints, a),
    };
    let cfg = match resolve(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.print_config {
        print!("{}", cfg.to_toml_string());
        return ExitCode::SUCCESS;
    }
    match run_experiment(&cfg) {
        Ok(report) => {
            print!("{report}");
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {} experiment failed: {e}", kind.name());
            ExitCode::from(2)
        }
    }
}
