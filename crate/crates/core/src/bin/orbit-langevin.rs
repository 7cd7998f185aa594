use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use orbit_langevin::experiment::{run_and_write, ExperimentConfig, ExperimentKind};

/// Runs a named experiment and writes `<out>/report.json`.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// equivalence, stationary, orbit_bm, counterexample, geometry_check,
    /// fully_projected or coupling
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dump_trajectories: bool,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
}

fn load(cli: &Cli) -> orbit_langevin::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&cli.config)?;
    cfg.experiment = cli.experiment.parse::<ExperimentKind>()?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if cli.dump_trajectories {
        cfg.dump_trajectories = true;
    }
    if let Some(n) = cli.trajectories {
        cfg.n_trajectories = n;
    }
    if let Some(dt) = cli.dt {
        cfg.dt = dt;
    }
    if let Some(h) = cli.horizon {
        cfg.horizon = h;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| run_and_write(&cfg).map(|r| (cfg, r)));
    match result {
        Ok((cfg, report)) => {
            print!("{}", report.summary());
            println!("report written to {}", cfg.out_dir.join("report.json").display());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
