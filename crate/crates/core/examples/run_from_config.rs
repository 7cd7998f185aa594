//! Parses a flat config and runs the named experiment.

use orbit_langevin::experiment::{run_experiment, ExperimentConfig};

fn main() -> orbit_langevin::Result<()> {
    let text = "
        experiment.name = fully_projected
        experiment.seed = 3
        action.kind = so_d_rotation
        action.dim = 3
        sde.dt = 0.002
        sde.horizon = 0.5
        sde.trajectories = 500
        stats.oracle_factor = 2
    ";
    let cfg: ExperimentConfig = text.parse()?;
    let report = run_experiment(&cfg)?;
    print!("{}", report.summary());
    println!("{}", &report.to_json_deterministic()?[..200]);
    Ok(())
}
