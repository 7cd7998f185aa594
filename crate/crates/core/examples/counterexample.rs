//! Quadratic variation of a circle rotated by a scalar Brownian angle, against
//! the run from the config-driven harness.

use orbit_langevin::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use orbit_langevin::group_action::ActionKind;

fn main() -> orbit_langevin::Result<()> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Counterexample,
        action: ActionKind::Rotation,
        dim: 2,
        anchors: vec![1.0, 2.0, 3.0],
        group_dt: 1e-3,
        n_trajectories: 100,
        ..Default::default()
    };
    let report = run_experiment(&cfg)?;
    print!("{}", report.summary());
    Ok(())
}
