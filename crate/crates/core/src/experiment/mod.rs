//! Experiment harness: configuration, named runs and reports.

pub mod config;
pub mod report;
pub mod runs;

use std::time::Instant;

pub use config::{parse_key_values, ExperimentConfig, ExperimentKind};
pub use report::{CheckDetail, CheckEntry, Diagnostics, RunReport};
pub use runs::{
    run_counterexample, run_coupling, run_equivalence, run_fully_projected, run_geometry_check, run_orbit_bm,
    run_stationary,
};

use crate::error::Result;

/// Runs the configured experiment and fills in the overall verdict.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = match config.experiment {
        ExperimentKind::Equivalence => run_equivalence(config)?,
        ExperimentKind::Stationary => run_stationary(config)?,
        ExperimentKind::OrbitBm => run_orbit_bm(config)?,
        ExperimentKind::Counterexample => run_counterexample(config)?,
        ExperimentKind::GeometryCheck => run_geometry_check(config)?,
        ExperimentKind::FullyProjected => run_fully_projected(config)?,
        ExperimentKind::Coupling => run_coupling(config)?,
    };
    report.finish(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Runs the experiment and writes `<out_dir>/report.json`.
pub fn run_and_write(config: &ExperimentConfig) -> Result<RunReport> {
    let report = run_experiment(config)?;
    report.write(&config.out_dir)?;
    Ok(report)
}
