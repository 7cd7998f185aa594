use orbit_langevin::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use orbit_langevin::group_action::ActionKind;
use orbit_langevin::sde::Potential;
use orbit_langevin::Error;

fn small_equivalence() -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::Equivalence,
        dt: 0.005,
        horizon: 0.5,
        checkpoints: vec![0.5],
        n_trajectories: 400,
        n_permutations: 200,
        group_draws: 1,
        invariance_samples: 200,
        dt_halving: false,
        oracle_factor: 2,
        ..Default::default()
    }
}

#[test]
fn sample_configs_parse_and_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= ExperimentKind::ALL.len());
}

#[test]
fn equal_noise_levels_make_the_systems_coincide() {
    let cfg = ExperimentConfig { beta_depth: 0.0, ..small_equivalence() };
    let report = run_experiment(&cfg).unwrap();
    assert!(report.passed, "{}", report.summary());
    // the control is not required when nothing separates the systems
    assert!(!report.check("negative_control_t0.5").unwrap().required);
}

#[test]
fn small_equivalence_run_reports_every_checkpoint() {
    let cfg = ExperimentConfig { checkpoints: vec![0.25, 0.5], ..small_equivalence() };
    let report = run_experiment(&cfg).unwrap();
    for name in ["equivalence_t0.25", "equivalence_t0.5", "negative_control_t0.25", "negative_control_t0.5"] {
        assert!(report.check(name).is_some(), "missing {name}");
    }
    assert!(report.check("radial_oracle_projected").is_some());
    assert!(report.check("invariance_projected_t0.25").is_some());
    assert!(report.check("equivalence_t0.5").unwrap().passed);
    assert_eq!(report.diagnostics.n_batches, 3);
}

#[test]
fn unit_plateau_recovers_the_gibbs_law() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Stationary,
        epsilon: 1.0,
        dt: 0.005,
        horizon: 12.0,
        burn_in: 6.0,
        thin: 2.0,
        n_trajectories: 500,
        ..Default::default()
    };
    let report = run_experiment(&cfg).unwrap();
    assert!(report.check("stationary_plateau").unwrap().passed, "{}", report.summary());
}

#[test]
fn geometry_check_is_reproducible() {
    let cfg = ExperimentConfig { experiment: ExperimentKind::GeometryCheck, geometry_draws: 10, ..Default::default() };
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert!(a.passed);
    assert_eq!(a.to_json_deterministic().unwrap(), b.to_json_deterministic().unwrap());
}

#[test]
fn orbit_bm_on_symmetric_matrices() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::OrbitBm,
        action: ActionKind::ConjugationSymmetric,
        dim: 3,
        group_dt: 1e-3,
        horizon: 0.2,
        short_time: 0.02,
        n_trajectories: 400,
        n_permutations: 200,
        ..Default::default()
    };
    let report = run_experiment(&cfg).unwrap();
    assert!(report.passed, "{}", report.summary());
    assert!(report.check("stabilizer_invariance").is_some());
    assert!(report.diagnostics.max_conservation_defect <= 1e-8);
}

#[test]
fn simulation_errors_name_the_trajectory() {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::FullyProjected,
        potential: Potential::Quartic { a: 1.0, b: 5.0 },
        dt: 0.5,
        horizon: 50.0,
        n_trajectories: 100,
        ..Default::default()
    };
    match run_experiment(&cfg) {
        Err(Error::Trajectory { index, .. }) => assert!(index < 100),
        other => panic!("expected a trajectory error, got {other:?}"),
    }
}
