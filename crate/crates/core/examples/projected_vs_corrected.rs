//! Simulates the projected-noise system and the curvature-corrected isotropic
//! system from the same invariant law and compares them at the horizon.

use nalgebra::DVector;
use orbit_langevin::geometry::CurvatureSource;
use orbit_langevin::group_action::{ActionKind, GroupAction};
use orbit_langevin::sde::{
    make_isotropic_curvature_system, make_projected_system, make_uncorrected_isotropic_system, sample_invariant_initial,
    simulate_batch, BatchConfig, InitialLaw, Potential, PotentialSpec, SdeSystem,
};
use orbit_langevin::stats::{permutation_test, TestRole};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn init(action: &GroupAction, n: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_invariant_initial(action, InitialLaw::IsotropicGaussian, &mut rng)).collect()
}

fn main() -> orbit_langevin::Result<()> {
    let action = GroupAction::new(ActionKind::Rotation, 3)?;
    let spec = PotentialSpec::beta_dip(&action, Potential::Quadratic { a: 1.0 }, 1.0, 0.5, 0.8, 2.5)?;
    let n = 1000;
    let run = |system: &dyn SdeSystem, seed: u64| {
        simulate_batch(system, &init(&action, n, seed), &BatchConfig::new(1e-3, 1.0, seed + 100)).map(|b| b.terminal())
    };
    let projected = run(&make_projected_system(&action, &spec), 1)?;
    let corrected = run(&make_isotropic_curvature_system(&action, &spec, CurvatureSource::ClosedForm), 2)?;
    let control = run(&make_uncorrected_isotropic_system(&action, &spec), 3)?;

    let eq = permutation_test(&projected, &corrected, 300, 9, 0.01, TestRole::Equivalence)?;
    let ctl = permutation_test(&projected, &control, 300, 10, 0.01, TestRole::NegativeControl)?;
    println!("projected vs corrected:   E = {:.3e}, p = {:.3} ({:?})", eq.statistic_value, eq.p_value, eq.verdict);
    println!("projected vs uncorrected: E = {:.3e}, p = {:.3} ({:?})", ctl.statistic_value, ctl.p_value, ctl.verdict);
    Ok(())
}
