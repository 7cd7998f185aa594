//! Brownian motion on a circle obtained from a group-valued process.

use orbit_langevin::group_action::{ActionKind, GroupAction};
use orbit_langevin::sde::{make_orbit_bm_system, simulate_batch, BatchConfig, SdeSystem};
use orbit_langevin::stats::{ks_one_sample, wrapped_normal_cdf};

fn main() -> orbit_langevin::Result<()> {
    let action = GroupAction::new(ActionKind::Rotation, 2)?;
    let anchor = nalgebra::DVector::from_vec(vec![2.0, 0.0]);
    let system = make_orbit_bm_system(&action, &anchor, 1.0)?;
    let t = 0.5;
    let start = vec![system.initial_state(); 2000];
    let batch = simulate_batch(&system, &start, &BatchConfig::new(1e-3, t, 5))?;
    let angles: Vec<f64> = batch.terminal().iter().map(|s| system.image(s)).map(|y| y[1].atan2(y[0])).collect();
    let sigma = (2.0 * t).sqrt() / 2.0;
    let (d, p) = ks_one_sample(&angles, |a| wrapped_normal_cdf(a, sigma));
    println!("angle at t = {t}: KS {d:.4}, p = {p:.3}");
    println!("max radius drift {:.2e}", batch.max_conservation_defect());
    println!("max orthogonality defect {:.2e}", batch.max_post_retraction_defect());
    Ok(())
}
