//! Radial stationary law of the projected system with `β = φ(log vol)`,
//! compared against samples drawn from the reference itself.

use orbit_langevin::group_action::{ActionKind, GroupAction};
use orbit_langevin::sde::{LogVolumeProfile, Potential};
use orbit_langevin::stats::{stationary_check, stationary_reference};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> orbit_langevin::Result<()> {
    let action = GroupAction::new(ActionKind::Rotation, 3)?;
    let potential = Potential::Quadratic { a: 1.0 };
    let profile = LogVolumeProfile::new(2.0 * 0.3f64.ln(), 2.0 * 0.6f64.ln(), 0.5)?;
    let reference = stationary_reference(&action, potential, profile, 0.6)?;
    for r in [0.6, 1.0, 1.5, 2.0, 3.0] {
        println!("r = {r:.1}: density {:.4}, cdf {:.4}", reference.density(r), reference.cdf(r));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<f64> = (0..5000).map(|_| reference.quantile(rng.gen())).collect();
    let check = stationary_check(&samples, &reference, 20, 0.01)?;
    println!("KS distance {:.4} against tolerance {:.4}: {:?}", check.distance, check.tolerance, check.verdict);
    Ok(())
}
