//! Haar sampling, the action on points, and the orbit tangent frame.

use nalgebra::DVector;
use orbit_langevin::group_action::{haar_sample, orbit_tangent_frame, ActionKind, GroupAction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> orbit_langevin::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (kind, d) in [(ActionKind::Rotation, 3), (ActionKind::ConjugationSymmetric, 3), (ActionKind::RightMultiplication, 2)] {
        let action = GroupAction::new(kind, d)?;
        let x = DVector::from_fn(action.ambient_dim(), |i, _| 1.0 + i as f64);
        let g = haar_sample(&action, &mut rng);
        let y = action.apply(&g, &x)?;
        let frame = orbit_tangent_frame(&action, &x, None)?;
        println!(
            "{:<16} d={} ambient={} orbit_dim={} |x|={:.4} |g.x|={:.4} {}={:.4} -> {:.4}",
            kind.tag(),
            d,
            action.ambient_dim(),
            frame.orbit_dim,
            x.norm(),
            y.norm(),
            kind.statistic_name(),
            action.invariant_statistic(&x),
            action.invariant_statistic(&y),
        );
    }
    Ok(())
}
