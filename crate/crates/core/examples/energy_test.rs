//! Energy-distance permutation test on shifted and unshifted Gaussian clouds.

use nalgebra::DVector;
use orbit_langevin::stats::{energy_distance, permutation_test, TestRole};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn cloud(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    (0..n).map(|_| DVector::from_fn(3, |i, _| rng.sample::<f64, _>(StandardNormal) + if i == 0 { shift } else { 0.0 })).collect()
}

fn main() -> orbit_langevin::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = cloud(500, 0.0, &mut rng);
    let b = cloud(500, 0.0, &mut rng);
    let c = cloud(500, 0.3, &mut rng);
    println!("E(a, b) = {:.4e}, E(a, c) = {:.4e}", energy_distance(&a, &b)?, energy_distance(&a, &c)?);
    let same = permutation_test(&a, &b, 500, 1, 0.05, TestRole::Equivalence)?;
    let shifted = permutation_test(&a, &c, 500, 2, 0.05, TestRole::NegativeControl)?;
    println!("same law:    p = {:.3} ({:?})", same.p_value, same.verdict);
    println!("shifted law: p = {:.3} ({:?})", shifted.p_value, shifted.verdict);
    Ok(())
}
