//! Energy distance and its permutation test.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{EquivalenceReport, TestRole, Verdict};
use crate::error::{Error, Result};
use crate::group_action::{haar_sample, GroupAction};

fn check_samples(a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::config("energy distance needs nonempty samples"));
    }
    let dim = a[0].len();
    for x in a.iter().chain(b) {
        if x.len() != dim {
            return Err(Error::ShapeMismatch { expected: dim, got: x.len() });
        }
    }
    Ok(dim)
}

fn mean_pairwise(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let total: f64 = a.par_iter().map(|x| b.iter().map(|y| (x - y).norm()).sum::<f64>()).sum();
    total / (a.len() as f64 * b.len() as f64)
}

/// `2E‖a − b‖ − E‖a − a′‖ − E‖b − b′‖` with every mean taken over all
/// ordered pairs, so identical multisets give exactly zero.
pub fn energy_distance(a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<f64> {
    check_samples(a, b)?;
    Ok(2.0 * mean_pairwise(a, b) - mean_pairwise(a, a) - mean_pairwise(b, b))
}

/// Dense symmetric distance matrix of the pooled sample, row-major.
fn pooled_distances(pool: &[&DVector<f64>]) -> Vec<f64> {
    let n = pool.len();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for j in 0..n {
            if j != i {
                row[j] = (pool[i] - pool[j]).norm();
            }
        }
    });
    d
}

/// Energy statistics for many labelings at once. Column `c` of `labels`
/// (`n×k`, row-major) marks membership in the first sample.
fn batched_statistics(dist: &[f64], row_sums: &[f64], total: f64, labels: &[f64], k: usize, n_a: usize) -> Vec<f64> {
    let n = row_sums.len();
    let mut y = vec![0.0; n * k];
    // Y = D·M
    unsafe {
        matrixmultiply::dgemm(
            n,
            n,
            k,
            1.0,
            dist.as_ptr(),
            n as isize,
            1,
            labels.as_ptr(),
            k as isize,
            1,
            0.0,
            y.as_mut_ptr(),
            k as isize,
            1,
        );
    }
    let n_b = n - n_a;
    let (fa, fb) = (n_a as f64, n_b as f64);
    (0..k)
        .map(|c| {
            let mut s_aa = 0.0;
            let mut s_bb = 0.0;
            for i in 0..n {
                let m = labels[i * k + c];
                let yi = y[i * k + c];
                s_aa += m * yi;
                s_bb += (1.0 - m) * (row_sums[i] - yi);
            }
            let s_ab = 0.5 * (total - s_aa - s_bb);
            2.0 * s_ab / (fa * fb) - s_aa / (fa * fa) - s_bb / (fb * fb)
        })
        .collect()
}

const LABEL_BLOCK: usize = 128;

/// Observed statistic together with `n_perm` statistics under random
/// relabelings of the pooled sample.
pub fn permutation_distribution(
    a: &[DVector<f64>],
    b: &[DVector<f64>],
    n_perm: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    check_samples(a, b)?;
    // canonical pool order with the smaller sample labeled, so that swapping
    // the samples leaves every relabeling, and hence the p-value, unchanged
    let (small, large) = if b.len() < a.len() { (b, a) } else { (a, b) };
    let mut tagged: Vec<(&DVector<f64>, bool)> =
        small.iter().map(|x| (x, true)).chain(large.iter().map(|x| (x, false))).collect();
    tagged.sort_by(|p, q| {
        p.0.iter().zip(q.0.iter()).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let pool: Vec<&DVector<f64>> = tagged.iter().map(|t| t.0).collect();
    let n = pool.len();
    let n_a = small.len();
    let dist = pooled_distances(&pool);
    let row_sums: Vec<f64> = dist.chunks(n).map(|r| r.iter().sum()).collect();
    let total: f64 = row_sums.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut labelings: Vec<Vec<bool>> = Vec::with_capacity(n_perm + 1);
    labelings.push(tagged.iter().map(|t| t.1).collect());
    for _ in 0..n_perm {
        perm.shuffle(&mut rng);
        let mut l = vec![false; n];
        for &i in &perm[..n_a] {
            l[i] = true;
        }
        labelings.push(l);
    }

    let mut stats = Vec::with_capacity(n_perm + 1);
    for block in labelings.chunks(LABEL_BLOCK) {
        let k = block.len();
        let mut m = vec![0.0; n * k];
        for (c, l) in block.iter().enumerate() {
            for (i, &inside) in l.iter().enumerate() {
                if inside {
                    m[i * k + c] = 1.0;
                }
            }
        }
        stats.extend(batched_statistics(&dist, &row_sums, total, &m, k, n_a));
    }
    let observed = stats.remove(0);
    Ok((observed, stats))
}

/// Two-sample permutation test on the energy distance with the add-one
/// p-value `(1 + #{T* ≥ T}) / (n_perm + 1)`.
pub fn permutation_test(
    a: &[DVector<f64>],
    b: &[DVector<f64>],
    n_perm: usize,
    seed: u64,
    level: f64,
    role: TestRole,
) -> Result<EquivalenceReport> {
    if n_perm < 200 {
        return Err(Error::config("permutation tests need at least 200 permutations"));
    }
    let (observed, null) = permutation_distribution(a, b, n_perm, seed)?;
    // guard against rounding differences between identical labelings
    let tol = 1e-12 * observed.abs().max(1e-300);
    let exceed = null.iter().filter(|&&s| s >= observed - tol).count();
    let p = (1 + exceed) as f64 / (n_perm + 1) as f64;
    let mean = null.iter().sum::<f64>() / null.len() as f64;
    let var = null.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (null.len() - 1) as f64;
    Ok(EquivalenceReport {
        statistic_name: "energy_distance".into(),
        statistic_value: observed,
        p_value: p,
        n_a: a.len(),
        n_b: b.len(),
        n_permutations: n_perm,
        seed,
        level,
        role,
        verdict: Verdict::decide(role, p, level),
        null_std: Some(var.sqrt()),
    })
}

/// Compares `{x}` against `{g·x}` for `n_group` Haar draws `g` and reports the
/// smallest p-value against the Bonferroni level `level / n_group`.
pub fn invariance_test(
    samples: &[DVector<f64>],
    action: &GroupAction,
    n_group: usize,
    n_perm: usize,
    seed: u64,
    level: f64,
) -> Result<EquivalenceReport> {
    if n_group == 0 {
        return Err(Error::config("invariance test needs at least one group element"));
    }
    if ((n_perm + 1) as f64) * level <= n_group as f64 {
        return Err(Error::config("too few permutations to reach the adjusted level"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<EquivalenceReport> = None;
    for i in 0..n_group {
        let g = haar_sample(action, &mut rng);
        let moved = samples.iter().map(|x| action.apply(&g, x)).collect::<Result<Vec<_>>>()?;
        let rep = permutation_test(samples, &moved, n_perm, seed.wrapping_add(i as u64 + 1), level, TestRole::Equivalence)?;
        if worst.as_ref().map_or(true, |w| rep.p_value < w.p_value) {
            worst = Some(rep);
        }
    }
    let mut rep = worst.expect("at least one draw");
    rep.seed = seed;
    rep.level = level / n_group as f64;
    rep.verdict = Verdict::decide(TestRole::Equivalence, rep.p_value, rep.level);
    Ok(rep)
}
