//! Stationary radial laws under rotations and their goodness-of-fit check.

use serde::{Deserialize, Serialize};

use super::ks::{ks_critical_value, ks_one_sample};
use super::Verdict;
use crate::error::{Error, Result};
use crate::group_action::{ActionKind, GroupAction};
use crate::sde::{LogVolumeProfile, Potential};

const GRID_POINTS: usize = 40_001;
const SIMPSON_PANELS: usize = 400;

/// Radial stationary law `r^{d−1}·exp(−∫^{log vol}(1 − φ²))·e^{−f(r)}`,
/// conditioned on `r ≥ lower`.
#[derive(Debug, Clone)]
pub struct StationaryReference {
    pub d: usize,
    pub profile: LogVolumeProfile,
    pub potential: Potential,
    pub lower: f64,
    pub upper: f64,
    grid: Vec<f64>,
    cdf: Vec<f64>,
    log_norm: f64,
}

/// `∫_{τ₀}^{L} (1 − φ(s)²) ds` by composite Simpson for `L ∈ [τ₀, τ₁]`.
fn transition_integral(profile: &LogVolumeProfile, upto: f64) -> f64 {
    let a = profile.tau0;
    let b = upto.min(profile.tau1);
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / SIMPSON_PANELS as f64;
    let g = |s: f64| {
        let p = profile.eval(s);
        1.0 - p * p
    };
    let mut acc = g(a) + g(b);
    for i in 1..SIMPSON_PANELS {
        acc += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Primitive of `1 − φ²` in the log volume, up to a constant.
fn volume_exponent(profile: &LogVolumeProfile, lv: f64) -> f64 {
    let eps2 = profile.epsilon * profile.epsilon;
    if lv <= profile.tau0 {
        0.0
    } else if lv < profile.tau1 {
        transition_integral(profile, lv)
    } else {
        transition_integral(profile, profile.tau1) + (1.0 - eps2) * (lv - profile.tau1)
    }
}

impl StationaryReference {
    fn log_density_unnormalized(&self, r: f64) -> f64 {
        let dm1 = self.d as f64 - 1.0;
        let lv = dm1 * r.ln();
        dm1 * r.ln() - volume_exponent(&self.profile, lv) - self.potential.radial_value(r)
    }

    /// Conditional density on `[lower, upper]`.
    pub fn density(&self, r: f64) -> f64 {
        if r < self.lower || r > self.upper || r <= 0.0 {
            return 0.0;
        }
        (self.log_density_unnormalized(r) - self.log_norm).exp()
    }

    /// Conditional CDF, linearly interpolated on the quadrature grid.
    pub fn cdf(&self, r: f64) -> f64 {
        if r <= self.lower {
            return 0.0;
        }
        if r >= self.upper {
            return 1.0;
        }
        let h = (self.upper - self.lower) / (GRID_POINTS - 1) as f64;
        let pos = (r - self.lower) / h;
        let i = (pos.floor() as usize).min(GRID_POINTS - 2);
        let w = pos - i as f64;
        self.cdf[i] * (1.0 - w) + self.cdf[i + 1] * w
    }

    /// Inverse CDF by bisection on the grid.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, GRID_POINTS - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.grid[i - 1] + w * (self.grid[i] - self.grid[i - 1])
    }

    /// Probability of each bin `[edges[j], edges[j+1]]`.
    pub fn bin_masses(&self, edges: &[f64]) -> Vec<f64> {
        edges.windows(2).map(|w| self.cdf(w[1]) - self.cdf(w[0])).collect()
    }

    /// Total mass of the normalized density by Simpson on the grid.
    pub fn total_mass(&self) -> f64 {
        let h = (self.upper - self.lower) / (GRID_POINTS - 1) as f64;
        let mut acc = self.density(self.grid[0]) + self.density(self.grid[GRID_POINTS - 1]);
        for i in 1..GRID_POINTS - 1 {
            acc += self.density(self.grid[i]) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }
}

/// Builds the radial reference for the rotation action, conditioned on
/// `r ≥ lower`. The upper end is extended until the density has decayed by
/// `e^{−50}` relative to its maximum.
pub fn stationary_reference(
    action: &GroupAction,
    potential: Potential,
    profile: LogVolumeProfile,
    lower: f64,
) -> Result<StationaryReference> {
    if action.kind() != ActionKind::Rotation {
        return Err(Error::config("the radial reference needs the rotation action"));
    }
    if !(lower >= 0.0) {
        return Err(Error::config("lower bound must be nonnegative"));
    }
    let mut reference = StationaryReference {
        d: action.matrix_dim(),
        profile,
        potential,
        lower,
        upper: lower.max(1.0),
        grid: Vec::new(),
        cdf: Vec::new(),
        log_norm: 0.0,
    };
    let start = lower.max(1e-12);
    let coarse_max = |hi: f64, rf: &StationaryReference| {
        (0..=1000)
            .map(|i| rf.log_density_unnormalized(start + (hi - start) * i as f64 / 1000.0))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    loop {
        let peak = coarse_max(reference.upper, &reference);
        let tail = reference.log_density_unnormalized(reference.upper);
        if tail.is_finite() && peak.is_finite() && tail < peak - 50.0 {
            break;
        }
        reference.upper *= 2.0;
        if reference.upper > 1e6 {
            return Err(Error::QuadratureFailure("radial density does not decay".into()));
        }
    }
    let h = (reference.upper - lower) / (GRID_POINTS - 1) as f64;
    reference.grid = (0..GRID_POINTS).map(|i| lower + i as f64 * h).collect();
    let logs: Vec<f64> = reference
        .grid
        .iter()
        .map(|&r| if r > 0.0 { reference.log_density_unnormalized(r) } else { f64::NEG_INFINITY })
        .collect();
    let shift = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::QuadratureFailure("density is not finite on the grid".into()));
    }
    let vals: Vec<f64> = logs.iter().map(|&l| (l - shift).exp()).collect();
    // cumulative integral: Simpson on interval pairs, trapezoid-corrected midpoints
    let mut cdf = vec![0.0; GRID_POINTS];
    for i in 1..GRID_POINTS {
        let mid = {
            let r = 0.5 * (reference.grid[i - 1] + reference.grid[i]);
            if r > 0.0 {
                (reference.log_density_unnormalized(r) - shift).exp()
            } else {
                0.0
            }
        };
        cdf[i] = cdf[i - 1] + h / 6.0 * (vals[i - 1] + 4.0 * mid + vals[i]);
    }
    let total = cdf[GRID_POINTS - 1];
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::QuadratureFailure(format!("normalizing constant {total}")));
    }
    for c in &mut cdf {
        *c /= total;
    }
    reference.cdf = cdf;
    reference.log_norm = shift + total.ln();
    Ok(reference)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StationaryCheck {
    pub invariant_statistic: String,
    pub bin_edges: Vec<f64>,
    pub empirical_histogram: Vec<usize>,
    /// Normalized reference density at the bin centers.
    pub reference_density: Vec<f64>,
    /// Reference probability of each bin.
    pub reference_mass: Vec<f64>,
    /// Kolmogorov–Smirnov distance to the reference.
    pub distance: f64,
    pub tolerance: f64,
    pub p_value: f64,
    pub n: usize,
    pub lower: f64,
    pub epsilon: f64,
    pub verdict: Verdict,
}

/// KS comparison of radial samples in `[lower, upper]` against the reference,
/// at tolerance `ks_critical_value(n, level)`.
pub fn stationary_check(samples: &[f64], reference: &StationaryReference, n_bins: usize, level: f64) -> Result<StationaryCheck> {
    let kept: Vec<f64> = samples.iter().copied().filter(|&r| r >= reference.lower && r <= reference.upper).collect();
    if kept.is_empty() {
        return Err(Error::config("no samples inside the reference region"));
    }
    let (distance, p_value) = ks_one_sample(&kept, |r| reference.cdf(r));
    let tolerance = ks_critical_value(kept.len(), level);
    let top = kept.iter().cloned().fold(reference.lower, f64::max).min(reference.upper);
    let width = (top - reference.lower) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins).map(|i| reference.lower + i as f64 * width).collect();
    let mut hist = vec![0usize; n_bins];
    for &r in &kept {
        let j = (((r - reference.lower) / width) as usize).min(n_bins - 1);
        hist[j] += 1;
    }
    Ok(StationaryCheck {
        invariant_statistic: "radius".into(),
        reference_density: edges.windows(2).map(|w| reference.density(0.5 * (w[0] + w[1]))).collect(),
        reference_mass: reference.bin_masses(&edges),
        bin_edges: edges,
        empirical_histogram: hist,
        distance,
        tolerance,
        p_value,
        n: kept.len(),
        lower: reference.lower,
        epsilon: reference.profile.epsilon,
        verdict: if distance <= tolerance { Verdict::Pass } else { Verdict::Fail },
    })
}
