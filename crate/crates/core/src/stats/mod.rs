//! Distributional tests that turn law equalities into pass/fail verdicts.

pub mod energy;
pub mod ks;
pub mod stationary;

use serde::{Deserialize, Serialize};

pub use energy::{energy_distance, invariance_test, permutation_distribution, permutation_test};
pub use ks::{ks_critical_value, ks_one_sample, ks_p_value, ks_two_sample, kolmogorov_survival, wrapped_normal_cdf};
pub use stationary::{stationary_check, stationary_reference, StationaryCheck, StationaryReference};

/// Whether a test is expected to accept equality or to detect a difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestRole {
    Equivalence,
    NegativeControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    /// Equivalence passes when `p > level`; a negative control passes when
    /// `p < level`.
    pub fn decide(role: TestRole, p_value: f64, level: f64) -> Self {
        let ok = match role {
            TestRole::Equivalence => p_value > level,
            TestRole::NegativeControl => p_value < level,
        };
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EquivalenceReport {
    pub statistic_name: String,
    pub statistic_value: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub n_permutations: usize,
    pub seed: u64,
    pub level: f64,
    pub role: TestRole,
    pub verdict: Verdict,
    /// Standard deviation of the permutation null, when one was sampled.
    pub null_std: Option<f64>,
}

/// A one-sample or two-sample KS test packaged as a report.
pub fn ks_report(statistic: f64, p_value: f64, n_a: usize, n_b: usize, level: f64, role: TestRole) -> EquivalenceReport {
    EquivalenceReport {
        statistic_name: "ks_1d".into(),
        statistic_value: statistic,
        p_value,
        n_a,
        n_b,
        n_permutations: 0,
        seed: 0,
        level,
        role,
        verdict: Verdict::decide(role, p_value, level),
        null_std: None,
    }
}
