//! Run reports and their JSON serialization.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::identities::IdentityResidual;
use crate::sde::TrajectoryBatch;
use crate::stats::{EquivalenceReport, StationaryCheck};

use super::config::{ExperimentConfig, ExperimentKind};

/// Evidence behind one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckDetail {
    Equivalence(EquivalenceReport),
    Stationary(StationaryCheck),
    /// A scalar estimate compared with a target at a relative or absolute
    /// tolerance.
    Scalar { value: f64, target: f64, tolerance: f64, relative: bool },
    Identity(IdentityResidual),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    /// Required checks enter the overall verdict; the rest are informational.
    pub required: bool,
    pub time: Option<f64>,
    pub passed: bool,
    pub detail: CheckDetail,
}

impl CheckEntry {
    pub fn equivalence(name: impl Into<String>, time: Option<f64>, required: bool, report: EquivalenceReport) -> Self {
        CheckEntry {
            name: name.into(),
            required,
            time,
            passed: report.verdict.passed(),
            detail: CheckDetail::Equivalence(report),
        }
    }

    /// Passes when `|value − target| ≤ tolerance`, scaled by `|target|` when
    /// `relative`.
    pub fn scalar(name: impl Into<String>, time: Option<f64>, value: f64, target: f64, tolerance: f64, relative: bool) -> Self {
        let scale = if relative { target.abs() } else { 1.0 };
        CheckEntry {
            name: name.into(),
            required: true,
            time,
            passed: (value - target).abs() <= tolerance * scale,
            detail: CheckDetail::Scalar { value, target, tolerance, relative },
        }
    }

    /// An upper bound `value ≤ bound`.
    pub fn bound(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckEntry {
            name: name.into(),
            required: true,
            time: None,
            passed: value <= bound,
            detail: CheckDetail::Scalar { value, target: 0.0, tolerance: bound, relative: false },
        }
    }

    pub fn optional(mut self) -> Self {
        self.required = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    /// Steps spent in the singular guard zone, summed over all batches.
    pub guard_zone_steps: usize,
    pub min_regularity: Option<f64>,
    /// Largest orthogonality defect of a group state after retraction.
    pub max_orthogonality_defect: f64,
    pub max_pre_retraction_defect: f64,
    pub max_conservation_defect: f64,
    pub n_batches: usize,
    pub wall_time_seconds: f64,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn absorb(&mut self, batch: &TrajectoryBatch) {
        self.guard_zone_steps += batch.guard_zone_steps();
        if let Some(m) = batch.min_regularity() {
            self.min_regularity = Some(self.min_regularity.map_or(m, |o| o.min(m)));
        }
        self.max_orthogonality_defect = self.max_orthogonality_defect.max(batch.max_post_retraction_defect());
        self.max_pre_retraction_defect = self.max_pre_retraction_defect.max(batch.max_pre_retraction_defect());
        self.max_conservation_defect = self.max_conservation_defect.max(batch.max_conservation_defect());
        self.n_batches += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckEntry>,
    pub diagnostics: Diagnostics,
    /// Conjunction of the required checks.
    pub passed: bool,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunReport {
            experiment: config.experiment,
            config: config.clone(),
            checks: Vec::new(),
            diagnostics: Diagnostics::default(),
            passed: false,
        }
    }

    pub fn push(&mut self, check: CheckEntry) {
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.diagnostics.notes.push(note.into());
    }

    pub fn finish(&mut self, wall_time_seconds: f64) {
        self.diagnostics.wall_time_seconds = wall_time_seconds;
        self.passed = self.checks.iter().filter(|c| c.required).all(|c| c.passed);
    }

    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&CheckEntry> {
        self.checks.iter().filter(|c| c.required && !c.passed).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with wall-time fields zeroed, for reproducibility comparisons.
    pub fn to_json_deterministic(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.diagnostics.wall_time_seconds = 0.0;
        copy.to_json()
    }

    /// Writes `<dir>/report.json` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        std::fs::write(&path, self.to_json()?)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}\n", self.experiment.tag(), if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            let tag = if c.required { "" } else { " (informational)" };
            let value = match &c.detail {
                CheckDetail::Equivalence(r) => format!("{} = {:.4e}, p = {:.4}", r.statistic_name, r.statistic_value, r.p_value),
                CheckDetail::Stationary(r) => format!("ks = {:.4}, tolerance = {:.4}, n = {}", r.distance, r.tolerance, r.n),
                CheckDetail::Scalar { value, target, tolerance, relative } => {
                    if *relative {
                        format!("{value:.4} vs {target:.4} within {:.0}%", 100.0 * tolerance)
                    } else {
                        format!("{value:.3e} (bound {tolerance:.1e})")
                    }
                }
                CheckDetail::Identity(r) => format!("{:.3e} (tolerance {:.1e})", r.max_residual, r.tolerance),
            };
            s.push_str(&format!("  [{status}] {}{tag}: {value}\n", c.name));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{TestRole, Verdict};

    fn eq(p: f64) -> EquivalenceReport {
        EquivalenceReport {
            statistic_name: "energy_distance".into(),
            statistic_value: 0.1,
            p_value: p,
            n_a: 10,
            n_b: 10,
            n_permutations: 200,
            seed: 1,
            level: 0.01,
            role: TestRole::Equivalence,
            verdict: Verdict::decide(TestRole::Equivalence, p, 0.01),
            null_std: None,
        }
    }

    #[test]
    fn verdict_is_conjunction_of_required_checks() {
        let mut r = RunReport::new(&ExperimentConfig::default());
        r.push(CheckEntry::equivalence("a", Some(1.0), true, eq(0.5)));
        r.push(CheckEntry::equivalence("b", None, false, eq(0.001)));
        r.finish(1.0);
        assert!(r.passed);
        r.push(CheckEntry::scalar("c", None, 1.2, 1.0, 0.1, true));
        r.finish(1.0);
        assert!(!r.passed);
        assert_eq!(r.failed_checks().len(), 1);
    }

    #[test]
    fn scalar_and_bound_checks() {
        assert!(CheckEntry::scalar("x", None, 4.3, 4.0, 0.1, true).passed);
        assert!(!CheckEntry::scalar("x", None, 4.5, 4.0, 0.1, true).passed);
        assert!(CheckEntry::scalar("x", None, -0.95, -1.0, 0.1, false).passed);
        assert!(CheckEntry::bound("x", 1e-9, 1e-8).passed);
        assert!(!CheckEntry::bound("x", f64::NAN, 1e-8).passed);
    }

    #[test]
    fn json_round_trip_and_deterministic_form() {
        let mut r = RunReport::new(&ExperimentConfig::default());
        r.push(CheckEntry::equivalence("a", Some(0.5), true, eq(0.3)));
        r.finish(3.5);
        let back: RunReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let det: serde_json::Value = serde_json::from_str(&r.to_json_deterministic().unwrap()).unwrap();
        assert_eq!(det["diagnostics"]["wall_time_seconds"], 0.0);
        assert_eq!(det["checks"][0]["detail"]["kind"], "equivalence");
        assert_eq!(det["experiment"], "equivalence");
    }
}
