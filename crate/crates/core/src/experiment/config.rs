//! Flat `section.key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CurvatureSource;
use crate::group_action::{ActionKind, SINGULAR_GUARD};
use crate::sde::{InitialLaw, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Equivalence,
    Stationary,
    OrbitBm,
    Counterexample,
    GeometryCheck,
    FullyProjected,
    Coupling,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Equivalence,
        ExperimentKind::Stationary,
        ExperimentKind::OrbitBm,
        ExperimentKind::Counterexample,
        ExperimentKind::GeometryCheck,
        ExperimentKind::FullyProjected,
        ExperimentKind::Coupling,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Equivalence => "equivalence",
            ExperimentKind::Stationary => "stationary",
            ExperimentKind::OrbitBm => "orbit_bm",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::GeometryCheck => "geometry_check",
            ExperimentKind::FullyProjected => "fully_projected",
            ExperimentKind::Coupling => "coupling",
        }
    }

    fn statistical(self) -> bool {
        self != ExperimentKind::GeometryCheck
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,

    pub action: ActionKind,
    pub dim: usize,

    pub potential: Potential,

    pub alpha: f64,
    pub beta_depth: f64,
    pub bump_lo: f64,
    pub bump_hi: f64,
    pub epsilon: f64,
    pub tau0: f64,
    pub tau1: f64,

    pub dt: f64,
    pub group_dt: f64,
    pub horizon: f64,
    pub n_trajectories: usize,
    pub initial: InitialLaw,
    pub curvature_source: CurvatureSource,
    pub burn_in: f64,
    pub thin: f64,

    pub n_permutations: usize,
    pub level: f64,
    pub checkpoints: Vec<f64>,
    pub group_draws: usize,
    pub invariance_samples: usize,
    pub bins: usize,
    pub dt_halving: bool,
    pub oracle_factor: usize,

    pub orbit_radius: f64,
    pub orbit_diffusion: f64,
    pub short_time: f64,
    pub anchors: Vec<f64>,

    pub geometry_draws: usize,

    pub out_dir: PathBuf,
    pub dump_trajectories: bool,
    pub long_format: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Equivalence,
            seed: 7,
            action: ActionKind::Rotation,
            dim: 3,
            potential: Potential::Quadratic { a: 1.0 },
            alpha: 1.0,
            beta_depth: 0.5,
            bump_lo: 0.8,
            bump_hi: 2.5,
            epsilon: 0.5,
            tau0: 2.0 * 0.3f64.ln(),
            tau1: 2.0 * 0.6f64.ln(),
            dt: 1e-3,
            group_dt: 1e-4,
            horizon: 1.0,
            n_trajectories: 4000,
            initial: InitialLaw::IsotropicGaussian,
            curvature_source: CurvatureSource::ClosedForm,
            burn_in: 10.0,
            thin: 2.0,
            n_permutations: 500,
            level: 0.01,
            checkpoints: vec![0.25, 0.5, 1.0],
            group_draws: 3,
            invariance_samples: 1000,
            bins: 40,
            dt_halving: true,
            oracle_factor: 4,
            orbit_radius: 2.0,
            orbit_diffusion: 1.0,
            short_time: 0.02,
            anchors: vec![1.0, 2.0],
            geometry_draws: 100,
            out_dir: PathBuf::from("out"),
            dump_trajectories: false,
            long_format: true,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::config(format!("`{key}`: cannot parse `{v}`")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_num(key, s.trim())).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(format!("`{key}`: expected a boolean, got `{v}`"))),
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim();
        if !k.contains('.') {
            return Err(Error::config(format!("line {}: key `{k}` needs a section prefix", lineno + 1)));
        }
        if map.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }
    Ok(map)
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    /// Applies one `section.key = value` setting.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment.name" => self.experiment = v.parse()?,
            "experiment.seed" => self.seed = parse_num(key, v)?,
            "action.kind" => self.action = ActionKind::from_tag(v)?,
            "action.dim" => self.dim = parse_num(key, v)?,
            "potential.kind" => {
                self.potential = match (v, self.potential) {
                    ("quadratic", Potential::Quadratic { a } | Potential::Quartic { a, .. }) => Potential::Quadratic { a },
                    ("quartic", Potential::Quadratic { a }) => Potential::Quartic { a, b: 0.0 },
                    ("quartic", p @ Potential::Quartic { .. }) => p,
                    _ => return Err(Error::config(format!("unknown potential `{v}`"))),
                }
            }
            "potential.a" => {
                let x = parse_num(key, v)?;
                match &mut self.potential {
                    Potential::Quadratic { a } | Potential::Quartic { a, .. } => *a = x,
                }
            }
            "potential.b" => {
                let x = parse_num(key, v)?;
                match &mut self.potential {
                    Potential::Quartic { b, .. } => *b = x,
                    Potential::Quadratic { .. } => return Err(Error::config("potential.b needs potential.kind = quartic")),
                }
            }
            "noise.alpha" => self.alpha = parse_num(key, v)?,
            "noise.beta_depth" => self.beta_depth = parse_num(key, v)?,
            "noise.bump_lo" => self.bump_lo = parse_num(key, v)?,
            "noise.bump_hi" => self.bump_hi = parse_num(key, v)?,
            "noise.epsilon" => self.epsilon = parse_num(key, v)?,
            "noise.tau0" => self.tau0 = parse_num(key, v)?,
            "noise.tau1" => self.tau1 = parse_num(key, v)?,
            "sde.dt" => self.dt = parse_num(key, v)?,
            "sde.group_dt" => self.group_dt = parse_num(key, v)?,
            "sde.horizon" => self.horizon = parse_num(key, v)?,
            "sde.trajectories" => self.n_trajectories = parse_num(key, v)?,
            "sde.initial" => {
                self.initial = match v {
                    "isotropic_gaussian" => InitialLaw::IsotropicGaussian,
                    "uniform_shell" => InitialLaw::UniformShell { radius: self.orbit_radius },
                    _ => return Err(Error::config(format!("unknown initial law `{v}`"))),
                }
            }
            "sde.initial_radius" => {
                let r = parse_num(key, v)?;
                self.initial = InitialLaw::UniformShell { radius: r };
            }
            "sde.curvature_source" => self.curvature_source = CurvatureSource::from_tag(v)?,
            "sde.burn_in" => self.burn_in = parse_num(key, v)?,
            "sde.thin" => self.thin = parse_num(key, v)?,
            "stats.permutations" => self.n_permutations = parse_num(key, v)?,
            "stats.level" => self.level = parse_num(key, v)?,
            "stats.checkpoints" => self.checkpoints = parse_list(key, v)?,
            "stats.group_draws" => self.group_draws = parse_num(key, v)?,
            "stats.invariance_samples" => self.invariance_samples = parse_num(key, v)?,
            "stats.bins" => self.bins = parse_num(key, v)?,
            "stats.dt_halving" => self.dt_halving = parse_bool(key, v)?,
            "stats.oracle_factor" => self.oracle_factor = parse_num(key, v)?,
            "orbit.radius" => self.orbit_radius = parse_num(key, v)?,
            "orbit.diffusion" => self.orbit_diffusion = parse_num(key, v)?,
            "orbit.short_time" => self.short_time = parse_num(key, v)?,
            "orbit.anchors" => self.anchors = parse_list(key, v)?,
            "geometry.draws" => self.geometry_draws = parse_num(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            "output.dump_trajectories" => self.dump_trajectories = parse_bool(key, v)?,
            "output.long_format" => self.long_format = parse_bool(key, v)?,
            _ => return Err(Error::config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Checks ranges and the experiment-specific requirements.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(m.to_string()));
        if !(self.dt > 0.0) || !(self.group_dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.horizon >= self.dt) {
            return bad("horizon must be at least dt");
        }
        if self.dim < 2 {
            return bad("action.dim must be at least 2");
        }
        if self.experiment.statistical() && self.n_trajectories < 100 {
            return bad("statistical experiments need at least 100 trajectories");
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad("stats.level must lie in (0, 1)");
        }
        if self.n_permutations < 200 {
            return bad("stats.permutations must be at least 200");
        }
        match self.potential {
            Potential::Quadratic { a } if a > 0.0 => {}
            Potential::Quartic { a, b } if b > 0.0 || (b == 0.0 && a > 0.0) => {}
            _ => return bad("the potential must be confining"),
        }
        match self.experiment {
            ExperimentKind::Equivalence | ExperimentKind::Coupling => {
                if !(self.alpha > 0.0) {
                    return bad("noise.alpha must be positive");
                }
                if !(0.0..=1.0).contains(&self.beta_depth) {
                    return bad("noise.beta_depth must lie in [0, 1]");
                }
                if !(self.bump_lo > 0.0 && self.bump_hi > self.bump_lo) {
                    return bad("bump support must satisfy 0 < bump_lo < bump_hi");
                }
                let margin = (0.5 * self.bump_lo).min(0.25 * (self.bump_hi - self.bump_lo));
                if self.bump_lo - margin <= 10.0 * SINGULAR_GUARD {
                    return bad("bump support must lie strictly inside the regular region");
                }
                if self.checkpoints.is_empty() {
                    return bad("stats.checkpoints must not be empty");
                }
                for &t in &self.checkpoints {
                    if !(t > 0.0 && t <= self.horizon + 1e-12) {
                        return bad("checkpoints must lie in (0, horizon]");
                    }
                }
                if ((self.n_permutations + 1) as f64) * self.level <= self.group_draws as f64 {
                    return bad("too few permutations for the invariance tests at this level");
                }
            }
            ExperimentKind::Stationary => {
                if self.action != ActionKind::Rotation {
                    return bad("the stationary experiment uses the rotation action");
                }
                if !(self.tau0 < self.tau1 && self.tau1 < 0.0) {
                    return bad("noise.tau0 < noise.tau1 < 0 is required");
                }
                if !(0.0..=1.0).contains(&self.epsilon) {
                    return bad("noise.epsilon must lie in [0, 1]");
                }
                if !(self.burn_in >= 0.0 && self.thin > 0.0 && self.burn_in <= self.horizon) {
                    return bad("burn-in and thinning must fit inside the horizon");
                }
            }
            ExperimentKind::OrbitBm => {
                if !(self.orbit_radius > 0.0) || !(self.orbit_diffusion >= 0.0) {
                    return bad("orbit.radius must be positive and orbit.diffusion nonnegative");
                }
                if !(self.short_time >= self.group_dt) {
                    return bad("orbit.short_time must be at least sde.group_dt");
                }
            }
            ExperimentKind::Counterexample => {
                if self.action != ActionKind::Rotation || self.dim != 2 {
                    return bad("the counterexample uses rotations of the plane");
                }
                if self.anchors.is_empty() || self.anchors.iter().any(|&r| !(r > 0.0)) {
                    return bad("orbit.anchors must be positive radii");
                }
            }
            ExperimentKind::FullyProjected => {
                if self.action != ActionKind::Rotation {
                    return bad("the fully projected experiment uses the rotation action");
                }
            }
            ExperimentKind::GeometryCheck => {
                if self.geometry_draws == 0 {
                    return bad("geometry.draws must be positive");
                }
            }
        }
        Ok(())
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let map = parse_key_values(text)?;
        // keys that others refer to go first
        const FIRST: [&str; 2] = ["orbit.radius", "potential.kind"];
        for k in FIRST {
            if let Some(v) = map.get(k) {
                cfg.set(k, v)?;
            }
        }
        for (k, v) in map.iter().filter(|(k, _)| !FIRST.contains(&k.as_str())) {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let text = "
            # main run
            experiment.name = stationary
            experiment.seed = 11   # trailing comment
            action.kind = so_d_rotation
            action.dim = 3
            potential.b = 0.25
            potential.kind = quartic
            stats.checkpoints = 0.5, 1.0
            output.dump_trajectories = true
        ";
        let cfg: ExperimentConfig = text.parse().unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Stationary);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.potential, Potential::Quartic { a: 1.0, b: 0.25 });
        assert!("potential.b = 0.5\npotential.kind = quadratic".parse::<ExperimentConfig>().is_err());
        assert_eq!(cfg.checkpoints, vec![0.5, 1.0]);
        assert!(cfg.dump_trajectories);
    }

    #[test]
    fn rejects_unknown_and_malformed_keys() {
        assert!("sde.nonsense = 1".parse::<ExperimentConfig>().is_err());
        assert!("nodot = 1".parse::<ExperimentConfig>().is_err());
        assert!("sde.dt".parse::<ExperimentConfig>().is_err());
        assert!("sde.dt = fast".parse::<ExperimentConfig>().is_err());
        assert!("sde.dt = 1\nsde.dt = 2".parse::<ExperimentConfig>().is_err());
    }

    #[test]
    fn validation_rules() {
        let mut cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig { n_trajectories: 50, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.experiment = ExperimentKind::GeometryCheck;
        cfg.validate().unwrap();

        let cfg = ExperimentConfig { bump_lo: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());

        let cfg = ExperimentConfig {
            experiment: ExperimentKind::Stationary,
            action: ActionKind::ConjugationSymmetric,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());

        let cfg = ExperimentConfig { experiment: ExperimentKind::Counterexample, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn shell_radius_follows_orbit_radius() {
        let cfg: ExperimentConfig = "sde.initial = uniform_shell\norbit.radius = 3".parse().unwrap();
        assert_eq!(cfg.initial, InitialLaw::UniformShell { radius: 3.0 });
    }
}
