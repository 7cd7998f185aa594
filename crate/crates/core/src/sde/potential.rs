//! Invariant potentials, noise profiles and the bump functions that localize
//! them, all expressed through an action's invariant statistic.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::log_orbit_volume;
use crate::group_action::{ActionKind, GroupAction, SINGULAR_GUARD};

pub type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// `6u⁵ − 15u⁴ + 10u³` clamped to `[0, 1]`.
pub fn smootherstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// Smooth bump equal to 1 on `[lo, hi]`, vanishing outside
/// `[lo − ramp_lo, hi + ramp_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
    pub ramp_lo: f64,
    pub ramp_hi: f64,
}

impl Bump {
    pub fn eval(&self, s: f64) -> f64 {
        if s >= self.lo && s <= self.hi {
            return 1.0;
        }
        let up = if self.ramp_lo > 0.0 {
            smootherstep((s - (self.lo - self.ramp_lo)) / self.ramp_lo)
        } else if s >= self.lo {
            1.0
        } else {
            0.0
        };
        let down = if self.ramp_hi > 0.0 {
            smootherstep((self.hi + self.ramp_hi - s) / self.ramp_hi)
        } else if s <= self.hi {
            1.0
        } else {
            0.0
        };
        up * down
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo - self.ramp_lo, self.hi + self.ramp_hi)
    }
}

/// Confining potentials of the norm, invariant under every isometric action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `a‖x‖²/2`
    Quadratic { a: f64 },
    /// `a‖x‖²/2 + b‖x‖⁴/4`
    Quartic { a: f64, b: f64 },
}

impl Potential {
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.radial_value(x.norm())
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let r2 = x.norm_squared();
        match *self {
            Potential::Quadratic { a } => x * a,
            Potential::Quartic { a, b } => x * (a + b * r2),
        }
    }

    pub fn radial_value(&self, r: f64) -> f64 {
        let r2 = r * r;
        match *self {
            Potential::Quadratic { a } => 0.5 * a * r2,
            Potential::Quartic { a, b } => 0.5 * a * r2 + 0.25 * b * r2 * r2,
        }
    }

    pub fn radial_derivative(&self, r: f64) -> f64 {
        match *self {
            Potential::Quadratic { a } => a * r,
            Potential::Quartic { a, b } => a * r + b * r * r * r,
        }
    }
}

/// Noise-ratio profile as a function of the log orbit volume: 1 below `tau0`,
/// `epsilon` above `tau1`, with a smootherstep transition in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogVolumeProfile {
    pub tau0: f64,
    pub tau1: f64,
    pub epsilon: f64,
}

impl LogVolumeProfile {
    pub fn new(tau0: f64, tau1: f64, epsilon: f64) -> Result<Self> {
        if !(tau0 < tau1) || !(tau1 < 0.0) {
            return Err(Error::config("profile needs tau0 < tau1 < 0"));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::config("profile plateau value must lie in [0, 1]"));
        }
        Ok(LogVolumeProfile { tau0, tau1, epsilon })
    }

    pub fn eval(&self, s: f64) -> f64 {
        let w = smootherstep((s - self.tau0) / (self.tau1 - self.tau0));
        1.0 + (self.epsilon - 1.0) * w
    }
}

/// Invariant data of a projected-noise Langevin system.
#[derive(Clone)]
pub struct PotentialSpec {
    pub f: ScalarFn,
    pub grad_f: VectorFn,
    pub alpha: ScalarFn,
    pub beta: ScalarFn,
    /// Smooth cutoff equal to 1 on the support of `α − β`.
    pub bump: ScalarFn,
    /// Radial versions `(f′, α, β)` when every field depends only on `‖x‖`.
    pub radial: Option<RadialProfile>,
    pub description: String,
}

#[derive(Clone)]
pub struct RadialProfile {
    pub f_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub alpha: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub beta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec").field("description", &self.description).finish_non_exhaustive()
    }
}

impl PotentialSpec {
    /// `α = β = noise` everywhere.
    pub fn isotropic(potential: Potential, noise: f64) -> Self {
        let f_prime = move |r: f64| potential.radial_derivative(r);
        PotentialSpec {
            f: Arc::new(move |x| potential.value(x)),
            grad_f: Arc::new(move |x| potential.gradient(x)),
            alpha: Arc::new(move |_| noise),
            beta: Arc::new(move |_| noise),
            bump: Arc::new(|_| 0.0),
            radial: Some(RadialProfile {
                f_prime: Arc::new(f_prime),
                alpha: Arc::new(move |_| noise),
                beta: Arc::new(move |_| noise),
            }),
            description: format!("{potential:?}, alpha = beta = {noise}"),
        }
    }

    /// Constant `α`, and `β = α(1 − c·shape(s))` where `shape` is a smooth
    /// bump on `[lo, hi]` in the action's invariant statistic `s`.
    ///
    /// The cover bump equals 1 on `[lo, hi]` and ramps down over a margin
    /// `min(lo/2, (hi − lo)/4)` on each side.
    pub fn beta_dip(action: &GroupAction, potential: Potential, alpha: f64, c: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::config("alpha must be positive"));
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::config("dip depth must lie in [0, 1]"));
        }
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::config("bump support must satisfy 0 < lo < hi"));
        }
        let width = hi - lo;
        let shape = Bump { lo: lo + width / 4.0, hi: hi - width / 4.0, ramp_lo: width / 4.0, ramp_hi: width / 4.0 };
        let margin = (0.5 * lo).min(0.25 * width);
        let cover = Bump { lo, hi, ramp_lo: margin, ramp_hi: margin };
        if cover.support().0 <= 10.0 * SINGULAR_GUARD {
            return Err(Error::config("bump support must stay inside the regular region"));
        }
        let act = action.clone();
        let stat = move |x: &DVector<f64>| act.invariant_statistic(x);
        let stat_b = stat.clone();
        let stat_c = stat.clone();
        let radial = (action.kind() == ActionKind::Rotation).then(|| RadialProfile {
            f_prime: Arc::new(move |r| potential.radial_derivative(r)),
            alpha: Arc::new(move |_| alpha),
            beta: Arc::new(move |r| alpha * (1.0 - c * shape.eval(r))),
        });
        Ok(PotentialSpec {
            f: Arc::new(move |x| potential.value(x)),
            grad_f: Arc::new(move |x| potential.gradient(x)),
            alpha: Arc::new(move |_| alpha),
            beta: Arc::new(move |x| alpha * (1.0 - c * shape.eval(stat_b(x)))),
            bump: Arc::new(move |x| cover.eval(stat_c(x))),
            radial,
            description: format!(
                "{potential:?}, alpha = {alpha}, beta dip {c} on [{lo}, {hi}] of the {}",
                action.kind().statistic_name()
            ),
        })
    }

    /// `α = 1`, `β = φ(log vol O_x)` for a log-volume profile `φ`.
    pub fn log_volume_profile(action: &GroupAction, potential: Potential, profile: LogVolumeProfile) -> Self {
        let act = action.clone();
        let phi_of = move |x: &DVector<f64>| match log_orbit_volume(&act, x) {
            Ok(lv) => profile.eval(lv),
            Err(_) => 1.0,
        };
        let radial = (action.kind() == ActionKind::Rotation).then(|| {
            let d = action.matrix_dim() as f64;
            RadialProfile {
                f_prime: Arc::new(move |r| potential.radial_derivative(r)) as Arc<dyn Fn(f64) -> f64 + Send + Sync>,
                alpha: Arc::new(|_| 1.0),
                beta: Arc::new(move |r: f64| if r > 0.0 { profile.eval((d - 1.0) * r.ln()) } else { 1.0 }),
            }
        });
        PotentialSpec {
            f: Arc::new(move |x| potential.value(x)),
            grad_f: Arc::new(move |x| potential.gradient(x)),
            alpha: Arc::new(|_| 1.0),
            beta: Arc::new(phi_of),
            bump: Arc::new(|_| 1.0),
            radial,
            description: format!("{potential:?}, beta = profile(log vol) {profile:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smootherstep_endpoints() {
        assert_eq!(smootherstep(-1.0), 0.0);
        assert_eq!(smootherstep(0.0), 0.0);
        assert_eq!(smootherstep(1.0), 1.0);
        assert_eq!(smootherstep(0.5), 0.5);
    }

    #[test]
    fn bump_plateau_and_support() {
        let b = Bump { lo: 1.0, hi: 2.0, ramp_lo: 0.5, ramp_hi: 0.25 };
        assert_eq!(b.eval(1.5), 1.0);
        assert_eq!(b.eval(0.5), 0.0);
        assert_eq!(b.eval(2.25), 0.0);
        assert!(b.eval(0.8) > 0.0 && b.eval(0.8) < 1.0);
    }

    #[test]
    fn beta_dip_is_localized() {
        let a = GroupAction::new(ActionKind::Rotation, 3).unwrap();
        let spec = PotentialSpec::beta_dip(&a, Potential::Quadratic { a: 1.0 }, 1.0, 0.5, 0.8, 2.5).unwrap();
        for r in [0.1, 0.5, 0.79, 2.51, 4.0] {
            let x = DVector::from_vec(vec![r, 0.0, 0.0]);
            assert_eq!((spec.alpha)(&x), (spec.beta)(&x), "r = {r}");
        }
        let mid = DVector::from_vec(vec![0.0, 1.65, 0.0]);
        assert!(((spec.beta)(&mid) - 0.5).abs() < 1e-12);
        assert_eq!((spec.bump)(&mid), 1.0);
        for r in [0.8, 1.0, 2.0, 2.5] {
            let x = DVector::from_vec(vec![r, 0.0, 0.0]);
            assert_eq!((spec.bump)(&x), 1.0);
        }
        assert_eq!((spec.bump)(&DVector::from_vec(vec![0.39, 0.0, 0.0])), 0.0);
    }

    #[test]
    fn beta_dip_rejects_bad_support() {
        let a = GroupAction::new(ActionKind::Rotation, 3).unwrap();
        let p = Potential::Quadratic { a: 1.0 };
        assert!(PotentialSpec::beta_dip(&a, p, 1.0, 0.5, 0.0, 1.0).is_err());
        assert!(PotentialSpec::beta_dip(&a, p, 1.0, 0.5, 2.0, 1.0).is_err());
        assert!(PotentialSpec::beta_dip(&a, p, 0.0, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn quartic_gradient() {
        let p = Potential::Quartic { a: 1.0, b: 0.5 };
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let g = p.gradient(&x);
        assert!((g - &x * 3.5).norm() < 1e-14);
        assert!((p.value(&x) - (2.5 + 0.125 * 25.0)).abs() < 1e-14);
    }

    #[test]
    fn profile_limits() {
        let p = LogVolumeProfile::new(-2.4, -1.0, 0.5).unwrap();
        assert_eq!(p.eval(-5.0), 1.0);
        assert_eq!(p.eval(0.0), 0.5);
        assert!(LogVolumeProfile::new(-1.0, -2.0, 0.5).is_err());
        assert!(LogVolumeProfile::new(-2.0, 0.5, 0.5).is_err());
    }
}
