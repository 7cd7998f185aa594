//! The projected-noise systems, their curvature-corrected counterparts, the
//! group-valued processes that couple them, and a radial reduction.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::integrator::{SdeSystem, StepReport};
use super::potential::{PotentialSpec, RadialProfile};
use crate::error::{Error, Result};
use crate::geometry::{coupling_operators, grad_log_orbit_volume_from, CurvatureSource};
use crate::group_action::{
    haar_sample, orbit_tangent_frame, retract_representation, tangent_projection, ActionKind, GroupAction,
};
use crate::linalg::orthogonality_defect;

fn singular(action: &GroupAction, x: &DVector<f64>) -> Error {
    Error::SingularOrbit { statistic: action.kind().statistic_name(), value: action.invariant_statistic(x) }
}

/// `Q_x ξ`, refusing points in the singular guard zone.
fn tangent_part(action: &GroupAction, x: &DVector<f64>, xi: &DVector<f64>) -> Result<DVector<f64>> {
    if action.in_guard_zone(x) {
        return Err(singular(action, x));
    }
    tangent_projection(action, x, xi)
}

fn curvature_gradient(
    action: &GroupAction,
    x: &DVector<f64>,
    source: CurvatureSource,
) -> Result<DVector<f64>> {
    if action.in_guard_zone(x) {
        return Err(singular(action, x));
    }
    grad_log_orbit_volume_from(action, x, source)
}

/// Which state system a coupled group process rides on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoupledBase {
    Projected,
    Isotropic,
}

impl CoupledBase {
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "projected" => Ok(CoupledBase::Projected),
            "isotropic" => Ok(CoupledBase::Isotropic),
            other => Err(Error::config(format!("unknown coupled base `{other}`"))),
        }
    }
}

/// `dX = −∇f dt + √2(αP + βQ)dB`.
pub struct ProjectedSystem {
    action: GroupAction,
    spec: PotentialSpec,
}

pub fn make_projected_system(action: &GroupAction, spec: &PotentialSpec) -> ProjectedSystem {
    ProjectedSystem { action: action.clone(), spec: spec.clone() }
}

impl ProjectedSystem {
    fn noise(&self, x: &DVector<f64>, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let a = (self.spec.alpha)(x);
        let b = (self.spec.beta)(x);
        let mut out = xi * (a * 2f64.sqrt());
        if a != b {
            out += tangent_part(&self.action, x, xi)? * ((b - a) * 2f64.sqrt());
        }
        Ok(out)
    }
}

impl SdeSystem for ProjectedSystem {
    fn dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn noise_dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn drift(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(-(self.spec.grad_f)(x))
    }

    fn diffusion_apply(&self, x: &DVector<f64>, _t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        self.noise(x, xi)
    }

    fn regularity(&self, x: &DVector<f64>) -> Option<f64> {
        Some(self.action.invariant_statistic(x))
    }

    fn tag(&self) -> String {
        format!("projected[{}]", self.action.kind().tag())
    }
}

/// `dY = −(∇f + (α² − β²)∇log vol)dt + √2 α dB`, optionally with the
/// curvature term removed.
pub struct IsotropicCurvatureSystem {
    action: GroupAction,
    spec: PotentialSpec,
    source: CurvatureSource,
    with_curvature: bool,
}

pub fn make_isotropic_curvature_system(
    action: &GroupAction,
    spec: &PotentialSpec,
    source: CurvatureSource,
) -> IsotropicCurvatureSystem {
    IsotropicCurvatureSystem { action: action.clone(), spec: spec.clone(), source, with_curvature: true }
}

/// The isotropic system with its curvature drift deleted.
pub fn make_uncorrected_isotropic_system(action: &GroupAction, spec: &PotentialSpec) -> IsotropicCurvatureSystem {
    IsotropicCurvatureSystem {
        action: action.clone(),
        spec: spec.clone(),
        source: CurvatureSource::ClosedForm,
        with_curvature: false,
    }
}

impl SdeSystem for IsotropicCurvatureSystem {
    fn dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn noise_dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn drift(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let mut out = -(self.spec.grad_f)(x);
        if self.with_curvature {
            let a = (self.spec.alpha)(x);
            let b = (self.spec.beta)(x);
            let coeff = a * a - b * b;
            if coeff != 0.0 {
                out -= curvature_gradient(&self.action, x, self.source)? * coeff;
            }
        }
        Ok(out)
    }

    fn diffusion_apply(&self, x: &DVector<f64>, _t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(xi * ((self.spec.alpha)(x) * 2f64.sqrt()))
    }

    fn regularity(&self, x: &DVector<f64>) -> Option<f64> {
        Some(self.action.invariant_statistic(x))
    }

    fn tag(&self) -> String {
        let kind = if self.with_curvature { "isotropic_curvature" } else { "isotropic_uncorrected" };
        format!("{kind}[{}]", self.action.kind().tag())
    }
}

/// `dZ = −(∇f + φ²(α² + β²)∇log vol)dt + √2(αP + √(β² + φ²(α² + β²))Q)dB`.
pub struct AuxiliarySystem {
    action: GroupAction,
    spec: PotentialSpec,
    source: CurvatureSource,
}

pub fn make_auxiliary_system(action: &GroupAction, spec: &PotentialSpec) -> AuxiliarySystem {
    AuxiliarySystem { action: action.clone(), spec: spec.clone(), source: CurvatureSource::ClosedForm }
}

impl AuxiliarySystem {
    fn kappa(&self, x: &DVector<f64>) -> (f64, f64, f64) {
        let a = (self.spec.alpha)(x);
        let b = (self.spec.beta)(x);
        let phi = (self.spec.bump)(x);
        (a, b, phi * phi * (a * a + b * b))
    }
}

impl SdeSystem for AuxiliarySystem {
    fn dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn noise_dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn drift(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let mut out = -(self.spec.grad_f)(x);
        let (_, _, kappa) = self.kappa(x);
        if kappa != 0.0 {
            out -= curvature_gradient(&self.action, x, self.source)? * kappa;
        }
        Ok(out)
    }

    fn diffusion_apply(&self, x: &DVector<f64>, _t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let (a, b, kappa) = self.kappa(x);
        let tangential = (b * b + kappa).sqrt();
        let mut out = xi * (a * 2f64.sqrt());
        if tangential != a {
            out += tangent_part(&self.action, x, xi)? * ((tangential - a) * 2f64.sqrt());
        }
        Ok(out)
    }

    fn regularity(&self, x: &DVector<f64>) -> Option<f64> {
        Some(self.action.invariant_statistic(x))
    }

    fn tag(&self) -> String {
        format!("auxiliary[{}]", self.action.kind().tag())
    }
}

/// `dX = −∇f dt + √2 P dB`.
pub struct FullyProjectedSystem {
    action: GroupAction,
    spec: PotentialSpec,
}

pub fn make_fully_projected_system(action: &GroupAction, spec: &PotentialSpec) -> FullyProjectedSystem {
    FullyProjectedSystem { action: action.clone(), spec: spec.clone() }
}

impl SdeSystem for FullyProjectedSystem {
    fn dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn noise_dim(&self) -> usize {
        self.action.ambient_dim()
    }

    fn drift(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(-(self.spec.grad_f)(x))
    }

    fn diffusion_apply(&self, x: &DVector<f64>, _t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        Ok((xi - tangent_projection(&self.action, x, xi)?) * 2f64.sqrt())
    }

    fn regularity(&self, x: &DVector<f64>) -> Option<f64> {
        Some(self.action.invariant_statistic(x))
    }

    fn tag(&self) -> String {
        format!("fully_projected[{}]", self.action.kind().tag())
    }
}

/// Column-major `n×n` matrix stored in a state slice.
fn matrix_from(slice: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, slice)
}

/// Euler increment of the represented group element `R`:
/// `(V₀ + V₁)dt + √2·J₀ξ·√dt` in the frame `{R·Gᵢ}`.
fn group_increment(
    action: &GroupAction,
    r: &DMatrix<f64>,
    x: &DVector<f64>,
    noise_scale: f64,
    dt: f64,
    xi: &[f64],
) -> Result<DMatrix<f64>> {
    let n = action.ambient_dim();
    if noise_scale == 0.0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let ops = coupling_operators(action, r, x, noise_scale, None)?;
    let xi = DVector::from_column_slice(xi);
    let mut inc = (&ops.v0 + ops.v1_matrix(action, r)) * dt;
    inc += ops.diffusion_matrix(action, r, &xi) * (2.0 * dt).sqrt();
    Ok(inc)
}

fn retract_block(action: &GroupAction, prev: &[f64], next: &[f64], n: usize) -> Result<(DMatrix<f64>, StepReport)> {
    let next_m = matrix_from(next, n);
    if prev == next {
        let d = orthogonality_defect(&next_m);
        return Ok((next_m, StepReport { pre_defect: d, post_defect: d }));
    }
    let pre = orthogonality_defect(&next_m);
    let r = retract_representation(action, &matrix_from(prev, n), &next_m)?;
    let post = orthogonality_defect(&r);
    Ok((r, StepReport { pre_defect: pre, post_defect: post }))
}

/// Group-valued process whose image through `x_anchor` is Brownian motion on
/// the orbit, with generator `diffusion_const·Δ_{O_x}`.
///
/// The state is `ρ(g)` stored column-major.
pub struct OrbitBmSystem {
    action: GroupAction,
    anchor: DVector<f64>,
    anchor_norm: f64,
    anchor_statistic: f64,
    diffusion_const: f64,
}

pub fn make_orbit_bm_system(action: &GroupAction, x_anchor: &DVector<f64>, diffusion_const: f64) -> Result<OrbitBmSystem> {
    let frame = orbit_tangent_frame(action, x_anchor, None)?;
    if !frame.regular {
        return Err(singular(action, x_anchor));
    }
    if !(diffusion_const >= 0.0) {
        return Err(Error::config("diffusion constant must be nonnegative"));
    }
    Ok(OrbitBmSystem {
        action: action.clone(),
        anchor: x_anchor.clone(),
        anchor_norm: x_anchor.norm(),
        anchor_statistic: action.invariant_statistic(x_anchor),
        diffusion_const,
    })
}

impl OrbitBmSystem {
    /// The identity element as a state vector.
    pub fn initial_state(&self) -> DVector<f64> {
        let n = self.action.ambient_dim();
        DVector::from_column_slice(DMatrix::<f64>::identity(n, n).as_slice())
    }

    pub fn group_element(&self, state: &DVector<f64>) -> DMatrix<f64> {
        matrix_from(state.as_slice(), self.action.ambient_dim())
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }
}

impl SdeSystem for OrbitBmSystem {
    fn dim(&self) -> usize {
        let n = self.action.ambient_dim();
        n * n
    }

    fn noise_dim(&self) -> usize {
        self.action.algebra_dim()
    }

    fn drift(&self, state: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let r = self.group_element(state);
        let inc = group_increment(&self.action, &r, &self.anchor, self.diffusion_const, 1.0, &vec![0.0; self.noise_dim()])?;
        Ok(DVector::from_column_slice(inc.as_slice()))
    }

    fn diffusion_apply(&self, state: &DVector<f64>, _t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let r = self.group_element(state);
        if self.diffusion_const == 0.0 {
            return Ok(DVector::zeros(self.dim()));
        }
        let ops = coupling_operators(&self.action, &r, &self.anchor, self.diffusion_const, None)?;
        let m = ops.diffusion_matrix(&self.action, &r, xi) * 2f64.sqrt();
        Ok(DVector::from_column_slice(m.as_slice()))
    }

    fn euler_step(&self, state: &DVector<f64>, _t: f64, dt: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let r = self.group_element(state);
        let inc = group_increment(&self.action, &r, &self.anchor, self.diffusion_const, dt, xi.as_slice())?;
        Ok(DVector::from_column_slice((r + inc).as_slice()))
    }

    fn post_step(&self, prev: &DVector<f64>, next: DVector<f64>) -> Result<(DVector<f64>, StepReport)> {
        let (r, rep) = retract_block(&self.action, prev.as_slice(), next.as_slice(), self.action.ambient_dim())?;
        Ok((DVector::from_column_slice(r.as_slice()), rep))
    }

    fn image(&self, state: &DVector<f64>) -> DVector<f64> {
        self.group_element(state) * &self.anchor
    }

    /// `|‖g·x‖ − ‖x‖|`, plus the drift of the orbit invariant when the orbit
    /// is not a round sphere.
    fn conservation_defect(&self, state: &DVector<f64>) -> Option<f64> {
        let img = self.image(state);
        let mut defect = (img.norm() - self.anchor_norm).abs();
        if self.action.kind() != ActionKind::Rotation {
            defect = defect.max((self.action.invariant_statistic(&img) - self.anchor_statistic).abs());
        }
        Some(defect)
    }

    fn tag(&self) -> String {
        format!("orbit_bm[{}]", self.action.kind().tag())
    }
}

/// Joint process `(X, g)` where `X` follows a projected or isotropic system
/// and `g` is driven by an independent noise block so that `g·X` follows the
/// auxiliary system in law.
///
/// The state is `[x; vec ρ(g)]`, the group block stored column-major.
pub struct CoupledSystem {
    action: GroupAction,
    spec: PotentialSpec,
    base: CoupledBase,
    projected: ProjectedSystem,
    isotropic: IsotropicCurvatureSystem,
}

pub fn make_coupled_system(action: &GroupAction, spec: &PotentialSpec, base: CoupledBase) -> CoupledSystem {
    CoupledSystem {
        action: action.clone(),
        spec: spec.clone(),
        base,
        projected: make_projected_system(action, spec),
        isotropic: make_isotropic_curvature_system(action, spec, CurvatureSource::ClosedForm),
    }
}

impl CoupledSystem {
    pub fn initial_state(&self, x0: &DVector<f64>) -> DVector<f64> {
        let n = self.action.ambient_dim();
        let mut s = DVector::zeros(n + n * n);
        s.rows_mut(0, n).copy_from(x0);
        for i in 0..n {
            s[n + i * n + i] = 1.0;
        }
        s
    }

    pub fn split(&self, state: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.action.ambient_dim();
        (state.rows(0, n).into_owned(), matrix_from(&state.as_slice()[n..], n))
    }

    fn noise_scale(&self, x: &DVector<f64>) -> f64 {
        let a = (self.spec.alpha)(x);
        let b = (self.spec.beta)(x);
        let phi = (self.spec.bump)(x);
        match self.base {
            CoupledBase::Projected => phi * phi * (a * a + b * b),
            CoupledBase::Isotropic => 2.0 * phi * phi * b * b,
        }
    }

    fn base_system(&self) -> &dyn SdeSystem {
        match self.base {
            CoupledBase::Projected => &self.projected,
            CoupledBase::Isotropic => &self.isotropic,
        }
    }
}

impl SdeSystem for CoupledSystem {
    fn dim(&self) -> usize {
        let n = self.action.ambient_dim();
        n + n * n
    }

    fn noise_dim(&self) -> usize {
        self.action.ambient_dim() + self.action.algebra_dim()
    }

    fn noise_blocks(&self) -> Vec<usize> {
        vec![self.action.ambient_dim(), self.action.algebra_dim()]
    }

    fn drift(&self, state: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let n = self.action.ambient_dim();
        let (x, r) = self.split(state);
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(0, n).copy_from(&self.base_system().drift(&x, t)?);
        let zeros = vec![0.0; self.action.algebra_dim()];
        let g = group_increment(&self.action, &r, &x, self.noise_scale(&x), 1.0, &zeros)?;
        out.rows_mut(n, n * n).copy_from_slice(g.as_slice());
        Ok(out)
    }

    fn diffusion_apply(&self, state: &DVector<f64>, t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.action.ambient_dim();
        let (x, r) = self.split(state);
        let mut out = DVector::zeros(self.dim());
        let xi_x = xi.rows(0, n).into_owned();
        out.rows_mut(0, n).copy_from(&self.base_system().diffusion_apply(&x, t, &xi_x)?);
        let s = self.noise_scale(&x);
        if s != 0.0 {
            let ops = coupling_operators(&self.action, &r, &x, s, None)?;
            let xi_g = xi.rows(n, self.action.algebra_dim()).into_owned();
            let m = ops.diffusion_matrix(&self.action, &r, &xi_g) * 2f64.sqrt();
            out.rows_mut(n, n * n).copy_from_slice(m.as_slice());
        }
        Ok(out)
    }

    fn euler_step(&self, state: &DVector<f64>, t: f64, dt: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.action.ambient_dim();
        let (x, r) = self.split(state);
        let xi_x = xi.rows(0, n).into_owned();
        let x_next = self.base_system().euler_step(&x, t, dt, &xi_x)?;
        let inc = group_increment(&self.action, &r, &x, self.noise_scale(&x), dt, &xi.as_slice()[n..])?;
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(0, n).copy_from(&x_next);
        out.rows_mut(n, n * n).copy_from_slice((r + inc).as_slice());
        Ok(out)
    }

    fn post_step(&self, prev: &DVector<f64>, mut next: DVector<f64>) -> Result<(DVector<f64>, StepReport)> {
        let n = self.action.ambient_dim();
        let (r, rep) = retract_block(&self.action, &prev.as_slice()[n..], &next.as_slice()[n..], n)?;
        next.rows_mut(n, n * n).copy_from_slice(r.as_slice());
        Ok((next, rep))
    }

    fn regularity(&self, state: &DVector<f64>) -> Option<f64> {
        let n = self.action.ambient_dim();
        Some(self.action.invariant_statistic(&state.rows(0, n).into_owned()))
    }

    fn image(&self, state: &DVector<f64>) -> DVector<f64> {
        let (x, r) = self.split(state);
        r * x
    }

    fn tag(&self) -> String {
        let base = match self.base {
            CoupledBase::Projected => "projected",
            CoupledBase::Isotropic => "isotropic",
        };
        format!("coupled_{base}[{}]", self.action.kind().tag())
    }
}

/// Radial reduction of the projected and curvature-corrected systems under
/// rotations of `ℝᵈ`: `dr = (−f′(r) + β(r)²(d − 1)/r)dt + √2 α(r)dW`,
/// reflected at `r = 1e−6`.
pub struct RadialOracleSystem {
    profile: RadialProfile,
    d: usize,
}

pub const RADIAL_FLOOR: f64 = 1e-6;

pub fn radial_oracle_system(profile: &RadialProfile, d: usize) -> Result<RadialOracleSystem> {
    if d < 2 {
        return Err(Error::config("radial reduction needs d ≥ 2"));
    }
    Ok(RadialOracleSystem { profile: profile.clone(), d })
}

impl SdeSystem for RadialOracleSystem {
    fn dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn drift(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let r = x[0];
        let b = (self.profile.beta)(r);
        Ok(DVector::from_element(1, -(self.profile.f_prime)(r) + b * b * (self.d as f64 - 1.0) / r))
    }

    fn diffusion_apply(&self, x: &DVector<f64>, _t: f64, xi: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(xi * ((self.profile.alpha)(x[0]) * 2f64.sqrt()))
    }

    fn post_step(&self, _prev: &DVector<f64>, mut next: DVector<f64>) -> Result<(DVector<f64>, StepReport)> {
        if next[0] < RADIAL_FLOOR {
            next[0] = 2.0 * RADIAL_FLOOR - next[0];
        }
        Ok((next, StepReport::default()))
    }

    fn tag(&self) -> String {
        format!("radial_oracle[d={}]", self.d)
    }
}

/// Invariant initial laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    /// Standard normal in isometric coordinates.
    IsotropicGaussian,
    /// Haar orbit of a fixed reference point of norm `radius`.
    UniformShell { radius: f64 },
}

/// Regular reference point of unit norm for each action.
pub fn reference_point(action: &GroupAction) -> DVector<f64> {
    let n = action.ambient_dim();
    let d = action.matrix_dim();
    let mut x = DVector::zeros(n);
    match action.kind() {
        ActionKind::Rotation => x[0] = 1.0,
        ActionKind::ConjugationSymmetric => {
            for i in 0..d {
                x[i] = (d - i) as f64;
            }
        }
        ActionKind::RightMultiplication => {
            for i in 0..d {
                x[i * d + i] = (d - i) as f64;
            }
        }
    }
    let norm = x.norm();
    x / norm
}

pub fn sample_invariant_initial<R: Rng + ?Sized>(action: &GroupAction, law: InitialLaw, rng: &mut R) -> DVector<f64> {
    match law {
        InitialLaw::IsotropicGaussian => {
            DVector::from_fn(action.ambient_dim(), |_, _| rng.sample::<f64, _>(StandardNormal))
        }
        InitialLaw::UniformShell { radius } => {
            let g = haar_sample(action, rng);
            let x = reference_point(action) * radius;
            action.apply(&g, &x).expect("reference point has the ambient dimension")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::integrator::{integrate, simulate_batch, BatchConfig};
    use crate::sde::potential::Potential;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_vec(xs.to_vec())
    }

    fn rot3() -> GroupAction {
        GroupAction::new(ActionKind::Rotation, 3).unwrap()
    }

    fn quad() -> Potential {
        Potential::Quadratic { a: 1.0 }
    }

    #[test]
    fn equal_noise_is_isotropic() {
        let a = rot3();
        let sys = make_projected_system(&a, &PotentialSpec::isotropic(quad(), 1.0));
        let xi = v(&[0.3, -1.0, 2.0]);
        let out = sys.diffusion_apply(&v(&[1.0, 2.0, 0.5]), 0.0, &xi).unwrap();
        assert!((out - &xi * 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn zero_tangential_noise_is_radial() {
        let a = rot3();
        let mut spec = PotentialSpec::isotropic(quad(), 1.0);
        spec.beta = std::sync::Arc::new(|_| 0.0);
        let sys = make_projected_system(&a, &spec);
        let out = sys.diffusion_apply(&v(&[2.0, 0.0, 0.0]), 0.0, &v(&[0.3, -1.0, 2.0])).unwrap();
        assert!(out[1].abs() < 1e-12 && out[2].abs() < 1e-12);
        assert!((out[0] - 0.3 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn isotropic_drift_examples() {
        let a = rot3();
        let sys = make_isotropic_curvature_system(&a, &PotentialSpec::isotropic(quad(), 1.0), CurvatureSource::ClosedForm);
        let x = v(&[2.0, 0.0, 0.0]);
        assert!((sys.drift(&x, 0.0).unwrap() + &x).norm() < 1e-15);

        let mut spec = PotentialSpec::isotropic(quad(), 1.0);
        spec.beta = std::sync::Arc::new(|_| 0.0);
        for source in [CurvatureSource::ClosedForm, CurvatureSource::CurvatureTrace] {
            let sys = make_isotropic_curvature_system(&a, &spec, source);
            let drift = sys.drift(&x, 0.0).unwrap();
            assert!((drift - v(&[-3.0, 0.0, 0.0])).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_zone_with_active_curvature_aborts() {
        let a = rot3();
        let mut spec = PotentialSpec::isotropic(quad(), 1.0);
        spec.beta = std::sync::Arc::new(|_| 0.5);
        let sys = make_isotropic_curvature_system(&a, &spec, CurvatureSource::ClosedForm);
        assert!(matches!(sys.drift(&DVector::zeros(3), 0.0), Err(Error::SingularOrbit { .. })));
        let proj = make_projected_system(&a, &spec);
        assert!(matches!(proj.diffusion_apply(&DVector::zeros(3), 0.0, &v(&[1.0, 0.0, 0.0])), Err(Error::SingularOrbit { .. })));
    }

    #[test]
    fn auxiliary_without_bump_is_projected() {
        let a = rot3();
        let mut spec = PotentialSpec::beta_dip(&a, quad(), 1.0, 0.5, 0.8, 2.5).unwrap();
        spec.bump = std::sync::Arc::new(|_| 0.0);
        spec.beta = spec.alpha.clone();
        let aux = make_auxiliary_system(&a, &spec);
        let proj = make_projected_system(&a, &spec);
        let x = v(&[1.0, 1.0, 0.2]);
        let xi = v(&[0.1, 0.7, -0.4]);
        assert!((aux.drift(&x, 0.0).unwrap() - proj.drift(&x, 0.0).unwrap()).norm() < 1e-15);
        assert!((aux.diffusion_apply(&x, 0.0, &xi).unwrap() - proj.diffusion_apply(&x, 0.0, &xi).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn auxiliary_coefficient_identity() {
        let a = rot3();
        let spec = PotentialSpec::beta_dip(&a, quad(), 1.3, 0.5, 0.8, 2.5).unwrap();
        for r in [0.8, 1.0, 1.3, 1.65, 2.2, 2.5] {
            let x = v(&[0.0, 0.0, r]);
            let (al, be, phi) = ((spec.alpha)(&x), (spec.beta)(&x), (spec.bump)(&x));
            assert_eq!(phi, 1.0);
            let lhs = al * al + 2.0 * phi * phi * be * be;
            let rhs = be * be + phi * phi * (al * al + be * be);
            assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn fully_projected_has_no_tangential_noise() {
        let a = rot3();
        let sys = make_fully_projected_system(&a, &PotentialSpec::isotropic(quad(), 1.0));
        let x = v(&[0.0, 1.5, 0.0]);
        let out = sys.diffusion_apply(&x, 0.0, &v(&[0.4, -0.9, 1.2])).unwrap();
        assert!(out[0].abs() < 1e-12 && out[2].abs() < 1e-12);
    }

    #[test]
    fn orbit_bm_without_diffusion_stays_at_identity() {
        let a = GroupAction::new(ActionKind::Rotation, 2).unwrap();
        let sys = make_orbit_bm_system(&a, &v(&[2.0, 0.0]), 0.0).unwrap();
        let tr = integrate(&sys, &sys.initial_state(), 0.01, 0.5, 1).unwrap();
        for s in &tr.states {
            assert_eq!(s, &sys.initial_state());
        }
    }

    #[test]
    fn orbit_bm_rejects_singular_anchor() {
        let a = GroupAction::new(ActionKind::ConjugationSymmetric, 2).unwrap();
        assert!(make_orbit_bm_system(&a, &v(&[1.0, 1.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn orbit_bm_stays_in_group_for_every_action() {
        for (kind, x) in [
            (ActionKind::Rotation, v(&[1.0, 0.5, -0.3])),
            (ActionKind::ConjugationSymmetric, v(&[2.0, 1.0, -0.5, 0.3, 0.1, 0.7])),
            (ActionKind::RightMultiplication, v(&[1.0, 0.2, -0.3, 0.5])),
        ] {
            let d = if kind == ActionKind::RightMultiplication { 2 } else { 3 };
            let a = GroupAction::new(kind, d).unwrap();
            let sys = make_orbit_bm_system(&a, &x, 1.0).unwrap();
            let tr = integrate(&sys, &sys.initial_state(), 1e-3, 0.2, 5).unwrap();
            assert!(tr.diagnostics.max_post_retraction_defect < 1e-10, "{kind:?}");
            for s in &tr.states {
                let img = sys.image(s);
                assert!((img.norm() - x.norm()).abs() < 1e-9);
                assert!((a.invariant_statistic(&img) - a.invariant_statistic(&x)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn coupled_without_bump_keeps_identity() {
        let a = rot3();
        let mut spec = PotentialSpec::beta_dip(&a, quad(), 1.0, 0.5, 0.8, 2.5).unwrap();
        spec.bump = std::sync::Arc::new(|_| 0.0);
        for base in [CoupledBase::Projected, CoupledBase::Isotropic] {
            let sys = make_coupled_system(&a, &spec, base);
            let x0 = v(&[1.0, 0.4, -0.2]);
            let tr = integrate(&sys, &sys.initial_state(&x0), 1e-2, 0.3, 8).unwrap();
            let base_sys: Box<dyn SdeSystem> = match base {
                CoupledBase::Projected => Box::new(make_projected_system(&a, &spec)),
                CoupledBase::Isotropic => Box::new(make_isotropic_curvature_system(&a, &spec, CurvatureSource::ClosedForm)),
            };
            // same x-noise block seed as the coupled run
            let bt = integrate(base_sys.as_ref(), &x0, 1e-2, 0.3, 8).unwrap();
            for (s, b) in tr.states.iter().zip(&bt.states) {
                let (x, r) = sys.split(s);
                assert_eq!(r, DMatrix::identity(3, 3));
                assert_eq!(&x, b);
                assert_eq!(&sys.image(s), b);
            }
        }
    }

    #[test]
    fn radial_oracle_reflects() {
        let prof = PotentialSpec::isotropic(quad(), 1.0).radial.unwrap();
        let sys = radial_oracle_system(&prof, 3).unwrap();
        let (r, _) = sys.post_step(&v(&[0.1]), v(&[-0.05])).unwrap();
        assert!(r[0] > 0.0);
        assert!(radial_oracle_system(&prof, 1).is_err());
        let mut no_tan = prof.clone();
        no_tan.beta = std::sync::Arc::new(|_| 0.0);
        let sys = radial_oracle_system(&no_tan, 3).unwrap();
        assert_eq!(sys.drift(&v(&[2.0]), 0.0).unwrap()[0], -2.0);
    }

    #[test]
    fn shell_initial_has_fixed_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [ActionKind::Rotation, ActionKind::ConjugationSymmetric, ActionKind::RightMultiplication] {
            let a = GroupAction::new(kind, 3).unwrap();
            for _ in 0..5 {
                let x = sample_invariant_initial(&a, InitialLaw::UniformShell { radius: 2.0 }, &mut rng);
                assert!((x.norm() - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ou_variance() {
        let sys = crate::sde::integrator::FnSystem {
            dim: 1,
            noise_dim: 1,
            drift: |x: &DVector<f64>, _| -x,
            diffusion: |_: &DVector<f64>, _, xi: &DVector<f64>| xi * 2f64.sqrt(),
            tag: "ou".into(),
        };
        let init = vec![DVector::zeros(1); 10_000];
        let b = simulate_batch(&sys, &init, &BatchConfig::new(1e-2, 1.0, 42)).unwrap();
        let xs: Vec<f64> = b.terminal().iter().map(|x| x[0]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((var - (1.0 - (-2f64).exp())).abs() < 0.05, "{var}");
    }
}
