//! Randomized verification of the geometric identities the dynamics rely on.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{
    coupling_operators, grad_log_orbit_volume, hessian_identity_residual, log_orbit_volume, mean_curvature,
    second_fundamental_form_group, second_fundamental_form_orbit, InvariantFunction,
};
use crate::group_action::{haar_sample, orbit_tangent_frame, ActionKind, GroupAction};
use crate::linalg::{coords_to_mat, coords_to_sym, frob_inner, mat_to_coords, sym_to_coords};

/// Maximum residual of one identity over all draws for one action.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentityResidual {
    pub identity: String,
    pub action: String,
    pub matrix_dim: usize,
    pub draws: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IdentityReport {
    pub seed: u64,
    pub residuals: Vec<IdentityResidual>,
    pub passed: bool,
}

/// Actions exercised by the default suite.
pub fn default_suite_actions() -> Vec<(ActionKind, usize)> {
    vec![
        (ActionKind::Rotation, 2),
        (ActionKind::Rotation, 3),
        (ActionKind::ConjugationSymmetric, 2),
        (ActionKind::ConjugationSymmetric, 3),
        (ActionKind::RightMultiplication, 2),
        (ActionKind::RightMultiplication, 3),
    ]
}

/// A spectral polynomial that is invariant under the given action.
pub struct SpectralPolynomial {
    kind: ActionKind,
    d: usize,
}

impl SpectralPolynomial {
    pub fn new(action: &GroupAction) -> Self {
        SpectralPolynomial { kind: action.kind(), d: action.matrix_dim() }
    }
}

impl InvariantFunction for SpectralPolynomial {
    fn value(&self, x: &DVector<f64>) -> f64 {
        match self.kind {
            ActionKind::Rotation => {
                let r2 = x.norm_squared();
                r2 * r2 / 4.0 + r2
            }
            ActionKind::ConjugationSymmetric => {
                let m = coords_to_sym(x, self.d);
                let m2 = &m * &m;
                (&m2 * &m).trace() / 3.0 + (&m2 * &m2).trace() / 4.0
            }
            ActionKind::RightMultiplication => {
                let m = coords_to_mat(x, self.d);
                let s = m.transpose() * &m;
                (&s * &s).trace() / 4.0
            }
        }
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            ActionKind::Rotation => x * (x.norm_squared() + 2.0),
            ActionKind::ConjugationSymmetric => {
                let m = coords_to_sym(x, self.d);
                let m2 = &m * &m;
                sym_to_coords(&(&m2 + &m2 * &m))
            }
            ActionKind::RightMultiplication => {
                let m = coords_to_mat(x, self.d);
                mat_to_coords(&(&m * m.transpose() * &m))
            }
        }
    }
}

/// Draws a point whose invariant statistic is at least `min_stat`.
pub fn random_regular_point<R: Rng + ?Sized>(action: &GroupAction, min_stat: f64, rng: &mut R) -> DVector<f64> {
    loop {
        let x = DVector::from_fn(action.ambient_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        if action.invariant_statistic(&x) >= min_stat {
            return x;
        }
    }
}

fn unit_algebra<R: Rng + ?Sized>(action: &GroupAction, rng: &mut R) -> DVector<f64> {
    let c = DVector::from_fn(action.algebra_dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = c.norm();
    c / n
}

/// Algebra coordinates of `R·Ω·Rᵀ`.
fn adjoint(action: &GroupAction, r: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
    let conj = r * action.algebra_matrix(c) * r.transpose();
    DVector::from_iterator(action.algebra_dim(), action.generators().iter().map(|g| frob_inner(g, &conj)))
}

fn fd_gradient(action: &GroupAction, x: &DVector<f64>) -> Result<DVector<f64>> {
    let h = 1e-4 * x.norm().max(1.0);
    let mut g = DVector::zeros(x.len());
    let at = |i: usize, k: f64| {
        let mut y = x.clone();
        y[i] += k * h;
        log_orbit_volume(action, &y)
    };
    // fourth-order central stencil
    for i in 0..x.len() {
        g[i] = (8.0 * (at(i, 1.0)? - at(i, -1.0)?) - (at(i, 2.0)? - at(i, -2.0)?)) / (12.0 * h);
    }
    Ok(g)
}

#[derive(Default)]
struct Tally {
    names: Vec<(&'static str, f64)>,
    max: Vec<f64>,
}

impl Tally {
    fn record(&mut self, name: &'static str, tol: f64, value: f64) {
        match self.names.iter().position(|(n, _)| *n == name) {
            Some(i) => self.max[i] = self.max[i].max(value),
            None => {
                self.names.push((name, tol));
                self.max.push(value);
            }
        }
    }
}

/// Minimum invariant statistic for sampled points, away from the singular set
/// so that finite differences stay well conditioned.
fn sampling_floor(kind: ActionKind) -> f64 {
    match kind {
        ActionKind::Rotation => 0.3,
        ActionKind::ConjugationSymmetric | ActionKind::RightMultiplication => 0.1,
    }
}

/// Runs every identity over `draws` random points and group elements for one
/// action.
pub fn check_action(action: &GroupAction, draws: usize, rng: &mut ChaCha8Rng) -> Result<Vec<IdentityResidual>> {
    let mut t = Tally::default();
    let phi = SpectralPolynomial::new(action);
    for _ in 0..draws {
        let x = random_regular_point(action, sampling_floor(action.kind()), rng);
        let g = haar_sample(action, rng);
        let r = action.representation(&g)?;
        let gx = action.apply(&g, &x)?;
        let omega = unit_algebra(action, rng);

        let closed = grad_log_orbit_volume(action, &x)?;
        let curv = mean_curvature(action, &x)?;
        t.record("volume_curvature_duality", 1e-7, (&closed + &curv.mean_curvature).norm() / closed.norm().max(1e-300));
        t.record("volume_gradient_finite_difference", 1e-5, (&closed - fd_gradient(action, &x)?).norm());

        let frame = orbit_tangent_frame(action, &x, None)?;
        t.record("mean_curvature_normal", 1e-9, frame.q_apply(&curv.mean_curvature).norm());

        // second fundamental form of the orbit at g·x against that of the group
        let a_tan = &r * action.algebra_matrix(&omega);
        let lhs = second_fundamental_form_orbit(action, &gx, &adjoint(action, &r, &omega))?;
        let hg = second_fundamental_form_group(&r, &a_tan)?;
        let frame_gx = orbit_tangent_frame(action, &gx, None)?;
        let rhs = frame_gx.p_apply(&(hg * &x));
        t.record("orbit_group_second_fundamental_form", 1e-8, (lhs - rhs).norm());

        t.record("hessian_identity", 1e-5, hessian_identity_residual(action, &phi, &x, &omega)?);

        t.record("gradient_equivariance", 1e-9, (&r * &closed - grad_log_orbit_volume(action, &gx)?).norm());
        let p_conj = &r * frame.p_matrix() * r.transpose();
        t.record("projection_equivariance", 1e-9, (p_conj - frame_gx.p_matrix()).norm());
        t.record("orbit_dim_stability", 0.0, (frame.orbit_dim as f64 - frame_gx.orbit_dim as f64).abs());

        let q = frame.q_matrix();
        let p = frame.p_matrix();
        let n = action.ambient_dim();
        let sym_idem = (&q * &q - &q).norm() + (&q - q.transpose()).norm() + (&p * &p - &p).norm();
        t.record("projection_idempotent_symmetric", 1e-10, sym_idem);
        t.record("projection_partition", 1e-12, (&p + &q - DMatrix::<f64>::identity(n, n)).norm());

        let s = 0.5 + rng.gen::<f64>();
        let ops = coupling_operators(action, &r, &x, s, None)?;
        let recon = &ops.l_matrix * &ops.j0 * ops.j0.transpose() * ops.l_matrix.transpose();
        t.record("diffusion_reconstruction", 1e-8, (recon - frame_gx.q_matrix() * s).norm());
        let v1_res = &ops.l_matrix * &ops.v1 + frame_gx.q_apply(&(&ops.v0 * &x));
        t.record("coupling_drift_identity", 1e-8, v1_res.norm());
        let rv0 = r.transpose() * &ops.v0;
        t.record("group_drift_symmetry", 1e-10, (&rv0 - rv0.transpose()).norm() / ops.v0.norm().max(1.0));
    }
    Ok(t
        .names
        .iter()
        .zip(&t.max)
        .map(|(&(name, tol), &max)| IdentityResidual {
            identity: name.to_string(),
            action: action.kind().tag().to_string(),
            matrix_dim: action.matrix_dim(),
            draws,
            max_residual: max,
            tolerance: tol,
            passed: max <= tol,
        })
        .collect())
}

/// Runs the suite over the given actions.
pub fn run_identity_suite(actions: &[(ActionKind, usize)], draws: usize, seed: u64) -> Result<IdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = Vec::new();
    for &(kind, d) in actions {
        let action = GroupAction::new(kind, d)?;
        residuals.extend(check_action(&action, draws, &mut rng)?);
    }
    let passed = residuals.iter().all(|r| r.passed);
    Ok(IdentityReport { seed, residuals, passed })
}
