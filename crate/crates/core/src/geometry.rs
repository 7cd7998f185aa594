//! Extrinsic geometry of orbits and of the group, and the operators that
//! drive a group-valued process whose image moves on an orbit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_action::{
    default_rank_tol, orbit_tangent_frame, ActionKind, GroupAction, ProjectionPair, SINGULAR_GUARD,
};
use crate::linalg::{coords_to_mat, coords_to_sym, mat_to_coords, sorted_svd, sorted_sym_eigen, sym_to_coords};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureSource {
    ClosedForm,
    CurvatureTrace,
}

impl CurvatureSource {
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "closed_form" => Ok(CurvatureSource::ClosedForm),
            "curvature_trace" => Ok(CurvatureSource::CurvatureTrace),
            other => Err(Error::config(format!("unknown curvature source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub base_point: DVector<f64>,
    pub mean_curvature: DVector<f64>,
    pub grad_log_volume: DVector<f64>,
    pub source: CurvatureSource,
}

/// `h_x(v, v)` for `v = ξ(Ω, x)`, using the linear extension `V(y) = ξ(Ω, y)`:
/// `P_x(ξ(Ω, ξ(Ω, x)))`.
pub fn second_fundamental_form_orbit(
    action: &GroupAction,
    x: &DVector<f64>,
    omega: &DVector<f64>,
) -> Result<DVector<f64>> {
    let frame = orbit_tangent_frame(action, x, None)?;
    Ok(sff_with_frame(action, &frame, omega))
}

fn sff_with_frame(action: &GroupAction, frame: &ProjectionPair, omega: &DVector<f64>) -> DVector<f64> {
    let x = &frame.base_point;
    let v = action.infinitesimal_action(omega, x);
    frame.p_apply(&action.infinitesimal_action(omega, &v))
}

/// Mean curvature by tracing the second fundamental form over algebra
/// elements whose images form an orthonormal frame of `T_x O_x`.
pub fn mean_curvature(action: &GroupAction, x: &DVector<f64>) -> Result<CurvatureData> {
    action.check_point(x)?;
    let images = action.generator_images(x);
    let svd = sorted_svd(&images);
    let tol = default_rank_tol(x);
    let m = svd.singular_values.iter().take_while(|&&s| s > tol).count();
    if m != action.max_orbit_dim() {
        return Err(Error::SingularOrbit {
            statistic: action.kind().statistic_name(),
            value: action.invariant_statistic(x),
        });
    }
    let frame = ProjectionPair {
        base_point: x.clone(),
        tangent_frame: svd.u.columns(0, m).into_owned(),
        orbit_dim: m,
        regular: true,
    };
    let mut h = DVector::zeros(x.len());
    for i in 0..m {
        let omega = svd.v.column(i) / svd.singular_values[i];
        h += sff_with_frame(action, &frame, &omega);
    }
    Ok(CurvatureData {
        base_point: x.clone(),
        grad_log_volume: -&h,
        mean_curvature: h,
        source: CurvatureSource::CurvatureTrace,
    })
}

fn singular(action: &GroupAction, value: f64) -> Error {
    Error::SingularOrbit { statistic: action.kind().statistic_name(), value }
}

/// Log orbit volume up to the action's additive constant.
pub fn log_orbit_volume(action: &GroupAction, x: &DVector<f64>) -> Result<f64> {
    action.check_point(x)?;
    let d = action.matrix_dim();
    match action.kind() {
        ActionKind::Rotation => {
            let r = x.norm();
            if r < SINGULAR_GUARD {
                return Err(singular(action, r));
            }
            Ok((d as f64 - 1.0) * r.ln())
        }
        ActionKind::ConjugationSymmetric => {
            let (vals, _) = sorted_sym_eigen(&coords_to_sym(x, d));
            let mut acc = 0.0;
            let mut min_gap = f64::INFINITY;
            for i in 0..d {
                for j in (i + 1)..d {
                    let gap = (vals[i] - vals[j]).abs();
                    min_gap = min_gap.min(gap);
                    acc += gap.ln();
                }
            }
            if min_gap < SINGULAR_GUARD {
                return Err(singular(action, min_gap));
            }
            Ok(acc)
        }
        ActionKind::RightMultiplication => {
            let s = sorted_svd(&coords_to_mat(x, d)).singular_values;
            let smin = *s.last().unwrap();
            if smin < SINGULAR_GUARD {
                return Err(singular(action, smin));
            }
            let mut acc = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    acc += 0.5 * (s[i] * s[i] + s[j] * s[j]).ln();
                }
            }
            Ok(acc)
        }
    }
}

/// Closed-form `∇ log vol O_x` from eigenvalue / singular-value perturbation.
pub fn grad_log_orbit_volume(action: &GroupAction, x: &DVector<f64>) -> Result<DVector<f64>> {
    action.check_point(x)?;
    let d = action.matrix_dim();
    match action.kind() {
        ActionKind::Rotation => {
            let r2 = x.norm_squared();
            if r2.sqrt() < SINGULAR_GUARD {
                return Err(singular(action, r2.sqrt()));
            }
            Ok(x * ((d as f64 - 1.0) / r2))
        }
        ActionKind::ConjugationSymmetric => {
            let (vals, vecs) = sorted_sym_eigen(&coords_to_sym(x, d));
            let mut grad = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in (i + 1)..d {
                    let gap = vals[i] - vals[j];
                    if gap.abs() < SINGULAR_GUARD {
                        return Err(singular(action, gap.abs()));
                    }
                    let ui = vecs.column(i);
                    let uj = vecs.column(j);
                    grad += (ui * ui.transpose() - uj * uj.transpose()) / gap;
                }
            }
            Ok(sym_to_coords(&grad))
        }
        ActionKind::RightMultiplication => {
            let svd = sorted_svd(&coords_to_mat(x, d));
            let s = &svd.singular_values;
            let smin = *s.last().unwrap();
            if smin < SINGULAR_GUARD {
                return Err(singular(action, smin));
            }
            // ∂σᵢ/∂M = uᵢvᵢᵀ
            let mut grad = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in (i + 1)..d {
                    let denom = s[i] * s[i] + s[j] * s[j];
                    grad += (svd.u.column(i) * svd.v.column(i).transpose() * s[i]
                        + svd.u.column(j) * svd.v.column(j).transpose() * s[j])
                        / denom;
                }
            }
            Ok(mat_to_coords(&grad))
        }
    }
}

/// `∇ log vol O_x` from the requested source.
pub fn grad_log_orbit_volume_from(
    action: &GroupAction,
    x: &DVector<f64>,
    source: CurvatureSource,
) -> Result<DVector<f64>> {
    match source {
        CurvatureSource::ClosedForm => grad_log_orbit_volume(action, x),
        CurvatureSource::CurvatureTrace => {
            if action.in_guard_zone(x) {
                return Err(singular(action, action.invariant_statistic(x)));
            }
            Ok(mean_curvature(action, x)?.grad_log_volume)
        }
    }
}

/// Second fundamental form of `G ⊂ ℝ^{n×n}` at `g`: `h_g(B, B) = B gᵀ B`.
pub fn second_fundamental_form_group(g: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gtb = g.transpose() * b;
    let defect = (&gtb + gtb.transpose()).norm();
    if defect > 1e-8 * b.norm().max(1.0) {
        return Err(Error::NotTangent { defect });
    }
    Ok(b * g.transpose() * b)
}

/// `L_{g,x}` with its pseudo-inverse and the drift/diffusion of the
/// group-valued process, all at a represented group element `R = ρ(g)`.
///
/// Algebra coordinates refer to the tangent frame `{R·Gᵢ}`.
#[derive(Debug, Clone)]
pub struct CouplingOperators {
    /// `n×k`, column `i` is `R·Gᵢ·x`.
    pub l_matrix: DMatrix<f64>,
    /// `k×n`.
    pub l_pinv: DMatrix<f64>,
    /// `k×k`, `√s · (LᵀL)^{†/2}`.
    pub j0: DMatrix<f64>,
    /// `n×n`, `s · Σᵢ σᵢ⁻² h_R(Aᵢ, Aᵢ)` over the right singular directions.
    pub v0: DMatrix<f64>,
    /// Algebra coordinates of `V₁ = −L†·Q_{Rx}(V₀x)`.
    pub v1: DVector<f64>,
    pub rank: usize,
    pub pinv_tol: f64,
    pub noise_scale: f64,
}

impl CouplingOperators {
    /// `V₁` as an `n×n` matrix in `T_R G`.
    pub fn v1_matrix(&self, action: &GroupAction, r: &DMatrix<f64>) -> DMatrix<f64> {
        r * action.algebra_matrix(&self.v1)
    }

    /// Matrix increment `Σⱼ (J₀ξ)ⱼ R·Gⱼ` for algebra noise `ξ`.
    pub fn diffusion_matrix(&self, action: &GroupAction, r: &DMatrix<f64>, xi: &DVector<f64>) -> DMatrix<f64> {
        r * action.algebra_matrix(&(&self.j0 * xi))
    }
}

/// Builds the coupling operators at `(R, x)`.
///
/// `pinv_tol` defaults to `1e−8·σ_max`. The truncated rank must equal the
/// orbit dimension of `x`.
pub fn coupling_operators(
    action: &GroupAction,
    r: &DMatrix<f64>,
    x: &DVector<f64>,
    noise_scale: f64,
    pinv_tol: Option<f64>,
) -> Result<CouplingOperators> {
    action.check_point(x)?;
    let n = action.ambient_dim();
    let k = action.algebra_dim();
    let frame: Vec<DMatrix<f64>> = action.generators().iter().map(|g| r * g).collect();
    let mut l = DMatrix::zeros(n, k);
    for (i, f) in frame.iter().enumerate() {
        l.set_column(i, &(f * x));
    }
    let svd = sorted_svd(&l);
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let tol = pinv_tol.unwrap_or(1e-8 * smax);
    let rank = svd.singular_values.iter().take_while(|&&s| s > tol && s > 0.0).count();
    let orbit = orbit_tangent_frame(action, x, None)?;
    if rank != orbit.orbit_dim {
        return Err(Error::RankDeficient { rank, expected: orbit.orbit_dim });
    }

    let mut l_pinv = DMatrix::zeros(k, n);
    let mut inv_sqrt = DMatrix::zeros(k, k);
    let mut v0 = DMatrix::zeros(n, n);
    let rt = r.transpose();
    for i in 0..rank {
        let s = svd.singular_values[i];
        let w = svd.v.column(i);
        let u = svd.u.column(i);
        l_pinv += (w * u.transpose()) / s;
        inv_sqrt += (w * w.transpose()) / s;
        if noise_scale != 0.0 {
            let mut a = DMatrix::zeros(n, n);
            for (j, f) in frame.iter().enumerate() {
                a += f * w[j];
            }
            v0 += (&a * &rt * &a) * (noise_scale / (s * s));
        }
    }
    let j0 = inv_sqrt * noise_scale.max(0.0).sqrt();
    let v1 = if noise_scale != 0.0 {
        let y = r * x;
        let q_part = {
            // range of L is T_{Rx} O_x, spanned by the retained left singular vectors
            let u = svd.u.columns(0, rank);
            let v0x = &v0 * x;
            u * (u.transpose() * v0x)
        };
        debug_assert_eq!(y.len(), n);
        -(&l_pinv * q_part)
    } else {
        DVector::zeros(k)
    };
    Ok(CouplingOperators { l_matrix: l, l_pinv, j0, v0, v1, rank, pinv_tol: tol, noise_scale })
}

/// A smooth `G`-invariant scalar function with an analytic gradient.
pub trait InvariantFunction {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// `|∇²φ[v,v] + ⟨∇φ(x), h_x(v,v)⟩|` with `v = ξ(Ω, x)`; the Hessian is taken
/// by central differences of the analytic gradient along `v`.
pub fn hessian_identity_residual(
    action: &GroupAction,
    phi: &dyn InvariantFunction,
    x: &DVector<f64>,
    omega: &DVector<f64>,
) -> Result<f64> {
    let v = action.infinitesimal_action(omega, x);
    let vn = v.norm();
    if vn == 0.0 {
        return Ok(0.0);
    }
    let h = 1e-4 * x.norm().max(1.0) / vn;
    let gp = phi.gradient(&(x + &v * h));
    let gm = phi.gradient(&(x - &v * h));
    let hess_vv = (gp - gm).dot(&v) / (2.0 * h);
    let sff = second_fundamental_form_orbit(action, x, omega)?;
    Ok((hess_vv + phi.gradient(x).dot(&sff)).abs())
}
