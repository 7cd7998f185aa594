//! Closed subgroups of O(d) acting isometrically on a Euclidean point space.
//!
//! Three actions are supported:
//!
//! * `SO(d)` rotating `ℝᵈ`,
//! * `O(d)` acting on `Sym(d)` by `g·M = gᵀMg`,
//! * `O(d)` acting on `ℝ^{d×d}` by `g·M = Mg`.
//!
//! Points are always vectors in the action's *ambient* coordinates. Symmetric
//! matrices use isometric coordinates (off-diagonals scaled by `√2`) and
//! square matrices are flattened row-major, so every action is a linear
//! isometry `x ↦ ρ(g)x` of `ℝⁿ`. The algebra coordinates used throughout the
//! crate refer to an orthonormal (trace inner product) basis of the
//! represented Lie algebra `ρ_*(𝔤) ⊂ so(n)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    coords_to_mat, coords_to_sym, frob_inner, is_finite, lowdin_orthonormalize, mat_to_coords,
    orthogonality_defect, so_basis, sorted_svd, sorted_sym_eigen, sym_dim, sym_to_coords,
};

/// Below this value of the action's invariant statistic a point is treated as
/// lying on (or too close to) a singular orbit.
pub const SINGULAR_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Rotation,
    ConjugationSymmetric,
    RightMultiplication,
}

impl ActionKind {
    pub fn tag(self) -> &'static str {
        match self {
            ActionKind::Rotation => "so_d_rotation",
            ActionKind::ConjugationSymmetric => "conjugation_sym",
            ActionKind::RightMultiplication => "right_mult",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "so_d_rotation" | "rotation" => Ok(ActionKind::Rotation),
            "conjugation_sym" | "conjugation_symmetric" => Ok(ActionKind::ConjugationSymmetric),
            "right_mult" | "right_multiplication" => Ok(ActionKind::RightMultiplication),
            other => Err(Error::config(format!("unknown action tag `{other}`"))),
        }
    }

    /// Name of the invariant statistic used for bumps and singular guards.
    pub fn statistic_name(self) -> &'static str {
        match self {
            ActionKind::Rotation => "radius",
            ActionKind::ConjugationSymmetric => "eigen_gap",
            ActionKind::RightMultiplication => "min_singular_value",
        }
    }
}

/// An orthogonal `d×d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
}

impl GroupElement {
    /// Wraps `matrix`, checking `‖gᵀg − I‖_F ≤ 1e−10`.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::ShapeMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let defect = orthogonality_defect(&matrix);
        if !(defect <= 1e-10) {
            return Err(Error::NonRetractable { min_singular_value: f64::NAN });
        }
        Ok(GroupElement { matrix })
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<f64>) -> Self {
        GroupElement { matrix }
    }

    pub fn identity(d: usize) -> Self {
        GroupElement { matrix: DMatrix::identity(d, d) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

#[derive(Debug, Clone)]
pub struct GroupAction {
    kind: ActionKind,
    matrix_dim: usize,
    ambient_dim: usize,
    lie_basis: Vec<DMatrix<f64>>,
    generators: Vec<DMatrix<f64>>,
    generator_lie: Vec<DMatrix<f64>>,
    max_orbit_dim: usize,
}

impl GroupAction {
    pub fn new(kind: ActionKind, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::config("group actions need matrix dimension d ≥ 2"));
        }
        let ambient_dim = match kind {
            ActionKind::Rotation => d,
            ActionKind::ConjugationSymmetric => sym_dim(d),
            ActionKind::RightMultiplication => d * d,
        };
        let lie_basis = so_basis(d);
        let mut action = GroupAction {
            kind,
            matrix_dim: d,
            ambient_dim,
            lie_basis: lie_basis.clone(),
            generators: Vec::new(),
            generator_lie: Vec::new(),
            max_orbit_dim: match kind {
                ActionKind::Rotation => d - 1,
                _ => d * (d - 1) / 2,
            },
        };
        let raw: Vec<DMatrix<f64>> = lie_basis
            .iter()
            .map(|b| {
                let mut m = DMatrix::zeros(ambient_dim, ambient_dim);
                for j in 0..ambient_dim {
                    let e = DVector::from_fn(ambient_dim, |i, _| if i == j { 1.0 } else { 0.0 });
                    m.set_column(j, &action.lie_image(b, &e));
                }
                m
            })
            .collect();
        let (generators, mix) = lowdin_orthonormalize(&raw);
        action.generator_lie = (0..generators.len())
            .map(|i| {
                let mut m = DMatrix::zeros(d, d);
                for (j, b) in lie_basis.iter().enumerate() {
                    m += b * mix[(j, i)];
                }
                m
            })
            .collect();
        action.generators = generators;
        Ok(action)
    }

    pub fn from_tag(tag: &str, d: usize) -> Result<Self> {
        GroupAction::new(ActionKind::from_tag(tag)?, d)
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension `k` of the Lie algebra.
    pub fn algebra_dim(&self) -> usize {
        self.lie_basis.len()
    }

    pub fn max_orbit_dim(&self) -> usize {
        self.max_orbit_dim
    }

    /// Orthonormal basis of so(d) (the abstract algebra, `d×d`).
    pub fn lie_basis(&self) -> &[DMatrix<f64>] {
        &self.lie_basis
    }

    /// Orthonormal basis of the represented algebra `ρ_*(𝔤)`, as `n×n`
    /// antisymmetric matrices acting on ambient coordinates.
    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    /// The `d×d` algebra element represented by algebra coordinates `c`.
    pub fn algebra_to_lie(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let d = self.matrix_dim;
        let mut m = DMatrix::zeros(d, d);
        for (ci, b) in c.iter().zip(&self.generator_lie) {
            m += b * *ci;
        }
        m
    }

    /// `Σ cᵢ Gᵢ` in ambient coordinates.
    pub fn algebra_matrix(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let n = self.ambient_dim;
        let mut m = DMatrix::zeros(n, n);
        for (ci, g) in c.iter().zip(&self.generators) {
            m += g * *ci;
        }
        m
    }

    /// Derivative of `t ↦ exp(tB)·x` at zero for a `d×d` antisymmetric `B`.
    fn lie_image(&self, b: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
        let d = self.matrix_dim;
        match self.kind {
            ActionKind::Rotation => b * x,
            ActionKind::ConjugationSymmetric => {
                let m = coords_to_sym(x, d);
                sym_to_coords(&(&m * b - b * &m))
            }
            ActionKind::RightMultiplication => {
                let m = coords_to_mat(x, d);
                mat_to_coords(&(m * b))
            }
        }
    }

    /// `ξ(Ω, x)` with `Ω` given in algebra coordinates.
    pub fn infinitesimal_action(&self, c: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ambient_dim);
        for (ci, g) in c.iter().zip(&self.generators) {
            if *ci != 0.0 {
                out.gemv(*ci, g, x, 1.0);
            }
        }
        out
    }

    /// `n×k` matrix whose columns are `ξ(Gᵢ, x)`.
    pub fn generator_images(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let k = self.generators.len();
        let mut m = DMatrix::zeros(self.ambient_dim, k);
        for (i, g) in self.generators.iter().enumerate() {
            m.set_column(i, &(g * x));
        }
        m
    }

    pub fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::ShapeMismatch { expected: self.ambient_dim, got: x.len() });
        }
        if !is_finite(x) {
            return Err(Error::NonFiniteInput);
        }
        Ok(())
    }

    /// `g·x`: `gx` for rotations, coordinates of `gᵀMg` for conjugation and of
    /// `Mg` for right multiplication.
    pub fn apply(&self, g: &GroupElement, x: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.matrix_dim;
        if g.matrix.nrows() != d {
            return Err(Error::ShapeMismatch { expected: d, got: g.matrix.nrows() });
        }
        if x.len() != self.ambient_dim {
            return Err(Error::ShapeMismatch { expected: self.ambient_dim, got: x.len() });
        }
        let g = &g.matrix;
        Ok(match self.kind {
            ActionKind::Rotation => g * x,
            ActionKind::ConjugationSymmetric => {
                let m = coords_to_sym(x, d);
                sym_to_coords(&(g.transpose() * m * g))
            }
            ActionKind::RightMultiplication => mat_to_coords(&(coords_to_mat(x, d) * g)),
        })
    }

    /// The `n×n` orthogonal matrix `ρ(g)` with `g·x = ρ(g)x`.
    pub fn representation(&self, g: &GroupElement) -> Result<DMatrix<f64>> {
        let n = self.ambient_dim;
        let mut r = DMatrix::zeros(n, n);
        for j in 0..n {
            let e = DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
            r.set_column(j, &self.apply(g, &e)?);
        }
        Ok(r)
    }

    /// The orbit invariant that controls regularity: `‖x‖` for rotations, the
    /// smallest eigenvalue gap for conjugation, the smallest singular value
    /// for right multiplication.
    pub fn invariant_statistic(&self, x: &DVector<f64>) -> f64 {
        let d = self.matrix_dim;
        match self.kind {
            ActionKind::Rotation => x.norm(),
            ActionKind::ConjugationSymmetric => {
                let (vals, _) = sorted_sym_eigen(&coords_to_sym(x, d));
                vals.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
            }
            ActionKind::RightMultiplication => {
                let s = sorted_svd(&coords_to_mat(x, d));
                *s.singular_values.last().unwrap()
            }
        }
    }

    /// True when `x` lies in the singular guard zone.
    pub fn in_guard_zone(&self, x: &DVector<f64>) -> bool {
        self.invariant_statistic(x) < SINGULAR_GUARD
    }
}

/// Draws a Haar-distributed element by orthogonal factorization of a Gaussian
/// matrix with diagonal-sign correction. Rotation actions are restricted to
/// `SO(d)`.
pub fn haar_sample<R: Rng + ?Sized>(action: &GroupAction, rng: &mut R) -> GroupElement {
    let d = action.matrix_dim;
    let z = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if action.kind == ActionKind::Rotation && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    GroupElement::new_unchecked(q)
}

/// Orthonormal tangent frame of `O_x` at `x` with the induced projections.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub base_point: DVector<f64>,
    /// `n×m` matrix with orthonormal columns spanning `T_x O_x`.
    pub tangent_frame: DMatrix<f64>,
    pub orbit_dim: usize,
    pub regular: bool,
}

impl ProjectionPair {
    /// Projection onto `T_x O_x`.
    pub fn q_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.orbit_dim == 0 {
            return DVector::zeros(v.len());
        }
        let coeffs = self.tangent_frame.tr_mul(v);
        &self.tangent_frame * coeffs
    }

    /// Projection onto `(T_x O_x)^⊥`, defined as `v − Qv`.
    pub fn p_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.q_apply(v)
    }

    pub fn q_matrix(&self) -> DMatrix<f64> {
        &self.tangent_frame * self.tangent_frame.transpose()
    }

    pub fn p_matrix(&self) -> DMatrix<f64> {
        let n = self.base_point.len();
        DMatrix::identity(n, n) - self.q_matrix()
    }
}

/// Default rank tolerance `1e−8·max(‖x‖, 1)`.
pub fn default_rank_tol(x: &DVector<f64>) -> f64 {
    1e-8 * x.norm().max(1.0)
}

/// Evaluates `ξ(Gᵢ, x)` for every basis generator and orthonormalizes the
/// images by a rank-truncated SVD.
pub fn orbit_tangent_frame(
    action: &GroupAction,
    x: &DVector<f64>,
    rank_tol: Option<f64>,
) -> Result<ProjectionPair> {
    action.check_point(x)?;
    let tol = rank_tol.unwrap_or_else(|| default_rank_tol(x));
    let images = action.generator_images(x);
    let svd = sorted_svd(&images);
    let m = svd.singular_values.iter().take_while(|&&s| s > tol).count();
    Ok(ProjectionPair {
        base_point: x.clone(),
        tangent_frame: svd.u.columns(0, m).into_owned(),
        orbit_dim: m,
        regular: m == action.max_orbit_dim,
    })
}

/// `Q_x v` without building the frame when a closed form exists: for rotations
/// the tangent space at `x ≠ 0` is `x^⊥`.
pub fn tangent_projection(action: &GroupAction, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    if action.kind == ActionKind::Rotation {
        action.check_point(x)?;
        let r2 = x.norm_squared();
        if r2 > 0.0 {
            return Ok(v - x * (x.dot(v) / r2));
        }
    }
    Ok(orbit_tangent_frame(action, x, None)?.q_apply(v))
}

/// `g·x`.
pub fn apply_element(action: &GroupAction, g: &GroupElement, x: &DVector<f64>) -> Result<DVector<f64>> {
    action.apply(g, x)
}

/// Orthonormal frame `{R·Gᵢ}` of the tangent space of the represented group
/// at `R = ρ(g)`.
pub fn group_tangent_frame(action: &GroupAction, r: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    action.generators.iter().map(|g| r * g).collect()
}

/// Polar factor `UVᵀ` of `M = UΣVᵀ`, the nearest orthogonal matrix.
pub fn retract_to_group(m: &DMatrix<f64>) -> Result<GroupElement> {
    let svd = sorted_svd(m);
    let smin = *svd.singular_values.last().unwrap_or(&0.0);
    if !(smin > 0.5) {
        return Err(Error::NonRetractable { min_singular_value: smin });
    }
    Ok(GroupElement::new_unchecked(&svd.u * svd.v.transpose()))
}

/// Maps `next`, an Euler update of `prev ∈ ρ(G)`, back onto `ρ(G)`.
///
/// Rotation actions represent the full `SO(d)`, so the polar factor is the
/// exact nearest point. For the other actions `ρ(G)` is a proper subgroup of
/// `O(n)` and the update is mapped through the exponential chart at `prev`:
/// `prev·exp(Σ cᵢGᵢ)` with `cᵢ = ⟨prev·Gᵢ, next − prev⟩`.
pub fn retract_representation(
    action: &GroupAction,
    prev: &DMatrix<f64>,
    next: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    match action.kind {
        ActionKind::Rotation => Ok(retract_to_group(next)?.into_matrix()),
        _ => {
            let delta = next - prev;
            let smin = *sorted_svd(next).singular_values.last().unwrap_or(&0.0);
            if !(smin > 0.5) {
                return Err(Error::NonRetractable { min_singular_value: smin });
            }
            let c = DVector::from_iterator(
                action.generators.len(),
                action.generators.iter().map(|g| frob_inner(&(prev * g), &delta)),
            );
            Ok(prev * action.algebra_matrix(&c).exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn tangent_projection_matches_frame() {
        let mut rng = rng();
        for kind in [ActionKind::Rotation, ActionKind::ConjugationSymmetric] {
            let a = GroupAction::new(kind, 3).unwrap();
            let x = DVector::from_fn(a.ambient_dim(), |i, _| 1.0 + i as f64 * 0.7 - (i % 2) as f64 * 2.0);
            let g = haar_sample(&a, &mut rng);
            let x = a.apply(&g, &x).unwrap();
            let v = DVector::from_fn(a.ambient_dim(), |i, _| (i as f64).sin());
            let fast = tangent_projection(&a, &x, &v).unwrap();
            let slow = orbit_tangent_frame(&a, &x, None).unwrap().q_apply(&v);
            assert!((fast - slow).norm() < 1e-12);
        }
    }

    #[test]
    fn so2_frame_at_unit_x() {
        let a = GroupAction::new(ActionKind::Rotation, 2).unwrap();
        let f = orbit_tangent_frame(&a, &DVector::from_vec(vec![1.0, 0.0]), None).unwrap();
        assert_eq!(f.orbit_dim, 1);
        assert!(f.regular);
        let w = f.tangent_frame.column(0);
        assert!(w[0].abs() < 1e-14 && (w[1].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn so3_sphere_projections() {
        let a = GroupAction::new(ActionKind::Rotation, 3).unwrap();
        let f = orbit_tangent_frame(&a, &DVector::from_vec(vec![2.0, 0.0, 0.0]), None).unwrap();
        let p = f.p_matrix();
        let q = f.q_matrix();
        let pd = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
        let qd = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 1.0]));
        assert!((p - pd).norm() < 1e-12);
        assert!((q - qd).norm() < 1e-12);
    }

    #[test]
    fn conjugation_regular_and_singular_points() {
        let a = GroupAction::new(ActionKind::ConjugationSymmetric, 2).unwrap();
        let x = sym_to_coords(&DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0])));
        let f = orbit_tangent_frame(&a, &x, None).unwrap();
        assert_eq!(f.orbit_dim, 1);
        assert!(f.regular);
        let x = sym_to_coords(&(DMatrix::<f64>::identity(2, 2) * 2.0));
        let f = orbit_tangent_frame(&a, &x, None).unwrap();
        assert_eq!(f.orbit_dim, 0);
        assert!(!f.regular);
    }

    #[test]
    fn rotation_at_origin_is_degenerate() {
        let a = GroupAction::new(ActionKind::Rotation, 3).unwrap();
        let f = orbit_tangent_frame(&a, &DVector::zeros(3), None).unwrap();
        assert_eq!(f.orbit_dim, 0);
        assert!(!f.regular);
        assert!((f.p_matrix() - DMatrix::<f64>::identity(3, 3)).norm() == 0.0);
    }

    #[test]
    fn rejects_non_finite_points() {
        let a = GroupAction::new(ActionKind::Rotation, 2).unwrap();
        let x = DVector::from_vec(vec![f64::NAN, 0.0]);
        assert!(matches!(orbit_tangent_frame(&a, &x, None), Err(Error::NonFiniteInput)));
    }

    #[test]
    fn apply_identity_and_quarter_turn() {
        let a = GroupAction::new(ActionKind::Rotation, 2).unwrap();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(a.apply(&GroupElement::identity(2), &x).unwrap(), x);
        let g = GroupElement::new(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        let y = a.apply(&g, &x).unwrap();
        assert!((y - DVector::from_vec(vec![0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn apply_shape_mismatch() {
        let a = GroupAction::new(ActionKind::Rotation, 3).unwrap();
        let err = a.apply(&GroupElement::identity(3), &DVector::zeros(2));
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn conjugation_preserves_eigenvalues() {
        let a = GroupAction::new(ActionKind::ConjugationSymmetric, 2).unwrap();
        let x = sym_to_coords(&DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0])));
        let mut r = rng();
        for _ in 0..10 {
            let g = haar_sample(&a, &mut r);
            let y = a.apply(&g, &x).unwrap();
            let (vals, _) = sorted_sym_eigen(&coords_to_sym(&y, 2));
            assert!((vals[0] - 3.0).abs() < 1e-10 && (vals[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn group_tangent_frame_basics() {
        let a = GroupAction::new(ActionKind::Rotation, 2).unwrap();
        let id = DMatrix::identity(2, 2);
        let frame = group_tangent_frame(&a, &id);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]) * std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(frame.len(), 1);
        // the basis generator is ±J/√2
        assert!((&frame[0] - &j).norm() < 1e-14 || (&frame[0] + &j).norm() < 1e-14);

        for kind in [ActionKind::Rotation, ActionKind::ConjugationSymmetric, ActionKind::RightMultiplication] {
            let a = GroupAction::new(kind, 3).unwrap();
            let mut r = rng();
            let g = a.representation(&haar_sample(&a, &mut r)).unwrap();
            let frame = group_tangent_frame(&a, &g);
            for i in 0..frame.len() {
                for j in 0..frame.len() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((frob_inner(&frame[i], &frame[j]) - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn retraction_examples() {
        let id = DMatrix::<f64>::identity(2, 2);
        let r = retract_to_group(&(&id * 1.1)).unwrap();
        assert!((r.matrix() - &id).norm() < 1e-12);

        let mut rr = rng();
        let a = GroupAction::new(ActionKind::Rotation, 3).unwrap();
        let g = haar_sample(&a, &mut rr);
        let back = retract_to_group(g.matrix()).unwrap();
        assert!((back.matrix() - g.matrix()).norm() < 1e-12);

        let mut skew = DMatrix::<f64>::from_row_slice(3, 3, &[0.0, 1.0, -2.0, -1.0, 0.0, 0.5, 2.0, -0.5, 0.0]);
        skew *= 0.01;
        let exact = skew.clone().exp();
        let got = retract_to_group(&(DMatrix::identity(3, 3) + &skew)).unwrap();
        assert!((got.matrix() - exact).norm() < 1e-4);

        assert!(matches!(retract_to_group(&(&id * 0.4)), Err(Error::NonRetractable { .. })));
    }

    #[test]
    fn representation_is_orthogonal_and_matches_apply() {
        let mut r = rng();
        for kind in [ActionKind::Rotation, ActionKind::ConjugationSymmetric, ActionKind::RightMultiplication] {
            let a = GroupAction::new(kind, 3).unwrap();
            let g = haar_sample(&a, &mut r);
            let rep = a.representation(&g).unwrap();
            assert!(orthogonality_defect(&rep) < 1e-10);
            let x = DVector::from_fn(a.ambient_dim(), |i, _| (i as f64 * 0.7).sin());
            assert!((&rep * &x - a.apply(&g, &x).unwrap()).norm() < 1e-12);
            assert!((x.norm() - (&rep * &x).norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn representation_retraction_stays_in_group() {
        let a = GroupAction::new(ActionKind::ConjugationSymmetric, 2).unwrap();
        let prev = DMatrix::identity(3, 3);
        let step = &a.generators()[0] * 0.01 + DMatrix::from_fn(3, 3, |i, j| 1e-4 * ((i * 3 + j) as f64));
        let next = retract_representation(&a, &prev, &(&prev + step)).unwrap();
        assert!(orthogonality_defect(&next) < 1e-12);
        // the trace direction (1,1,0)/√2 is fixed by every conjugation
        let t = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        assert!((&next * &t - &t).norm() < 1e-12);
    }
}
