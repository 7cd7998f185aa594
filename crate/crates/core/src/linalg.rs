//! Small dense linear-algebra helpers shared by the group and geometry code.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

/// Trace inner product `tr(AᵀB)`.
pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of so(d): `(E_ij − E_ji)/√2` for `i < j`.
pub fn so_basis(d: usize) -> Vec<DMatrix<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut m = DMatrix::zeros(d, d);
            m[(i, j)] = s;
            m[(j, i)] = -s;
            basis.push(m);
        }
    }
    basis
}

/// Dimension of `Sym(d)` in isometric coordinates.
pub fn sym_dim(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Isometric coordinates of a symmetric matrix: diagonal first, then
/// `√2·M_ij` for `i < j` in row order.
pub fn sym_to_coords(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    let mut v = DVector::zeros(sym_dim(d));
    for i in 0..d {
        v[i] = m[(i, i)];
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            v[k] = std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
    v
}

pub fn coords_to_sym(v: &DVector<f64>, d: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = v[i];
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let x = v[k] * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

/// Row-major flattening of a square matrix.
pub fn mat_to_coords(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    DVector::from_fn(d * m.ncols(), |k, _| m[(k / d, k % d)])
}

pub fn coords_to_mat(v: &DVector<f64>, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// Thin SVD with singular values sorted in descending order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns.
    pub v: DMatrix<f64>,
}

pub fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_sorted = DMatrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)]);
    SortedSvd {
        u: u_sorted,
        singular_values: order.iter().map(|&k| svd.singular_values[k]).collect(),
        v: v_sorted,
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
pub fn sorted_sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vecs = DMatrix::from_fn(m.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vecs)
}

/// `‖MᵀM − I‖_F`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    (m.transpose() * m - DMatrix::<f64>::identity(n, n)).norm()
}

/// Re-orthonormalizes a family of matrices under the trace inner product
/// (symmetric/Löwdin orthonormalization, which leaves an already
/// orthonormal family untouched). Returns the new family together with the
/// mixing matrix `C` such that `new_i = Σ_j C_ji · old_j`.
pub fn lowdin_orthonormalize(family: &[DMatrix<f64>]) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
    let k = family.len();
    let gram = DMatrix::from_fn(k, k, |i, j| frob_inner(&family[i], &family[j]));
    let (vals, vecs) = sorted_sym_eigen(&gram);
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        vals.iter().map(|&l| 1.0 / l.max(f64::MIN_POSITIVE).sqrt()),
    ));
    let c = &vecs * inv_sqrt * vecs.transpose();
    let out = (0..k)
        .map(|i| {
            let mut m = DMatrix::zeros(family[0].nrows(), family[0].ncols());
            for (j, f) in family.iter().enumerate() {
                m += f * c[(j, i)];
            }
            m
        })
        .collect();
    (out, c)
}

pub fn is_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_coordinates_are_isometric() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, -1.0, 2.0, 0.5, 3.0, -1.0, 3.0, 4.0]);
        let v = sym_to_coords(&m);
        assert!((v.norm_squared() - frob_inner(&m, &m)).abs() < 1e-12);
        assert!((coords_to_sym(&v, 3) - m).norm() < 1e-12);
    }

    #[test]
    fn so_basis_is_orthonormal() {
        let b = so_basis(4);
        assert_eq!(b.len(), 6);
        for i in 0..b.len() {
            for j in 0..b.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((frob_inner(&b[i], &b[j]) - want).abs() < 1e-14);
            }
            assert!((&b[i] + b[i].transpose()).norm() < 1e-15);
        }
    }

    #[test]
    fn sorted_svd_reconstructs() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 3.0, 2.0, 1.0]);
        let s = sorted_svd(&m);
        assert!(s.singular_values[0] >= s.singular_values[1]);
        let rec = &s.u * DMatrix::from_diagonal(&DVector::from_vec(s.singular_values.clone())) * s.v.transpose();
        assert!((rec - m).norm() < 1e-12);
    }
}
