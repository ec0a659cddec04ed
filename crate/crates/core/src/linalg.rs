//! Dense and sparse linear-algebra helpers.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves the sparse system given by `(row, col, value)` triplets;
/// duplicates are summed.
pub fn sparse_solve(n: usize, triplets: &[(usize, usize, f64)], rhs: &[f64]) -> Result<Vec<f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::LinearSolveFailed(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::LinearSolveFailed(format!("{e:?}")))?;
    let b = Col::<f64>::from_fn(n, |i| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[i]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolveFailed("factorization produced non-finite values".into()));
    }
    Ok(out)
}

/// Full left singular basis of `a` with its singular values (zero-padded to
/// the row count). Columns of `u` past the numerical rank span null(aᵀ).
pub struct LeftSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub rank: usize,
}

/// Thin SVD `(U, σ, Vᵀ)` with σ in nonincreasing order. Uses faer; the
/// nalgebra bidiagonal iteration loses accuracy on some patch matrices.
pub(crate) fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let k = m.min(n);
    let fa = Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    match fa.thin_svd() {
        Ok(svd) => {
            let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
            (
                DMatrix::from_fn(m, k, |i, j| u[(i, j)]),
                DVector::from_fn(k, |i, _| s[i]),
                DMatrix::from_fn(k, n, |i, j| v[(j, i)]),
            )
        }
        Err(_) => {
            let svd = a.clone().svd(true, true);
            (svd.u.expect("U requested"), svd.singular_values, svd.v_t.expect("Vᵀ requested"))
        }
    }
}

pub fn left_svd(a: &DMatrix<f64>, rel_tol: f64) -> LeftSvd {
    let (m, n) = a.shape();
    let padded = if n < m { a.clone().resize_horizontally(m, 0.0) } else { a.clone() };
    let (u_thin, sv, _) = thin_svd(&padded);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let u = DMatrix::from_fn(m, m, |r, c| u_thin[(r, order[c])]);
    let sigma: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|&&s| s > rel_tol * smax && s > 0.0).count();
    LeftSvd { u, sigma, rank }
}

/// Orthonormal basis of null(aᵀ).
pub fn left_null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let s = left_svd(a, rel_tol);
    let m = a.nrows();
    s.u.columns(s.rank, m - s.rank).into_owned()
}

/// Orthonormal basis of the column space of `a`.
pub fn orthonormal_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let s = left_svd(a, rel_tol);
    s.u.columns(0, s.rank).into_owned()
}

/// Orthonormal basis of null(a).
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    left_null_space(&a.transpose(), rel_tol)
}

/// Sine of the largest principal angle between the column spaces of `a`
/// and `b` (both orthonormalised first). Returns 1 if the dimensions differ.
pub fn principal_angle_sin(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orthonormal_basis(a, 1e-12);
    let qb = orthonormal_basis(b, 1e-12);
    if qa.ncols() != qb.ncols() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = &qb - &qa * (qa.transpose() * &qb);
    thin_svd(&resid).1.max().min(1.0)
}

/// Minimum-norm solution of C x = b in the metric xᵀ M x.
#[derive(Clone, Debug)]
pub struct MinNormSolution {
    pub x: DVector<f64>,
    /// ‖b − Π_range b‖ / ‖b‖ (0 for b = 0).
    pub incompatibility: f64,
    /// ‖b − Π_range b‖.
    pub defect: f64,
    pub rank: usize,
}

/// Cholesky M = L Lᵀ, SVD pseudo-inverse of B = C L⁻ᵀ with relative rank
/// tolerance `rel_tol`, then x = L⁻ᵀ B⁺ b. The right-hand side is implicitly
/// projected onto range(C).
pub fn min_norm_solve(c: &DMatrix<f64>, m: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> Result<MinNormSolution> {
    let chol = m.clone().cholesky().ok_or(Error::SingularMass)?;
    let l = chol.l();
    // B = C L^{-T}  <=>  L Bᵀ = Cᵀ
    let bt = l.solve_lower_triangular(&c.transpose()).ok_or(Error::SingularMass)?;
    let bmat = bt.transpose();
    let ncols = bmat.ncols();
    let (u, sv, vt) = thin_svd(&bmat);
    let smax = sv.max();
    let mut y = DVector::zeros(ncols);
    let mut proj = DVector::zeros(b.len());
    let mut rank = 0;
    for (k, &s) in sv.iter().enumerate() {
        if s > rel_tol * smax && s > 0.0 {
            rank += 1;
            let uk = u.column(k);
            let coef = uk.dot(b);
            proj += uk * coef;
            y += vt.row(k).transpose() * (coef / s);
        }
    }
    let bn = b.norm();
    let defect = (b - &proj).norm();
    let incompatibility = if bn > 0.0 { defect / bn } else { 0.0 };
    let x = l.transpose().solve_upper_triangular(&y).ok_or(Error::SingularMass)?;
    Ok(MinNormSolution { x, incompatibility, defect, rank })
}

/// Moore–Penrose pseudo-inverse of a symmetric positive semidefinite matrix
/// via its eigen-decomposition.
pub fn spd_pseudo_inverse(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let emax = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > rel_tol * emax {
            let v = eig.eigenvectors.column(k);
            out += v * v.transpose() / l;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_solve_small_system() {
        let trip = vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.5), (1, 1, 1.5), (2, 2, 2.0), (0, 2, 1.0)];
        let x = sparse_solve(3, &trip, &[1.0, 2.0, 3.0]).unwrap();
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 1.0, 1.0, 3.0, 0.0, 0.0, 0.0, 2.0]);
        let r = &a * DVector::from_vec(x) - DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn left_null_space_of_tall_matrix() {
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        let n = left_null_space(&a, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((a.transpose() * &n).norm() < 1e-14);
    }

    #[test]
    fn min_norm_matches_normal_equations() {
        let c = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, -1.0]);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        let b = DVector::from_vec(vec![1.0, -2.0]);
        let sol = min_norm_solve(&c, &m, &b, 1e-12).unwrap();
        let minv = m.clone().try_inverse().unwrap();
        let s = &c * &minv * c.transpose();
        let expected = &minv * c.transpose() * s.try_inverse().unwrap() * &b;
        assert!((sol.x - expected).norm() < 1e-12);
        assert!(sol.incompatibility < 1e-14);
        assert_eq!(sol.rank, 2);
    }

    #[test]
    fn incompatible_rhs_is_measured() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let m = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let sol = min_norm_solve(&c, &m, &b, 1e-10).unwrap();
        assert!((sol.incompatibility - 1.0).abs() < 1e-12);
        assert!(sol.x.norm() < 1e-14);
    }

    #[test]
    fn principal_angles() {
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert!((principal_angle_sin(&a, &b) - 0.5f64.sqrt()).abs() < 1e-14);
        assert!(principal_angle_sin(&a, &(a.clone() * 3.0)) < 1e-15);
    }
}
