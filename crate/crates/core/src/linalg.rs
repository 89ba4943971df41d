//! Small dense Hermitian linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::field::HERMITIAN_TOLERANCE;

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(v, 0.0)),
    ))
}

/// `‖A − A*‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn ensure_hermitian(m: &CMatrix, point: usize) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let defect = hermitian_defect(m);
    if defect <= HERMITIAN_TOLERANCE * m.norm() {
        Ok(())
    } else {
        Err(Error::NotHermitian { point, defect })
    }
}

/// `(A + A*) / 2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix, or `None`
/// when some pivot is not strictly positive.
pub fn cholesky(m: &CMatrix) -> Option<CMatrix> {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0 && pivot.is_finite()) {
            return None;
        }
        let d = pivot.sqrt();
        l[(j, j)] = c(d, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// `‖A‖_2` for Hermitian `A`.
pub fn spectral_radius(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `tr(Ω^{-1} R)`, using a Cholesky factor `Ω = L L*`.
pub fn trace_against(r: &CMatrix, l: &CMatrix) -> f64 {
    let y = solve_lower(l, r);
    let z = solve_lower(l, &y.adjoint());
    z.trace().re
}

/// `L^{-1} B` for lower-triangular `L`.
pub fn solve_lower(l: &CMatrix, b: &CMatrix) -> CMatrix {
    l.solve_lower_triangular(b)
        .expect("Cholesky factor has a non-zero diagonal")
}
