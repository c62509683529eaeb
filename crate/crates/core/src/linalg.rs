//! Dense complex linear-algebra helpers shared by the oracle, trajectory and
//! circuit modules.
//!
//! Vectorization is column-stacking throughout: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`,
//! and the flat index of entry `(i, j)` of a `d × d` matrix is `i + j·d`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn dagger(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn conj(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

/// Column-stacked vectorization.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_iterator(m.nrows() * m.ncols(), m.iter().copied())
}

pub fn unvectorize(v: &CVec, d: usize) -> CMat {
    CMat::from_iterator(d, d, v.iter().copied())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Schatten 1-norm (sum of singular values).
pub fn trace_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if is_hermitian(m, 1e-13 * (1.0 + max_abs(m))) {
        let h = (m + m.adjoint()) * c(0.5, 0.0);
        return h.symmetric_eigenvalues().iter().map(|x| x.abs()).sum();
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

/// Eigenvalues of a Hermitian matrix (ascending is not guaranteed).
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.ncols())))
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// `|ψ⟩⟨ψ|`.
pub fn projector(psi: &CVec) -> CMat {
    psi * psi.adjoint()
}

pub fn basis_vec(d: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[k] = ONE;
    v
}

/// Orthonormal completion: returns a unitary whose first column is
/// `first / ‖first‖`. The remaining columns come from Gram–Schmidt over the
/// computational basis in index order, so the result is deterministic.
pub fn complete_unitary(first: &CVec) -> CMat {
    complete_unitary_from(std::slice::from_ref(first))
        .expect("a single nonzero column can always be completed")
}

/// Orthonormal completion of a set of orthonormal columns (given in order).
/// Returns `None` when the supplied columns are not linearly independent.
pub fn complete_unitary_from(cols: &[CVec]) -> Option<CMat> {
    let d = cols.first()?.len();
    let mut basis: Vec<CVec> = Vec::with_capacity(d);
    for col in cols {
        let mut v = col.clone();
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let n = v.norm();
        if n < 1e-10 {
            return None;
        }
        basis.push(v / c(n, 0.0));
    }
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = basis_vec(d, k);
        // two passes of modified Gram–Schmidt for stability
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / c(n, 0.0));
        }
    }
    if basis.len() != d {
        return None;
    }
    Some(CMat::from_columns(&basis))
}

/// Number of qubits needed to index `k` values (0 for `k <= 1`).
pub fn ceil_log2(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

/// Partial trace over the second factor of a `(da·db) × (da·db)` matrix
/// ordered as `A ⊗ B`.
pub fn partial_trace_second(m: &CMat, da: usize, db: usize) -> CMat {
    let mut out = CMat::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut s = ZERO;
            for k in 0..db {
                s += m[(i * db + k, j * db + k)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorization_is_column_stacking() {
        let m = CMat::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let v = vectorize(&m);
        assert_eq!(v[1], c(3., 0.));
        assert_eq!(unvectorize(&v, 2), m);
    }

    #[test]
    fn vec_identity_for_products() {
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64 + 0.3, j as f64 - 0.1));
        let x = CMat::from_fn(2, 2, |i, j| c((i * j) as f64, 1.0 + i as f64));
        let b = CMat::from_fn(2, 2, |i, j| c(0.5 * j as f64, i as f64));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn completion_keeps_first_column() {
        let v = CVec::from_vec(vec![c(0.6, 0.), c(0., 0.8), ZERO, ZERO]);
        let u = complete_unitary(&v);
        assert!(unitarity_defect(&u) < 1e-12);
        assert!((u.column(0) - &v).norm() < 1e-12);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn trace_norm_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.5, 0.), c(-0.5, 0.)]));
        assert!((trace_norm(&m) - 2.0).abs() < 1e-12);
    }
}
