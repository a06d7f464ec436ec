//! Small dense helpers shared by the generator builders.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Position of element `(n, m)` in the row-major vectorization.
#[inline]
pub fn vec_index(n: usize, m: usize, dim: usize) -> usize {
    n * dim + m
}

pub fn vectorize(rho: &CMatrix) -> CVector {
    let dim = rho.nrows();
    CVector::from_fn(dim * dim, |k, _| rho[(k / dim, k % dim)])
}

pub fn unvectorize(v: &[Complex64], dim: usize) -> CMatrix {
    debug_assert_eq!(v.len(), dim * dim);
    CMatrix::from_fn(dim, dim, |n, m| v[n * dim + m])
}

pub fn complexify(m: &RMatrix) -> CMatrix {
    m.map(c)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Largest element of `|A − A†|`.
pub fn hermiticity_error(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest element magnitude.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let sym = (a + a.adjoint()) * c(0.5);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_matches_row_major_vectorization() {
        // vec(A X B) = (A ⊗ Bᵀ) vec(X) for row-major vec.
        let a = CMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 0.5));
        let b = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i * j) as f64, 1.0 - i as f64));
        let x = CMatrix::from_fn(3, 3, |i, j| Complex64::new(0.3 * i as f64, 0.7 * j as f64));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&a, &b.transpose()) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn vectorize_round_trip() {
        let x = CMatrix::from_fn(4, 4, |i, j| Complex64::new(i as f64, j as f64));
        let v = vectorize(&x);
        assert_eq!(v[vec_index(2, 3, 4)], x[(2, 3)]);
        assert_eq!(unvectorize(v.as_slice(), 4), x);
    }
}
