//! Density matrices in the system eigenbasis.

use crate::linalg::{self, CMatrix};
use crate::{Error, Result};
use num_complex::Complex64;

/// N×N Hermitian, unit-trace density matrix.
///
/// Construction checks Hermiticity and trace loosely (`1e-8`); states coming
/// out of a propagation are wrapped without checks, since Redfield dynamics
/// may legitimately leave the positive cone.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("density matrix must be square"));
        }
        if linalg::hermiticity_error(&m) > 1e-8 {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::invalid(format!("density matrix trace is {tr}")));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    /// `|n⟩⟨n|` in an `dim`-level space.
    pub fn projector(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::invalid(format!("level {n} out of range for N = {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(Self(m))
    }

    /// Diagonal state from (not necessarily normalized) weights.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        let z: f64 = weights.iter().sum();
        if !(z > 0.0) {
            return Err(Error::invalid("diagonal weights must have positive sum"));
        }
        let n = weights.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, w) in weights.iter().enumerate() {
            m[(i, i)] = Complex64::new(w / z, 0.0);
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.0[(n, n)].re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.0)[0]
    }

    pub fn max_coherence(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}
