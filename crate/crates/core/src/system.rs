//! Truncated N-level model of the transfer coordinate.

use crate::dvr::{matrix_elements, EigenSolution, Grid1D};
use crate::linalg::RMatrix;
use crate::{Error, Result};
use nalgebra::SymmetricEigen;
use std::path::Path;

/// Eigenenergies (hartree) and coupling-operator matrix `q_nm` (bohr) in the
/// system eigenbasis. Energies are strictly increasing and `q` is real
/// symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct NLevelSystem {
    energies: Vec<f64>,
    coupling: RMatrix,
    label: String,
}

/// Lowest six eigenvalues of the bare TAA Hamiltonian (hartree).
pub const TAA6_ENERGIES: [f64; 6] = [
    4.114537e-3,
    4.691015e-3,
    8.133116e-3,
    1.110714e-2,
    1.458100e-2,
    1.881039e-2,
];

/// `⟨n|q|m⟩` for the same six states (bohr), row-major.
#[rustfmt::skip]
pub const TAA6_COUPLING: [f64; 36] = [
    -0.3813,  0.3325,  0.0837,  0.1321,  0.0564,  0.0289,
     0.3325,  0.6712, -0.2931,  0.0230, -0.0498,  0.0008,
     0.0837, -0.2931,  0.4089, -0.4241,  0.0559, -0.0514,
     0.1321,  0.0230, -0.4241,  0.1598, -0.5011, -0.0085,
     0.0564, -0.0498,  0.0559, -0.5011,  0.2696, -0.5258,
     0.0289,  0.0008, -0.0514, -0.0085, -0.5258,  0.2752,
];

impl NLevelSystem {
    pub fn new(energies: Vec<f64>, coupling: RMatrix, label: impl Into<String>) -> Result<Self> {
        let n = energies.len();
        if n == 0 {
            return Err(Error::invalid("system needs at least one level"));
        }
        if coupling.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: coupling.nrows(),
            });
        }
        if energies.iter().chain(coupling.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("system data contains non-finite values"));
        }
        for k in 1..n {
            let gap = energies[k] - energies[k - 1];
            if gap <= 0.0 {
                return Err(Error::DegenerateSpectrum {
                    n: k - 1,
                    m: k,
                    gap,
                });
            }
        }
        let scale = coupling.amax().max(1.0);
        for i in 0..n {
            for j in i + 1..n {
                if (coupling[(i, j)] - coupling[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "coupling matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            energies,
            coupling,
            label: label.into(),
        })
    }

    /// The built-in six-level TAA model (bare, no renormalization).
    pub fn from_tables() -> Self {
        Self {
            energies: TAA6_ENERGIES.to_vec(),
            coupling: RMatrix::from_row_slice(6, 6, &TAA6_COUPLING),
            label: "taa6".into(),
        }
    }

    /// Named built-in systems.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "taa6" => Ok(Self::from_tables()),
            "taa2" => Self::from_tables().truncate(2),
            other => Err(Error::invalid(format!("unknown built-in system '{other}'"))),
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["taa6", "taa2"]
    }

    /// Lowest `n` levels from a DVR solution, with `q_nm` evaluated on the grid.
    pub fn from_dvr(sol: &EigenSolution, grid: &Grid1D, n: usize, label: impl Into<String>) -> Result<Self> {
        if n == 0 || n > sol.n_states() {
            return Err(Error::invalid(format!(
                "requested {n} levels from a solution with {}",
                sol.n_states()
            )));
        }
        let q = matrix_elements(sol, grid, |x| x)?;
        Self::new(
            sol.energies[..n].to_vec(),
            q.view((0, 0), (n, n)).into_owned(),
            label,
        )
    }

    /// Structured text file: `N`, then `N` energies, then the `N×N` coupling
    /// matrix row-major; whitespace separated, `#` comments. Atomic units.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut tokens = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
                tokens.push((lineno + 1, tok));
            }
        }
        let mut it = tokens.into_iter();
        let n: usize = match it.next() {
            Some((line, tok)) => tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("expected level count, found '{tok}'"),
            })?,
            None => {
                return Err(Error::Parse {
                    line: 0,
                    message: "empty system file".into(),
                })
            }
        };
        let mut read = |what: &str| -> Result<f64> {
            let (line, tok) = it.next().ok_or_else(|| Error::Parse {
                line: text.lines().count(),
                message: format!("unexpected end of file while reading {what}"),
            })?;
            tok.parse().map_err(|e| Error::Parse {
                line,
                message: format!("{what}: {e}"),
            })
        };
        let energies = (0..n).map(|_| read("energy")).collect::<Result<Vec<_>>>()?;
        let q = (0..n * n).map(|_| read("coupling")).collect::<Result<Vec<_>>>()?;
        Self::new(
            energies,
            RMatrix::from_row_slice(n, n, &q),
            path.file_stem().and_then(|s| s.to_str()).unwrap_or("file"),
        )
    }

    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coupling(&self) -> &RMatrix {
        &self.coupling
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Keep the lowest `n` levels.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_levels() {
            return Err(Error::invalid(format!(
                "cannot truncate {} levels to {n}",
                self.n_levels()
            )));
        }
        Ok(Self {
            energies: self.energies[..n].to_vec(),
            coupling: self.coupling.view((0, 0), (n, n)).into_owned(),
            label: format!("{}[{n}]", self.label),
        })
    }

    pub fn hamiltonian_matrix(&self) -> RMatrix {
        RMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.energies))
    }

    pub fn bohr_frequencies(&self) -> BohrFrequencies {
        let n = self.n_levels();
        BohrFrequencies(RMatrix::from_fn(n, n, |i, j| self.energies[i] - self.energies[j]))
    }

    /// Adds `(γ ω_c / 2) q²` in the truncated basis, with `q²` formed as the
    /// matrix square of `q_nm`, and re-diagonalizes. Eigenvectors are fixed
    /// so their largest component is positive; `q` is rotated into the new
    /// basis. `γ = 0` returns the input unchanged.
    pub fn renormalize(&self, gamma: f64, omega_c: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("coupling strength must be >= 0, got {gamma}")));
        }
        if !(omega_c > 0.0) {
            return Err(Error::invalid(format!("cutoff must be > 0, got {omega_c}")));
        }
        if gamma == 0.0 {
            return Ok(self.clone());
        }
        let n = self.n_levels();
        let q = &self.coupling;
        let h = self.hamiltonian_matrix() + q * q * (0.5 * gamma * omega_c);
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000).ok_or(Error::NumericalFailure {
            what: "renormalized Hamiltonian diagonalization",
            iterations: 10_000,
            detail: format!("{n}x{n}"),
        })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut u = RMatrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            let pivot = v.iter().fold(0.0f64, |a, &x| if x.abs() > a.abs() { x } else { a });
            let s = if pivot < 0.0 { -1.0 } else { 1.0 };
            u.set_column(col, &(v * s));
        }
        let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut q_new = u.transpose() * q * &u;
        // Exact symmetry after rotation.
        for i in 0..n {
            for j in i + 1..n {
                let s = 0.5 * (q_new[(i, j)] + q_new[(j, i)]);
                q_new[(i, j)] = s;
                q_new[(j, i)] = s;
            }
        }
        Self::new(energies, q_new, format!("{}+ren", self.label))
    }
}

/// `δ_nm = E_n − E_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BohrFrequencies(pub RMatrix);

impl BohrFrequencies {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.0[(n, m)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        let s = NLevelSystem::from_tables();
        assert_eq!(s.energies()[0], 4.114537e-3);
        assert_eq!(s.coupling()[(0, 0)], -0.3813);
        assert_eq!(s.coupling()[(0, 1)], 0.3325);
        let d = s.bohr_frequencies();
        assert!((d.get(1, 0) - 5.76478e-4).abs() < 1e-15);
        assert!((d.get(2, 0) - 4.018579e-3).abs() < 1e-15);
    }

    #[test]
    fn bohr_antisymmetry() {
        let d = NLevelSystem::from_tables().bohr_frequencies();
        for i in 0..6 {
            assert_eq!(d.get(i, i), 0.0);
            for j in 0..6 {
                assert_eq!(d.get(i, j), -d.get(j, i));
            }
        }
    }

    #[test]
    fn hamiltonian_two_level() {
        let s = NLevelSystem::from_tables().truncate(2).unwrap();
        let h = s.hamiltonian_matrix();
        assert_eq!(h[(0, 0)], 4.114537e-3);
        assert_eq!(h[(1, 1)], 4.691015e-3);
        assert_eq!(h[(0, 1)], 0.0);
        let one = NLevelSystem::from_tables().truncate(1).unwrap();
        assert_eq!(one.hamiltonian_matrix().shape(), (1, 1));
    }

    #[test]
    fn rejects_degenerate_and_asymmetric() {
        let q = RMatrix::identity(2, 2);
        assert!(matches!(
            NLevelSystem::new(vec![1.0, 1.0], q.clone(), "d"),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let mut a = q;
        a[(0, 1)] = 0.5;
        assert!(NLevelSystem::new(vec![0.0, 1.0], a, "a").is_err());
    }

    #[test]
    fn zero_coupling_renormalization_is_identity() {
        let s = NLevelSystem::from_tables();
        let r = s.renormalize(0.0, 2.28e-3).unwrap();
        assert_eq!(r.energies(), s.energies());
        assert!(s.renormalize(-0.1, 2.28e-3).is_err());
    }

    #[test]
    fn renormalization_trace_identity() {
        let s = NLevelSystem::from_tables();
        let (gamma, wc) = (0.5, 2.28e-3);
        let r = s.renormalize(gamma, wc).unwrap();
        let q2 = s.coupling() * s.coupling();
        let expect: f64 = s.energies().iter().sum::<f64>() + 0.5 * gamma * wc * q2.trace();
        let got: f64 = r.energies().iter().sum();
        assert!((got - expect).abs() < 1e-12);
        let q = r.coupling();
        assert!((q - q.transpose()).amax() < 1e-12);
        // Basis rotation preserves tr(q) and tr(q²).
        assert!((q.trace() - s.coupling().trace()).abs() < 1e-12);
        assert!(((q * q).trace() - q2.trace()).abs() < 1e-12);
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("ccqme-sys-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("two.sys");
        std::fs::write(&path, "# two levels\n2\n0.0 0.001\n0.1 0.2\n0.2 -0.1\n").unwrap();
        let s = NLevelSystem::from_file(&path).unwrap();
        assert_eq!(s.n_levels(), 2);
        assert_eq!(s.coupling()[(1, 0)], 0.2);
        std::fs::write(&path, "2\n0.0 0.001\n0.1 0.2\n0.2\n").unwrap();
        assert!(matches!(NLevelSystem::from_file(&path), Err(Error::Parse { .. })));
        std::fs::remove_dir_all(&dir).ok();
    }
}
