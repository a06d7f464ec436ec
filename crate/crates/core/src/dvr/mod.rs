//! Colbert–Miller sinc-DVR on a uniform 1D grid.
//!
//! The kinetic energy matrix in atomic units (ħ = 1) is
//!
//! ```text
//! T_ii = π² / (6 m Δq²)
//! T_ij = (−1)^(i−j) / (m Δq² (i − j)²),   i ≠ j
//! ```
//!
//! and the potential is diagonal on the grid. Eigenfunctions are returned as
//! grid amplitudes normalized with weight `Δq`.

mod potential;

pub use potential::PotentialCurve;

use crate::linalg::RMatrix;
use crate::{Error, Result};
use nalgebra::SymmetricEigen;
use std::f64::consts::PI;

/// Default TAA transfer-coordinate grid: 121 points on [−1.5, 2.1] bohr.
pub const TAA_GRID: Grid1D = Grid1D {
    q_min: -1.5,
    q_max: 2.1,
    n_points: 121,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    q_min: f64,
    q_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(q_min: f64, q_max: f64, n_points: usize) -> Result<Self> {
        if !(q_min.is_finite() && q_max.is_finite() && q_min < q_max) {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy q_min < q_max (got {q_min}, {q_max})"
            )));
        }
        if n_points < 2 {
            return Err(Error::invalid("grid needs at least two points"));
        }
        Ok(Self {
            q_min,
            q_max,
            n_points,
        })
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }
}

/// Lowest eigenpairs of a grid Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub energies: Vec<f64>,
    /// `n_states × n_points`; row `n` holds ψ_n(q_i).
    pub wavefunctions: RMatrix,
    pub spacing: f64,
}

impl EigenSolution {
    pub fn n_states(&self) -> usize {
        self.energies.len()
    }

    /// Gram matrix Σ_i ψ_n(q_i) ψ_m(q_i) Δq.
    pub fn overlap(&self) -> RMatrix {
        &self.wavefunctions * self.wavefunctions.transpose() * self.spacing
    }
}

pub fn kinetic_matrix(grid: &Grid1D, mass: f64) -> Result<RMatrix> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid(format!("mass must be positive, got {mass}")));
    }
    let n = grid.n_points();
    let dq = grid.spacing();
    let scale = 1.0 / (mass * dq * dq);
    Ok(RMatrix::from_fn(n, n, |i, j| {
        if i == j {
            PI * PI / 6.0 * scale
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * scale / (d * d)
        }
    }))
}

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Lowest `n_states` eigenpairs of `T + diag(V(q_i))`.
pub fn solve_schroedinger(
    grid: &Grid1D,
    potential: &PotentialCurve,
    mass: f64,
    n_states: usize,
) -> Result<EigenSolution> {
    let n = grid.n_points();
    if n_states == 0 || n_states > n {
        return Err(Error::invalid(format!(
            "n_states must be in 1..={n}, got {n_states}"
        )));
    }
    let v = potential.sample(grid)?;
    let mut h = kinetic_matrix(grid, mass)?;
    for (i, vi) in v.iter().enumerate() {
        h[(i, i)] += vi;
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, EIGEN_MAX_ITERATIONS).ok_or_else(|| {
        Error::NumericalFailure {
            what: "symmetric eigendecomposition",
            iterations: EIGEN_MAX_ITERATIONS,
            detail: format!("{n}x{n} DVR Hamiltonian for potential '{}'", potential.label()),
        }
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let dq = grid.spacing();
    let norm = 1.0 / dq.sqrt();
    let mut energies = Vec::with_capacity(n_states);
    let mut wavefunctions = RMatrix::zeros(n_states, n);
    for (row, &k) in order.iter().take(n_states).enumerate() {
        energies.push(eig.eigenvalues[k]);
        let col = eig.eigenvectors.column(k);
        // Largest-magnitude amplitude positive.
        let pivot = col.iter().fold(0.0f64, |acc, &x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            wavefunctions[(row, i)] = sign * norm * col[i];
        }
    }
    Ok(EigenSolution {
        energies,
        wavefunctions,
        spacing: dq,
    })
}

/// `M_nm = Σ_i ψ_n(q_i) f(q_i) ψ_m(q_i) Δq`.
pub fn matrix_elements(
    sol: &EigenSolution,
    grid: &Grid1D,
    f: impl Fn(f64) -> f64,
) -> Result<RMatrix> {
    if sol.wavefunctions.ncols() != grid.n_points() {
        return Err(Error::DimensionMismatch {
            expected: grid.n_points(),
            found: sol.wavefunctions.ncols(),
        });
    }
    let weights: Vec<f64> = grid.points().map(|q| f(q) * grid.spacing()).collect();
    if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
        return Err(Error::invalid(format!(
            "operator is not finite at q = {}",
            grid.point(i)
        )));
    }
    let psi = &sol.wavefunctions;
    let ns = sol.n_states();
    let mut out = RMatrix::zeros(ns, ns);
    for n in 0..ns {
        for m in n..ns {
            let v: f64 = (0..grid.n_points())
                .map(|i| psi[(n, i)] * weights[i] * psi[(m, i)])
                .sum();
            out[(n, m)] = v;
            out[(m, n)] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_grid() -> Grid1D {
        Grid1D::new(-10.0, 10.0, 201).unwrap()
    }

    #[test]
    fn kinetic_diagonal_and_signs() {
        let g = TAA_GRID;
        let mu = crate::units::PROTON_MASS;
        let t = kinetic_matrix(&g, mu).unwrap();
        let dq = g.spacing();
        assert!((dq - 0.03).abs() < 1e-14);
        let expect = PI * PI / (6.0 * mu * dq * dq);
        assert!((t[(5, 5)] - expect).abs() < 1e-12 * expect);
        assert!(t[(0, 1)] < 0.0 && t[(0, 2)] > 0.0);
        assert!((t[(3, 7)] - t[(7, 3)]).abs() == 0.0);
        assert!((t[(0, 3)] + 1.0 / (mu * dq * dq * 9.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(kinetic_matrix(&TAA_GRID, 0.0).is_err());
        assert!(kinetic_matrix(&TAA_GRID, -1.0).is_err());
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        let hp = PotentialCurve::harmonic(1.0, 1.0);
        assert!(solve_schroedinger(&TAA_GRID, &hp, 1.0, 200).is_err());
    }

    #[test]
    fn harmonic_oscillator_spectrum() {
        // Analytic oracle E_n = n + 1/2 for m = ω = 1.
        let sol =
            solve_schroedinger(&harmonic_grid(), &PotentialCurve::harmonic(1.0, 1.0), 1.0, 6)
                .unwrap();
        for (n, e) in sol.energies.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-8, "E_{n} = {e}");
        }
    }

    #[test]
    fn harmonic_refinement_is_converged() {
        let hp = PotentialCurve::harmonic(1.0, 1.0);
        let coarse = solve_schroedinger(&harmonic_grid(), &hp, 1.0, 6).unwrap();
        let fine =
            solve_schroedinger(&Grid1D::new(-10.0, 10.0, 401).unwrap(), &hp, 1.0, 6).unwrap();
        for (a, b) in coarse.energies.iter().zip(&fine.energies) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn orthonormal_and_identity_elements() {
        let g = harmonic_grid();
        let sol = solve_schroedinger(&g, &PotentialCurve::harmonic(1.0, 1.0), 1.0, 8).unwrap();
        let gram = sol.overlap();
        let ident = matrix_elements(&sol, &g, |_| 1.0).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).abs() < 1e-10);
                assert!((ident[(i, j)] - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn harmonic_position_ladder() {
        // ⟨n|q|n+1⟩ = sqrt((n+1)/2) for m = ω = 1; diagonal zero by parity.
        let g = harmonic_grid();
        let sol = solve_schroedinger(&g, &PotentialCurve::harmonic(1.0, 1.0), 1.0, 6).unwrap();
        let q = matrix_elements(&sol, &g, |x| x).unwrap();
        for n in 0..6 {
            assert!(q[(n, n)].abs() < 1e-10);
            if n + 1 < 6 {
                let expect = ((n + 1) as f64 / 2.0).sqrt();
                assert!((q[(n, n + 1)].abs() - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn constant_potential_shifts_free_spectrum() {
        let g = Grid1D::new(-3.0, 3.0, 61).unwrap();
        let free = solve_schroedinger(&g, &PotentialCurve::constant(0.0), 2.0, 5).unwrap();
        let shifted = solve_schroedinger(&g, &PotentialCurve::constant(0.25), 2.0, 5).unwrap();
        for (a, b) in free.energies.iter().zip(&shifted.energies) {
            assert!((b - a - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_convention_largest_amplitude_positive() {
        let g = TAA_GRID;
        let sol = solve_schroedinger(
            &g,
            &PotentialCurve::surrogate_taa(),
            crate::units::PROTON_MASS,
            6,
        )
        .unwrap();
        for n in 0..6 {
            let row = sol.wavefunctions.row(n);
            let pivot = row.iter().fold(0.0f64, |a, &x| if x.abs() > a.abs() { x } else { a });
            assert!(pivot > 0.0);
        }
    }
}
