//! Open-system dynamics for an N-level proton-transfer coordinate coupled to
//! an Ohmic–Drude harmonic bath.
//!
//! The crate is organised bottom-up:
//!
//! - [`dvr`]: sinc-DVR eigensolver for 1D potentials.
//! - [`system`]: truncated N-level model (energies + coupling matrix).
//! - [`bath`]: spectral density, correlation function and tunneling rates.
//! - [`generators`]: Redfield, unitary and secular superoperators.
//! - [`ccqme`]: canonical correction map and the CCQME generator.
//! - [`equilibrium`]: Gibbs and second-order mean-force Gibbs states.
//! - [`heom`]: hierarchical equations of motion benchmark.
//! - [`dynamics`]: RK4 propagation, initial states and observables.
//! - [`metrics`]: time-averaged population errors and state distances.
//!
//! All quantities are in atomic units (hartree, bohr, electron mass, ħ = 1)
//! unless a name says otherwise. Density matrices are vectorized row-major,
//! `index(n, m) = n * N + m`, everywhere.

pub mod bath;
pub mod ccqme;
pub mod dvr;
pub mod dynamics;
pub mod equilibrium;
mod error;
pub mod generators;
pub mod heom;
pub mod linalg;
pub mod metrics;
pub mod state;
pub mod system;
pub mod units;

pub use bath::BathSpec;
pub use ccqme::{canonical_map, ccqme_generator, CanonicalMap, CcqmeOptions};
pub use dvr::{EigenSolution, Grid1D, PotentialCurve};
pub use dynamics::{propagate, Generator, LiouvilleGenerator, PropagationOptions, Trajectory, WavepacketSpec};
pub use equilibrium::{
    gibbs_state, mean_force_gibbs2, classify_regime, EquilibriumStates, Regime, RegimeReport,
};
pub use error::{Error, Result};
pub use generators::{ConvolutionOperator, Superoperator, SuperoperatorKind};
pub use heom::{HeomConfig, HeomGenerator};
pub use num_complex::Complex64;
pub use state::DensityMatrix;
pub use system::{BohrFrequencies, NLevelSystem};
