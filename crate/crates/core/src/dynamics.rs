//! Fixed-step RK4 propagation, initial states and observables.

use crate::dvr::{EigenSolution, Grid1D};
use crate::generators::Superoperator;
use crate::linalg::{self, c, CMatrix};
use crate::state::DensityMatrix;
use crate::system::NLevelSystem;
use crate::units::{au_to_fs, fs_to_au, PROTON_MASS};
use crate::{Complex64, Error, Result};
use std::io::Write;

/// A linear generator `dx/dt = L x` on a flat complex state whose first
/// `N²` entries are the row-major physical density matrix.
pub trait Generator: Sync {
    fn state_dim(&self) -> usize;
    fn system_dim(&self) -> usize;
    /// `out = L x`.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64]);
    fn embed(&self, rho: &CMatrix) -> Vec<Complex64>;
    fn root(&self, x: &[Complex64]) -> CMatrix;
}

/// CSR copy of a Liouville-space superoperator; exact zeros are dropped, so
/// secular generators cost only their surviving entries.
#[derive(Debug, Clone)]
pub struct LiouvilleGenerator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl LiouvilleGenerator {
    pub fn new(sop: &Superoperator) -> Self {
        let m = sop.matrix();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                let v = m[(r, col)];
                if v != c(0.0) {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim: sop.dim(),
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

impl Generator for LiouvilleGenerator {
    fn state_dim(&self) -> usize {
        self.dim * self.dim
    }

    fn system_dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = c(0.0);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            *o = s;
        }
    }

    fn embed(&self, rho: &CMatrix) -> Vec<Complex64> {
        linalg::vectorize(rho).as_slice().to_vec()
    }

    fn root(&self, x: &[Complex64]) -> CMatrix {
        linalg::unvectorize(&x[..self.dim * self.dim], self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationOptions {
    /// Final time (a.u.).
    pub t_max: f64,
    /// Step (a.u.).
    pub dt: f64,
    /// Record observables every `stride` steps (and at the last step).
    pub stride: usize,
    /// Coherences `ρ_nm` to record.
    pub coherences: Vec<(usize, usize)>,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            t_max: fs_to_au(2500.0),
            dt: 1.0,
            stride: 100,
            coherences: vec![(0, 1)],
        }
    }
}

impl PropagationOptions {
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_max >= self.dt) {
            problems.push(format!("t_max ({}) must be >= dt ({})", self.t_max, self.dt));
        }
        if self.stride == 0 {
            problems.push("stride must be >= 1".to_string());
        }
        for &(a, b) in &self.coherences {
            if a >= n || b >= n {
                problems.push(format!("coherence ({a}, {b}) out of range for N = {n}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(problems.join("; ")))
        }
    }
}

/// Sampled observables of one propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times_au: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub coherence_pairs: Vec<(usize, usize)>,
    pub coherences: Vec<Vec<Complex64>>,
    pub q_expect: Vec<f64>,
    pub trace: Vec<f64>,
    pub min_eig: Vec<f64>,
    /// `max |ρ − ρ†|` per sample.
    pub hermiticity: Vec<f64>,
    /// `tr(ρ H)` per sample (hartree).
    pub energy: Vec<f64>,
    pub final_state: CMatrix,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times_au.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_au.is_empty()
    }

    pub fn times_fs(&self) -> Vec<f64> {
        self.times_au.iter().map(|&t| au_to_fs(t)).collect()
    }

    /// Time series of `p_n`.
    pub fn population(&self, n: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[n]).collect()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.trace.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.hermiticity.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let n = self.populations.first().map_or(0, Vec::len);
        let mut header = vec!["time_fs".to_string()];
        header.extend((0..n).map(|i| format!("p_{i}")));
        for &(a, b) in &self.coherence_pairs {
            header.push(format!("re_rho_{a}_{b}"));
            header.push(format!("im_rho_{a}_{b}"));
        }
        header.extend(["q_expect_bohr", "trace", "min_eig"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for (s, t) in self.times_au.iter().enumerate() {
            let mut row = vec![format!("{:.6}", au_to_fs(*t))];
            row.extend(self.populations[s].iter().map(|p| format!("{p:.12e}")));
            for z in &self.coherences[s] {
                row.push(format!("{:.12e}", z.re));
                row.push(format!("{:.12e}", z.im));
            }
            row.push(format!("{:.12e}", self.q_expect[s]));
            row.push(format!("{:.15e}", self.trace[s]));
            row.push(format!("{:.12e}", self.min_eig[s]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Classical fourth-order Runge–Kutta with a fixed step; the last step is
/// shortened to land on `t_max`.
pub fn propagate(
    gen: &dyn Generator,
    sys: &NLevelSystem,
    rho0: &DensityMatrix,
    opts: &PropagationOptions,
) -> Result<Trajectory> {
    let n = sys.n_levels();
    if gen.system_dim() != n || rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim().min(gen.system_dim()),
        });
    }
    opts.validate(n)?;
    let dim = gen.state_dim();
    let mut x = gen.embed(rho0.matrix());
    let mut k1 = vec![c(0.0); dim];
    let mut k2 = vec![c(0.0); dim];
    let mut k3 = vec![c(0.0); dim];
    let mut k4 = vec![c(0.0); dim];
    let mut tmp = vec![c(0.0); dim];

    let mut traj = Trajectory {
        times_au: Vec::new(),
        populations: Vec::new(),
        coherence_pairs: opts.coherences.clone(),
        coherences: Vec::new(),
        q_expect: Vec::new(),
        trace: Vec::new(),
        min_eig: Vec::new(),
        hermiticity: Vec::new(),
        energy: Vec::new(),
        final_state: rho0.matrix().clone(),
    };
    let steps = opts.n_steps();
    let mut t = 0.0;
    record(&mut traj, gen, sys, &x, t);
    for step in 1..=steps {
        let h = if step == steps { opts.t_max - t } else { opts.dt };
        gen.apply(&x, &mut k1);
        axpy(&mut tmp, &x, &k1, 0.5 * h);
        gen.apply(&tmp, &mut k2);
        axpy(&mut tmp, &x, &k2, 0.5 * h);
        gen.apply(&tmp, &mut k3);
        axpy(&mut tmp, &x, &k3, h);
        gen.apply(&tmp, &mut k4);
        let w = h / 6.0;
        for i in 0..dim {
            x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        t = if step == steps { opts.t_max } else { step as f64 * opts.dt };
        if step % 64 == 0 || step == steps || step % opts.stride == 0 {
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { time: t });
            }
        }
        if step % opts.stride == 0 || step == steps {
            record(&mut traj, gen, sys, &x, t);
        }
    }
    traj.final_state = gen.root(&x);
    Ok(traj)
}

fn axpy(out: &mut [Complex64], x: &[Complex64], k: &[Complex64], a: f64) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + ki * a;
    }
}

fn record(traj: &mut Trajectory, gen: &dyn Generator, sys: &NLevelSystem, x: &[Complex64], t: f64) {
    let rho = gen.root(x);
    let n = rho.nrows();
    traj.times_au.push(t);
    traj.populations.push((0..n).map(|i| rho[(i, i)].re).collect());
    traj.coherences.push(traj.coherence_pairs.iter().map(|&(a, b)| rho[(a, b)]).collect());
    traj.q_expect.push(trace_product(&rho, sys).re);
    traj.trace.push(rho.trace().re);
    traj.min_eig.push(linalg::hermitian_eigenvalues(&rho)[0]);
    traj.hermiticity.push(linalg::hermiticity_error(&rho));
    traj.energy.push((0..n).map(|i| rho[(i, i)].re * sys.energies()[i]).sum());
}

fn trace_product(rho: &CMatrix, sys: &NLevelSystem) -> Complex64 {
    let q = sys.coupling();
    let n = rho.nrows();
    let mut s = c(0.0);
    for a in 0..n {
        for b in 0..n {
            s += rho[(a, b)] * q[(b, a)];
        }
    }
    s
}

/// `⟨q⟩ = tr(ρ q)`.
pub fn expectation_q(sys: &NLevelSystem, rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sys.n_levels() {
        return Err(Error::DimensionMismatch {
            expected: sys.n_levels(),
            found: rho.dim(),
        });
    }
    let v = trace_product(rho.matrix(), sys);
    if v.im.abs() > 1e-10 {
        return Err(Error::invalid(format!("<q> has imaginary part {:e}", v.im)));
    }
    Ok(v.re)
}

pub fn initial_eigenstate(sys: &NLevelSystem, n: usize) -> Result<DensityMatrix> {
    DensityMatrix::projector(sys.n_levels(), n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    /// Centre `q_L` (bohr).
    pub center: f64,
    /// Width `a` (bohr).
    pub width: f64,
    /// Momentum `k₀` (a.u.).
    pub k0: f64,
    /// Mass used to derive `k₀` (m_e).
    pub mass: f64,
}

pub const DEFAULT_LEAKAGE_BOUND: f64 = 0.05;

impl WavepacketSpec {
    /// Packet whose kinetic energy `k₀²/2μ` equals `energy`.
    pub fn with_kinetic_energy(center: f64, width: f64, energy: f64, mass: Option<f64>) -> Result<Self> {
        let mass = mass.unwrap_or(PROTON_MASS);
        if !(width > 0.0) || !(mass > 0.0) || !(energy >= 0.0) {
            return Err(Error::invalid("wavepacket needs width > 0, mass > 0 and energy >= 0"));
        }
        Ok(Self {
            center,
            width,
            k0: (2.0 * mass * energy).sqrt(),
            mass,
        })
    }

    /// `ψ(q) = (2/(πa²))^{1/4} exp(−(q − q_L)²/a²) exp(i k₀ (q − q_L))`.
    pub fn amplitude(&self, q: f64) -> Complex64 {
        let a = self.width;
        let x = q - self.center;
        let norm = (2.0 / (std::f64::consts::PI * a * a)).powf(0.25);
        Complex64::from_polar(norm * (-(x * x) / (a * a)).exp(), self.k0 * x)
    }
}

/// Projects the packet onto the lowest `n` eigenstates. Returns the
/// renormalized pure state and the leakage `1 − Σ|c_n|²` before
/// renormalization.
pub fn initial_wavepacket(
    sol: &EigenSolution,
    grid: &Grid1D,
    wp: &WavepacketSpec,
    n: usize,
) -> Result<(DensityMatrix, f64)> {
    if !(wp.width > 0.0) {
        return Err(Error::invalid("wavepacket width must be > 0"));
    }
    if n == 0 || n > sol.n_states() {
        return Err(Error::invalid(format!("need 1..={} states, got {n}", sol.n_states())));
    }
    if sol.wavefunctions.ncols() != grid.n_points() {
        return Err(Error::DimensionMismatch {
            expected: grid.n_points(),
            found: sol.wavefunctions.ncols(),
        });
    }
    let psi: Vec<Complex64> = grid.points().map(|q| wp.amplitude(q)).collect();
    let dq = grid.spacing();
    let coeffs: Vec<Complex64> = (0..n)
        .map(|k| (0..grid.n_points()).map(|i| psi[i] * sol.wavefunctions[(k, i)] * dq).sum())
        .collect();
    let weight: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    if !(weight > 0.0) {
        return Err(Error::invalid("wavepacket has no overlap with the basis"));
    }
    let leakage = 1.0 - weight;
    if leakage > DEFAULT_LEAKAGE_BOUND {
        log::warn!("wavepacket leakage outside the {n}-level basis is {leakage:.3}");
    }
    let rho = CMatrix::from_fn(n, n, |a, b| coeffs[a] * coeffs[b].conj() / weight);
    Ok((DensityMatrix::from_matrix_unchecked(rho), leakage))
}
