//! Hierarchical equations of motion for a Drude bath.
//!
//! With `C_F(t) = Σ_k c_k e^{−μ_k t}` (k = 0 the Drude pole, k ≥ 1 the first
//! Matsubara terms), the auxiliary density operators obey
//!
//! ```text
//! dρ_n/dt = −i[H, ρ_n] − Σ_k n_k μ_k ρ_n
//!           − i Σ_k [q, ρ_{n+e_k}]
//!           − i Σ_k n_k (c_k q ρ_{n−e_k} − c_k* ρ_{n−e_k} q)
//!           − Δ [q, [q, ρ_n]]                       (terminator)
//! ```
//!
//! Internally ADOs are stored scaled, `ρ̃_n = ρ_n / Π_k √(n_k! |c_k|^{n_k})`,
//! which turns the couplings into `√((n_k+1)|c_k|)` upward and
//! `√(n_k |c_k|) c_k/|c_k|` downward. The root (all `n_k = 0`) is unscaled.
//!
//! The terminator folds the omitted Matsubara terms, `Σ_{n ≥ K} B_n/ν_n`,
//! into a white-noise double commutator and is applied to every ADO.

use crate::bath::BathSpec;
use crate::dynamics::Generator;
use crate::linalg::{c, CMatrix};
use crate::state::DensityMatrix;
use crate::system::NLevelSystem;
use crate::{Complex64, Error, Result};
use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeomConfig {
    /// Maximum total occupation `Σ n_k`.
    pub depth: usize,
    /// Number of exponentials: the Drude pole plus `K − 1` Matsubara terms.
    pub n_exponentials: usize,
    pub terminator: bool,
}

impl Default for HeomConfig {
    fn default() -> Self {
        Self {
            depth: 5,
            n_exponentials: 3,
            terminator: true,
        }
    }
}

impl HeomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.n_exponentials == 0 {
            return Err(Error::invalid(format!(
                "HEOM depth and exponent count must be >= 1 (got {} and {})",
                self.depth, self.n_exponentials
            )));
        }
        Ok(())
    }
}

/// `(c_k, μ_k)` for `k = 0 … K−1`.
pub fn bath_exponents(bath: &BathSpec, k: usize) -> Result<Vec<(Complex64, f64)>> {
    if k == 0 {
        return Err(Error::invalid("need at least one exponential"));
    }
    let mut out = vec![(bath.drude_coefficient(), bath.omega_c())];
    for j in 1..k {
        out.push((c(bath.matsubara_coefficient(j)), bath.matsubara_frequency(j)));
    }
    Ok(out)
}

/// `Σ_{n ≥ K} B_n / ν_n` for a hierarchy keeping `K − 1` Matsubara terms.
pub fn terminator_strength(bath: &BathSpec, k: usize) -> f64 {
    let half = 0.5 * bath.beta() * bath.omega_c();
    let total = bath.gamma() / bath.beta() * (1.0 - half / half.tan());
    let kept: f64 = (1..k)
        .map(|n| bath.matsubara_coefficient(n) / bath.matsubara_frequency(n))
        .sum();
    total - kept
}

#[derive(Debug, Clone)]
pub struct HeomGenerator {
    n: usize,
    energies: Vec<f64>,
    /// Row-major real coupling matrix.
    q: Vec<f64>,
    indices: Vec<Vec<u8>>,
    decay: Vec<f64>,
    /// `(neighbour ADO, weight)` for `n + e_k`.
    up: Vec<Vec<(usize, f64)>>,
    /// `(neighbour ADO, weight · c_k/|c_k|)` for `n − e_k`.
    down: Vec<Vec<(usize, Complex64)>>,
    terminator: f64,
    config: HeomConfig,
}

impl HeomGenerator {
    pub fn new(sys: &NLevelSystem, bath: &BathSpec, config: HeomConfig) -> Result<Self> {
        config.validate()?;
        let k = config.n_exponentials;
        let exps = bath_exponents(bath, k)?;
        let indices = enumerate_indices(k, config.depth);
        let lookup: HashMap<&[u8], usize> = indices.iter().enumerate().map(|(i, v)| (v.as_slice(), i)).collect();
        let mut decay = Vec::with_capacity(indices.len());
        let mut up = Vec::with_capacity(indices.len());
        let mut down = Vec::with_capacity(indices.len());
        let mut probe = vec![0u8; k];
        for idx in &indices {
            decay.push(idx.iter().zip(&exps).map(|(&nk, &(_, mu))| nk as f64 * mu).sum());
            let mut u = Vec::new();
            let mut d = Vec::new();
            for j in 0..k {
                let (cj, _) = exps[j];
                let mag = cj.norm();
                let phase = if mag > 0.0 { cj / mag } else { c(0.0) };
                probe.copy_from_slice(idx);
                probe[j] += 1;
                if let Some(&t) = lookup.get(probe.as_slice()) {
                    if mag > 0.0 {
                        u.push((t, ((idx[j] as f64 + 1.0) * mag).sqrt()));
                    }
                }
                if idx[j] > 0 {
                    probe.copy_from_slice(idx);
                    probe[j] -= 1;
                    let t = lookup[probe.as_slice()];
                    if mag > 0.0 {
                        d.push((t, phase * (idx[j] as f64 * mag).sqrt()));
                    }
                }
            }
            up.push(u);
            down.push(d);
        }
        let n = sys.n_levels();
        let q = sys.coupling();
        Ok(Self {
            n,
            energies: sys.energies().to_vec(),
            q: (0..n * n).map(|i| q[(i / n, i % n)]).collect(),
            indices,
            decay,
            up,
            down,
            terminator: if config.terminator { terminator_strength(bath, k) } else { 0.0 },
            config,
        })
    }

    pub fn n_ados(&self) -> usize {
        self.indices.len()
    }

    pub fn config(&self) -> HeomConfig {
        self.config
    }

    /// Multi-index of ADO `i` (lexicographic order, root first).
    pub fn index(&self, i: usize) -> &[u8] {
        &self.indices[i]
    }

    /// Dense matrix of the full generator, built column by column.
    pub fn dense_matrix(&self) -> CMatrix {
        let dim = self.state_dim();
        let mut m = CMatrix::zeros(dim, dim);
        let mut e = vec![c(0.0); dim];
        let mut out = vec![c(0.0); dim];
        for col in 0..dim {
            e[col] = c(1.0);
            self.apply(&e, &mut out);
            e[col] = c(0.0);
            for (row, v) in out.iter().enumerate() {
                m[(row, col)] = *v;
            }
        }
        m
    }

    /// Nonzero entries `(row, col, value)` of the full generator, assembled
    /// from `N²×N²` blocks of the commutator with `q`.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let n = self.n;
        let n2 = n * n;
        // vec(qX) = (q ⊗ 1) vec X, vec(Xq) = (1 ⊗ qᵀ) vec X.
        let lq = |r: usize, col: usize| if r % n == col % n { self.q[(r / n) * n + col / n] } else { 0.0 };
        let rq = |r: usize, col: usize| if r / n == col / n { self.q[(col % n) * n + r % n] } else { 0.0 };
        let comm: Vec<f64> = (0..n2 * n2).map(|k| lq(k / n2, k % n2) - rq(k / n2, k % n2)).collect();
        let comm2: Vec<f64> = (0..n2 * n2)
            .map(|k| (0..n2).map(|j| comm[(k / n2) * n2 + j] * comm[j * n2 + k % n2]).sum())
            .collect();
        let mut out = Vec::new();
        for i in 0..self.indices.len() {
            let base = i * n2;
            for r in 0..n2 {
                let (a, b) = (r / n, r % n);
                for col in 0..n2 {
                    let mut v = c(-self.terminator * comm2[r * n2 + col]);
                    if r == col {
                        v += Complex64::new(-self.decay[i], -(self.energies[a] - self.energies[b]));
                    }
                    if v != c(0.0) {
                        out.push((base + r, base + col, v));
                    }
                }
            }
            for &(t, w) in &self.up[i] {
                for (k, &cm) in comm.iter().enumerate() {
                    if cm != 0.0 {
                        out.push((base + k / n2, t * n2 + k % n2, Complex64::new(0.0, -w * cm)));
                    }
                }
            }
            for &(t, w) in &self.down[i] {
                for r in 0..n2 {
                    for col in 0..n2 {
                        let v = Complex64::new(0.0, -1.0) * (w * lq(r, col) - w.conj() * rq(r, col));
                        if v != c(0.0) {
                            out.push((base + r, t * n2 + col, v));
                        }
                    }
                }
            }
        }
        out
    }

    /// Steady state from the null space of the full generator: the root's
    /// `(0,0)` equation is replaced by the trace condition and the sparse
    /// system solved by LU.
    pub fn steady_state(&self, gamma: f64) -> Result<DensityMatrix> {
        if gamma == 0.0 {
            return Err(Error::NumericalFailure {
                what: "HEOM steady state",
                iterations: 0,
                detail: "no dissipation at zero coupling; stationary state is not unique".into(),
            });
        }
        let dim = self.state_dim();
        let n = self.n;
        let full = self.triplets();
        let scale = full.iter().map(|t| t.2.norm()).fold(0.0, f64::max);
        let mut entries: Vec<Triplet<usize, usize, c64>> = full
            .iter()
            .filter(|t| t.0 != 0)
            .map(|&(r, col, v)| Triplet::new(r, col, v))
            .collect();
        entries.extend((0..n).map(|k| Triplet::new(0, k * n + k, c(1.0))));
        let failure = |detail: String| Error::NumericalFailure { what: "HEOM steady state", iterations: 0, detail };
        let a = SparseColMat::<usize, c64>::try_new_from_triplets(dim, dim, &entries)
            .map_err(|e| failure(format!("sparse assembly: {e:?}")))?;
        let lu = a.sp_lu().map_err(|e| failure(format!("sparse LU: {e:?}")))?;
        let mut b = Mat::<c64>::zeros(dim, 1);
        b[(0, 0)] = c(1.0);
        let x = lu.solve(&b);
        let xs: Vec<Complex64> = (0..dim).map(|i| x[(i, 0)]).collect();
        if xs.iter().any(|z| !z.is_finite()) {
            return Err(failure("generator restricted to unit trace is singular".into()));
        }
        let mut out = vec![c(0.0); dim];
        self.apply(&xs, &mut out);
        let residual = out.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(residual <= 1e-9 * scale) {
            return Err(failure(format!("residual {residual:e} against generator scale {scale:e}")));
        }
        let root = CMatrix::from_fn(n, n, |i, j| xs[i * n + j]);
        let herm = (&root + root.adjoint()) * c(0.5);
        let tr = herm.trace();
        Ok(DensityMatrix::from_matrix_unchecked(herm / tr))
    }

    #[inline]
    fn q_left(&self, x: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        // out += scale · q x
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                let mut s = c(0.0);
                for k in 0..n {
                    s += x[k * n + b] * self.q[a * n + k];
                }
                out[a * n + b] += scale * s;
            }
        }
    }

    #[inline]
    fn q_right(&self, x: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        // out += scale · x q
        let n = self.n;
        for a in 0..n {
            for b in 0..n {
                let mut s = c(0.0);
                for k in 0..n {
                    s += x[a * n + k] * self.q[k * n + b];
                }
                out[a * n + b] += scale * s;
            }
        }
    }
}

fn enumerate_indices(k: usize, depth: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; k];
    fn rec(pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v as u8;
            rec(pos + 1, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    rec(0, depth, &mut cur, &mut out);
    out
}

impl Generator for HeomGenerator {
    fn state_dim(&self) -> usize {
        self.indices.len() * self.n * self.n
    }

    fn system_dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let n2 = n * n;
        let mi = Complex64::new(0.0, -1.0);
        let mut left = vec![c(0.0); n2];
        let mut right = vec![c(0.0); n2];
        let mut comm = vec![c(0.0); n2];
        for (i, chunk) in out.chunks_exact_mut(n2).enumerate() {
            let rho = &x[i * n2..(i + 1) * n2];
            let g = self.decay[i];
            for a in 0..n {
                for b in 0..n {
                    let w = Complex64::new(-g, -(self.energies[a] - self.energies[b]));
                    chunk[a * n + b] = w * rho[a * n + b];
                }
            }
            // −i(q L − R q) collects all couplings: L = R = Σ up ADOs,
            // L += Σ ĉ w ρ_down, R += Σ ĉ* w ρ_down, and the terminator
            // −Δ[q,[q,ρ]] = −i(q X − X q) with X = −iΔ[q, ρ].
            left.iter_mut().for_each(|z| *z = c(0.0));
            right.iter_mut().for_each(|z| *z = c(0.0));
            for &(t, w) in &self.up[i] {
                let src = &x[t * n2..(t + 1) * n2];
                for p in 0..n2 {
                    let v = src[p] * w;
                    left[p] += v;
                    right[p] += v;
                }
            }
            for &(t, w) in &self.down[i] {
                let src = &x[t * n2..(t + 1) * n2];
                let wc = w.conj();
                for p in 0..n2 {
                    left[p] += src[p] * w;
                    right[p] += src[p] * wc;
                }
            }
            if self.terminator != 0.0 {
                comm.iter_mut().for_each(|z| *z = c(0.0));
                self.q_left(rho, &mut comm, c(1.0));
                self.q_right(rho, &mut comm, c(-1.0));
                let s = Complex64::new(0.0, -self.terminator);
                for p in 0..n2 {
                    let v = comm[p] * s;
                    left[p] += v;
                    right[p] += v;
                }
            }
            self.q_left(&left, chunk, mi);
            self.q_right(&right, chunk, -mi);
        }
    }

    fn embed(&self, rho: &CMatrix) -> Vec<Complex64> {
        let n = self.n;
        let mut v = vec![c(0.0); self.state_dim()];
        for a in 0..n {
            for b in 0..n {
                v[a * n + b] = rho[(a, b)];
            }
        }
        v
    }

    fn root(&self, x: &[Complex64]) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, n, |a, b| x[a * n + b])
    }
}
