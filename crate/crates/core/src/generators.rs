//! Dense Liouville-space generators.
//!
//! Density matrices are vectorized row-major, so that
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)`. The second-order Redfield map
//!
//! ```text
//! R[ρ] = 𝒦ρq − q𝒦ρ + qρ𝒦† − ρ𝒦†q,    𝒦_nm = T(δ_nm) q_nm
//! ```
//!
//! then assembles as `𝒦⊗qᵀ − (q𝒦)⊗1 + q⊗conj(𝒦) − 1⊗(𝒦†q)ᵀ`.

use crate::bath::BathSpec;
use crate::linalg::{self, c, kron, CMatrix, CVector};
use crate::state::DensityMatrix;
use crate::system::NLevelSystem;
use crate::{Complex64, Error, Result};
use std::fmt;
use std::io::Write;

/// Default gap tolerance for the secular projection (hartree).
pub const DEFAULT_SECULAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperoperatorKind {
    Unitary,
    Redfield,
    RedfieldT,
    Canonical,
    Composite,
    HeomBlock,
}

impl fmt::Display for SuperoperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Unitary => "unitary",
            Self::Redfield => "redfield",
            Self::RedfieldT => "redfield_t",
            Self::Canonical => "canonical",
            Self::Composite => "composite",
            Self::HeomBlock => "heom_block",
        };
        f.write_str(s)
    }
}

/// N²×N² complex matrix acting on row-major vectorized N×N matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
    kind: SuperoperatorKind,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix, kind: SuperoperatorKind) -> Result<Self> {
        let d2 = dim * dim;
        if matrix.shape() != (d2, d2) {
            return Err(Error::DimensionMismatch {
                expected: d2,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix, kind })
    }

    pub fn zeros(dim: usize, kind: SuperoperatorKind) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
            kind,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::identity(dim * dim, dim * dim),
            kind: SuperoperatorKind::Composite,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn kind(&self) -> SuperoperatorKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: SuperoperatorKind) -> Self {
        self.kind = kind;
        self
    }

    /// Matrix element between vec-indices `(n, m)` and `(k, l)`.
    pub fn element(&self, n: usize, m: usize, k: usize, l: usize) -> Complex64 {
        let d = self.dim;
        self.matrix[(n * d + m, k * d + l)]
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.nrows(),
            });
        }
        let v = &self.matrix * linalg::vectorize(rho);
        Ok(linalg::unvectorize(v.as_slice(), self.dim))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
            kind: SuperoperatorKind::Composite,
        })
    }

    pub fn add(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
            kind: SuperoperatorKind::Composite,
        })
    }

    pub fn sub(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix - &other.matrix,
            kind: SuperoperatorKind::Composite,
        })
    }

    fn check_dim(&self, other: &Superoperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Largest entry of the left trace vector `Σ_n L[(n,n), ·]`; zero for a
    /// trace-annihilating map.
    pub fn trace_violation(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|n| self.matrix[(n * d + n, col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of `L[(n,m),(k,l)] = conj(L[(m,n),(l,k)])`, i.e. of
    /// `L[ρ†] = L[ρ]†`.
    pub fn hermiticity_violation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for n in 0..d {
            for m in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let a = self.matrix[(n * d + m, k * d + l)];
                        let b = self.matrix[(m * d + n, l * d + k)];
                        worst = worst.max((a - b.conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// Stationary state from the null space: the `(0,0)` row is replaced by
    /// the trace functional and the linear system solved by LU.
    pub fn stationary_state(&self) -> Result<DensityMatrix> {
        stationary_state_of(&self.matrix, self.dim)
    }

    /// Plain-text dump: header line, then one row per line with entries
    /// written as `re,im` separated by spaces.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# {} superoperator, N = {}, row-major vec", self.kind, self.dim)?;
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|z| format!("{:.17e},{:.17e}", z.re, z.im)).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

pub(crate) fn stationary_state_of(matrix: &CMatrix, dim: usize) -> Result<DensityMatrix> {
    let d2 = dim * dim;
    let mut a = matrix.clone();
    for col in 0..d2 {
        a[(0, col)] = c(0.0);
    }
    for n in 0..dim {
        a[(0, n * dim + n)] = c(1.0);
    }
    let mut b = CVector::zeros(d2);
    b[0] = c(1.0);
    let scale = linalg::max_abs(matrix).max(f64::MIN_POSITIVE);
    let x = a.clone().lu().solve(&b).ok_or_else(|| Error::NumericalFailure {
        what: "stationary state solve",
        iterations: 0,
        detail: "generator restricted to unit trace is singular".into(),
    })?;
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::NumericalFailure {
            what: "stationary state solve",
            iterations: 0,
            detail: "non-finite solution (no unique stationary state)".into(),
        });
    }
    let residual = (matrix * &x).camax() / scale;
    if residual > 1e-8 {
        return Err(Error::NumericalFailure {
            what: "stationary state solve",
            iterations: 0,
            detail: format!("relative residual {residual:e}"),
        });
    }
    let rho = linalg::unvectorize(x.as_slice(), dim);
    let herm = (&rho + rho.adjoint()) * c(0.5);
    let tr = herm.trace();
    Ok(DensityMatrix::from_matrix_unchecked(herm / tr))
}

/// `𝒦_nm = T(δ_nm) q_nm`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionOperator(pub CMatrix);

impl ConvolutionOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn adjoint(&self) -> CMatrix {
        self.0.adjoint()
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

pub fn convolution_operator(sys: &NLevelSystem, bath: &BathSpec) -> ConvolutionOperator {
    let d = sys.bohr_frequencies();
    let q = sys.coupling();
    let n = sys.n_levels();
    ConvolutionOperator(CMatrix::from_fn(n, n, |i, j| bath.tunneling_rate(d.get(i, j)) * q[(i, j)]))
}

pub fn convolution_operator_t(sys: &NLevelSystem, bath: &BathSpec, t: f64) -> Result<ConvolutionOperator> {
    let d = sys.bohr_frequencies();
    let q = sys.coupling();
    let n = sys.n_levels();
    let mut k = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = bath.tunneling_rate_t(d.get(i, j), t)? * q[(i, j)];
        }
    }
    Ok(ConvolutionOperator(k))
}

/// Redfield superoperator from a convolution operator.
pub fn redfield_superoperator(sys: &NLevelSystem, k: &ConvolutionOperator) -> Result<Superoperator> {
    redfield_from(sys, k, SuperoperatorKind::Redfield)
}

pub fn redfield_superoperator_t(sys: &NLevelSystem, bath: &BathSpec, t: f64) -> Result<Superoperator> {
    let k = convolution_operator_t(sys, bath, t)?;
    redfield_from(sys, &k, SuperoperatorKind::RedfieldT)
}

/// Asymptotic Redfield superoperator straight from system and bath.
pub fn redfield(sys: &NLevelSystem, bath: &BathSpec) -> Superoperator {
    redfield_from(sys, &convolution_operator(sys, bath), SuperoperatorKind::Redfield)
        .expect("convolution operator built from the same system")
}

fn redfield_from(sys: &NLevelSystem, k: &ConvolutionOperator, kind: SuperoperatorKind) -> Result<Superoperator> {
    let n = sys.n_levels();
    if k.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k.dim(),
        });
    }
    let q = linalg::complexify(sys.coupling());
    let kk = k.matrix();
    let kd = kk.adjoint();
    let id = CMatrix::identity(n, n);
    let matrix = kron(kk, &q.transpose()) - kron(&(&q * kk), &id) + kron(&q, &kk.map(|z| z.conj()))
        - kron(&id, &(&kd * &q).transpose());
    Superoperator::new(n, matrix, kind)
}

/// `−i[H, ·]` as `−i(H⊗1 − 1⊗Hᵀ)`.
pub fn unitary_liouvillian(sys: &NLevelSystem) -> Superoperator {
    let n = sys.n_levels();
    let e = sys.energies();
    let mut m = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(i * n + j, i * n + j)] = Complex64::new(0.0, -(e[i] - e[j]));
        }
    }
    Superoperator {
        dim: n,
        matrix: m,
        kind: SuperoperatorKind::Unitary,
    }
}

/// Keeps only the elements linking `(n,m)` to `(k,l)` with `|δ_nm − δ_kl| ≤ eps`.
pub fn secularize_with(sop: &Superoperator, sys: &NLevelSystem, eps: f64) -> Result<Superoperator> {
    let n = sys.n_levels();
    if sop.dim != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sop.dim,
        });
    }
    let d = sys.bohr_frequencies();
    let mut out = sop.clone();
    for a in 0..n * n {
        let gap_a = d.get(a / n, a % n);
        for b in 0..n * n {
            if (gap_a - d.get(b / n, b % n)).abs() > eps {
                out.matrix[(a, b)] = c(0.0);
            }
        }
    }
    Ok(out)
}

pub fn secularize(sop: &Superoperator, sys: &NLevelSystem) -> Result<Superoperator> {
    secularize_with(sop, sys, DEFAULT_SECULAR_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::beta_from_kelvin;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(gamma: f64) -> (NLevelSystem, BathSpec) {
        (
            NLevelSystem::from_tables(),
            BathSpec::new(gamma, 2.28e-3, beta_from_kelvin(300.0), 1000).unwrap(),
        )
    }

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &a + a.adjoint()
    }

    #[test]
    fn redfield_matches_matrix_expression() {
        let (sys, bath) = setup(0.3);
        let k = convolution_operator(&sys, &bath);
        let r = redfield_superoperator(&sys, &k).unwrap();
        let q = linalg::complexify(sys.coupling());
        let kk = k.matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let rho = random_hermitian(6, &mut rng);
            let direct = kk * &rho * &q - &q * kk * &rho + &q * &rho * kk.adjoint() - &rho * kk.adjoint() * &q;
            let via = r.apply(&rho).unwrap();
            assert!((direct - via).camax() < 1e-14 * kk.camax().max(1e-300) * 10.0);
        }
    }

    #[test]
    fn redfield_structure() {
        let (sys, bath) = setup(0.5);
        let r = redfield(&sys, &bath);
        let scale = r.matrix().camax();
        assert!(r.trace_violation() < 1e-12 * scale);
        assert!(r.hermiticity_violation() < 1e-12 * scale);
        let zero = redfield(&sys, &bath.with_gamma(0.0).unwrap());
        assert_eq!(zero.matrix().camax(), 0.0);
    }

    #[test]
    fn convolution_two_level_layout() {
        let (sys, bath) = setup(0.2);
        let sys = sys.truncate(2).unwrap();
        let k = convolution_operator(&sys, &bath);
        let d = sys.energies()[1] - sys.energies()[0];
        let q = sys.coupling();
        assert_eq!(k.0[(0, 1)], bath.tunneling_rate(-d) * q[(0, 1)]);
        assert_eq!(k.0[(1, 0)], bath.tunneling_rate(d) * q[(1, 0)]);
        assert_eq!(k.0[(0, 0)], bath.tunneling_rate(0.0) * q[(0, 0)]);
        let kd = k.adjoint();
        assert_eq!(kd[(0, 1)], bath.tunneling_rate(d).conj() * q[(1, 0)]);
    }

    #[test]
    fn unitary_liouvillian_behaviour() {
        let (sys, _) = setup(0.0);
        let l = unitary_liouvillian(&sys);
        let diag = DensityMatrix::diagonal(&[1.0, 2.0, 3.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(l.apply(diag.matrix()).unwrap().camax(), 0.0);
        let two = unitary_liouvillian(&sys.truncate(2).unwrap());
        let mut rho = CMatrix::zeros(2, 2);
        rho[(0, 1)] = c(1.0);
        let out = two.apply(&rho).unwrap();
        let d = sys.energies()[1] - sys.energies()[0];
        assert!((out[(0, 1)] - Complex64::new(0.0, d)).norm() < 1e-18);
        assert_eq!(l.hermiticity_violation(), 0.0);
    }

    #[test]
    fn time_dependent_limits() {
        let (sys, bath) = setup(0.2);
        let r0 = redfield_superoperator_t(&sys, &bath, 0.0).unwrap();
        assert_eq!(r0.matrix().camax(), 0.0);
        let rinf = redfield_superoperator_t(&sys, &bath, 2e5).unwrap();
        let r = redfield(&sys, &bath);
        assert!((rinf.matrix() - r.matrix()).camax() < 1e-10 * r.matrix().camax());
        let rt = redfield_superoperator_t(&sys, &bath, 300.0).unwrap();
        assert!(rt.hermiticity_violation() < 1e-12 * rt.matrix().camax());
    }

    #[test]
    fn secular_redfield_relaxes_to_gibbs() {
        let (sys, bath) = setup(0.3);
        let l = unitary_liouvillian(&sys).add(&secularize(&redfield(&sys, &bath), &sys).unwrap()).unwrap();
        let ss = l.stationary_state().unwrap();
        let p = ss.populations();
        let e = sys.energies();
        for n in 1..6 {
            let expect = (-bath.beta() * (e[n] - e[0])).exp();
            assert!((p[n] / p[0] / expect - 1.0).abs() < 1e-10, "level {n}");
        }
        assert!(ss.max_coherence() < 1e-14);
    }

    #[test]
    fn secular_two_level_rates() {
        let (sys, bath) = setup(0.3);
        let sys = sys.truncate(2).unwrap();
        let r = secularize(&redfield(&sys, &bath), &sys).unwrap();
        let d = sys.energies()[1] - sys.energies()[0];
        let q01 = sys.coupling()[(0, 1)];
        // d p0/dt gets +W(1→0) p1 with W(1→0) = 2 q01² Re T(δ01): downhill
        // rates sit at negative Bohr frequency.
        let w10 = 2.0 * q01 * q01 * bath.tunneling_rate(-d).re;
        let w01 = 2.0 * q01 * q01 * bath.tunneling_rate(d).re;
        assert!(w10 > w01);
        assert!((r.element(0, 0, 1, 1).re - w10).abs() < 1e-12 * w10);
        assert!((r.element(1, 1, 0, 0).re - w01).abs() < 1e-12 * w01);
        assert!((r.element(0, 0, 0, 0).re + w01).abs() < 1e-12 * w01);
        // Diagonal-only input stays unchanged.
        let again = secularize(&r, &sys).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn text_dump_shape() {
        let (sys, _) = setup(0.0);
        let l = unitary_liouvillian(&sys.truncate(2).unwrap());
        let mut buf = Vec::new();
        l.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert_eq!(text.lines().nth(1).unwrap().split(' ').count(), 4);
    }
}
