//! Canonical correction map `C⁽²⁾` and the CCQME generator
//! `L = −i[H, ·] + R⁽²⁾ (1 − C⁽²⁾)`.
//!
//! `C⁽²⁾` has three parts, each a fixed N²×N² matrix:
//!
//! - coherences, `[Cρ]_nm = [Rρ]_nm / (iδ_nm)` for `n ≠ m`;
//! - a GKSL-type population part,
//!   `Σ_{n≠l} |q_nl|² ∂_δ Im T(δ_nl) Π_pop D(|n⟩⟨l|)[ρ]`;
//! - the energy-derivative part, `Σ_{n≠l} |q_nl|² Im T(δ_ln) |n⟩(∂_{E_n} ρ_nn)⟨n|`,
//!   where `∂_{E_n}` acts linearly on the population vector through the
//!   ratio of `∂ Re T` and `Re T` sums.

pub mod two_level;

use crate::bath::BathSpec;
use crate::generators::{
    convolution_operator, redfield_superoperator, secularize_with, unitary_liouvillian, Superoperator,
    SuperoperatorKind, DEFAULT_SECULAR_EPS,
};
use crate::linalg::{c, CMatrix};
use crate::system::NLevelSystem;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcqmeOptions {
    /// Secular-project the Redfield part and the composite generator.
    pub secular: bool,
    /// Additionally secular-project the coherence block of `C⁽²⁾`.
    pub secularize_map: bool,
    pub secular_eps: f64,
}

impl Default for CcqmeOptions {
    fn default() -> Self {
        Self {
            secular: false,
            secularize_map: false,
            secular_eps: DEFAULT_SECULAR_EPS,
        }
    }
}

impl CcqmeOptions {
    pub fn secular() -> Self {
        Self {
            secular: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMap {
    pub coherence: Superoperator,
    pub gksl: Superoperator,
    pub derivative: Superoperator,
    total: Superoperator,
}

impl CanonicalMap {
    pub fn superoperator(&self) -> &Superoperator {
        &self.total
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.total.apply(rho)
    }
}

/// Builds `C⁽²⁾`. With `opts.secular && opts.secularize_map` the coherence
/// block keeps only each coherence's self-coupling.
pub fn canonical_map(sys: &NLevelSystem, bath: &BathSpec, opts: &CcqmeOptions) -> Result<CanonicalMap> {
    let n = sys.n_levels();
    let d = sys.bohr_frequencies();
    for i in 0..n {
        for j in 0..n {
            if i != j && d.get(i, j).abs() <= opts.secular_eps {
                return Err(Error::DegenerateSpectrum {
                    n: i.min(j),
                    m: i.max(j),
                    gap: d.get(i, j).abs(),
                });
            }
        }
    }
    let r = redfield_superoperator(sys, &convolution_operator(sys, bath))?;
    let q = sys.coupling();
    let dim2 = n * n;

    let mut coh = CMatrix::zeros(dim2, dim2);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let row = i * n + j;
            let inv = c(1.0) / Complex64::new(0.0, d.get(i, j));
            for col in 0..dim2 {
                coh[(row, col)] = r.matrix()[(row, col)] * inv;
            }
        }
    }
    let mut coherence = Superoperator::new(n, coh, SuperoperatorKind::Canonical)?;
    if opts.secular && opts.secularize_map {
        coherence = secularize_with(&coherence, sys, opts.secular_eps)?;
    }

    // Rate tables: t[a][b] = T(δ_ab), dt[a][b] = T'(δ_ab).
    let mut t = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut dt = t.clone();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                t[a][b] = bath.tunneling_rate(d.get(a, b));
                dt[a][b] = bath.tunneling_rate_derivative(d.get(a, b));
            }
        }
    }
    let pop = |k: usize| k * n + k;

    // Π_pop D(|n⟩⟨l|)[ρ] = ρ_ll (|n⟩⟨n| − |l⟩⟨l|).
    let mut gk = CMatrix::zeros(dim2, dim2);
    for a in 0..n {
        for l in 0..n {
            if a == l {
                continue;
            }
            let w = q[(a, l)] * q[(a, l)] * dt[a][l].im;
            gk[(pop(a), pop(l))] += c(w);
            gk[(pop(l), pop(l))] -= c(w);
        }
    }

    let mut der = CMatrix::zeros(dim2, dim2);
    for a in 0..n {
        let denom: f64 = (0..n)
            .filter(|&l| l != a)
            .map(|l| q[(l, a)] * q[(l, a)] * t[l][a].re)
            .sum();
        if denom == 0.0 {
            continue;
        }
        let shift: f64 = (0..n)
            .filter(|&l| l != a)
            .map(|l| q[(a, l)] * q[(a, l)] * t[l][a].im)
            .sum();
        for l in 0..n {
            if l == a {
                continue;
            }
            let w = q[(a, l)] * q[(a, l)];
            der[(pop(a), pop(l))] += c(shift * w * dt[a][l].re / denom);
            der[(pop(a), pop(a))] += c(shift * w * dt[l][a].re / denom);
        }
    }

    let gksl = Superoperator::new(n, gk, SuperoperatorKind::Canonical)?;
    let derivative = Superoperator::new(n, der, SuperoperatorKind::Canonical)?;
    let total = coherence.add(&gksl)?.add(&derivative)?.with_kind(SuperoperatorKind::Canonical);
    Ok(CanonicalMap {
        coherence,
        gksl,
        derivative,
        total,
    })
}

/// `−i[H, ·] + R⁽²⁾(1 − C⁽²⁾)`; in secular mode
/// `−i[H, ·] + sec(sec(R⁽²⁾)(1 − C⁽²⁾))`.
pub fn ccqme_generator(sys: &NLevelSystem, bath: &BathSpec, opts: &CcqmeOptions) -> Result<Superoperator> {
    let map = canonical_map(sys, bath, opts)?;
    let mut r = redfield_superoperator(sys, &convolution_operator(sys, bath))?;
    if opts.secular {
        r = secularize_with(&r, sys, opts.secular_eps)?;
    }
    let one_minus_c = Superoperator::identity(sys.n_levels()).sub(map.superoperator())?;
    let mut diss = r.compose(&one_minus_c)?;
    if opts.secular {
        diss = secularize_with(&diss, sys, opts.secular_eps)?;
    }
    Ok(unitary_liouvillian(sys).add(&diss)?.with_kind(SuperoperatorKind::Composite))
}
