//! Gibbs state, second-order mean-force Gibbs state and coupling-regime
//! classification.
//!
//! `τ_MF⁽²⁾ = τ_G + C⁽²⁾[τ_G] − τ_G tr(C⁽²⁾[τ_G])`.

use crate::bath::BathSpec;
use crate::ccqme::{canonical_map, CcqmeOptions};
use crate::linalg::{c, CMatrix};
use crate::state::DensityMatrix;
use crate::system::NLevelSystem;
use crate::{Error, Result};
use std::fmt;

/// Relative ground-state population error separating the regimes.
pub const REGIME_EPS: f64 = 4e-3;

pub fn gibbs_state(sys: &NLevelSystem, beta: f64) -> Result<DensityMatrix> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("inverse temperature must be > 0, got {beta}")));
    }
    let e0 = sys.energies()[0];
    let w: Vec<f64> = sys.energies().iter().map(|e| (-beta * (e - e0)).exp()).collect();
    DensityMatrix::diagonal(&w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumStates {
    pub tau_g: DensityMatrix,
    pub tau_mf2: DensityMatrix,
    /// `τ_MF⁽²⁾ − τ_G`, Hermitian and traceless.
    pub correction: CMatrix,
}

pub fn mean_force_gibbs2(sys: &NLevelSystem, bath: &BathSpec) -> Result<EquilibriumStates> {
    let tau_g = gibbs_state(sys, bath.beta())?;
    let map = canonical_map(sys, bath, &CcqmeOptions::default())?;
    let ct = map.apply(tau_g.matrix())?;
    let tr = ct.trace();
    let mut correction = &ct - tau_g.matrix() * tr;
    // Remove round-off anti-Hermitian residue.
    correction = (&correction + correction.adjoint()) * c(0.5);
    let tau = tau_g.matrix() + &correction;
    let tau_mf2 = DensityMatrix::from_matrix_unchecked(tau);
    let min_eig = tau_mf2.min_eigenvalue();
    if min_eig < -1e-10 {
        log::warn!(
            "second-order mean-force state is not positive (min eigenvalue {min_eig:e}) at gamma = {}",
            bath.gamma()
        );
    }
    Ok(EquilibriumStates {
        tau_g,
        tau_mf2,
        correction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    UltraWeak,
    Weak,
    Intermediate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::UltraWeak => "UW",
            Regime::Weak => "WK",
            Regime::Intermediate => "IM",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub gamma: f64,
    /// `|p₀(τ_G) − p₀(τ_MF⁽²⁾)| / p₀(τ_MF⁽²⁾)`.
    pub gibbs_vs_mf2: f64,
    /// Same measure between `τ_MF⁽²⁾` and a HEOM steady state, if supplied.
    pub mf2_vs_heom: Option<f64>,
    pub label: Regime,
}

impl RegimeReport {
    /// Whether the intermediate-regime test could be carried out.
    pub fn intermediate_check(&self) -> Result<bool> {
        self.mf2_vs_heom
            .map(|e| e > REGIME_EPS)
            .ok_or_else(|| Error::NotAvailable("intermediate-regime test needs a HEOM steady state".into()))
    }
}

pub fn classify_regime(
    sys: &NLevelSystem,
    bath: &BathSpec,
    heom_steady: Option<&DensityMatrix>,
) -> Result<RegimeReport> {
    classify_regime_with(sys, bath, heom_steady, REGIME_EPS)
}

pub fn classify_regime_with(
    sys: &NLevelSystem,
    bath: &BathSpec,
    heom_steady: Option<&DensityMatrix>,
    eps: f64,
) -> Result<RegimeReport> {
    let eq = mean_force_gibbs2(sys, bath)?;
    let p_mf = eq.tau_mf2.populations()[0];
    let gibbs_vs_mf2 = (eq.tau_g.populations()[0] - p_mf).abs() / p_mf;
    let mf2_vs_heom = match heom_steady {
        Some(h) => {
            if h.dim() != sys.n_levels() {
                return Err(Error::DimensionMismatch {
                    expected: sys.n_levels(),
                    found: h.dim(),
                });
            }
            Some((h.populations()[0] - p_mf).abs() / p_mf)
        }
        None => None,
    };
    let label = if mf2_vs_heom.is_some_and(|e| e > eps) {
        Regime::Intermediate
    } else if gibbs_vs_mf2 < eps {
        Regime::UltraWeak
    } else {
        Regime::Weak
    };
    Ok(RegimeReport {
        gamma: bath.gamma(),
        gibbs_vs_mf2,
        mf2_vs_heom,
        label,
    })
}
