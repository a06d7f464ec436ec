//! Element-by-element two-level formulas for the Redfield map, `C⁽²⁾` and the
//! CCQME right-hand side, written out independently of the general-N
//! builders so the two can be compared.

use crate::bath::BathSpec;
use crate::Complex64;

type M2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy)]
pub struct TwoLevelParams {
    pub e0: f64,
    pub e1: f64,
    pub q00: f64,
    /// `q₀₁ = q₁₀`.
    pub q: f64,
    pub q11: f64,
}

#[derive(Debug, Clone)]
pub struct TwoLevelOracle {
    pub k: M2,
    pub k_dag: M2,
    pub a: M2,
    pub b: M2,
    pub c: M2,
    pub d: M2,
    pub r: M2,
    /// `[C⁽²⁾ρ]₀₁`, `[C⁽²⁾ρ]₁₀`.
    pub c2_coh: (Complex64, Complex64),
    pub q00: Complex64,
    pub q11: Complex64,
    pub rho_prime: M2,
    pub rhs: M2,
}

/// `A = 𝒦ρq`, `B = qρ𝒦†`, `C = q𝒦ρ`, `D = ρ𝒦†q` and `R = A + B − C − D`.
fn redfield(rho: &M2, p: &TwoLevelParams, t: &Rates) -> (M2, M2, M2, M2, M2) {
    let (q00, q, q11) = (p.q00, p.q, p.q11);
    let (t0, tp, tm) = (t.t0, t.tp, t.tm);
    let (r00, r01, r10, r11) = (rho[0][0], rho[0][1], rho[1][0], rho[1][1]);
    let a = [
        [
            t0 * (q00 * q00 * r00 + q00 * q * r01) + tm * (q * q00 * r10 + q * q * r11),
            t0 * (q00 * q * r00 + q00 * q11 * r01) + tm * (q * q * r10 + q * q11 * r11),
        ],
        [
            tp * (q * q00 * r00 + q * q * r01) + t0 * (q11 * q00 * r10 + q11 * q * r11),
            tp * (q * q * r00 + q * q11 * r01) + t0 * (q11 * q * r10 + q11 * q11 * r11),
        ],
    ];
    let (t0c, tpc, tmc) = (t0.conj(), tp.conj(), tm.conj());
    let b = [
        [
            t0c * (q00 * q00 * r00 + q * q00 * r10) + tmc * (q * q00 * r01 + q * q * r11),
            tpc * (q * q00 * r00 + q * q * r10) + t0c * (q00 * q11 * r01 + q * q11 * r11),
        ],
        [
            t0c * (q * q00 * r00 + q00 * q11 * r10) + tmc * (q * q * r01 + q * q11 * r11),
            tpc * (q * q * r00 + q * q11 * r10) + t0c * (q * q11 * r01 + q11 * q11 * r11),
        ],
    ];
    let c = [
        [
            t0 * (q00 * q00 * r00 + q * q11 * r10) + tp * (q * q * r00) + tm * (q * q00 * r10),
            t0 * (q00 * q00 * r01 + q * q11 * r11) + tp * (q * q * r01) + tm * (q * q00 * r11),
        ],
        [
            t0 * (q * q00 * r00 + q11 * q11 * r10) + tp * (q * q11 * r00) + tm * (q * q * r10),
            t0 * (q * q00 * r01 + q11 * q11 * r11) + tp * (q * q11 * r01) + tm * (q * q * r11),
        ],
    ];
    let d = [
        [
            t0c * (q00 * q00 * r00 + q * q11 * r01) + tpc * (q * q * r00) + tmc * (q * q00 * r01),
            t0c * (q * q00 * r00 + q11 * q11 * r01) + tpc * (q * q11 * r00) + tmc * (q * q * r01),
        ],
        [
            t0c * (q00 * q00 * r10 + q * q11 * r11) + tpc * (q * q * r10) + tmc * (q * q00 * r11),
            t0c * (q * q00 * r10 + q11 * q11 * r11) + tpc * (q * q11 * r10) + tmc * (q * q * r11),
        ],
    ];
    let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][j] + b[i][j] - c[i][j] - d[i][j];
        }
    }
    (a, b, c, d, r)
}

struct Rates {
    t0: Complex64,
    tp: Complex64,
    tm: Complex64,
}

/// Evaluates every two-level intermediate for the state `rho`.
pub fn evaluate(p: &TwoLevelParams, bath: &BathSpec, rho: &M2) -> TwoLevelOracle {
    let delta = p.e1 - p.e0;
    let i = Complex64::i();
    let t = Rates {
        t0: bath.tunneling_rate(0.0),
        tp: bath.tunneling_rate(delta),
        tm: bath.tunneling_rate(-delta),
    };
    let k = [
        [p.q00 * t.t0, p.q * t.tm],
        [p.q * t.tp, p.q11 * t.t0],
    ];
    let k_dag = [
        [p.q00 * t.t0.conj(), p.q * t.tp.conj()],
        [p.q * t.tm.conj(), p.q11 * t.t0.conj()],
    ];
    let (a, b, c, d, r) = redfield(rho, p, &t);

    let c01 = -r[0][1] / (i * delta);
    let c10 = r[1][0] / (i * delta);

    // Derivatives: ∂/∂δ₀₁ of T(δ₀₁) = T'(−δ), ∂/∂δ₁₀ of T(δ₁₀) = T'(+δ).
    let dp = bath.tunneling_rate_derivative(delta);
    let dm = bath.tunneling_rate_derivative(-delta);
    let (r00, r11) = (rho[0][0], rho[1][1]);
    let de0 = (dm.re * r11 + dp.re * r00) / t.tp.re;
    let de1 = (dp.re * r00 + dm.re * r11) / t.tm.re;
    let q2 = p.q * p.q;
    let q00 = q2 * (dm.im * r11 - dp.im * r00 + t.tp.im * de0);
    let q11 = q2 * (dp.im * r00 - dm.im * r11 + t.tm.im * de1);

    let rho_prime = [
        [rho[0][0] - q00, rho[0][1] + r[0][1] / (i * delta)],
        [rho[1][0] - r[1][0] / (i * delta), rho[1][1] - q11],
    ];
    let (_, _, _, _, rp) = redfield(&rho_prime, p, &t);
    let rhs = [
        [rp[0][0], i * delta * rho[0][1] + rp[0][1]],
        [-i * delta * rho[1][0] + rp[1][0], rp[1][1]],
    ];
    TwoLevelOracle {
        k,
        k_dag,
        a,
        b,
        c,
        d,
        r,
        c2_coh: (c01, c10),
        q00,
        q11,
        rho_prime,
        rhs,
    }
}
