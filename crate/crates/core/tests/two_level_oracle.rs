use ccqme_core::bath::BathSpec;
use ccqme_core::ccqme::two_level::{evaluate, TwoLevelParams};
use ccqme_core::ccqme::{canonical_map, ccqme_generator, CcqmeOptions};
use ccqme_core::generators::{convolution_operator, redfield_superoperator};
use ccqme_core::linalg::{CMatrix, RMatrix};
use ccqme_core::{Complex64, NLevelSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng) -> (TwoLevelParams, BathSpec, CMatrix) {
    let e0 = rng.random_range(-1e-2..1e-2);
    let p = TwoLevelParams {
        e0,
        e1: e0 + rng.random_range(1e-4..5e-3),
        q00: rng.random_range(-1.0..1.0),
        q: rng.random_range(-1.0..1.0),
        q11: rng.random_range(-1.0..1.0),
    };
    let bath = loop {
        let b = BathSpec::new(
            rng.random_range(0.01..1.0),
            rng.random_range(5e-4..1e-2),
            rng.random_range(200.0..5000.0),
            1000,
        );
        if let Ok(b) = b {
            break b;
        }
    };
    let p00: f64 = rng.random_range(0.0..1.0);
    let coh = Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
    let rho = CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(p00, 0.0), coh, coh.conj(), Complex64::new(1.0 - p00, 0.0)],
    );
    (p, bath, rho)
}

fn system(p: &TwoLevelParams) -> NLevelSystem {
    NLevelSystem::new(
        vec![p.e0, p.e1],
        RMatrix::from_row_slice(2, 2, &[p.q00, p.q, p.q, p.q11]),
        "two-level",
    )
    .unwrap()
}

fn rel(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale
}

#[test]
fn general_builders_match_two_level_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (p, bath, rho) = random_case(&mut rng);
        let sys = system(&p);
        let m = [[rho[(0, 0)], rho[(0, 1)]], [rho[(1, 0)], rho[(1, 1)]]];
        let o = evaluate(&p, &bath, &m);

        let k = convolution_operator(&sys, &bath);
        let r = redfield_superoperator(&sys, &k).unwrap().apply(&rho).unwrap();
        let map = canonical_map(&sys, &bath, &CcqmeOptions::default()).unwrap();
        let c2 = map.apply(&rho).unwrap();
        let l = ccqme_generator(&sys, &bath, &CcqmeOptions::default()).unwrap();
        let rhs = l.apply(&rho).unwrap();

        let q = CMatrix::from_row_slice(2, 2, &[p.q00, p.q, p.q, p.q11].map(|x| Complex64::new(x, 0.0)));
        let kk = k.matrix();
        let blocks = [
            (kk * &rho * &q, o.a),
            (&q * &rho * kk.adjoint(), o.b),
            (&q * kk * &rho, o.c),
            (&rho * kk.adjoint() * &q, o.d),
            (r.clone(), o.r),
            (rhs, o.rhs),
        ];
        for (general, oracle) in blocks.iter() {
            let scale = general.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max(rel(general[(i, j)], oracle[i][j], scale));
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(kk[(i, j)], o.k[i][j]);
            }
        }
        let scale = c2.iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(rel(c2[(0, 0)], o.q00, scale));
        worst = worst.max(rel(c2[(1, 1)], o.q11, scale));
        worst = worst.max(rel(c2[(0, 1)], o.c2_coh.0, scale));
        worst = worst.max(rel(c2[(1, 0)], o.c2_coh.1, scale));
    }
    assert!(worst <= 1e-12, "worst relative deviation {worst:e}");
}
