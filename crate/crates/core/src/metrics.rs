//! Comparisons between trajectories and between states.

use crate::dynamics::Trajectory;
use crate::linalg;
use crate::state::DensityMatrix;
use crate::{Error, Result};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// `(1/T) ∫ |p_A − p_B| dt`.
    #[default]
    MeanAbsolute,
    /// `√((1/T) ∫ (p_A − p_B)² dt)`.
    Rms,
}

/// Time-averaged error of population `n` between two trajectories, in
/// percent, by the trapezoidal rule over the samples inside `window`
/// (defaults to the full overlap). `b` is linearly interpolated onto the
/// sample times of `a` when the grids differ.
pub fn time_averaged_error(
    a: &Trajectory,
    b: &Trajectory,
    n: usize,
    window: Option<(f64, f64)>,
    averaging: Averaging,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    let width = a.populations[0].len().min(b.populations[0].len());
    if n >= width {
        return Err(Error::invalid(format!("population index {n} out of range")));
    }
    let lo = a.times_au[0].max(b.times_au[0]);
    let hi = a.times_au.last().unwrap().min(*b.times_au.last().unwrap());
    let (t0, t1) = match window {
        Some((t0, t1)) => (t0.max(lo), t1.min(hi)),
        None => (lo, hi),
    };
    let pb = b.population(n);
    let same_grid = a.times_au == b.times_au;
    let samples: Vec<(f64, f64)> = a
        .times_au
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= t0 - 1e-9 && t <= t1 + 1e-9)
        .map(|(i, &t)| {
            let vb = if same_grid { pb[i] } else { interpolate(&b.times_au, &pb, t) };
            let d = a.populations[i][n] - vb;
            (t, match averaging {
                Averaging::MeanAbsolute => d.abs(),
                Averaging::Rms => d * d,
            })
        })
        .collect();
    if samples.len() < 2 || !(t1 > t0) {
        return Err(Error::invalid("averaging window contains fewer than two samples"));
    }
    let span = samples.last().unwrap().0 - samples[0].0;
    let integral: f64 = samples.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    let mean = integral / span;
    Ok(100.0
        * match averaging {
            Averaging::MeanAbsolute => mean,
            Averaging::Rms => mean.sqrt(),
        })
}

fn interpolate(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    match ts.binary_search_by(|x| x.total_cmp(&t)) {
        Ok(i) => ys[i],
        Err(0) => ys[0],
        Err(i) if i >= ts.len() => ys[ts.len() - 1],
        Err(i) => {
            let f = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
            ys[i - 1] + f * (ys[i] - ys[i - 1])
        }
    }
}

/// Trace distance `½ Σ |eig(ρ_A − ρ_B)|`.
pub fn steady_state_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * linalg::hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>())
}

/// Time-averaged ground-state errors (percent) along a coupling sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorCurve {
    pub gammas: Vec<f64>,
    pub ccqme_heom: Vec<Option<f64>>,
    pub redfield_heom: Vec<Option<f64>>,
    pub redfield_ccqme: Vec<Option<f64>>,
}

impl ErrorCurve {
    /// CSV with columns `gamma,delta_ccqme_heom,delta_redfield_heom,delta_redfield_ccqme`;
    /// missing pairs are left empty.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "gamma,delta_ccqme_heom,delta_redfield_heom,delta_redfield_ccqme")?;
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
        for (i, g) in self.gammas.iter().enumerate() {
            writeln!(
                w,
                "{g},{},{},{}",
                cell(self.ccqme_heom[i]),
                cell(self.redfield_heom[i]),
                cell(self.redfield_ccqme[i])
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMatrix};
    use proptest::prelude::*;

    fn traj(times: Vec<f64>, p0: Vec<f64>) -> Trajectory {
        let k = times.len();
        Trajectory {
            populations: p0.iter().map(|&p| vec![p, 1.0 - p]).collect(),
            times_au: times,
            coherence_pairs: vec![],
            coherences: vec![vec![]; k],
            q_expect: vec![0.0; k],
            trace: vec![1.0; k],
            min_eig: vec![0.0; k],
            hermiticity: vec![0.0; k],
            energy: vec![0.0; k],
            final_state: CMatrix::zeros(2, 2),
        }
    }

    #[test]
    fn identical_and_offset() {
        let t: Vec<f64> = (0..101).map(|i| i as f64).collect();
        let a = traj(t.clone(), t.iter().map(|x| 0.5 + 0.1 * (x / 10.0).sin()).collect());
        assert_eq!(time_averaged_error(&a, &a, 0, None, Averaging::MeanAbsolute).unwrap(), 0.0);
        let b = traj(t.clone(), a.population(0).iter().map(|p| p + 0.01).collect());
        let d = time_averaged_error(&a, &b, 0, None, Averaging::MeanAbsolute).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let r = time_averaged_error(&a, &b, 0, None, Averaging::Rms).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let w = time_averaged_error(&a, &b, 0, Some((20.0, 40.0)), Averaging::MeanAbsolute).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!(time_averaged_error(&a, &b, 0, Some((200.0, 300.0)), Averaging::MeanAbsolute).is_err());
    }

    #[test]
    fn interpolates_other_grid() {
        let a = traj(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]);
        let b = traj(vec![0.0, 2.0], vec![0.0, 2.0]);
        assert!(time_averaged_error(&a, &b, 0, None, Averaging::MeanAbsolute).unwrap().abs() < 1e-14);
    }

    #[test]
    fn trace_distance_basics() {
        let p0 = DensityMatrix::projector(3, 0).unwrap();
        let p1 = DensityMatrix::projector(3, 1).unwrap();
        assert_eq!(steady_state_distance(&p0, &p0).unwrap(), 0.0);
        assert!((steady_state_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-14);
        let other = DensityMatrix::projector(2, 0).unwrap();
        assert!(steady_state_distance(&p0, &other).is_err());
    }

    fn state_from(v: &[f64]) -> DensityMatrix {
        let a = CMatrix::from_fn(3, 3, |i, j| crate::Complex64::new(v[i * 3 + j], v[9 + i * 3 + j]));
        let m = &a * a.adjoint() + CMatrix::identity(3, 3) * c(1e-3);
        let tr = m.trace();
        DensityMatrix::new(m / tr).unwrap()
    }

    proptest! {
        #[test]
        fn trace_distance_triangle(
            x in proptest::collection::vec(-1.0f64..1.0, 18),
            y in proptest::collection::vec(-1.0f64..1.0, 18),
            z in proptest::collection::vec(-1.0f64..1.0, 18),
        ) {
            let (a, b, cc) = (state_from(&x), state_from(&y), state_from(&z));
            let ab = steady_state_distance(&a, &b).unwrap();
            let bc = steady_state_distance(&b, &cc).unwrap();
            let ac = steady_state_distance(&a, &cc).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((ab - steady_state_distance(&b, &a).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn error_symmetric(p in proptest::collection::vec(0.0f64..1.0, 2..50), q in proptest::collection::vec(0.0f64..1.0, 50)) {
            let t: Vec<f64> = (0..p.len()).map(|i| i as f64 * 0.5).collect();
            let a = traj(t.clone(), p.clone());
            let b = traj(t, q[..p.len()].to_vec());
            let ab = time_averaged_error(&a, &b, 0, None, Averaging::MeanAbsolute).unwrap();
            let ba = time_averaged_error(&b, &a, 0, None, Averaging::MeanAbsolute).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-12);
        }
    }
}
