use super::Grid1D;
use crate::{Error, Result};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

/// Least-squares quartic stand-in for the TAA double well,
/// `V(q) = a4 q⁴ + a3 q³ + a2 q² + a1 q + a0` (hartree, bohr).
///
/// Fitted with the default grid and a proton mass to the six tabulated
/// eigenvalues, the 1573.3 cm⁻¹ barrier and ⟨0|q|0⟩, ⟨1|q|1⟩
/// (`scripts/fit_surrogate.py`). Eigenvalue residuals are below 5e-4 hartree;
/// the barrier comes out at 6.97e-3 hartree. This is not the molecular potential.
pub const SURROGATE_TAA_COEFFS: [f64; 5] =
    [0.01955673, -0.01167461, -0.0204737, 0.00683184, 0.00723486];

/// One-dimensional potential energy curve, q (bohr) → V (hartree).
#[derive(Clone)]
pub struct PotentialCurve {
    label: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for PotentialCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialCurve")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl PotentialCurve {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(f),
        }
    }

    /// `½ m ω² q²`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        let k = 0.5 * mass * omega * omega;
        Self::new("harmonic", move |q| k * q * q)
    }

    pub fn constant(value: f64) -> Self {
        Self::new("constant", move |_| value)
    }

    /// Coefficients ordered `[a4, a3, a2, a1, a0]`.
    pub fn quartic(label: impl Into<String>, coeffs: [f64; 5]) -> Self {
        Self::new(label, move |q| quartic_value(&coeffs, q))
    }

    pub fn surrogate_taa() -> Self {
        Self::quartic("surrogate-taa", SURROGATE_TAA_COEFFS)
    }

    /// Built-in curves selectable from configuration.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "surrogate-taa" => Ok(Self::surrogate_taa()),
            "harmonic" => Ok(Self::harmonic(1.0, 1.0)),
            other => Err(Error::invalid(format!("unknown potential '{other}'"))),
        }
    }

    /// Piecewise-linear interpolation through `(q, V)` samples.
    /// Evaluation outside the tabulated range yields NaN.
    pub fn tabulated(label: impl Into<String>, mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("tabulated potential needs at least two points"));
        }
        if points.iter().any(|(q, v)| !q.is_finite() || !v.is_finite()) {
            return Err(Error::invalid("tabulated potential contains non-finite values"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("tabulated potential has duplicate abscissae"));
        }
        Ok(Self::new(label, move |q| interpolate(&points, q)))
    }

    /// Two-column text file: q (bohr), V (hartree). `#` starts a comment.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
            let mut next = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: "expected two columns".into(),
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: e.to_string(),
                    })
            };
            let q = next()?;
            let v = next()?;
            points.push((q, v));
        }
        Self::tabulated(path.display().to_string(), points)
    }

    /// `V(q) + k q²`; used for the potential-level bath renormalization.
    pub fn with_quadratic_shift(&self, k: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        Self {
            label: format!("{}+ren", self.label),
            eval: Arc::new(move |q| inner(q) + k * q * q),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, q: f64) -> f64 {
        (self.eval)(q)
    }

    /// Values on the grid; fails if any is non-finite.
    pub fn sample(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        let v: Vec<f64> = grid.points().map(|q| self.value(q)).collect();
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "potential '{}' is not finite at q = {}",
                self.label,
                grid.point(i)
            )));
        }
        Ok(v)
    }

    /// Local minima and maxima on the grid, refined by bisection on a
    /// central-difference derivative. Sorted by position.
    pub fn stationary_points(&self, grid: &Grid1D) -> Vec<(f64, f64)> {
        let h = 1e-5;
        let d = |q: f64| (self.value(q + h) - self.value(q - h)) / (2.0 * h);
        let n = grid.n_points() * 20;
        let step = (grid.q_max() - grid.q_min()) / n as f64;
        let mut out = Vec::new();
        let mut a = grid.q_min();
        let mut da = d(a);
        for k in 1..=n {
            let b = grid.q_min() + k as f64 * step;
            let db = d(b);
            if da == 0.0 || da.signum() != db.signum() {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if d(lo).signum() == d(mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let q = 0.5 * (lo + hi);
                out.push((q, self.value(q)));
            }
            a = b;
            da = db;
        }
        out
    }
}

fn quartic_value(c: &[f64; 5], q: f64) -> f64 {
    (((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]
}

fn interpolate(points: &[(f64, f64)], q: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if q < first.0 || q > last.0 {
        return f64::NAN;
    }
    let k = points.partition_point(|p| p.0 <= q).clamp(1, points.len() - 1);
    let (q0, v0) = points[k - 1];
    let (q1, v1) = points[k];
    v0 + (v1 - v0) * (q - q0) / (q1 - q0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::{matrix_elements, solve_schroedinger, TAA_GRID};
    use crate::units::{wavenumber_to_hartree, PROTON_MASS};

    const TABLE_I: [f64; 6] = [
        4.114537e-3,
        4.691015e-3,
        8.133116e-3,
        1.110714e-2,
        1.458100e-2,
        1.881039e-2,
    ];

    #[test]
    fn surrogate_reproduces_tabulated_levels() {
        let sol =
            solve_schroedinger(&TAA_GRID, &PotentialCurve::surrogate_taa(), PROTON_MASS, 6).unwrap();
        for (e, t) in sol.energies.iter().zip(TABLE_I) {
            assert!((e - t).abs() < 5e-4, "{e} vs {t}");
        }
        // Same ordering of the tunneling pair: ground state left, first excited right.
        let q = matrix_elements(&sol, &TAA_GRID, |x| x).unwrap();
        assert!(q[(0, 0)] < 0.0 && q[(1, 1)] > 0.0);
        assert!((q[(0, 0)] + 0.3813).abs() < 0.02);
        assert!((q[(1, 1)] - 0.6712).abs() < 0.02);
    }

    #[test]
    fn surrogate_barrier_geometry() {
        let v = PotentialCurve::surrogate_taa();
        let sp = v.stationary_points(&TAA_GRID);
        assert_eq!(sp.len(), 3, "{sp:?}");
        let (ql, vl) = sp[0];
        let (_, vb) = sp[1];
        assert!(ql < 0.0);
        let eb = wavenumber_to_hartree(1573.3);
        assert!(((vb - vl) - eb).abs() / eb < 0.05, "barrier {}", vb - vl);
    }

    #[test]
    fn tabulated_interpolation() {
        let p = PotentialCurve::tabulated("t", vec![(1.0, 2.0), (0.0, 0.0), (2.0, 6.0)]).unwrap();
        assert_eq!(p.value(0.5), 1.0);
        assert_eq!(p.value(1.5), 4.0);
        assert_eq!(p.value(2.0), 6.0);
        assert!(p.value(2.5).is_nan());
        assert!(p.sample(&Grid1D::new(0.0, 3.0, 4).unwrap()).is_err());
    }

    #[test]
    fn reads_two_column_file() {
        let dir = std::env::temp_dir().join(format!("ccqme-pot-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v.dat");
        std::fs::write(&path, "# q V\n-1 1\n0 0  # min\n1 1\n").unwrap();
        let p = PotentialCurve::from_file(&path).unwrap();
        assert_eq!(p.value(-0.5), 0.5);
        std::fs::write(&path, "0 0\n1\n").unwrap();
        assert!(matches!(PotentialCurve::from_file(&path), Err(Error::Parse { line: 2, .. })));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn by_name_lookup() {
        assert!(PotentialCurve::by_name("surrogate-taa").is_ok());
        assert!(PotentialCurve::by_name("morse").is_err());
    }
}
