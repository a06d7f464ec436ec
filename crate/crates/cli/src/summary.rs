//! Machine-readable run summary (`summary.json`).

use crate::config::{Method, ParamRecord, Scenario};
use crate::run::{gamma_tag, JobResult};
use ccqme_core::equilibrium::RegimeReport;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch; absent with `--seedless`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub preset: Option<&'static str>,
    pub parameters: BTreeMap<String, ParamRecord>,
    pub system: SystemRecord,
    pub runs: Vec<RunRecord>,
    pub equilibrium: Vec<EquilibriumRecord>,
    pub averaging: &'static str,
    /// Time-averaged ground-state errors in percent.
    pub errors: Vec<ErrorRecord>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemRecord {
    pub label: String,
    pub n_levels: usize,
    pub bare_energies: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub method: Method,
    pub gamma: f64,
    pub trajectory_file: Option<String>,
    pub steady_state_file: Option<String>,
    pub steady_populations: Option<Vec<f64>>,
    pub final_populations: Option<Vec<f64>>,
    pub max_trace_error: Option<f64>,
    pub max_hermiticity_error: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    /// `max |tr(ρH)(t) − tr(ρH)(0)|` (hartree).
    pub energy_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavepacket_leakage: Option<f64>,
}

impl RunRecord {
    pub fn new(job: &JobResult, out_dir: &Path) -> Self {
        let stem = format!("{}_{}", job.method.name(), gamma_tag(job.gamma));
        let exists = |name: String| out_dir.join(&name).exists().then_some(name);
        let t = job.trajectory.as_ref();
        Self {
            method: job.method,
            gamma: job.gamma,
            trajectory_file: t.and_then(|_| exists(format!("trajectory_{stem}.csv"))),
            steady_state_file: job.steady.as_ref().and_then(|_| exists(format!("steady_{stem}.csv"))),
            steady_populations: job.steady.as_ref().map(|s| s.populations()),
            final_populations: t.and_then(|t| t.populations.last().cloned()),
            max_trace_error: t.map(|t| t.max_trace_error()),
            max_hermiticity_error: t.map(|t| t.max_hermiticity_error()),
            min_eigenvalue: t.map(|t| t.min_eig.iter().copied().fold(f64::INFINITY, f64::min)),
            energy_drift: t.map(|t| t.energy.iter().map(|e| (e - t.energy[0]).abs()).fold(0.0, f64::max)),
            wavepacket_leakage: job.leakage,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeRecord {
    pub label: String,
    pub gibbs_vs_mean_force2: f64,
    pub mean_force2_vs_heom: Option<f64>,
}

impl From<RegimeReport> for RegimeRecord {
    fn from(r: RegimeReport) -> Self {
        Self {
            label: r.label.to_string(),
            gibbs_vs_mean_force2: r.gibbs_vs_mf2,
            mean_force2_vs_heom: r.mf2_vs_heom,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumRecord {
    pub gamma: f64,
    /// Energies of the (renormalized) system used by the generators.
    pub energies: Vec<f64>,
    pub gibbs_populations: Vec<f64>,
    pub mean_force2_populations: Vec<f64>,
    /// Absent at zero coupling.
    pub regime: Option<RegimeRecord>,
    /// Trace distances between steady states and references.
    pub distances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub gamma: f64,
    pub ccqme_heom: Option<f64>,
    pub redfield_heom: Option<f64>,
    pub redfield_ccqme: Option<f64>,
}
