//! Executes a resolved [`Plan`]: one worker per (method, γ), then the
//! orchestrator derives equilibrium references and error metrics and writes
//! the summary.

use crate::config::{Method, Plan, Renormalization, Scenario, SystemSource, WavepacketPlan};
use crate::summary::{
    EquilibriumRecord, ErrorRecord, RegimeRecord, RunRecord, Summary, SystemRecord,
};
use ccqme_core::dvr::solve_schroedinger;
use ccqme_core::dynamics::{initial_eigenstate, initial_wavepacket};
use ccqme_core::equilibrium::{classify_regime, mean_force_gibbs2};
use ccqme_core::generators::{redfield, secularize, unitary_liouvillian};
use ccqme_core::metrics::{steady_state_distance, time_averaged_error, ErrorCurve};
use ccqme_core::{
    ccqme_generator, propagate, BathSpec, CcqmeOptions, DensityMatrix, EigenSolution, Grid1D, HeomGenerator,
    LiouvilleGenerator, NLevelSystem, PotentialCurve, Superoperator, Trajectory, WavepacketSpec,
};
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Core(#[from] ccqme_core::Error),
    #[error("{method} at gamma {gamma}: {source}")]
    Job {
        method: &'static str,
        gamma: f64,
        source: ccqme_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExecOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Omit the timestamp so every output file is reproducible byte for byte.
    pub seedless: bool,
}

/// In-memory results, for callers that want more than the files.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: Summary,
    pub jobs: Vec<JobResult>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug)]
pub struct JobResult {
    pub method: Method,
    pub gamma: f64,
    pub trajectory: Option<Trajectory>,
    pub steady: Option<DensityMatrix>,
    pub steady_error: Option<String>,
    pub leakage: Option<f64>,
}

impl RunOutput {
    pub fn job(&self, method: Method, gamma: f64) -> Option<&JobResult> {
        self.jobs.iter().find(|j| j.method == method && j.gamma == gamma)
    }
}

/// Bare model plus what is needed to rebuild it at each γ.
struct BaseModel {
    bare: NLevelSystem,
    dvr: Option<DvrModel>,
}

struct DvrModel {
    potential: PotentialCurve,
    grid: Grid1D,
    mass: f64,
    basis: usize,
    bare: EigenSolution,
}

/// System seen by the generators at one coupling.
struct CoupledModel {
    sys: NLevelSystem,
    solution: Option<EigenSolution>,
}

fn build_base(plan: &Plan) -> Result<BaseModel, RunError> {
    let n = plan.system.levels;
    Ok(match &plan.system.source {
        SystemSource::Builtin(name) => BaseModel {
            bare: NLevelSystem::builtin(name)?.truncate(n)?,
            dvr: None,
        },
        SystemSource::Table(path) => BaseModel {
            bare: NLevelSystem::from_file(path)?.truncate(n)?,
            dvr: None,
        },
        SystemSource::Dvr {
            potential,
            grid,
            mass,
            basis,
        } => {
            let states = (*basis).max(n);
            let sol = solve_schroedinger(grid, potential, *mass, states)?;
            let bare = NLevelSystem::from_dvr(&sol, grid, n, potential.label().to_string())?;
            BaseModel {
                bare,
                dvr: Some(DvrModel {
                    potential: potential.clone(),
                    grid: *grid,
                    mass: *mass,
                    basis: states,
                    bare: sol,
                }),
            }
        }
    })
}

fn couple(base: &BaseModel, plan: &Plan, gamma: f64) -> Result<CoupledModel, RunError> {
    let n = plan.system.levels;
    Ok(match plan.system.renormalization {
        Renormalization::None => CoupledModel {
            sys: base.bare.clone(),
            solution: base.dvr.as_ref().map(|d| d.bare.clone()),
        },
        Renormalization::Truncated => CoupledModel {
            sys: base.bare.renormalize(gamma, plan.omega_c)?,
            solution: None,
        },
        Renormalization::Potential => {
            let d = base.dvr.as_ref().expect("potential route validated to have a DVR source");
            let shifted = d.potential.with_quadratic_shift(0.5 * gamma * plan.omega_c);
            let sol = solve_schroedinger(&d.grid, &shifted, d.mass, d.basis)?;
            let sys = NLevelSystem::from_dvr(&sol, &d.grid, n, format!("{} (renormalized)", d.potential.label()))?;
            CoupledModel {
                sys,
                solution: Some(sol),
            }
        }
    })
}

/// Leftmost local minimum of the potential on the grid.
pub fn left_well_minimum(potential: &PotentialCurve, grid: &Grid1D) -> Option<f64> {
    let h = 1e-3;
    potential
        .stationary_points(grid)
        .into_iter()
        .find(|&(q, v)| potential.value(q - h) > v && potential.value(q + h) > v)
        .map(|(q, _)| q)
}

fn initial_state(
    plan: &Plan,
    base: &BaseModel,
    model: &CoupledModel,
) -> Result<(DensityMatrix, Option<f64>), RunError> {
    let n = model.sys.n_levels();
    match plan.scenario {
        Scenario::RelaxExcited => Ok((initial_eigenstate(&model.sys, 1)?, None)),
        Scenario::Wavepacket => {
            let wp: &WavepacketPlan = plan.wavepacket.as_ref().expect("wavepacket plan");
            let d = base.dvr.as_ref().expect("wavepacket validated to have a DVR source");
            let center = match wp.center {
                Some(c) => c,
                None => left_well_minimum(&d.potential, &d.grid)
                    .ok_or_else(|| ccqme_core::Error::InvalidInput("potential has no local minimum on the grid".into()))?,
            };
            let spec = WavepacketSpec::with_kinetic_energy(center, wp.width, wp.energy, Some(wp.mass))?;
            let sol = model.solution.as_ref().expect("wavepacket needs eigenfunctions");
            let (rho, leakage) = initial_wavepacket(sol, &d.grid, &spec, n)?;
            Ok((rho, Some(leakage)))
        }
        _ => Ok((initial_eigenstate(&model.sys, 0)?, None)),
    }
}

fn liouvillian(method: Method, plan: &Plan, sys: &NLevelSystem, bath: &BathSpec) -> ccqme_core::Result<Superoperator> {
    match method {
        Method::Redfield => {
            let r = redfield(sys, bath);
            let r = if plan.secular { secularize(&r, sys)? } else { r };
            unitary_liouvillian(sys).add(&r)
        }
        Method::Ccqme => ccqme_generator(
            sys,
            bath,
            &if plan.secular {
                CcqmeOptions::secular()
            } else {
                CcqmeOptions::default()
            },
        ),
        Method::Heom => unreachable!("HEOM has no Liouville-space generator"),
    }
}

fn run_job(
    plan: &Plan,
    method: Method,
    gamma: f64,
    model: &CoupledModel,
    rho0: &(DensityMatrix, Option<f64>),
    bath: &BathSpec,
) -> ccqme_core::Result<JobResult> {
    let sys = &model.sys;
    let dynamics = plan.scenario.has_dynamics();
    let (trajectory, steady) = match method {
        Method::Heom => {
            let gen = HeomGenerator::new(sys, bath, plan.heom)?;
            let traj = if dynamics {
                Some(propagate(&gen, sys, &rho0.0, &plan.propagation)?)
            } else {
                None
            };
            (traj, gen.steady_state(gamma))
        }
        _ => {
            let l = liouvillian(method, plan, sys, bath)?;
            let traj = if dynamics {
                Some(propagate(&LiouvilleGenerator::new(&l), sys, &rho0.0, &plan.propagation)?)
            } else {
                None
            };
            (traj, l.stationary_state())
        }
    };
    // Without coupling every diagonal state is stationary.
    let (steady, steady_error) = match steady {
        _ if gamma == 0.0 => (None, None),
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(JobResult {
        method,
        gamma,
        trajectory,
        steady,
        steady_error,
        leakage: rho0.1,
    })
}

pub fn gamma_tag(gamma: f64) -> String {
    format!("g{gamma}")
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), RunError> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(io(path))
}

pub fn write_state(rho: &DensityMatrix, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "n,m,re,im")?;
    let m = rho.matrix();
    for a in 0..rho.dim() {
        for b in 0..rho.dim() {
            writeln!(w, "{a},{b},{:.15e},{:.15e}", m[(a, b)].re, m[(a, b)].im)?;
        }
    }
    Ok(())
}

pub fn execute(plan: &Plan, out_dir: &Path, opts: &ExecOptions) -> Result<RunOutput, RunError> {
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let base = build_base(plan)?;

    let mut models = Vec::with_capacity(plan.gammas.len());
    for &g in &plan.gammas {
        let model = couple(&base, plan, g)?;
        let rho0 = initial_state(plan, &base, &model)?;
        let bath = BathSpec::new(g, plan.omega_c, plan.beta, plan.n_matsubara)?.with_tail_correction(plan.tail_correction);
        models.push((g, model, rho0, bath));
    }

    let tasks: Vec<(usize, Method)> = (0..models.len())
        .flat_map(|i| plan.methods.iter().map(move |&m| (i, m)))
        .collect();
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = opts.threads {
            b = b.num_threads(t);
        }
        b.build().map_err(|e| RunError::Pool(e.to_string()))?
    };
    let results: Vec<Result<(JobResult, Vec<PathBuf>), RunError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, method)| {
                let (g, model, rho0, bath) = &models[i];
                log::info!("{} gamma={g}", method.name());
                let job = run_job(plan, method, *g, model, rho0, bath).map_err(|source| RunError::Job {
                    method: method.name(),
                    gamma: *g,
                    source,
                })?;
                let mut files = Vec::new();
                let stem = format!("{}_{}", method.name(), gamma_tag(*g));
                if let Some(t) = &job.trajectory {
                    let p = out_dir.join(format!("trajectory_{stem}.csv"));
                    write_with(&p, |w| t.write_csv(w))?;
                    files.push(p);
                }
                if let Some(s) = &job.steady {
                    let p = out_dir.join(format!("steady_{stem}.csv"));
                    write_with(&p, |w| write_state(s, w))?;
                    files.push(p);
                }
                Ok((job, files))
            })
            .collect()
    });
    let mut jobs = Vec::with_capacity(results.len());
    let mut files = Vec::new();
    for r in results {
        let (job, f) = r?;
        jobs.push(job);
        files.extend(f);
    }

    let mut warnings = Vec::new();
    let mut runs = Vec::new();
    for job in &jobs {
        if let Some(e) = &job.steady_error {
            warnings.push(format!("{} at gamma {}: no steady state ({e})", job.method.name(), job.gamma));
        }
        if let (Some(l), Some(wp)) = (job.leakage, plan.wavepacket.as_ref()) {
            if l > wp.leakage_bound && job.method == plan.methods[0] {
                warnings.push(format!("gamma {}: wavepacket leakage {l:.4} exceeds {}", job.gamma, wp.leakage_bound));
            }
        }
        runs.push(RunRecord::new(job, out_dir));
    }

    let mut equilibrium = Vec::new();
    for (g, model, _, bath) in &models {
        let eq = mean_force_gibbs2(&model.sys, bath)?;
        let p = out_dir.join(format!("equilibrium_{}.csv", gamma_tag(*g)));
        write_with(&p, |w| {
            writeln!(w, "n,gibbs,mean_force2")?;
            for (n, (a, b)) in eq.tau_g.populations().iter().zip(eq.tau_mf2.populations()).enumerate() {
                writeln!(w, "{n},{a:.15e},{b:.15e}")?;
            }
            Ok(())
        })?;
        files.push(p);
        let heom = jobs
            .iter()
            .find(|j| j.method == Method::Heom && j.gamma == *g)
            .and_then(|j| j.steady.as_ref());
        let regime = if *g > 0.0 {
            Some(RegimeRecord::from(classify_regime(&model.sys, bath, heom)?))
        } else {
            None
        };
        let mut distances = std::collections::BTreeMap::new();
        for j in jobs.iter().filter(|j| j.gamma == *g) {
            if let Some(s) = &j.steady {
                distances.insert(format!("{}_vs_gibbs", j.method.name()), steady_state_distance(s, &eq.tau_g)?);
                distances.insert(format!("{}_vs_mean_force2", j.method.name()), steady_state_distance(s, &eq.tau_mf2)?);
            }
        }
        distances.insert("gibbs_vs_mean_force2".into(), steady_state_distance(&eq.tau_g, &eq.tau_mf2)?);
        equilibrium.push(EquilibriumRecord {
            gamma: *g,
            energies: model.sys.energies().to_vec(),
            gibbs_populations: eq.tau_g.populations(),
            mean_force2_populations: eq.tau_mf2.populations(),
            regime,
            distances,
        });
    }

    let curve = error_curve(plan, &jobs)?;
    let errors = match &curve {
        Some(c) => {
            let p = out_dir.join("errors.csv");
            write_with(&p, |w| c.write_csv(w))?;
            files.push(p);
            c.gammas
                .iter()
                .enumerate()
                .map(|(i, &gamma)| ErrorRecord {
                    gamma,
                    ccqme_heom: c.ccqme_heom[i],
                    redfield_heom: c.redfield_heom[i],
                    redfield_ccqme: c.redfield_ccqme[i],
                })
                .collect()
        }
        None => Vec::new(),
    };

    let summary = Summary {
        tool: "ccqme",
        version: env!("CARGO_PKG_VERSION"),
        generated_unix: if opts.seedless {
            None
        } else {
            SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
        },
        scenario: plan.scenario,
        methods: plan.methods.clone(),
        preset: plan.preset.map(|p| p.name),
        parameters: plan.parameters.clone(),
        system: SystemRecord {
            label: base.bare.label().to_string(),
            n_levels: base.bare.n_levels(),
            bare_energies: base.bare.energies().to_vec(),
        },
        runs,
        equilibrium,
        errors,
        averaging: match plan.averaging {
            ccqme_core::metrics::Averaging::MeanAbsolute => "mean-absolute",
            ccqme_core::metrics::Averaging::Rms => "rms",
        },
        warnings,
    };
    let p = out_dir.join("summary.json");
    write_with(&p, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    files.push(p);
    Ok(RunOutput { summary, jobs, files })
}

/// Ground-state errors for every method pair present, or `None` without
/// dynamics or with a single method.
fn error_curve(plan: &Plan, jobs: &[JobResult]) -> Result<Option<ErrorCurve>, RunError> {
    if !plan.scenario.has_dynamics() || plan.methods.len() < 2 {
        return Ok(None);
    }
    let traj = |m: Method, g: f64| {
        jobs.iter()
            .find(|j| j.method == m && j.gamma == g)
            .and_then(|j| j.trajectory.as_ref())
    };
    let pair = |a: Method, b: Method, g: f64| -> Result<Option<f64>, RunError> {
        match (traj(a, g), traj(b, g)) {
            (Some(x), Some(y)) => Ok(Some(time_averaged_error(x, y, 0, None, plan.averaging)?)),
            _ => Ok(None),
        }
    };
    let mut c = ErrorCurve::default();
    for &g in &plan.gammas {
        c.gammas.push(g);
        c.ccqme_heom.push(pair(Method::Ccqme, Method::Heom, g)?);
        c.redfield_heom.push(pair(Method::Redfield, Method::Heom, g)?);
        c.redfield_ccqme.push(pair(Method::Redfield, Method::Ccqme, g)?);
    }
    Ok(Some(c))
}
