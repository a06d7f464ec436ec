//! Run configuration: TOML schema, defaults with provenance, validation.
//!
//! ```toml
//! scenario = "relax-ground"
//! methods = ["redfield", "ccqme", "heom"]
//!
//! [bath]
//! gamma = [0.1, 0.3]                       # or 0.1, or { start, stop, step }
//! omega-c = { value = 500.4, unit = "cm-1" }
//! temperature = { value = 300, unit = "kelvin" }
//! ```

use crate::presets::Preset;
use crate::quantity::{Dimension, Quantity};
use ccqme_core::bath::check_pole_collision;
use ccqme_core::dvr::TAA_GRID;
use ccqme_core::dynamics::{PropagationOptions, DEFAULT_LEAKAGE_BOUND};
use ccqme_core::metrics::Averaging;
use ccqme_core::units::{beta_from_kelvin, PROTON_MASS};
use ccqme_core::{Grid1D, HeomConfig, NLevelSystem, PotentialCurve};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub const DEFAULT_OMEGA_C: f64 = 2.28e-3;
pub const DEFAULT_TEMPERATURE: f64 = 300.0;
pub const DEFAULT_T_MAX_FS: f64 = 2500.0;
pub const DEFAULT_DT_AU: f64 = 1.0;
pub const DEFAULT_STRIDE: usize = 100;
pub const DEFAULT_N_MATSUBARA: usize = 1000;
pub const DEFAULT_DVR_BASIS: usize = 40;
pub const WAVEPACKET_MIN_LEVELS: usize = 12;
pub const WAVEPACKET_WIDTH: f64 = 0.5;
/// Barrier height used as the packet's kinetic energy (cm⁻¹).
pub const WAVEPACKET_ENERGY_CM: f64 = 1573.3;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub methods: Option<Vec<String>>,
    pub secular: Option<bool>,
    pub preset: Option<String>,
    #[serde(default)]
    pub system: RawSystem,
    #[serde(default)]
    pub bath: RawBath,
    #[serde(default)]
    pub propagation: RawPropagation,
    #[serde(default)]
    pub heom: RawHeom,
    #[serde(default)]
    pub wavepacket: RawWavepacket,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawSystem {
    /// `builtin`, `table` or `dvr`.
    pub source: Option<String>,
    pub name: Option<String>,
    pub path: Option<PathBuf>,
    pub levels: Option<usize>,
    /// `truncated`, `potential` or `none`.
    pub renormalization: Option<String>,
    /// Built-in potential name or a two-column file.
    pub potential: Option<String>,
    pub grid: Option<RawGrid>,
    pub mass: Option<Quantity>,
    /// DVR eigenstates computed before truncation.
    pub basis: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawGrid {
    pub q_min: Quantity,
    pub q_max: Quantity,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Single(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawBath {
    pub gamma: Option<GammaSpec>,
    pub omega_c: Option<Quantity>,
    pub temperature: Option<Quantity>,
    pub n_matsubara: Option<usize>,
    pub tail_correction: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawPropagation {
    pub t_max: Option<Quantity>,
    pub dt: Option<Quantity>,
    pub stride: Option<usize>,
    pub coherences: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawHeom {
    pub depth: Option<usize>,
    pub n_exponentials: Option<usize>,
    pub terminator: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawWavepacket {
    pub center: Option<Quantity>,
    pub width: Option<Quantity>,
    pub energy: Option<Quantity>,
    pub mass: Option<Quantity>,
    pub leakage_bound: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawOutput {
    pub dir: Option<PathBuf>,
    /// `mean-absolute` or `rms`.
    pub averaging: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    RelaxGround,
    RelaxExcited,
    Wavepacket,
    SteadyCompare,
    Sweep,
}

impl Scenario {
    pub const ALL: [(&'static str, Scenario); 5] = [
        ("relax-ground", Scenario::RelaxGround),
        ("relax-excited", Scenario::RelaxExcited),
        ("wavepacket", Scenario::Wavepacket),
        ("steady-compare", Scenario::SteadyCompare),
        ("sweep", Scenario::Sweep),
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(n, _)| *n == s).map(|&(_, v)| v)
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, v)| *v == self).map(|(n, _)| *n).unwrap()
    }

    pub fn has_dynamics(self) -> bool {
        self != Scenario::SteadyCompare
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Redfield,
    Ccqme,
    Heom,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Redfield, Method::Ccqme, Method::Heom];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "redfield" => Some(Method::Redfield),
            "ccqme" => Some(Method::Ccqme),
            "heom" => Some(Method::Heom),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Redfield => "redfield",
            Method::Ccqme => "ccqme",
            Method::Heom => "heom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Paper,
    Assumed,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamRecord {
    pub value: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<&'static str>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Renormalization {
    Truncated,
    Potential,
    None,
}

#[derive(Debug, Clone)]
pub enum SystemSource {
    Builtin(String),
    Table(PathBuf),
    Dvr {
        potential: PotentialCurve,
        grid: Grid1D,
        mass: f64,
        basis: usize,
    },
}

#[derive(Debug, Clone)]
pub struct SystemPlan {
    pub source: SystemSource,
    pub levels: usize,
    pub renormalization: Renormalization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketPlan {
    /// `None`: left-well minimum of the potential.
    pub center: Option<f64>,
    pub width: f64,
    pub energy: f64,
    pub mass: f64,
    pub leakage_bound: f64,
}

/// Fully resolved run description.
#[derive(Debug, Clone)]
pub struct Plan {
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub secular: bool,
    pub preset: Option<Preset>,
    pub system: SystemPlan,
    pub gammas: Vec<f64>,
    pub omega_c: f64,
    pub temperature: f64,
    pub beta: f64,
    pub n_matsubara: usize,
    pub tail_correction: bool,
    pub propagation: PropagationOptions,
    pub heom: HeomConfig,
    pub wavepacket: Option<WavepacketPlan>,
    pub averaging: Averaging,
    pub output_dir: Option<PathBuf>,
    pub parameters: BTreeMap<String, ParamRecord>,
}

pub fn parse_str(text: &str) -> Result<RawConfig, Vec<Diagnostic>> {
    toml::from_str(text).map_err(|e| {
        vec![Diagnostic {
            field: "config".into(),
            message: e.to_string().trim().to_string(),
        }]
    })
}

pub fn load(path: &Path) -> Result<RawConfig, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic {
            field: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        }]
    })?;
    parse_str(&text)
}

/// Every problem with the configuration; empty when it is runnable.
pub fn validate(raw: &RawConfig) -> Vec<Diagnostic> {
    match resolve(raw) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

struct Resolver {
    diags: Vec<Diagnostic>,
    params: BTreeMap<String, ParamRecord>,
}

impl Resolver {
    fn error(&mut self, field: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            field: field.into(),
            message: message.into(),
        });
    }

    fn record(&mut self, key: &str, value: impl Serialize, unit: Option<&'static str>, provenance: Provenance) {
        self.params.insert(
            key.into(),
            ParamRecord {
                value: serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
                unit,
                provenance,
                note: None,
            },
        );
    }

    fn note(&mut self, key: &str, note: impl Into<String>) {
        if let Some(r) = self.params.get_mut(key) {
            r.note = Some(note.into());
        }
    }

    /// Converts `q` or takes the default, recording provenance.
    fn quantity(
        &mut self,
        key: &str,
        q: Option<Quantity>,
        dim: Dimension,
        default: f64,
        default_provenance: Provenance,
        unit: &'static str,
    ) -> f64 {
        match q {
            Some(q) => match q.to_atomic(dim) {
                Ok(v) => {
                    self.record(key, v, Some(unit), Provenance::User);
                    v
                }
                Err(m) => {
                    self.error(key, m);
                    default
                }
            },
            None => {
                self.record(key, default, Some(unit), default_provenance);
                default
            }
        }
    }
}

pub fn resolve(raw: &RawConfig) -> Result<Plan, Vec<Diagnostic>> {
    let mut r = Resolver {
        diags: Vec::new(),
        params: BTreeMap::new(),
    };

    let scenario = match raw.scenario.as_deref() {
        None => {
            r.error("scenario", "missing; one of relax-ground, relax-excited, wavepacket, steady-compare, sweep");
            Scenario::RelaxGround
        }
        Some(s) => Scenario::parse(s).unwrap_or_else(|| {
            r.error("scenario", format!("unknown scenario '{s}'"));
            Scenario::RelaxGround
        }),
    };

    let mut methods = Vec::new();
    match &raw.methods {
        None => r.error("methods", "missing; at least one of redfield, ccqme, heom"),
        Some(list) if list.is_empty() => r.error("methods", "at least one method is required"),
        Some(list) => {
            for m in list {
                match Method::parse(m) {
                    Some(m) => methods.push(m),
                    None => r.error("methods", format!("unknown method '{m}'")),
                }
            }
        }
    }
    methods.sort();
    methods.dedup();

    let secular = raw.secular.unwrap_or(true);
    r.record("secular", secular, None, if raw.secular.is_some() { Provenance::User } else { Provenance::Paper });

    let preset = match raw.preset.as_deref() {
        None => None,
        Some(p) => match Preset::by_name(p) {
            Some(p) => Some(p),
            None => {
                r.error("preset", format!("unknown preset '{p}'"));
                None
            }
        },
    };

    // Bath.
    let gammas = match &raw.bath.gamma {
        None => {
            r.error("bath.gamma", "missing");
            Vec::new()
        }
        Some(GammaSpec::Single(g)) => vec![*g],
        Some(GammaSpec::List(v)) => v.clone(),
        Some(GammaSpec::Range { start, stop, step }) => {
            if !(*step > 0.0) || !(stop >= start) {
                r.error("bath.gamma", "range needs step > 0 and stop >= start");
                Vec::new()
            } else {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| round12(start + k as f64 * step)).collect()
            }
        }
    };
    if raw.bath.gamma.is_some() && gammas.is_empty() {
        r.error("bath.gamma", "no coupling values");
    }
    for g in &gammas {
        if !(g.is_finite() && *g >= 0.0) {
            r.error("bath.gamma", format!("coupling must be finite and >= 0, got {g}"));
        }
    }
    r.record("bath.gamma", &gammas, Some("au"), Provenance::User);

    let omega_c = match (raw.bath.omega_c, preset) {
        (Some(q), _) => r.quantity("bath.omega_c", Some(q), Dimension::Energy, DEFAULT_OMEGA_C, Provenance::User, "hartree"),
        (None, Some(p)) if p.omega_c.is_some() => {
            let v = p.omega_c.unwrap();
            r.record("bath.omega_c", v, Some("hartree"), Provenance::Assumed);
            r.note("bath.omega_c", format!("preset '{}': {}", p.name, p.description));
            v
        }
        (None, _) => {
            r.record("bath.omega_c", DEFAULT_OMEGA_C, Some("hartree"), Provenance::Assumed);
            r.note("bath.omega_c", "cutoff is not given numerically in the source; about 500 cm-1 assumed");
            DEFAULT_OMEGA_C
        }
    };
    if !(omega_c > 0.0) {
        r.error("bath.omega_c", "cutoff must be > 0");
    }
    let temperature = r.quantity(
        "bath.temperature",
        raw.bath.temperature,
        Dimension::Temperature,
        DEFAULT_TEMPERATURE,
        Provenance::Paper,
        "kelvin",
    );
    let mut beta = f64::NAN;
    if !(temperature > 0.0 && temperature.is_finite()) {
        r.error("bath.temperature", format!("temperature must be > 0 K (beta is infinite at T = 0), got {temperature}"));
    } else {
        beta = beta_from_kelvin(temperature);
        if omega_c > 0.0 {
            if let Err(e) = check_pole_collision(beta, omega_c) {
                r.error("bath.omega_c", format!("bath constraint violated: {e}"));
            }
        }
    }
    let n_matsubara = raw.bath.n_matsubara.unwrap_or(DEFAULT_N_MATSUBARA);
    r.record("bath.n_matsubara", n_matsubara, None, prov(raw.bath.n_matsubara.is_some()));
    if n_matsubara == 0 {
        r.error("bath.n_matsubara", "must be >= 1");
    }
    let tail_correction = raw.bath.tail_correction.unwrap_or(true);
    r.record("bath.tail_correction", tail_correction, None, prov(raw.bath.tail_correction.is_some()));

    // System.
    let system = resolve_system(&mut r, &raw.system, scenario);

    // Propagation.
    let t_max = r.quantity("propagation.t_max", raw.propagation.t_max, Dimension::Time, ccqme_core::units::fs_to_au(DEFAULT_T_MAX_FS), Provenance::Paper, "au");
    let dt = r.quantity("propagation.dt", raw.propagation.dt, Dimension::Time, DEFAULT_DT_AU, Provenance::Assumed, "au");
    if !(dt > 0.0) {
        r.error("propagation.dt", format!("time step must be > 0, got {dt}"));
    }
    if !(t_max >= dt) {
        r.error("propagation.t_max", format!("must be >= dt, got {t_max}"));
    }
    let stride = raw.propagation.stride.unwrap_or(DEFAULT_STRIDE);
    r.record("propagation.stride", stride, None, prov(raw.propagation.stride.is_some()));
    if stride == 0 {
        r.error("propagation.stride", "must be >= 1");
    }
    let coherences: Vec<(usize, usize)> = raw
        .propagation
        .coherences
        .as_ref()
        .map(|v| v.iter().map(|p| (p[0], p[1])).collect())
        .unwrap_or_else(|| vec![(0, 1)]);
    if let Some(n) = system.as_ref().map(|s| s.levels) {
        for &(a, b) in &coherences {
            if a >= n || b >= n {
                r.error("propagation.coherences", format!("pair ({a}, {b}) outside {n} levels"));
            }
        }
    }
    r.record("propagation.coherences", &coherences, None, prov(raw.propagation.coherences.is_some()));

    // HEOM.
    let heom = HeomConfig {
        depth: raw.heom.depth.unwrap_or(5),
        n_exponentials: raw.heom.n_exponentials.unwrap_or(3),
        terminator: raw.heom.terminator.unwrap_or(true),
    };
    r.record("heom.depth", heom.depth, None, if raw.heom.depth.is_some() { Provenance::User } else { Provenance::Paper });
    r.record("heom.n_exponentials", heom.n_exponentials, None, if raw.heom.n_exponentials.is_some() { Provenance::User } else { Provenance::Paper });
    r.note("heom.n_exponentials", "Drude pole plus n-1 Matsubara terms");
    r.record("heom.terminator", heom.terminator, None, if raw.heom.terminator.is_some() { Provenance::User } else { Provenance::Paper });
    if let Err(e) = heom.validate() {
        r.error("heom", e.to_string());
    }
    if methods.contains(&Method::Heom) && gammas.iter().any(|&g| g == 0.0) && !scenario.has_dynamics() {
        r.error("bath.gamma", "HEOM steady state is undefined at zero coupling");
    }

    // Wavepacket.
    let wavepacket = if scenario == Scenario::Wavepacket {
        let center = match raw.wavepacket.center {
            Some(q) => Some(r.quantity("wavepacket.center", Some(q), Dimension::Length, 0.0, Provenance::User, "bohr")),
            None => {
                r.record("wavepacket.center", "left-well minimum", Some("bohr"), Provenance::Assumed);
                None
            }
        };
        let width = r.quantity("wavepacket.width", raw.wavepacket.width, Dimension::Length, WAVEPACKET_WIDTH, Provenance::Paper, "bohr");
        let energy = r.quantity(
            "wavepacket.energy",
            raw.wavepacket.energy,
            Dimension::Energy,
            ccqme_core::units::wavenumber_to_hartree(WAVEPACKET_ENERGY_CM),
            Provenance::Paper,
            "hartree",
        );
        let mass = r.quantity("wavepacket.mass", raw.wavepacket.mass, Dimension::Mass, PROTON_MASS, Provenance::Assumed, "m_e");
        let leakage_bound = raw.wavepacket.leakage_bound.unwrap_or(DEFAULT_LEAKAGE_BOUND);
        if !(width > 0.0) {
            r.error("wavepacket.width", "must be > 0");
        }
        if !(energy >= 0.0) {
            r.error("wavepacket.energy", "must be >= 0");
        }
        if !(mass > 0.0) {
            r.error("wavepacket.mass", "must be > 0");
        }
        Some(WavepacketPlan {
            center,
            width,
            energy,
            mass,
            leakage_bound,
        })
    } else {
        None
    };

    let averaging = match raw.output.averaging.as_deref() {
        None | Some("mean-absolute") => Averaging::MeanAbsolute,
        Some("rms") => Averaging::Rms,
        Some(other) => {
            r.error("output.averaging", format!("unknown averaging '{other}'"));
            Averaging::MeanAbsolute
        }
    };
    r.record(
        "output.averaging",
        match averaging {
            Averaging::MeanAbsolute => "mean-absolute",
            Averaging::Rms => "rms",
        },
        None,
        prov(raw.output.averaging.is_some()),
    );

    if !r.diags.is_empty() {
        return Err(r.diags);
    }
    Ok(Plan {
        scenario,
        methods,
        secular,
        preset,
        system: system.expect("system resolved without diagnostics"),
        gammas,
        omega_c,
        temperature,
        beta,
        n_matsubara,
        tail_correction,
        propagation: PropagationOptions {
            t_max,
            dt,
            stride,
            coherences,
        },
        heom,
        wavepacket,
        averaging,
        output_dir: raw.output.dir.clone(),
        parameters: r.params,
    })
}

fn prov(user: bool) -> Provenance {
    if user {
        Provenance::User
    } else {
        Provenance::Assumed
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn resolve_system(r: &mut Resolver, raw: &RawSystem, scenario: Scenario) -> Option<SystemPlan> {
    let wavepacket = scenario == Scenario::Wavepacket;
    let source = raw.source.as_deref().unwrap_or(if wavepacket { "dvr" } else { "builtin" });
    r.record("system.source", source, None, prov(raw.source.is_some()));
    let n_before = r.diags.len();
    let (src, default_levels, max_levels) = match source {
        "builtin" => {
            let name = raw.name.clone().unwrap_or_else(|| "taa6".into());
            r.record("system.name", &name, None, if raw.name.is_some() { Provenance::User } else { Provenance::Paper });
            match NLevelSystem::builtin(&name) {
                Ok(s) => (Some(SystemSource::Builtin(name)), s.n_levels(), s.n_levels()),
                Err(e) => {
                    r.error("system.name", e.to_string());
                    (None, 0, 0)
                }
            }
        }
        "table" => match &raw.path {
            None => {
                r.error("system.path", "table source needs a path");
                (None, 0, 0)
            }
            Some(p) => match NLevelSystem::from_file(p) {
                Ok(s) => {
                    r.record("system.path", p.display().to_string(), None, Provenance::User);
                    (Some(SystemSource::Table(p.clone())), s.n_levels(), s.n_levels())
                }
                Err(e) => {
                    r.error("system.path", format!("{}: {e}", p.display()));
                    (None, 0, 0)
                }
            },
        },
        "dvr" => {
            let pname = raw.potential.clone().unwrap_or_else(|| "surrogate-taa".into());
            r.record("system.potential", &pname, None, prov(raw.potential.is_some()));
            if raw.potential.is_none() {
                r.note("system.potential", "quartic fitted to the tabulated levels; not the molecular potential");
            }
            let potential = PotentialCurve::by_name(&pname).or_else(|_| PotentialCurve::from_file(&pname));
            let potential = match potential {
                Ok(p) => Some(p),
                Err(e) => {
                    r.error("system.potential", format!("'{pname}' is neither a built-in curve nor a readable file: {e}"));
                    None
                }
            };
            let grid = match raw.grid {
                None => {
                    r.record("system.grid", [TAA_GRID.q_min(), TAA_GRID.q_max(), TAA_GRID.n_points() as f64], Some("bohr"), Provenance::Assumed);
                    Some(TAA_GRID)
                }
                Some(g) => {
                    let lo = g.q_min.to_atomic(Dimension::Length);
                    let hi = g.q_max.to_atomic(Dimension::Length);
                    match (lo, hi) {
                        (Ok(lo), Ok(hi)) => match Grid1D::new(lo, hi, g.points) {
                            Ok(grid) => {
                                r.record("system.grid", [lo, hi, g.points as f64], Some("bohr"), Provenance::User);
                                Some(grid)
                            }
                            Err(e) => {
                                r.error("system.grid", e.to_string());
                                None
                            }
                        },
                        (a, b) => {
                            for m in [a.err(), b.err()].into_iter().flatten() {
                                r.error("system.grid", m);
                            }
                            None
                        }
                    }
                }
            };
            let mass = r.quantity("system.mass", raw.mass, Dimension::Mass, PROTON_MASS, Provenance::Assumed, "m_e");
            if !(mass > 0.0) {
                r.error("system.mass", "must be > 0");
            }
            let basis = raw.basis.unwrap_or(DEFAULT_DVR_BASIS);
            r.record("system.basis", basis, None, prov(raw.basis.is_some()));
            let max = grid.map(|g| g.n_points().min(basis)).unwrap_or(basis);
            let default_levels = if wavepacket { WAVEPACKET_MIN_LEVELS } else { 6 };
            match (potential, grid) {
                (Some(potential), Some(grid)) => (
                    Some(SystemSource::Dvr {
                        potential,
                        grid,
                        mass,
                        basis,
                    }),
                    default_levels,
                    max,
                ),
                _ => (None, default_levels, max),
            }
        }
        other => {
            r.error("system.source", format!("unknown source '{other}'; one of builtin, table, dvr"));
            (None, 0, 0)
        }
    };

    let levels = raw.levels.unwrap_or(default_levels);
    r.record(
        "system.levels",
        levels,
        None,
        if raw.levels.is_some() {
            Provenance::User
        } else if source == "builtin" || wavepacket {
            Provenance::Paper
        } else {
            Provenance::Assumed
        },
    );
    if src.is_some() && (levels < 2 || levels > max_levels) {
        r.error("system.levels", format!("must be in 2..={max_levels}, got {levels}"));
    }
    if wavepacket && source != "dvr" {
        r.error("system.source", "wavepacket scenario needs a DVR source (eigenfunctions on a grid)");
    }
    if wavepacket && raw.levels.is_none() && levels < WAVEPACKET_MIN_LEVELS {
        r.error("system.levels", format!("wavepacket scenario needs at least {WAVEPACKET_MIN_LEVELS} levels"));
    }

    let default_ren = if source == "dvr" && wavepacket { Renormalization::Potential } else { Renormalization::Truncated };
    let renormalization = match raw.renormalization.as_deref() {
        None => default_ren,
        Some("truncated") => Renormalization::Truncated,
        Some("potential") => Renormalization::Potential,
        Some("none") => Renormalization::None,
        Some(other) => {
            r.error("system.renormalization", format!("unknown route '{other}'; one of truncated, potential, none"));
            default_ren
        }
    };
    r.record("system.renormalization", renormalization, None, prov(raw.renormalization.is_some()));
    if renormalization == Renormalization::Potential && source != "dvr" {
        r.error("system.renormalization", "potential-level renormalization needs a DVR source");
    }
    if wavepacket && renormalization == Renormalization::Truncated {
        r.error(
            "system.renormalization",
            "wavepacket projection needs the eigenbasis of the renormalized Hamiltonian; use 'potential' or 'none'",
        );
    }
    if r.diags.len() > n_before {
        return None;
    }
    src.map(|source| SystemPlan {
        source,
        levels,
        renormalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        "scenario = \"relax-ground\"\nmethods = [\"redfield\"]\n[bath]\ngamma = 0.1\n"
    }

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let plan = resolve(&parse_str(minimal()).unwrap()).unwrap();
        assert_eq!(plan.gammas, vec![0.1]);
        assert_eq!(plan.system.levels, 6);
        assert!(plan.secular);
        assert_eq!(plan.parameters["bath.omega_c"].provenance, Provenance::Assumed);
        assert_eq!(plan.parameters["bath.temperature"].provenance, Provenance::Paper);
        assert_eq!(plan.propagation.n_steps(), 103_354);
    }

    #[test]
    fn empty_method_list_is_rejected() {
        let raw = parse_str("scenario = \"sweep\"\nmethods = []\n[bath]\ngamma = 0.1\n").unwrap();
        let d = validate(&raw);
        assert!(d.iter().any(|d| d.field == "methods"), "{d:?}");
    }

    #[test]
    fn all_problems_are_reported() {
        let raw = parse_str(
            "scenario = \"relax\"\nmethods = [\"lindblad\"]\n[bath]\ngamma = 0.1\ntemperature = { value = 0, unit = \"kelvin\" }\n[propagation]\ndt = { value = -1, unit = \"au\" }\n",
        )
        .unwrap();
        let d = validate(&raw);
        let fields: Vec<&str> = d.iter().map(|d| d.field.as_str()).collect();
        for f in ["scenario", "methods", "bath.temperature", "propagation.dt"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn pole_collision_is_diagnosed() {
        let beta = beta_from_kelvin(300.0);
        let wc = 2.0 * std::f64::consts::PI / beta;
        let raw = parse_str(&format!(
            "scenario = \"sweep\"\nmethods = [\"ccqme\"]\n[bath]\ngamma = 0.1\nomega-c = {{ value = {wc:.17e}, unit = \"hartree\" }}\n"
        ))
        .unwrap();
        let d = validate(&raw);
        assert!(d.iter().any(|d| d.field == "bath.omega_c" && d.message.contains("bath constraint")), "{d:?}");
    }

    #[test]
    fn gamma_range_is_inclusive_and_rounded() {
        let raw = parse_str("scenario = \"sweep\"\nmethods = [\"ccqme\"]\n[bath]\ngamma = { start = 0.1, stop = 1.0, step = 0.1 }\n").unwrap();
        let plan = resolve(&raw).unwrap();
        assert_eq!(plan.gammas, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
    }

    #[test]
    fn wavepacket_requires_a_dvr_basis() {
        let raw = parse_str("scenario = \"wavepacket\"\nmethods = [\"ccqme\"]\n[system]\nsource = \"builtin\"\n[bath]\ngamma = 0.1\n").unwrap();
        let d = validate(&raw);
        assert!(d.iter().any(|d| d.field == "system.source"), "{d:?}");
        let ok = parse_str("scenario = \"wavepacket\"\nmethods = [\"ccqme\"]\n[bath]\ngamma = 0.1\n").unwrap();
        let plan = resolve(&ok).unwrap();
        assert_eq!(plan.system.levels, 12);
        assert_eq!(plan.system.renormalization, Renormalization::Potential);
    }

    #[test]
    fn unknown_keys_and_units_are_rejected() {
        assert!(parse_str("scenario = \"sweep\"\nmethod = [\"ccqme\"]\n").is_err());
        assert!(parse_str("[bath]\nomega-c = { value = 1, unit = \"eV\" }\n").is_err());
    }

    #[test]
    fn preset_supplies_the_cutoff() {
        let raw = parse_str(&format!("preset = \"tuned-cutoff\"\n{}", minimal())).unwrap();
        let plan = resolve(&raw).unwrap();
        assert!((plan.omega_c - 9.0714e-3).abs() < 1e-7);
        assert!(plan.parameters["bath.omega_c"].note.as_deref().unwrap().contains("tuned-cutoff"));
    }
}
