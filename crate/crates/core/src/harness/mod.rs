//! Experiment catalog, JSON run configurations and the artifact writer shared
//! by `lab run` and the acceptance target.

mod experiments;
mod ns;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::mild::KernelBounds;
use crate::numerics::io::{write_field, write_series};
use crate::numerics::{Field, TimeSeries};

pub use experiments::run_experiment;
pub use ns::{solve_ns, NsConfig};

/// One row of the built-in catalog.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Experiment {
    pub id: String,
    pub title: String,
    /// Acceptance criteria decided by this experiment.
    pub criteria: Vec<u32>,
    /// Tolerance keys understood by the experiment, with their defaults.
    pub tolerances: BTreeMap<String, f64>,
    /// A runnable configuration with every default spelled out.
    pub config: RunConfig,
}

struct Entry {
    id: &'static str,
    title: &'static str,
    criteria: &'static [u32],
    tolerances: &'static [(&'static str, f64)],
    dims: &'static [usize],
}

const CATALOG: &[Entry] = &[
    Entry {
        id: "extension-equivalence",
        title: "Dirichlet and conormal half-space heat problems, direct vs extended",
        criteria: &[3],
        tolerances: &[("extension_rel", 1e-3)],
        dims: &[2],
    },
    Entry {
        id: "heat-ladder",
        title: "Derivative ladder growth constants and Taylor reconstruction of heat modes",
        criteria: &[4, 5],
        tolerances: &[("growth_rel", 0.1), ("taylor_abs", 1e-6)],
        dims: &[2],
    },
    Entry {
        id: "kernel-scaling",
        title: "L1 normalisation and time scaling of Gamma, grad Gamma, G* and the Duhamel kernel",
        criteria: &[6],
        tolerances: &[("gamma_mass", 1e-6), ("slope_band", 0.1), ("gstar_ratio", 10.0)],
        dims: &[2, 3],
    },
    Entry {
        id: "envelope",
        title: "Pointwise G* and K envelope fits over random samples",
        criteria: &[7],
        tolerances: &[],
        dims: &[2, 3],
    },
    Entry {
        id: "projection-residual",
        title: "Componentwise F' against the Helmholtz projection of div F",
        criteria: &[8],
        tolerances: &[("projection_rel", 2e-2), ("row_n_abs", 1e-14)],
        dims: &[2],
    },
    Entry {
        id: "ns-shear",
        title: "Picard iteration for mild Navier-Stokes solutions and the shear-flow oracle",
        criteria: &[9, 10],
        tolerances: &[("contraction_ratio", 0.6), ("residual_factor", 2.0), ("oracle_rel", 2e-2), ("m_stability", 0.2)],
        dims: &[2],
    },
    Entry {
        id: "lemmas",
        title: "Exact Leibniz and shift identities; the combinatorial sum ratio sweep",
        criteria: &[1, 2],
        tolerances: &[("sum_ratio_gap", 1e-2)],
        dims: &[2, 3],
    },
];

fn entry(id: &str) -> Option<&'static Entry> {
    CATALOG.iter().find(|e| e.id == id)
}

pub fn list_experiments() -> Vec<Experiment> {
    CATALOG
        .iter()
        .map(|e| Experiment {
            id: e.id.into(),
            title: e.title.into(),
            criteria: e.criteria.to_vec(),
            tolerances: e.tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            config: RunConfig::default_for(e.id),
        })
        .collect()
}

/// The experiment that decides criterion `id`.
pub fn experiment_for(criterion: u32) -> Option<&'static str> {
    CATALOG.iter().find(|e| e.criteria.contains(&criterion)).map(|e| e.id)
}

/// Field data handed to an experiment: a field file or a named generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataRef {
    File { file: PathBuf },
    Generator { generator: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Node spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub time: TimeParams,
    #[serde(default)]
    pub data: BTreeMap<String, DataRef>,
    /// Overrides of the catalog tolerances.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Criteria to evaluate; all of the experiment's when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u32>>,
    /// Kernel constants for the smallness condition; measured when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<KernelBounds>,
    /// Smaller problem sizes for smoke runs; the criteria thresholds are unchanged.
    #[serde(default)]
    pub quick: bool,
}

fn default_n() -> usize {
    2
}

impl RunConfig {
    pub fn default_for(experiment: &str) -> Self {
        RunConfig {
            experiment: experiment.into(),
            n: 2,
            seed: 0,
            grid: GridParams::default(),
            time: TimeParams::default(),
            data: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            criteria: None,
            bounds: None,
            quick: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        // relative field paths are taken from the config's directory
        let base = path.parent().unwrap_or(Path::new("."));
        for r in cfg.data.values_mut() {
            if let DataRef::File { file } = r {
                if file.is_relative() {
                    *file = base.join(&*file);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let e = entry(&self.experiment).ok_or_else(|| {
            let ids: Vec<&str> = CATALOG.iter().map(|e| e.id).collect();
            LabError::Config(format!("unknown experiment {:?}; known: {}", self.experiment, ids.join(", ")))
        })?;
        if !e.dims.contains(&self.n) {
            return Err(LabError::Config(format!("experiment {} supports n in {:?}, got {}", e.id, e.dims, self.n)));
        }
        for (k, v) in &self.tolerances {
            if !e.tolerances.iter().any(|(name, _)| name == k) {
                return Err(LabError::Config(format!("experiment {} has no tolerance {k:?}", e.id)));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(LabError::Config(format!("tolerance {k} must be positive, got {v}")));
            }
        }
        for (what, v) in [("grid.h", self.grid.h), ("time.dt", self.time.dt), ("time.t_end", self.time.t_end)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(LabError::Config(format!("{what} must be positive, got {v}")));
                }
            }
        }
        for (name, r) in &self.data {
            match r {
                DataRef::File { file } => {
                    if !file.is_file() {
                        return Err(LabError::Config(format!("data {name:?}: field file {} does not exist", file.display())));
                    }
                }
                DataRef::Generator { generator } => {
                    if !experiments::GENERATORS.contains(&generator.as_str()) {
                        return Err(LabError::Config(format!("data {name:?}: unknown generator {generator:?}")));
                    }
                }
            }
        }
        if let Some(ids) = &self.criteria {
            if ids.is_empty() {
                return Err(LabError::Config("criteria list is empty".into()));
            }
            if let Some(bad) = ids.iter().find(|c| !e.criteria.contains(c)) {
                return Err(LabError::Config(format!("criterion {bad} is not decided by {}; it has {:?}", e.id, e.criteria)));
            }
        }
        if let Some(b) = &self.bounds {
            if !(b.c0 > 0.0 && b.c > 0.0 && b.c0.is_finite() && b.c.is_finite()) {
                return Err(LabError::Config("bounds.c0 and bounds.c must be positive".into()));
            }
        }
        experiments::check_data_keys(self)?;
        Ok(())
    }

    pub fn enabled(&self, criterion: u32) -> bool {
        self.criteria.as_ref().map_or(true, |c| c.contains(&criterion))
    }

    /// Tolerance `key`, from the overrides or the catalog default.
    pub fn tol(&self, key: &str) -> f64 {
        if let Some(v) = self.tolerances.get(key) {
            return *v;
        }
        entry(&self.experiment)
            .and_then(|e| e.tolerances.iter().find(|(k, _)| *k == key))
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("tolerance {key} is not declared for {}", self.experiment))
    }

    /// Catalog defaults merged with the overrides.
    pub fn resolved_tolerances(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = entry(&self.experiment)
            .map(|e| e.tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect())
            .unwrap_or_default();
        out.extend(self.tolerances.clone());
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    /// The decisive measured quantity.
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
    /// Wall time in seconds; kept out of the manifest so reports stay byte-stable.
    #[serde(skip)]
    pub runtime: f64,
}

/// A CSV report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Fixed-format float for reports.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.12e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Default)]
pub struct ExperimentReport {
    pub criteria: Vec<CriterionResult>,
    pub tables: Vec<Table>,
    pub fields: Vec<(String, Field)>,
    pub series: Vec<(String, TimeSeries)>,
    /// Errors raised while evaluating a criterion, by criterion id.
    pub errors: Vec<(u32, String)>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.criteria.iter().all(|c| c.pass)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    tolerances: BTreeMap<String, f64>,
    status: &'static str,
    failed: Vec<String>,
    criteria: &'a [CriterionResult],
    errors: Vec<String>,
    artifacts: Vec<String>,
}

/// What `run` did: the exit code and the artifact directory.
#[derive(Debug)]
pub struct RunOutcome {
    pub code: i32,
    pub out_dir: PathBuf,
    pub report: Option<ExperimentReport>,
    pub message: String,
}

/// Loads the config, runs the experiment and writes `manifest.json`, the CSV
/// reports and field snapshots under `out_dir`. Exit code 0 when every
/// criterion passes, 1 on a failed criterion, 2 on a config error.
pub fn run(config_path: &Path, out_dir: &Path) -> RunOutcome {
    let cfg = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => return RunOutcome { code: 2, out_dir: out_dir.into(), report: None, message: e.to_string() },
    };
    run_config(&cfg, out_dir)
}

pub fn run_config(cfg: &RunConfig, out_dir: &Path) -> RunOutcome {
    let fail = |code, message: String| RunOutcome { code, out_dir: out_dir.into(), report: None, message };
    if let Err(e) = cfg.validate() {
        return fail(2, e.to_string());
    }
    let report = match run_experiment(cfg) {
        Ok(r) => r,
        Err(LabError::Config(m)) => return fail(2, format!("config error: {m}")),
        Err(e) => return fail(1, e.to_string()),
    };
    if let Err(e) = write_artifacts(cfg, &report, out_dir) {
        return fail(1, e.to_string());
    }
    let failed: Vec<String> = failed_names(&report);
    let (code, message) = if report.passed() { (0, "all criteria passed".to_string()) } else { (1, format!("failed: {}", failed.join("; "))) };
    RunOutcome { code, out_dir: out_dir.into(), report: Some(report), message }
}

fn failed_names(report: &ExperimentReport) -> Vec<String> {
    let mut out: Vec<String> = report.criteria.iter().filter(|c| !c.pass).map(|c| format!("criterion {} ({})", c.id, c.name)).collect();
    out.extend(report.errors.iter().map(|(id, e)| format!("criterion {id}: {e}")));
    out
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> LabError + '_ {
    move |e| LabError::io(path.display().to_string(), e)
}

pub fn write_artifacts(cfg: &RunConfig, report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut artifacts = Vec::new();
    for t in &report.tables {
        let name = format!("{}.csv", t.name);
        let p = out_dir.join(&name);
        std::fs::write(&p, t.to_csv()).map_err(io_err(&p))?;
        artifacts.push(name);
    }
    for (name, f) in &report.fields {
        let rel = format!("fields/{name}.field");
        let p = out_dir.join(&rel);
        std::fs::create_dir_all(p.parent().unwrap()).map_err(io_err(&p))?;
        write_field(&p, f)?;
        artifacts.push(rel);
    }
    for (name, s) in &report.series {
        let rel = format!("series/{name}");
        write_series(&out_dir.join(&rel), s)?;
        artifacts.push(rel);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        tolerances: cfg.resolved_tolerances(),
        status: if report.passed() { "pass" } else { "fail" },
        failed: failed_names(report),
        criteria: &report.criteria,
        errors: report.errors.iter().map(|(id, e)| format!("criterion {id}: {e}")).collect(),
        artifacts,
    };
    let p = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| LabError::InvalidArgument(e.to_string()))?;
    std::fs::write(&p, text + "\n").map_err(io_err(&p))?;
    Ok(())
}

/// One line per criterion, as printed by the acceptance target and `lab run`.
pub fn format_result(c: &CriterionResult) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "criterion {:>2} {} {:<28} measured {:.4e} threshold {:.4e} ({:.1} s) {}",
        c.id,
        if c.pass { "PASS" } else { "FAIL" },
        c.name,
        c.measured,
        c.threshold,
        c.runtime,
        c.detail
    );
    s
}

/// Sizes the global worker pool from `LAB_THREADS`; a no-op when the pool
/// already exists.
pub fn init_threads() -> Result<()> {
    let n = match std::env::var("LAB_THREADS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| LabError::Config(format!("LAB_THREADS = {v:?} is not a positive integer")))?,
        Err(_) => return Ok(()),
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed().as_secs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_round_trips_through_the_parser() {
        let cat = list_experiments();
        assert_eq!(cat.len(), 7);
        let text = serde_json::to_string(&cat).unwrap();
        let back: Vec<Experiment> = serde_json::from_str(&text).unwrap();
        for e in &back {
            let cfg = RunConfig::from_json(&serde_json::to_string(&e.config).unwrap()).unwrap();
            assert_eq!(cfg, e.config);
        }
        let mut ids: Vec<u32> = cat.iter().flat_map(|e| e.criteria.clone()).collect();
        ids.sort();
        assert_eq!(ids, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::from_json(r#"{"experiment":"lemmas"}"#).is_ok());
        assert!(RunConfig::from_json(r#"{"experiment":"nope"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"lemmas","tolerances":{"sum_ratio_gap":-1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"lemmas","tolerances":{"oracle_rel":0.1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"lemmas","bogus":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"ns-shear","n":3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"lemmas","criteria":[1]}"#).unwrap().enabled(1));
        assert!(!RunConfig::from_json(r#"{"experiment":"lemmas","criteria":[1]}"#).unwrap().enabled(2));
        assert!(RunConfig::from_json(r#"{"experiment":"lemmas","criteria":[3]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"ns-shear","bounds":{"c0":0,"c":1}}"#).is_err());
        let e = RunConfig::from_json(r#"{"experiment":"ns-shear","data":{"u0":{"file":"/no/such/u0.field"}}}"#).unwrap_err();
        assert!(e.to_string().contains("/no/such/u0.field"));
        assert!(RunConfig::from_json(r#"{"experiment":"ns-shear","data":{"u0":{"generator":"shear"}}}"#).is_ok());
        assert!(RunConfig::from_json(r#"{"experiment":"ns-shear","data":{"u0":{"generator":"other"}}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"lemmas","data":{"u0":{"generator":"shear"}}}"#).is_err());
        let c = RunConfig::from_json(r#"{"experiment":"ns-shear","tolerances":{"oracle_rel":0.05}}"#).unwrap();
        assert_eq!(c.tol("oracle_rel"), 0.05);
        assert_eq!(c.tol("contraction_ratio"), 0.6);
    }

    #[test]
    fn tables_are_plain_csv() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![num(1.0), opt(None)]);
        assert_eq!(t.to_csv(), "a,b\n1.000000000000e0,\n");
        assert_eq!(experiment_for(10), Some("ns-shear"));
        assert_eq!(experiment_for(11), None);
    }
}
