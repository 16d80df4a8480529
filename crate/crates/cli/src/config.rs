//! Experiment configuration: a TOML file merged with command-line
//! overrides, resolved against per-experiment defaults and validated as a
//! whole before anything runs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyonwalk::walk::required_bytes;
use anyonwalk::{AnyonModel, Boundary, Closure, WalkConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_MEMORY_BUDGET: u64 = anyonwalk::walk::DEFAULT_MEMORY_BUDGET;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Walk,
    Mixing,
    Exit,
    Channel,
    Entropy,
    OracleCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Walk,
        Experiment::Mixing,
        Experiment::Exit,
        Experiment::Channel,
        Experiment::Entropy,
        Experiment::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Walk => "walk",
            Experiment::Mixing => "mixing",
            Experiment::Exit => "exit",
            Experiment::Channel => "channel",
            Experiment::Entropy => "entropy",
            Experiment::OracleCheck => "oracle-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown experiment {s:?}")))
    }
}

/// Every key is optional; missing keys take the experiment's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub model: Option<String>,
    pub sites: Option<usize>,
    pub s0: Option<i64>,
    pub c0: Option<u8>,
    pub t_max: Option<usize>,
    pub boundary: Option<String>,
    pub closure: Option<String>,
    pub epsilon: Option<f64>,
    pub ks: Option<Vec<u32>>,
    pub fit_start: Option<usize>,
    pub words: Option<usize>,
    pub seed: Option<u64>,
    pub memory_budget: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Keys set in `over` replace those in `self`.
    pub fn merged(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            experiment: over.experiment.or(self.experiment),
            model: over.model.or(self.model),
            sites: over.sites.or(self.sites),
            s0: over.s0.or(self.s0),
            c0: over.c0.or(self.c0),
            t_max: over.t_max.or(self.t_max),
            boundary: over.boundary.or(self.boundary),
            closure: over.closure.or(self.closure),
            epsilon: over.epsilon.or(self.epsilon),
            ks: over.ks.or(self.ks),
            fit_start: over.fit_start.or(self.fit_start),
            words: over.words.or(self.words),
            seed: over.seed.or(self.seed),
            memory_budget: over.memory_budget.or(self.memory_budget),
            output_dir: over.output_dir.or(self.output_dir),
        }
    }
}

/// A fully resolved configuration, echoed into the manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: AnyonModel,
    pub model_name: String,
    pub sites: Option<usize>,
    pub s0: i64,
    pub c0: u8,
    pub t_max: usize,
    pub boundary: Boundary,
    pub closure: Closure,
    pub epsilon: f64,
    pub ks: Vec<u32>,
    pub fit_start: usize,
    pub words: usize,
    pub seed: u64,
    pub memory_budget: u64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn walk_config(&self, model: AnyonModel) -> WalkConfig {
        let mut cfg = match self.sites {
            Some(n) => WalkConfig::chain(model, n, self.s0, self.t_max, self.boundary),
            None => {
                let mut c = WalkConfig::line(model, self.t_max);
                c.s0 = self.s0;
                c
            }
        };
        cfg.c0 = self.c0;
        cfg.closure = self.closure;
        cfg.memory_budget = self.memory_budget;
        cfg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{s}: {}: {}", self.key, self.message)
    }
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn error(&mut self, key: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            key: key.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, key: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Warning,
            key: key.into(),
            message: message.into(),
        });
    }
}

const DEFAULT_ENTROPY_KS: [u32; 12] = [1, 2, 3, 4, 5, 6, 8, 10, 20, 50, 100, 200];

/// Resolves defaults and collects every diagnostic. The configuration is
/// returned whenever it could be built, even if errors were found.
pub fn validate(file: &ConfigFile) -> (Option<ExperimentConfig>, Vec<Diagnostic>) {
    let mut d = Sink(Vec::new());
    let Some(experiment) = file.experiment else {
        d.error("experiment", "no experiment given");
        return (None, d.0);
    };

    let default_model = "ising";
    let model_name = file
        .model
        .clone()
        .unwrap_or_else(|| default_model.to_string());
    let model = match model_name.parse::<AnyonModel>() {
        Ok(m) => m,
        Err(e) => {
            d.error("model", e.to_string());
            AnyonModel::Ising
        }
    };

    let (default_sites, default_t, default_boundary, default_closure) = match experiment {
        Experiment::Walk => (None, 16, None, Closure::Plat),
        Experiment::Mixing => (Some(5), 1000, Some(Boundary::Periodic), Closure::Plat),
        Experiment::Exit => (Some(12), 300, Some(Boundary::Absorbing), Closure::Plat),
        Experiment::Channel => (None, 200, None, Closure::Markov),
        Experiment::Entropy => (None, 0, None, Closure::Plat),
        Experiment::OracleCheck => (None, 6, None, Closure::Plat),
    };
    let sites = file.sites.or(default_sites);
    let t_max = file.t_max.unwrap_or(default_t);

    let boundary = match &file.boundary {
        Some(b) => match b.parse::<Boundary>() {
            Ok(b) => b,
            Err(e) => {
                d.error("boundary", e.to_string());
                Boundary::InfiniteWindow
            }
        },
        None => default_boundary.unwrap_or(if sites.is_some() {
            Boundary::Periodic
        } else {
            Boundary::InfiniteWindow
        }),
    };
    let closure = match &file.closure {
        Some(c) => c.parse::<Closure>().unwrap_or_else(|e| {
            d.error("closure", e.to_string());
            default_closure
        }),
        None => default_closure,
    };

    let default_s0 = match (experiment, sites) {
        (Experiment::Exit, Some(n)) => (n / 2) as i64,
        (_, Some(n)) => n.div_ceil(2) as i64,
        (_, None) => 0,
    };
    let s0 = file.s0.unwrap_or(default_s0);
    let c0 = file.c0.unwrap_or(0);
    if c0 > 1 {
        d.error("c0", format!("initial coin {c0} is not 0 or 1"));
    }

    let epsilon = file.epsilon.unwrap_or(0.05);
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        d.error("epsilon", format!("{epsilon} is outside (0, 2]"));
    }

    let ks = file.ks.clone().unwrap_or_else(|| match experiment {
        Experiment::Channel => vec![2, 3, 4, 5],
        _ => DEFAULT_ENTROPY_KS.to_vec(),
    });
    let fit_start = file.fit_start.unwrap_or(match experiment {
        Experiment::Channel => 50.min(t_max / 4),
        _ => (t_max / 2).max(1),
    });

    let cfg = ExperimentConfig {
        experiment,
        model,
        model_name,
        sites,
        s0,
        c0,
        t_max,
        boundary,
        closure,
        epsilon,
        ks,
        fit_start,
        words: file.words.unwrap_or(200),
        seed: file.seed.unwrap_or(1),
        memory_budget: file.memory_budget.unwrap_or(DEFAULT_MEMORY_BUDGET),
        output_dir: file
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("anyonwalk-out").join(experiment.name())),
    };

    match experiment {
        Experiment::Walk | Experiment::Mixing | Experiment::Exit => check_walk(&cfg, &mut d),
        Experiment::Channel => check_channel(&cfg, &mut d),
        Experiment::Entropy => check_entropy(&cfg, &mut d),
        Experiment::OracleCheck => check_oracle(&cfg, &mut d),
    }
    (Some(cfg), d.0)
}

fn check_walk(cfg: &ExperimentConfig, d: &mut Sink) {
    match (cfg.experiment, cfg.boundary) {
        (Experiment::Mixing, b) if b != Boundary::Periodic => d.error(
            "boundary",
            format!("mixing runs on periodic chains, got {b}"),
        ),
        (Experiment::Exit, b) if b != Boundary::Absorbing => d.error(
            "boundary",
            format!("exit runs on absorbing chains, got {b}"),
        ),
        _ => {}
    }
    if cfg.t_max == 0 {
        d.error("t_max", "at least one step is needed");
    }
    match (cfg.boundary, cfg.sites) {
        (Boundary::InfiniteWindow, Some(_)) => {
            d.error("sites", "the infinite window takes no site count")
        }
        (Boundary::InfiniteWindow, None) => {}
        (b, None) => d.error("sites", format!("{b} boundary needs a site count")),
        (b, Some(n)) => {
            let min = if b == Boundary::Periodic { 3 } else { 2 };
            if n < min {
                d.error("sites", format!("{n} sites is too few for {b}"));
            }
            if cfg.s0 < 1 || cfg.s0 > n as i64 {
                d.error(
                    "s0",
                    format!("s0 = {} outside the site range 1..={n}", cfg.s0),
                );
            }
        }
    }
    if cfg.experiment == Experiment::Mixing {
        if let Some(n) = cfg.sites {
            if n % 2 == 0 {
                d.warning(
                    "sites",
                    format!("N = {n} is even: the cycle is bipartite and the random walk oscillates without mixing"),
                );
            }
        }
    }
    if cfg.experiment == Experiment::Walk && cfg.fit_start >= cfg.t_max {
        d.error(
            "fit_start",
            format!(
                "fit window starts at {} but t_max is {}",
                cfg.fit_start, cfg.t_max
            ),
        );
    }
    let wc = cfg.walk_config(cfg.model);
    let (required, formula) = required_bytes(&wc);
    if required > cfg.memory_budget as u128 {
        d.error(
            "t_max",
            format!(
                "memory budget exceeded: {required} bytes required, budget {} bytes ({formula})",
                cfg.memory_budget
            ),
        );
    }
}

fn check_channel(cfg: &ExperimentConfig, d: &mut Sink) {
    if cfg.ks.is_empty() {
        d.error("ks", "no levels given");
    }
    if cfg.ks.contains(&0) {
        d.error("ks", "level 0 is not a valid SU(2)_k level");
    }
    if cfg.t_max < 5 {
        d.error(
            "t_max",
            "channel runs need at least 5 applications for a fit",
        );
    } else if cfg.t_max - cfg.fit_start < 4 {
        d.error(
            "fit_start",
            format!(
                "fit window {}..={} has fewer than 5 points",
                cfg.fit_start, cfg.t_max
            ),
        );
    }
    if cfg.fit_start == 0 {
        d.error("fit_start", "fit window must start after t = 0");
    }
    // dense density matrix on 4 t + 5 sites
    let len = 4 * cfg.t_max as u128 + 5;
    let required = len * len * 16 * 3;
    if required > cfg.memory_budget as u128 {
        d.error(
            "t_max",
            format!(
                "memory budget exceeded: {required} bytes required, budget {} bytes (3 dense {len} x {len} density matrices x 16 bytes)",
                cfg.memory_budget
            ),
        );
    }
}

fn check_entropy(cfg: &ExperimentConfig, d: &mut Sink) {
    if cfg.ks.is_empty() {
        d.error("ks", "no levels given");
    }
    if cfg.ks.contains(&0) {
        d.error("ks", "level 0 is not a valid SU(2)_k level");
    }
}

fn check_oracle(cfg: &ExperimentConfig, d: &mut Sink) {
    let cap = anyonwalk::pathsum::DEFAULT_PATH_CAP;
    if cfg.t_max == 0 || cfg.t_max > cap {
        d.error(
            "t_max",
            format!("path-sum horizon {} outside 1..={cap}", cfg.t_max),
        );
    }
    if cfg.sites.is_some() {
        d.error("sites", "oracle checks run on the infinite line");
    }
    let wc = WalkConfig::line(cfg.model, cfg.t_max.max(1)).with_closure(Closure::Markov);
    let (required, formula) = required_bytes(&wc);
    if required > cfg.memory_budget as u128 {
        d.error(
            "t_max",
            format!(
                "memory budget exceeded: {required} bytes required, budget {} bytes ({formula})",
                cfg.memory_budget
            ),
        );
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}
