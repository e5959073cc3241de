// SPDX-License-Identifier: Apache-2.0

//! Flat TOML benchmark configuration.
//!
//! Every key sits at the top level. `seed` and `algorithm` accept a single
//! value or an array; the benchmark runs the full grid of both. Parsing
//! collects every violation instead of stopping at the first one.

use std::fmt;
use std::path::PathBuf;

use grpda::problems::{LassoCase, MatrixGameVariant, NoiseReading, DEFAULT_LASSO_MU};
use grpda::solvers::{ConfigError, DEFAULT_MAX_LS_TRIALS};
use grpda::{AgrpdaLConfig, Algorithm, AlgorithmId, FixedGrpdaConfig, GrpdaLConfig, PdaLConfig};
use thiserror::Error;
use toml::{Table, Value};

pub const KEYS: &[&str] = &[
    "name",
    "family",
    "variant",
    "case",
    "p",
    "q",
    "seed",
    "mu_reg",
    "v",
    "s",
    "noise",
    "swap",
    "algorithm",
    "psi",
    "sigma",
    "beta",
    "mu_ls",
    "gamma_g",
    "delta",
    "tau0",
    "tau",
    "dual_step",
    "perturb_scale",
    "init_seed",
    "max_ls_trials",
    "gap_tol",
    "obj_tol",
    "f_star",
    "reference_budget",
    "max_iters",
    "wall_limit_seconds",
    "track_ergodic_gap",
    "record_iterates",
    "output_dir",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    MatrixGame(MatrixGameVariant),
    Lasso { case: LassoCase, s: usize, v: f64, mu_reg: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::MatrixGame(_) => "matrix_game",
            Family::Lasso { .. } => "lasso",
        }
    }

    pub fn instance_name(&self) -> &'static str {
        match self {
            Family::MatrixGame(v) => v.as_str(),
            Family::Lasso { case, .. } => case.as_str(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub family: Family,
    pub p: usize,
    pub q: usize,
    pub noise: NoiseReading,
    /// Solve the problem with primal and dual roles exchanged.
    pub swap: bool,
}

/// Solver parameters shared by every algorithm in the grid. `None` means the
/// per-algorithm default.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub psi: Option<f64>,
    pub sigma: Option<f64>,
    pub beta: f64,
    pub mu_ls: f64,
    pub gamma_g: Option<f64>,
    pub delta: f64,
    pub tau0: Option<f64>,
    /// Primal step of the constant-step method; defaults to `1/‖K‖`.
    pub tau: Option<f64>,
    /// Dual step of the constant-step method; defaults to `1/‖K‖`.
    pub dual_step: Option<f64>,
    pub perturb_scale: Option<f64>,
    pub init_seed: u64,
    pub max_ls_trials: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            psi: None,
            sigma: None,
            beta: 1.0,
            mu_ls: 0.7,
            gamma_g: None,
            delta: 0.99,
            tau0: None,
            tau: None,
            dual_step: None,
            perturb_scale: None,
            init_seed: 1,
            max_ls_trials: DEFAULT_MAX_LS_TRIALS,
        }
    }
}

pub const DEFAULT_PSI_LINESEARCH: f64 = 1.5;
pub const DEFAULT_PSI_FIXED: f64 = 1.618;
pub const DEFAULT_SIGMA: f64 = 0.99;

impl SolverParams {
    pub fn psi_for(&self, id: AlgorithmId) -> f64 {
        self.psi.unwrap_or(match id {
            AlgorithmId::Grpda => DEFAULT_PSI_FIXED,
            _ => DEFAULT_PSI_LINESEARCH,
        })
    }

    pub fn sigma_for(&self, id: AlgorithmId) -> f64 {
        self.sigma.unwrap_or(match id {
            AlgorithmId::GrpdaScscL => 1.0,
            _ => DEFAULT_SIGMA,
        })
    }

    /// Builds the algorithm from resolved run-time quantities.
    pub fn algorithm(&self, id: AlgorithmId, tau0: f64, norm_estimate: f64, gamma_g: f64) -> Algorithm {
        let psi = self.psi_for(id);
        let linesearch = GrpdaLConfig {
            psi,
            sigma: self.sigma_for(id),
            beta: self.beta,
            mu: self.mu_ls,
            tau0,
            max_ls_trials: self.max_ls_trials,
        };
        match id {
            AlgorithmId::Grpda => Algorithm::Grpda(FixedGrpdaConfig {
                psi,
                tau: self.tau.unwrap_or(1.0 / norm_estimate),
                sigma: self.dual_step.unwrap_or(1.0 / norm_estimate),
            }),
            AlgorithmId::GrpdaL => Algorithm::GrpdaL(linesearch),
            AlgorithmId::GrpdaScscL => Algorithm::GrpdaScscL(linesearch),
            AlgorithmId::AgrpdaL => Algorithm::AgrpdaL(AgrpdaLConfig {
                psi,
                beta0: self.beta,
                gamma_g,
                mu: self.mu_ls,
                tau0,
                max_ls_trials: self.max_ls_trials,
            }),
            AlgorithmId::PdaL => Algorithm::PdaL(PdaLConfig {
                tau0,
                mu: self.mu_ls,
                delta: self.delta,
                beta: self.beta,
                max_ls_trials: self.max_ls_trials,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopSpec {
    pub gap_tol: Option<f64>,
    pub obj_tol: Option<f64>,
    pub f_star: Option<f64>,
    /// Iterations per ensemble member when `F*` is estimated.
    pub reference_budget: Option<usize>,
    pub max_iters: usize,
    pub wall_limit_seconds: Option<f64>,
    pub track_ergodic_gap: bool,
    pub record_iterates: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub name: String,
    pub problem: ProblemSpec,
    pub algorithms: Vec<AlgorithmId>,
    pub seeds: Vec<u64>,
    pub params: SolverParams,
    pub stop: StopSpec,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigParseError {
    #[error("malformed TOML: {0}")]
    Syntax(String),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl ConfigParseError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigParseError::Syntax(_) => &[],
            ConfigParseError::Invalid(v) => v,
        }
    }
}

struct Reader<'a> {
    table: &'a Table,
    errors: Vec<Violation>,
}

impl<'a> Reader<'a> {
    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(Violation { key: key.to_string(), message: message.into() });
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.get(key)
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.fail(key, format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        match self.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            Value::Integer(i) => {
                self.fail(key, format!("must be nonnegative, found {i}"));
                None
            }
            other => {
                self.fail(key, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<&'a str> {
        match self.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.fail(key, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        match self.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.fail(key, format!("expected a boolean, found {}", other.type_str()));
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr<Err = String>>(&mut self, key: &str) -> Option<T> {
        let s = self.string(key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(key, e);
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, value: Option<T>) -> Option<T> {
        if value.is_none() && self.get(key).is_none() {
            self.fail(key, "missing required key");
        }
        value
    }

    fn positive(&mut self, key: &str) -> Option<f64> {
        let v = self.float(key)?;
        if v > 0.0 && v.is_finite() {
            Some(v)
        } else {
            self.fail(key, format!("{key} out of (0, inf)"));
            None
        }
    }

    fn list<T>(&mut self, key: &str, mut one: impl FnMut(&mut Self, &Value) -> Option<T>) -> Option<Vec<T>> {
        let value = self.get(key)?;
        let items: Vec<&Value> = match value {
            Value::Array(items) => items.iter().collect(),
            single => vec![single],
        };
        if items.is_empty() {
            self.fail(key, "must not be empty");
            return None;
        }
        let out: Vec<T> = items.into_iter().filter_map(|v| one(self, v)).collect();
        Some(out)
    }
}

pub fn parse_config(text: &str) -> Result<BenchConfig, ConfigParseError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigParseError::Syntax(e.to_string()))?;
    let mut r = Reader { table: &table, errors: Vec::new() };
    let mut unknown: Vec<&String> = table.keys().filter(|k| !KEYS.contains(&k.as_str())).collect();
    unknown.sort();
    for key in unknown {
        r.fail(key, "unknown key");
    }

    let name = r.string("name").unwrap_or("bench").to_string();
    let family_name = r.string("family");
    let family_name = r.required("family", family_name);
    let p = r.uint("p");
    let p = r.required("p", p).map(|v| v as usize);
    let q = r.uint("q");
    let q = r.required("q", q).map(|v| v as usize);
    for (key, dim) in [("p", p), ("q", q)] {
        if dim == Some(0) {
            r.fail(key, format!("{key} must be at least 1"));
        }
    }
    let noise = if r.get("noise").is_some() { r.parsed("noise") } else { Some(NoiseReading::Variance) };
    let swap = r.boolean("swap").unwrap_or(false);

    let family = match family_name {
        Some("matrix_game") => {
            for key in ["case", "s", "v", "mu_reg"] {
                if r.get(key).is_some() {
                    r.fail(key, "only valid for family lasso");
                }
            }
            let variant = r.parsed::<MatrixGameVariant>("variant");
            r.required("variant", variant).map(Family::MatrixGame)
        }
        Some("lasso") => {
            if r.get("variant").is_some() {
                r.fail("variant", "only valid for family matrix_game");
            }
            let case = r.parsed::<LassoCase>("case");
            let case = r.required("case", case);
            let s = r.uint("s");
            let s = r.required("s", s).map(|v| v as usize);
            let v = r.float("v").unwrap_or(0.0);
            if !(0.0..1.0).contains(&v) {
                r.fail("v", "v out of [0, 1)");
            }
            if let (Some(s), Some(q)) = (s, q) {
                if s > q {
                    r.fail("s", format!("s must not exceed q = {q}"));
                }
            }
            let mu_reg = if r.get("mu_reg").is_some() { r.positive("mu_reg") } else { Some(DEFAULT_LASSO_MU) };
            match (case, s, mu_reg) {
                (Some(case), Some(s), Some(mu_reg)) => Some(Family::Lasso { case, s, v, mu_reg }),
                _ => None,
            }
        }
        Some(other) => {
            r.fail("family", format!("unknown family {other:?}, expected \"matrix_game\" or \"lasso\""));
            None
        }
        None => None,
    };

    let seeds = r
        .list("seed", |r, v| match v {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            other => {
                r.fail("seed", format!("expected a nonnegative integer, found {other}"));
                None
            }
        })
        .unwrap_or_else(|| vec![0]);
    let algorithms = r.list("algorithm", |r, v| match v {
        Value::String(s) => match s.parse::<AlgorithmId>() {
            Ok(id) => Some(id),
            Err(e) => {
                r.fail("algorithm", e);
                None
            }
        },
        other => {
            r.fail("algorithm", format!("expected a string, found {}", other.type_str()));
            None
        }
    });
    let algorithms = r.required("algorithm", algorithms).unwrap_or_default();

    let defaults = SolverParams::default();
    let params = SolverParams {
        psi: r.float("psi"),
        sigma: r.float("sigma"),
        beta: r.float("beta").unwrap_or(defaults.beta),
        mu_ls: r.float("mu_ls").unwrap_or(defaults.mu_ls),
        gamma_g: r.float("gamma_g"),
        delta: r.float("delta").unwrap_or(defaults.delta),
        tau0: r.float("tau0"),
        tau: r.float("tau"),
        dual_step: r.float("dual_step"),
        perturb_scale: if r.get("perturb_scale").is_some() { r.positive("perturb_scale") } else { None },
        init_seed: r.uint("init_seed").unwrap_or(defaults.init_seed),
        max_ls_trials: r.uint("max_ls_trials").map_or(defaults.max_ls_trials, |v| v as usize),
    };

    let stop = StopSpec {
        gap_tol: if r.get("gap_tol").is_some() { r.positive("gap_tol") } else { None },
        obj_tol: if r.get("obj_tol").is_some() { r.positive("obj_tol") } else { None },
        f_star: r.float("f_star"),
        reference_budget: r.uint("reference_budget").map(|v| v as usize),
        max_iters: r.uint("max_iters").map_or(1000, |v| v as usize),
        wall_limit_seconds: if r.get("wall_limit_seconds").is_some() { r.positive("wall_limit_seconds") } else { None },
        track_ergodic_gap: r.boolean("track_ergodic_gap").unwrap_or(false),
        record_iterates: r.boolean("record_iterates").unwrap_or(false),
    };
    if stop.obj_tol.is_some() && stop.f_star.is_none() && stop.reference_budget.is_none() {
        r.fail("obj_tol", "needs f_star or reference_budget");
    }
    if stop.gap_tol.is_some() && matches!(family, Some(Family::Lasso { .. })) {
        r.fail("gap_tol", "the lasso family has no gap evaluator; use obj_tol");
    }
    let output_dir = PathBuf::from(r.string("output_dir").unwrap_or("out"));

    for &id in &algorithms {
        // Placeholders stand in for run-time quantities.
        let alg = params.algorithm(id, params.tau0.unwrap_or(1.0), 1.0, params.gamma_g.unwrap_or(1.0));
        if let Err(e) = alg.validate() {
            let (key, message) = violation_for(id, &e);
            r.fail(&key, format!("{id}: {message}"));
        }
    }

    if !r.errors.is_empty() {
        return Err(ConfigParseError::Invalid(r.errors));
    }
    Ok(BenchConfig {
        name,
        problem: ProblemSpec {
            family: family.expect("validated"),
            p: p.unwrap(),
            q: q.unwrap(),
            noise: noise.unwrap(),
            swap,
        },
        algorithms,
        seeds,
        params,
        stop,
        output_dir,
    })
}

/// Maps a solver parameter name back to the config key that sets it.
fn violation_for(id: AlgorithmId, e: &ConfigError) -> (String, String) {
    match e {
        ConfigError::OutOfRange { param, value, range } => {
            let key = match (*param, id) {
                ("mu", _) => "mu_ls",
                ("beta0", _) => "beta",
                ("sigma", AlgorithmId::Grpda) => "dual_step",
                (p, _) => p,
            };
            (key.to_string(), format!("{key} out of {range} (got {value})"))
        }
        ConfigError::Requirement(msg) => {
            let key = KEYS.iter().find(|k| msg.split_whitespace().next() == Some(**k)).copied().unwrap_or("algorithm");
            (key.to_string(), msg.clone())
        }
    }
}

impl BenchConfig {
    /// Serializes every field explicitly; [`parse_config`] restores an equal value.
    pub fn to_toml(&self) -> String {
        let mut t = Table::new();
        let mut put = |k: &str, v: Value| {
            t.insert(k.to_string(), v);
        };
        put("name", self.name.clone().into());
        put("family", self.problem.family.name().into());
        match self.problem.family {
            Family::MatrixGame(v) => put("variant", v.as_str().into()),
            Family::Lasso { case, s, v, mu_reg } => {
                put("case", case.as_str().into());
                put("s", (s as i64).into());
                put("v", v.into());
                put("mu_reg", mu_reg.into());
            }
        }
        put("p", (self.problem.p as i64).into());
        put("q", (self.problem.q as i64).into());
        put("noise", self.problem.noise.as_str().into());
        put("swap", self.problem.swap.into());
        put("seed", Value::Array(self.seeds.iter().map(|s| Value::Integer(*s as i64)).collect()));
        put("algorithm", Value::Array(self.algorithms.iter().map(|a| Value::String(a.as_str().into())).collect()));
        let p = &self.params;
        let optional = [
            ("psi", p.psi),
            ("sigma", p.sigma),
            ("gamma_g", p.gamma_g),
            ("tau0", p.tau0),
            ("tau", p.tau),
            ("dual_step", p.dual_step),
            ("perturb_scale", p.perturb_scale),
            ("gap_tol", self.stop.gap_tol),
            ("obj_tol", self.stop.obj_tol),
            ("f_star", self.stop.f_star),
            ("wall_limit_seconds", self.stop.wall_limit_seconds),
        ];
        for (k, v) in optional {
            if let Some(v) = v {
                put(k, v.into());
            }
        }
        put("beta", p.beta.into());
        put("mu_ls", p.mu_ls.into());
        put("delta", p.delta.into());
        put("init_seed", (p.init_seed as i64).into());
        put("max_ls_trials", (p.max_ls_trials as i64).into());
        if let Some(b) = self.stop.reference_budget {
            put("reference_budget", (b as i64).into());
        }
        put("max_iters", (self.stop.max_iters as i64).into());
        put("track_ergodic_gap", self.stop.track_ergodic_gap.into());
        put("record_iterates", self.stop.record_iterates.into());
        put("output_dir", self.output_dir.display().to_string().into());
        toml::to_string(&t).expect("flat table serializes")
    }
}
