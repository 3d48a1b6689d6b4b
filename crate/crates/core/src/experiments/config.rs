//! Experiment configuration: a sectioned key/value file (TOML) mirroring the
//! study parameters, with `key=value` overrides applied after parsing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::{Graphon, ScalarField};
use crate::sampling::{SampleMode, SparsityRule};

/// Fixed default seed so runs without an explicit seed are reproducible.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GraphonSpec {
    /// One of `constant`, `product`, `block`, `grid`.
    pub family: String,
    /// Constant value or product coefficient.
    pub c: f64,
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Path to a whitespace/comma-separated grid table (for `grid`).
    pub path: Option<String>,
}

impl Default for GraphonSpec {
    fn default() -> Self {
        GraphonSpec {
            family: "constant".into(),
            c: 1.0,
            breakpoints: Vec::new(),
            values: Vec::new(),
            path: None,
        }
    }
}

impl GraphonSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Graphon> {
        match self.family.as_str() {
            "constant" => Graphon::constant(self.c),
            "product" => Graphon::product(self.c),
            "block" => Graphon::block_model(self.breakpoints.clone(), self.values.clone()),
            "grid" => {
                if let Some(path) = &self.path {
                    let full = base_dir.join(path);
                    let text = std::fs::read_to_string(&full)
                        .map_err(|e| Error::io(full.display().to_string(), e))?;
                    Graphon::grid_from_table_str(&text)
                } else if !self.values.is_empty() {
                    Graphon::sampled_grid(self.values.clone())
                } else {
                    Err(Error::config("graphon.path", "grid family needs a table"))
                }
            }
            other => Err(Error::config(
                "graphon.family",
                format!("unknown family `{other}`"),
            )),
        }
        .map_err(|e| Error::config("graphon", e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    /// One of `constant`, `affine`, `step`, `grid`.
    pub family: String,
    pub c: f64,
    pub intercept: f64,
    pub slope: f64,
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub path: Option<String>,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            family: "affine".into(),
            c: 0.0,
            intercept: 0.0,
            slope: 1.0,
            breakpoints: Vec::new(),
            values: Vec::new(),
            path: None,
        }
    }
}

impl FieldSpec {
    pub fn build(&self, base_dir: &Path) -> Result<ScalarField> {
        match self.family.as_str() {
            "constant" => ScalarField::constant(self.c),
            "affine" => ScalarField::affine(self.intercept, self.slope),
            "step" => ScalarField::step(self.breakpoints.clone(), self.values.clone()),
            "grid" => {
                if let Some(path) = &self.path {
                    let full = base_dir.join(path);
                    let text = std::fs::read_to_string(&full)
                        .map_err(|e| Error::io(full.display().to_string(), e))?;
                    ScalarField::grid_from_table_str(&text)
                } else if !self.values.is_empty() {
                    ScalarField::sampled_grid(self.values.clone())
                } else {
                    Err(Error::config("initial.path", "grid family needs a table"))
                }
            }
            other => Err(Error::config(
                "initial.family",
                format!("unknown family `{other}`"),
            )),
        }
        .map_err(|e| Error::config("initial", e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunSpec {
    pub p: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// `random` or `deterministic`.
    pub node_mode: String,
    /// `cell_average` or `pointwise`.
    pub sampling_mode: String,
    /// Sample self-edges (the diagonal); disabling is a sensitivity switch.
    pub loops: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            p: 2.0,
            n_grid: vec![64, 128, 256],
            trials: 50,
            seed: DEFAULT_SEED,
            node_mode: "random".into(),
            sampling_mode: "cell_average".into(),
            loops: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SparsitySpec {
    /// `constant` or `power_law`.
    pub kind: String,
    pub q: f64,
    pub c: f64,
}

impl Default for SparsitySpec {
    fn default() -> Self {
        SparsitySpec {
            kind: "constant".into(),
            q: 1.0,
            c: 0.0,
        }
    }
}

impl SparsitySpec {
    pub fn rule(&self) -> Result<SparsityRule> {
        let rule = match self.kind.as_str() {
            "constant" => SparsityRule::Constant(self.q),
            "power_law" => SparsityRule::PowerLaw { c: self.c },
            other => {
                return Err(Error::config(
                    "sparsity.kind",
                    format!("unknown kind `{other}`"),
                ))
            }
        };
        rule.validate()
            .map_err(|e| Error::config("sparsity", e.to_string()))?;
        Ok(rule)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    pub t_end: f64,
    pub tau: f64,
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            t_end: 1.0,
            tau: 1e-3,
        }
    }
}

impl TimeSpec {
    /// Uniform grid with step closest to `tau` that divides `t_end` evenly.
    pub fn grid(&self) -> Result<crate::dynamics::TimeGrid> {
        let steps = (self.t_end / self.tau).round().max(1.0) as usize;
        crate::dynamics::TimeGrid::uniform(self.t_end, steps)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSpec {
    /// `auto`, `analytic`, or `projected`. `auto` picks the analytic solution
    /// when it applies (p = 2, constant kernel) and the fine projected scheme
    /// otherwise.
    pub mode: String,
    pub n_mult: usize,
    pub tau_div: usize,
}

impl Default for ReferenceSpec {
    fn default() -> Self {
        ReferenceSpec {
            mode: "auto".into(),
            n_mult: 8,
            tau_div: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StudySpec {
    /// Evaluation time for the deviation study.
    pub t_star: f64,
    /// Target tail probabilities; per-n epsilon values are derived from them.
    pub epsilon_tails: Vec<f64>,
    /// `t` in the max-spacing bound `t log n / n`.
    pub spacing_t: f64,
    /// Mesh exponents `k` (cells `2^k`) for the projection-rate study.
    pub mesh_exponents: Vec<u32>,
    /// Also report errors in C(0,T; L^2).
    pub also_l2: bool,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            t_star: 0.0,
            epsilon_tails: vec![0.8, 0.5, 0.2, 0.05, 0.01],
            spacing_t: 2.0,
            mesh_exponents: (3..=10).collect(),
            also_l2: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSpec {
    pub beta: f64,
    pub t_tail: f64,
    pub theta: f64,
}

impl Default for BoundSpec {
    fn default() -> Self {
        BoundSpec {
            beta: 1.0,
            t_tail: 1.0,
            theta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub graphon: GraphonSpec,
    pub initial: FieldSpec,
    pub run: RunSpec,
    pub sparsity: SparsitySpec,
    pub time: TimeSpec,
    pub reference: ReferenceSpec,
    pub study: StudySpec,
    pub bound: BoundSpec,
    pub output: OutputSpec,
    /// Directory grid-table paths resolve against (set when loading a file).
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut doc: toml::Value = toml::from_str(&text)
            .map_err(|e| Error::config("config", e.to_string()))?;
        for (key, value) in overrides {
            apply_override(&mut doc, key, value)?;
        }
        let mut cfg: ExperimentConfig = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("config", e.to_string()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn base_dir(&self) -> PathBuf {
        self.base_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn build_graphon(&self) -> Result<Graphon> {
        self.graphon.build(&self.base_dir())
    }

    pub fn build_initial(&self) -> Result<ScalarField> {
        self.initial.build(&self.base_dir())
    }

    pub fn sample_mode(&self) -> Result<SampleMode> {
        match self.run.sampling_mode.as_str() {
            "cell_average" => Ok(SampleMode::CellAverage),
            "pointwise" => Ok(SampleMode::Pointwise),
            other => Err(Error::config(
                "run.sampling_mode",
                format!("unknown mode `{other}`"),
            )),
        }
    }

    pub fn random_nodes(&self) -> Result<bool> {
        match self.run.node_mode.as_str() {
            "random" => Ok(true),
            "deterministic" => Ok(false),
            other => Err(Error::config(
                "run.node_mode",
                format!("unknown mode `{other}`"),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.run.p > 1.0) {
            return Err(Error::config("run.p", "p must be > 1"));
        }
        if self.run.n_grid.is_empty() {
            return Err(Error::config("run.n_grid", "must be nonempty"));
        }
        if self.run.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("run.n_grid", "must be strictly increasing"));
        }
        if self.run.n_grid[0] == 0 {
            return Err(Error::config("run.n_grid", "entries must be >= 1"));
        }
        if self.run.trials == 0 {
            return Err(Error::config("run.trials", "must be >= 1"));
        }
        if !(self.time.t_end > 0.0) {
            return Err(Error::config("time.t_end", "must be positive"));
        }
        if !(self.time.tau > 0.0 && self.time.tau <= self.time.t_end) {
            return Err(Error::config("time.tau", "must lie in ]0, t_end]"));
        }
        if self.reference.n_mult == 0 || self.reference.tau_div == 0 {
            return Err(Error::config("reference", "multipliers must be >= 1"));
        }
        if !matches!(self.reference.mode.as_str(), "auto" | "analytic" | "projected") {
            return Err(Error::config(
                "reference.mode",
                format!("unknown mode `{}`", self.reference.mode),
            ));
        }
        if self
            .study
            .epsilon_tails
            .iter()
            .any(|t| !(*t > 0.0 && *t < 1.0))
        {
            return Err(Error::config(
                "study.epsilon_tails",
                "targets must lie in ]0,1[",
            ));
        }
        if !(self.study.t_star >= 0.0 && self.study.t_star <= self.time.t_end) {
            return Err(Error::config("study.t_star", "must lie in [0, t_end]"));
        }
        if self.study.mesh_exponents.is_empty()
            || self.study.mesh_exponents.iter().any(|&k| k == 0 || k > 20)
        {
            return Err(Error::config(
                "study.mesh_exponents",
                "exponents must lie in 1..=20",
            ));
        }
        self.sparsity.rule()?;
        self.sample_mode()?;
        self.random_nodes()?;
        Ok(())
    }

    /// Config echo for the run manifest.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }
}

/// Apply one `section.key=value` override onto the parsed document. The value
/// is parsed as a TOML literal, falling back to a string.
fn apply_override(doc: &mut toml::Value, key: &str, raw: &str) -> Result<()> {
    let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty path segment"));
    }
    let mut node = doc;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::config(*part, "not a table"))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::config(key, "not a table"))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
