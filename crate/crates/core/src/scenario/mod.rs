//! Scenario files: JSON schema v1, validation, and experiment execution.
//!
//! One file describes one experiment, plus the optional sections it needs:
//!
//! ```json
//! {
//!   "version": "1",
//!   "hbar": 1.0,
//!   "experiment": { "kind": "descartes", "k": [1.0, 1.0, 1.0], "depth": 2 }
//! }
//! ```
//!
//! Complex matrices are nested arrays of `[re, im]` pairs; states are arrays of
//! `[re, im]` pairs.

mod export;
mod model;
mod run;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multitime::TrajectorySegment;
use crate::quantum::Tolerances;
use crate::relaxation::Level;
use crate::supermaze::EdgeKind;

pub use run::{
    execute, run, DescartesReport, EvolveReport, ExperimentResult, Outputs, RelaxReport,
    RouteReport, RunError, RunOptions, RunOutput, ShortcutReport, TcResult,
};

pub const SCHEMA_VERSION: &str = "1";

pub type MatrixJson = Vec<Vec<[f64; 2]>>;
pub type StateJson = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: String,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hilbert: Option<HilbertSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<TimesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesSection>,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

fn default_hbar() -> f64 {
    crate::quantum::DEFAULT_HBAR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertSection {
    pub dim: usize,
    #[serde(default)]
    pub generators: BTreeMap<String, GeneratorJson>,
    #[serde(default)]
    pub states: BTreeMap<String, StateJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorJson {
    pub time_index: usize,
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSection {
    pub n_times: usize,
    pub speeds: Vec<f64>,
    #[serde(default)]
    pub n_space: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub nodes: Vec<NodeJson>,
    #[serde(default)]
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeJson {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Name of a state in `hilbert.states`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub duration: f64,
    #[serde(default)]
    pub energy_cost: f64,
    /// Name of a generator in `hilbert.generators` (continuous edges).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortcut: Option<ShortcutJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShortcutJson {
    pub target: MatrixJson,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub levels: Vec<Level>,
    #[serde(default)]
    pub rates: Vec<RateJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateJson {
    pub from: String,
    pub to: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDistribution {
    Level(String),
    Distribution(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Explicit(Vec<f64>),
    Uniform { t_end: f64, samples: usize },
}

impl TimeGrid {
    pub fn samples(&self) -> Vec<f64> {
        match self {
            TimeGrid::Explicit(times) => times.clone(),
            TimeGrid::Uniform { t_end, samples } => match samples {
                0 => Vec::new(),
                1 => vec![0.0],
                n => (0..*n)
                    .map(|k| t_end * k as f64 / (*n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Evolve {
        initial: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        origin: Option<Vec<f64>>,
        segments: Vec<TrajectorySegment>,
    },
    ShortcutSynth {
        target: MatrixJson,
        duration: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<String>,
    },
    Route {
        src: String,
        dst: String,
    },
    Tc,
    Relax {
        initial: InitialDistribution,
        grid: TimeGrid,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    Mpemba {
        a: String,
        b: String,
        epsilon: f64,
    },
    Descartes {
        k: [f64; 3],
        #[serde(default)]
        depth: usize,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Evolve { .. } => "evolve",
            Experiment::ShortcutSynth { .. } => "shortcut_synth",
            Experiment::Route { .. } => "route",
            Experiment::Tc => "tc",
            Experiment::Relax { .. } => "relax",
            Experiment::Mpemba { .. } => "mpemba",
            Experiment::Descartes { .. } => "descartes",
        }
    }
}

/// Parameter sweep: `path` is a dotted key path into the scenario document
/// (array positions as numbers), set to each of `values` in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub path: String,
    pub values: Vec<serde_json::Value>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

impl ScenarioError {
    pub(crate) fn validation(path: impl Into<String>, message: impl ToString) -> Self {
        ScenarioError::Validation {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl From<serde_json::Error> for ScenarioError {
    fn from(e: serde_json::Error) -> Self {
        ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str, tolerances: &Tolerances) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(text)?;
    scenario.validate(tolerances)?;
    Ok(scenario)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    load_scenario_with(path, &Tolerances::default())
}

pub fn load_scenario_with(
    path: impl AsRef<Path>,
    tolerances: &Tolerances,
) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, tolerances)
}

impl Scenario {
    /// Checks every section's invariants; errors carry the offending key path.
    pub fn validate(&self, tolerances: &Tolerances) -> Result<(), ScenarioError> {
        model::Model::build(self, tolerances).map(|_| ())
    }

    /// Canonical JSON: fixed key order, shortest round-trip floats.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
