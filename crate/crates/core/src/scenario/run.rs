//! Experiment dispatch and sweep expansion.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::export;
use super::model::{matrix_from_json, matrix_to_json, state_to_json, Model};
use super::{Experiment, InitialDistribution, MatrixJson, Scenario, ScenarioError, StateJson};
use crate::descartes::{apollonian_generate, fourth_curvature, CircleQuadruple};
use crate::error::Error;
use crate::multitime::{
    classify_interval, consistency_residual, evolve_path, interval, ConsistencyReport,
    IntervalKind, MultiTimePath, TimeVector,
};
use crate::quantum::{fidelity, Generator, Tolerances};
use crate::relaxation::{
    evolve_populations, mpemba_compare, time_to_equilibrium_on_grid, MpembaVerdict,
};
use crate::shortcut::{qsl_check, synthesize_generator, QslReport, ShortcutSpec};
use crate::supermaze::{
    diameter, qsl_admissibility, route_pareto, to_dot, Diameter, ParetoFrontier, QslViolation,
};
use crate::topology::{tc_estimate, TcReport};

/// Threshold for calling an interval null.
const INTERVAL_NULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub tolerances: Tolerances,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("experiment {experiment}: {source}")]
    Model {
        experiment: &'static str,
        #[source]
        source: Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub initial: String,
    pub final_state: StateJson,
    pub final_time: Vec<f64>,
    pub fidelity_to_initial: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval_kind: Option<IntervalKind>,
    pub consistency: Vec<ConsistencyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortcutReport {
    pub generator: MatrixJson,
    pub spectrum: Vec<f64>,
    pub eigenphases: Vec<f64>,
    pub spectral_cost: f64,
    pub bandwidth_cost: f64,
    pub duration: f64,
    pub hbar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qsl: Option<QslReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<StateJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    pub src: String,
    pub dst: String,
    pub frontier: ParetoFrontier,
    pub diameter: Diameter,
    pub qsl_violations: Vec<QslViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcResult {
    #[serde(flatten)]
    pub report: TcReport,
    pub diameter: Diameter,
    pub qsl_violations: Vec<QslViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxReport {
    pub levels: Vec<String>,
    pub initial: Vec<f64>,
    pub final_populations: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Equilibration time located on the requested grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescartesReport {
    pub k: [f64; 3],
    /// Larger root first.
    pub roots: [f64; 2],
    pub depth: usize,
    pub quadruples: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentResult {
    Evolve(EvolveReport),
    ShortcutSynth(ShortcutReport),
    Route(RouteReport),
    Tc(TcResult),
    Relax(RelaxReport),
    Mpemba(MpembaVerdict),
    Descartes(DescartesReport),
}

impl ExperimentResult {
    /// Count of speed-limit violations found by the experiment.
    pub fn qsl_violation_count(&self) -> usize {
        match self {
            ExperimentResult::Route(r) => r.qsl_violations.len(),
            ExperimentResult::Tc(r) => r.qsl_violations.len(),
            ExperimentResult::ShortcutSynth(r) => {
                r.qsl.as_ref().map_or(0, |q| usize::from(!q.satisfied))
            }
            _ => 0,
        }
    }
}

/// One experiment's result and the files it renders to.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub result: ExperimentResult,
    /// File name -> contents.
    pub files: BTreeMap<String, String>,
}

/// Everything a scenario produces, sweep points included.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub runs: Vec<RunOutput>,
    pub files: BTreeMap<String, String>,
}

impl Outputs {
    pub fn qsl_violation_count(&self) -> usize {
        self.runs
            .iter()
            .map(|r| r.result.qsl_violation_count())
            .sum()
    }

    pub fn write_to(&self, dir: impl AsRef<Path>) -> io::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Runs the scenario's experiment once, ignoring any sweep block.
pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<RunOutput, RunError> {
    let model = Model::build(scenario, &options.tolerances)?;
    let name = scenario.experiment.name();
    let model_err = |source: Error| RunError::Model {
        experiment: name,
        source,
    };
    let mut files = BTreeMap::new();

    let result = match &scenario.experiment {
        Experiment::Evolve {
            initial,
            origin,
            segments,
        } => {
            let n_times = model.n_times().unwrap_or(0);
            let origin = TimeVector(origin.clone().unwrap_or_else(|| vec![0.0; n_times]));
            let path = MultiTimePath::new(origin.clone(), segments.clone()).map_err(model_err)?;
            let generators: Vec<Generator> = model.generators.values().cloned().collect();
            let psi = &model.states[initial];
            let out = evolve_path(psi, &path, &generators, model.hbar).map_err(model_err)?;
            let final_time = path.final_time();

            let (ds2, kind) = match &model.metric {
                Some(metric) => {
                    let dt = TimeVector(
                        final_time
                            .0
                            .iter()
                            .zip(&origin.0)
                            .map(|(a, b)| a - b)
                            .collect(),
                    );
                    let ds2 =
                        interval(metric, &dt, &vec![0.0; metric.n_space()]).map_err(model_err)?;
                    (Some(ds2), Some(classify_interval(ds2, INTERVAL_NULL_TOL)))
                }
                None => (None, None),
            };
            let mut consistency = Vec::new();
            for (i, a) in generators.iter().enumerate() {
                for b in &generators[i + 1..] {
                    consistency.push(consistency_residual(a, b).map_err(model_err)?);
                }
            }
            ExperimentResult::Evolve(EvolveReport {
                initial: initial.clone(),
                final_state: state_to_json(&out),
                final_time: final_time.0,
                fidelity_to_initial: fidelity(psi, &out).map_err(model_err)?,
                interval: ds2,
                interval_kind: kind,
                consistency,
            })
        }

        Experiment::ShortcutSynth {
            target,
            duration,
            initial,
        } => {
            let target = matrix_from_json(target, "experiment.target")?;
            let spec = ShortcutSpec::with_tolerance(target, *duration, options.tolerances.unitary)
                .map_err(model_err)?;
            let shortcut = synthesize_generator(&spec, model.hbar).map_err(model_err)?;
            let (qsl, final_state) = match initial {
                Some(name) => {
                    let psi = &model.states[name];
                    let report = qsl_check(&shortcut, psi).map_err(model_err)?;
                    let out = shortcut.target.apply(psi).map_err(model_err)?;
                    (Some(report), Some(state_to_json(&out)))
                }
                None => (None, None),
            };
            ExperimentResult::ShortcutSynth(ShortcutReport {
                generator: matrix_to_json(shortcut.generator.matrix()),
                spectrum: shortcut.generator.spectrum(),
                eigenphases: shortcut.eigenphases.clone(),
                spectral_cost: shortcut.spectral_cost,
                bandwidth_cost: shortcut.bandwidth_cost,
                duration: shortcut.duration,
                hbar: shortcut.hbar,
                qsl,
                final_state,
            })
        }

        Experiment::Route { src, dst } => {
            let graph = model.graph.as_ref().expect("validated");
            let frontier = route_pareto(graph, src, dst).map_err(model_err)?;
            files.insert("frontier.csv".into(), export::frontier_csv(&frontier));
            files.insert("graph.dot".into(), to_dot(graph));
            ExperimentResult::Route(RouteReport {
                src: src.clone(),
                dst: dst.clone(),
                frontier,
                diameter: diameter(graph),
                qsl_violations: qsl_admissibility(graph),
            })
        }

        Experiment::Tc => {
            let graph = model.graph.as_ref().expect("validated");
            files.insert("graph.dot".into(), to_dot(graph));
            ExperimentResult::Tc(TcResult {
                report: tc_estimate(graph),
                diameter: diameter(graph),
                qsl_violations: qsl_admissibility(graph),
            })
        }

        Experiment::Relax {
            initial,
            grid,
            epsilon,
        } => {
            let net = model.rates.as_ref().expect("validated");
            let p0 = match initial {
                InitialDistribution::Level(id) => net.pure(id).map_err(model_err)?,
                InitialDistribution::Distribution(p) => p.clone(),
            };
            let times = grid.samples();
            let curve = evolve_populations(net, &p0, &times).map_err(model_err)?;
            let (stationary, tau) = match epsilon {
                Some(eps) => {
                    let pi = net.stationary_distribution().map_err(model_err)?;
                    let tau = match time_to_equilibrium_on_grid(net, &p0, *eps, &times) {
                        Ok(t) => Some(t),
                        Err(Error::NotReachedWithinGrid { .. }) => None,
                        Err(e) => return Err(model_err(e)),
                    };
                    (Some(pi), tau)
                }
                None => (net.stationary_distribution().ok(), None),
            };
            let ids: Vec<String> = net.levels().iter().map(|l| l.id.clone()).collect();
            files.insert("curve.csv".into(), export::curve_csv(&ids, &curve));
            ExperimentResult::Relax(RelaxReport {
                levels: ids,
                initial: p0,
                final_populations: curve.populations.last().cloned().unwrap_or_default(),
                stationary,
                epsilon: *epsilon,
                tau,
            })
        }

        Experiment::Mpemba { a, b, epsilon } => {
            let net = model.rates.as_ref().expect("validated");
            ExperimentResult::Mpemba(mpemba_compare(net, a, b, *epsilon).map_err(model_err)?)
        }

        Experiment::Descartes { k, depth } => {
            let (hi, lo) = fourth_curvature(k[0], k[1], k[2]).map_err(model_err)?;
            let root = CircleQuadruple([k[0], k[1], k[2], hi]);
            let packing = apollonian_generate(root, *depth).map_err(model_err)?;
            files.insert("packing.csv".into(), export::packing_csv(&packing));
            ExperimentResult::Descartes(DescartesReport {
                k: *k,
                roots: [hi, lo],
                depth: *depth,
                quadruples: packing.len(),
                max_residual: packing
                    .iter()
                    .map(|g| g.curvatures.residual())
                    .fold(0.0, f64::max),
            })
        }
    };

    files.insert("result.json".into(), to_json(&result));
    Ok(RunOutput { result, files })
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), String> {
    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().ok_or("empty path")?;
    let mut node = doc;
    for key in parents {
        node = match node {
            Value::Object(map) => map.get_mut(*key),
            Value::Array(items) => key.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| format!("`{key}` not found"))?;
    }
    match node {
        Value::Object(map) => {
            map.insert((*last).to_string(), value);
            Ok(())
        }
        Value::Array(items) => {
            let slot = last
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(|| format!("`{last}` not found"))?;
            *slot = value;
            Ok(())
        }
        _ => Err(format!("`{last}` has no parent object or array")),
    }
}

impl Scenario {
    /// Sweep points as `(suffix, scenario)`; a single unsuffixed entry when
    /// there is no sweep block.
    pub fn expand_sweep(
        &self,
        tolerances: &Tolerances,
    ) -> Result<Vec<(String, Scenario)>, ScenarioError> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![(String::new(), self.clone())]);
        };
        if sweep.values.is_empty() {
            return Err(ScenarioError::validation(
                "sweep.values",
                "must not be empty",
            ));
        }
        if sweep.path.split('.').next() == Some("sweep") || sweep.path == "version" {
            return Err(ScenarioError::validation(
                "sweep.path",
                format!("cannot sweep `{}`", sweep.path),
            ));
        }
        let mut base = self.clone();
        base.sweep = None;
        let base = serde_json::to_value(&base).expect("scenario serializes");
        let width = sweep
            .values
            .len()
            .saturating_sub(1)
            .to_string()
            .len()
            .max(3);

        let mut points = Vec::with_capacity(sweep.values.len());
        for (i, value) in sweep.values.iter().enumerate() {
            let key = format!("sweep.values[{i}]");
            let mut doc = base.clone();
            set_path(&mut doc, &sweep.path, value.clone())
                .map_err(|m| ScenarioError::validation("sweep.path", m))?;
            let point: Scenario =
                serde_json::from_value(doc).map_err(|e| ScenarioError::validation(&key, e))?;
            point.validate(tolerances).map_err(|e| match e {
                ScenarioError::Validation { path, message } => {
                    ScenarioError::validation(&key, format!("{path}: {message}"))
                }
                other => other,
            })?;
            points.push((format!("{i:0width$}"), point));
        }
        Ok(points)
    }
}

fn suffixed(name: &str, suffix: &str) -> String {
    if suffix.is_empty() {
        return name.to_string();
    }
    match name.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{name}_{suffix}"),
    }
}

/// Runs the scenario, expanding a sweep block into independent runs executed
/// in parallel. Sweep outputs carry a zero-padded suffix and are listed in
/// `index.json`.
pub fn execute(scenario: &Scenario, options: &RunOptions) -> Result<Outputs, RunError> {
    let points = scenario.expand_sweep(&options.tolerances)?;
    let runs: Vec<RunOutput> = points
        .par_iter()
        .map(|(_, point)| run(point, options))
        .collect::<Result<_, _>>()?;

    let mut files = BTreeMap::new();
    let mut index = Vec::new();
    for ((suffix, _), out) in points.iter().zip(&runs) {
        let names: Vec<String> = out.files.keys().map(|n| suffixed(n, suffix)).collect();
        for (name, contents) in names.iter().zip(out.files.values()) {
            files.insert(name.clone(), contents.clone());
        }
        index.push((suffix.clone(), names));
    }

    if let Some(sweep) = &scenario.sweep {
        let entries: Vec<Value> = index
            .into_iter()
            .zip(&sweep.values)
            .map(|((suffix, names), value)| json!({"suffix": suffix, "value": value, "files": names}))
            .collect();
        let doc = json!({
            "experiment": scenario.experiment.name(),
            "seed": scenario.seed,
            "sweep_path": sweep.path,
            "runs": entries,
        });
        files.insert("index.json".into(), to_json(&doc));
    }
    Ok(Outputs { runs, files })
}
