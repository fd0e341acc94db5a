//! Builds domain objects from a scenario document, mapping every failure to
//! the key path it came from.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{
    Experiment, GraphSection, HilbertSection, InitialDistribution, MatrixJson, RatesSection,
    Scenario, ScenarioError, StateJson, SCHEMA_VERSION,
};
use crate::error::Error;
use crate::multitime::TemporalMetric;
use crate::quantum::{CMatrix, CVector, Generator, QuantumState, TimeIndex, Tolerances};
use crate::relaxation::RateNetwork;
use crate::shortcut::{synthesize_generator, ShortcutSpec};
use crate::supermaze::{build_graph, EdgePayload, StateNode, SupermazeEdge, SupermazeGraph};

pub(crate) struct Model {
    pub hbar: f64,
    pub generators: BTreeMap<String, Generator>,
    pub states: BTreeMap<String, QuantumState>,
    pub metric: Option<TemporalMetric>,
    pub graph: Option<SupermazeGraph>,
    pub rates: Option<RateNetwork>,
}

type Checked<T> = Result<T, ScenarioError>;

fn invalid(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::validation(path, message)
}

pub(crate) fn matrix_from_json(m: &MatrixJson, path: &str) -> Checked<CMatrix> {
    let rows = m.len();
    if let Some((i, row)) = m.iter().enumerate().find(|(_, r)| r.len() != rows) {
        return Err(invalid(
            format!("{path}[{i}]"),
            format!(
                "row has {} entries, expected {rows} (matrix must be square)",
                row.len()
            ),
        ));
    }
    Ok(CMatrix::from_fn(rows, rows, |i, j| {
        Complex64::new(m[i][j][0], m[i][j][1])
    }))
}

pub(crate) fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub(crate) fn state_to_json(psi: &QuantumState) -> StateJson {
    psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

impl Model {
    pub fn build(s: &Scenario, tol: &Tolerances) -> Checked<Model> {
        if s.version != SCHEMA_VERSION {
            return Err(invalid(
                "version",
                format!(
                    "schema version must be \"{SCHEMA_VERSION}\", found \"{}\"",
                    s.version
                ),
            ));
        }
        if !(s.hbar > 0.0) || !s.hbar.is_finite() {
            return Err(invalid(
                "hbar",
                format!("must be finite and > 0, found {}", s.hbar),
            ));
        }

        let metric = match &s.times {
            Some(t) => {
                if t.speeds.len() != t.n_times {
                    return Err(invalid(
                        "times.speeds",
                        format!(
                            "has {} entries, expected n_times = {}",
                            t.speeds.len(),
                            t.n_times
                        ),
                    ));
                }
                Some(
                    TemporalMetric::new(t.speeds.clone(), t.n_space)
                        .map_err(|e| invalid("times", e))?,
                )
            }
            None => None,
        };

        let (generators, states) = match &s.hilbert {
            Some(h) => hilbert(h, metric.as_ref(), tol)?,
            None => (BTreeMap::new(), BTreeMap::new()),
        };

        let mut model = Model {
            hbar: s.hbar,
            generators,
            states,
            metric,
            graph: None,
            rates: None,
        };
        if let Some(g) = &s.graph {
            model.graph = Some(model.graph_section(g, tol)?);
        }
        if let Some(r) = &s.rates {
            model.rates = Some(rates(r)?);
        }
        model.check_experiment(s)?;
        Ok(model)
    }

    fn state(&self, name: &str, path: &str) -> Checked<&QuantumState> {
        self.states.get(name).ok_or_else(|| {
            invalid(
                path,
                format!("unknown state `{name}` (not in hilbert.states)"),
            )
        })
    }

    fn graph_section(&self, g: &GraphSection, tol: &Tolerances) -> Checked<SupermazeGraph> {
        let mut nodes = Vec::with_capacity(g.nodes.len());
        for (i, n) in g.nodes.iter().enumerate() {
            let mut node = StateNode::new(n.id.clone());
            if let Some(label) = &n.label {
                node.label = label.clone();
            }
            if let Some(name) = &n.state {
                node.state = Some(
                    self.state(name, &format!("graph.nodes[{i}].state"))?
                        .clone(),
                );
            }
            node.energy = n.energy;
            nodes.push(node);
        }

        let mut edges = Vec::with_capacity(g.edges.len());
        for (i, e) in g.edges.iter().enumerate() {
            let path = format!("graph.edges[{i}]");
            let mut edge = SupermazeEdge {
                energy_cost: e.energy_cost,
                ..SupermazeEdge::continuous(e.from.clone(), e.to.clone(), e.duration)
            };
            edge.kind = e.kind;
            match (&e.generator, &e.shortcut) {
                (Some(_), Some(_)) => {
                    return Err(invalid(
                        path,
                        "edge carries both a generator and a shortcut",
                    ));
                }
                (Some(name), None) => {
                    let h = self.generators.get(name).ok_or_else(|| {
                        invalid(
                            format!("{path}.generator"),
                            format!("unknown generator `{name}` (not in hilbert.generators)"),
                        )
                    })?;
                    edge.payload = EdgePayload::Generator(h.clone());
                }
                (None, Some(sc)) => {
                    let sc_path = format!("{path}.shortcut");
                    let target = matrix_from_json(&sc.target, &format!("{sc_path}.target"))?;
                    let spec = ShortcutSpec::with_tolerance(target, sc.duration, tol.unitary)
                        .map_err(|e| invalid(&sc_path, e))?;
                    let synthesized =
                        synthesize_generator(&spec, self.hbar).map_err(|e| invalid(&sc_path, e))?;
                    edge.payload = EdgePayload::Shortcut(Box::new(synthesized));
                }
                (None, None) => {}
            }
            edges.push(edge);
        }

        build_graph(nodes, edges).map_err(|e| match e {
            Error::DuplicateId(id) => invalid("graph.nodes", format!("duplicate node id `{id}`")),
            Error::DanglingEdge { edge, node } => {
                let end = if g.edges[edge].from == node {
                    "from"
                } else {
                    "to"
                };
                invalid(
                    format!("graph.edges[{edge}].{end}"),
                    format!("references missing node `{node}`"),
                )
            }
            Error::InvalidEdge { edge, reason } => invalid(format!("graph.edges[{edge}]"), reason),
            other => invalid("graph", other),
        })
    }

    fn check_experiment(&self, s: &Scenario) -> Checked<()> {
        let requires = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(invalid(
                    "experiment",
                    format!("experiment.{} requires {section}", s.experiment.name()),
                ))
            }
        };
        match &s.experiment {
            Experiment::Evolve {
                initial,
                origin,
                segments,
            } => {
                requires(s.hilbert.is_some(), "hilbert")?;
                self.state(initial, "experiment.initial")?;
                let n_times = self.n_times();
                if let Some(origin) = origin {
                    if let Some(m) = &self.metric {
                        if origin.len() != m.n_times() {
                            return Err(invalid(
                                "experiment.origin",
                                format!(
                                    "has {} entries, expected n_times = {}",
                                    origin.len(),
                                    m.n_times()
                                ),
                            ));
                        }
                    }
                }
                for (k, seg) in segments.iter().enumerate() {
                    let path = format!("experiment.segments[{k}]");
                    if !(seg.duration >= 0.0) || !seg.duration.is_finite() {
                        return Err(invalid(
                            path,
                            format!("duration {} must be finite and >= 0", seg.duration),
                        ));
                    }
                    if !self
                        .generators
                        .values()
                        .any(|g| g.time_index() == seg.time_index)
                    {
                        return Err(invalid(
                            path,
                            format!("no generator bound to time index {}", seg.time_index.0),
                        ));
                    }
                    if let Some(n) = n_times.filter(|&n| seg.time_index.0 >= n) {
                        return Err(invalid(
                            path,
                            format!(
                                "time index {} out of range for {n} time coordinates",
                                seg.time_index.0
                            ),
                        ));
                    }
                }
            }
            Experiment::ShortcutSynth {
                target, initial, ..
            } => {
                matrix_from_json(target, "experiment.target")?;
                if let Some(name) = initial {
                    requires(s.hilbert.is_some(), "hilbert")?;
                    self.state(name, "experiment.initial")?;
                }
            }
            Experiment::Route { src, dst } => {
                requires(self.graph.is_some(), "graph")?;
                let graph = self.graph.as_ref().expect("checked above");
                for (key, id) in [("experiment.src", src), ("experiment.dst", dst)] {
                    if graph.node_index(id).is_none() {
                        return Err(invalid(key, format!("unknown node `{id}`")));
                    }
                }
            }
            Experiment::Tc => requires(self.graph.is_some(), "graph")?,
            Experiment::Relax {
                initial,
                grid,
                epsilon,
            } => {
                requires(self.rates.is_some(), "rates")?;
                let net = self.rates.as_ref().expect("checked above");
                match initial {
                    InitialDistribution::Level(id) => {
                        net.level_index(id)
                            .map_err(|e| invalid("experiment.initial", e))?;
                    }
                    InitialDistribution::Distribution(p) if p.len() != net.dim() => {
                        return Err(invalid(
                            "experiment.initial",
                            format!("has {} entries, expected {} levels", p.len(), net.dim()),
                        ));
                    }
                    InitialDistribution::Distribution(_) => {}
                }
                let samples = grid.samples();
                if samples.is_empty() {
                    return Err(invalid("experiment.grid", "time grid is empty"));
                }
                if let Some(k) = samples.windows(2).position(|w| !(w[1] > w[0])) {
                    return Err(invalid(
                        "experiment.grid",
                        format!("not ascending at sample {}", k + 1),
                    ));
                }
                if !(samples[0] >= 0.0) {
                    return Err(invalid("experiment.grid", "times must be >= 0"));
                }
                if let Some(eps) = epsilon {
                    check_epsilon(*eps)?;
                }
            }
            Experiment::Mpemba { a, b, epsilon } => {
                requires(self.rates.is_some(), "rates")?;
                let net = self.rates.as_ref().expect("checked above");
                let energy = |key: &str, id: &str| {
                    net.level_index(id)
                        .map(|i| net.levels()[i].energy)
                        .map_err(|e| invalid(key, e))
                };
                let (ea, eb) = (energy("experiment.a", a)?, energy("experiment.b", b)?);
                if !(ea > eb) {
                    return Err(invalid(
                        "experiment",
                        format!(
                            "preparation `{a}` (energy {ea}) must lie above `{b}` (energy {eb})"
                        ),
                    ));
                }
                check_epsilon(*epsilon)?;
            }
            Experiment::Descartes { k, .. } => {
                if let Some(i) = k.iter().position(|x| !x.is_finite()) {
                    return Err(invalid(
                        format!("experiment.k[{i}]"),
                        "curvature must be finite",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Number of time coordinates: the `times` section if present, otherwise
    /// one past the largest bound time index.
    pub fn n_times(&self) -> Option<usize> {
        match &self.metric {
            Some(m) => Some(m.n_times()),
            None => self.generators.values().map(|g| g.time_index().0 + 1).max(),
        }
    }
}

fn check_epsilon(eps: f64) -> Checked<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(invalid(
            "experiment.epsilon",
            format!("must lie in (0, 1), found {eps}"),
        ))
    }
}

type HilbertParts = (BTreeMap<String, Generator>, BTreeMap<String, QuantumState>);

fn hilbert(
    h: &HilbertSection,
    metric: Option<&TemporalMetric>,
    tol: &Tolerances,
) -> Checked<HilbertParts> {
    if h.dim < 2 {
        return Err(invalid(
            "hilbert.dim",
            format!("must be at least 2, found {}", h.dim),
        ));
    }
    let mut generators = BTreeMap::new();
    let mut bound: BTreeMap<TimeIndex, &str> = BTreeMap::new();
    for (name, g) in &h.generators {
        let path = format!("hilbert.generators.{name}");
        let matrix = matrix_from_json(&g.matrix, &format!("{path}.matrix"))?;
        if matrix.nrows() != h.dim {
            return Err(invalid(
                format!("{path}.matrix"),
                format!("is {0}x{0}, expected {1}x{1}", matrix.nrows(), h.dim),
            ));
        }
        let index = TimeIndex(g.time_index);
        if let Some(n) = metric.map(|m| m.n_times()).filter(|&n| g.time_index >= n) {
            return Err(invalid(
                format!("{path}.time_index"),
                format!("{} out of range for {n} time coordinates", g.time_index),
            ));
        }
        if let Some(other) = bound.insert(index, name) {
            return Err(invalid(
                format!("{path}.time_index"),
                format!("time index {} is already bound to `{other}`", g.time_index),
            ));
        }
        let generator = Generator::with_tolerance(matrix, index, name.clone(), tol.hermitian)
            .map_err(|e| match e {
                Error::NonHermitianInput { deviation, .. } => invalid(
                    format!("{path}.matrix"),
                    format!(
                        "matrix `{name}` is not Hermitian (max |M - M^dagger| = {deviation:e})"
                    ),
                ),
                other => invalid(format!("{path}.matrix"), other),
            })?;
        generators.insert(name.clone(), generator);
    }

    let mut states = BTreeMap::new();
    for (name, amplitudes) in &h.states {
        let path = format!("hilbert.states.{name}");
        if amplitudes.len() != h.dim {
            return Err(invalid(
                path,
                format!(
                    "has {} amplitudes, expected dim = {}",
                    amplitudes.len(),
                    h.dim
                ),
            ));
        }
        let v = CVector::from_iterator(
            h.dim,
            amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)),
        );
        let psi = QuantumState::from_vector(v, tol.norm).map_err(|e| invalid(&path, e))?;
        states.insert(name.clone(), psi);
    }
    Ok((generators, states))
}

fn rates(r: &RatesSection) -> Checked<RateNetwork> {
    let mut net =
        RateNetwork::new::<&str>(r.levels.clone(), &[]).map_err(|e| invalid("rates.levels", e))?;
    let mut seen = std::collections::BTreeSet::new();
    for (i, rate) in r.rates.iter().enumerate() {
        let path = format!("rates.rates[{i}]");
        if !seen.insert((rate.from.as_str(), rate.to.as_str())) {
            return Err(invalid(
                path,
                format!("duplicate rate {} -> {}", rate.from, rate.to),
            ));
        }
        net = net
            .with_rate(&rate.from, &rate.to, rate.rate)
            .map_err(|e| invalid(path, e))?;
    }
    Ok(net)
}
