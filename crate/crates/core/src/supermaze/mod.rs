//! The supermaze: a directed graph of states joined by continuous-evolution
//! edges and shortcut edges, each weighted by (duration, energy cost).

mod pareto;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{fidelity, Generator, QuantumState};
use crate::shortcut::{bures_angle, qsl_check, QslReport, SynthesizedShortcut, QSL_SLACK};

pub use pareto::{route_pareto, ParetoFrontier, Route};

pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct StateNode {
    pub id: String,
    pub label: String,
    pub state: Option<QuantumState>,
    pub energy: Option<f64>,
}

impl StateNode {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            label: id.clone(),
            id,
            state: None,
            energy: None,
        }
    }

    pub fn with_state(mut self, state: QuantumState) -> Self {
        self.state = Some(state);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Continuous,
    Shortcut,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgePayload {
    None,
    Generator(Generator),
    Shortcut(Box<SynthesizedShortcut>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupermazeEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub duration: f64,
    pub energy_cost: f64,
    pub payload: EdgePayload,
}

impl SupermazeEdge {
    pub fn continuous(from: impl Into<String>, to: impl Into<String>, duration: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            kind: EdgeKind::Continuous,
            duration,
            energy_cost: 0.0,
            payload: EdgePayload::None,
        }
    }

    pub fn shortcut(
        from: impl Into<String>,
        to: impl Into<String>,
        duration: f64,
        energy_cost: f64,
    ) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            kind: EdgeKind::Shortcut,
            duration,
            energy_cost,
            payload: EdgePayload::None,
        }
    }

    pub fn with_payload(mut self, payload: EdgePayload) -> Self {
        self.payload = payload;
        self
    }
}

/// Immutable graph with edges addressed by insertion index.
#[derive(Debug, Clone, PartialEq)]
pub struct SupermazeGraph {
    nodes: Vec<StateNode>,
    edges: Vec<SupermazeEdge>,
    index: BTreeMap<String, usize>,
    // Outgoing edge ids per node, ascending.
    outgoing: Vec<Vec<EdgeId>>,
    endpoints: Vec<(usize, usize)>,
}

pub fn build_graph(nodes: Vec<StateNode>, edges: Vec<SupermazeEdge>) -> Result<SupermazeGraph> {
    let mut index = BTreeMap::new();
    for (i, node) in nodes.iter().enumerate() {
        if index.insert(node.id.clone(), i).is_some() {
            return Err(Error::DuplicateId(node.id.clone()));
        }
    }

    let mut outgoing = vec![Vec::new(); nodes.len()];
    let mut endpoints = Vec::with_capacity(edges.len());
    for (id, edge) in edges.iter().enumerate() {
        let lookup = |name: &String| {
            index.get(name).copied().ok_or_else(|| Error::DanglingEdge {
                edge: id,
                node: name.clone(),
            })
        };
        let (from, to) = (lookup(&edge.from)?, lookup(&edge.to)?);
        validate_edge(id, edge, &nodes[from])?;
        outgoing[from].push(id);
        endpoints.push((from, to));
    }

    Ok(SupermazeGraph {
        nodes,
        edges,
        index,
        outgoing,
        endpoints,
    })
}

fn validate_edge(id: EdgeId, edge: &SupermazeEdge, source: &StateNode) -> Result<()> {
    let invalid = |reason: String| Error::InvalidEdge { edge: id, reason };
    if !(edge.duration >= 0.0) || !edge.duration.is_finite() {
        return Err(invalid(format!(
            "duration {} must be finite and >= 0",
            edge.duration
        )));
    }
    if !(edge.energy_cost >= 0.0) || !edge.energy_cost.is_finite() {
        return Err(invalid(format!(
            "energy cost {} must be finite and >= 0",
            edge.energy_cost
        )));
    }
    match (&edge.kind, &edge.payload) {
        (EdgeKind::Continuous, _) if edge.energy_cost != 0.0 => {
            Err(invalid("continuous edges carry zero energy cost".into()))
        }
        (EdgeKind::Continuous, EdgePayload::Shortcut(_)) => Err(invalid(
            "continuous edge cannot carry a shortcut payload".into(),
        )),
        (EdgeKind::Shortcut, EdgePayload::Generator(_)) => Err(invalid(
            "shortcut edge cannot carry a continuous generator".into(),
        )),
        (EdgeKind::Shortcut, EdgePayload::Shortcut(s)) => match &source.state {
            Some(psi) if psi.dim() != s.generator.dim() => Err(invalid(format!(
                "shortcut dimension {} does not match source state dimension {}",
                s.generator.dim(),
                psi.dim()
            ))),
            _ => Ok(()),
        },
        _ => Ok(()),
    }
}

impl SupermazeGraph {
    pub fn nodes(&self) -> &[StateNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[SupermazeEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// `(from, to)` node indices of an edge.
    pub fn endpoints(&self, edge: EdgeId) -> (usize, usize) {
        self.endpoints[edge]
    }

    pub(crate) fn outgoing(&self, node: usize) -> &[EdgeId] {
        &self.outgoing[node]
    }

    /// A new graph with one more edge appended.
    pub fn with_edge(&self, edge: SupermazeEdge) -> Result<SupermazeGraph> {
        let mut edges = self.edges.clone();
        edges.push(edge);
        build_graph(self.nodes.clone(), edges)
    }

    /// Minimum total duration from `source` to every node (`None` if unreachable).
    pub fn min_times_from(&self, source: usize) -> Vec<Option<f64>> {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                other
                    .0
                    .total_cmp(&self.0)
                    .then_with(|| other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let mut dist: Vec<Option<f64>> = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = Some(0.0);
        heap.push(Entry(0.0, source));
        while let Some(Entry(d, u)) = heap.pop() {
            if dist[u].is_some_and(|best| d > best) {
                continue;
            }
            for &e in &self.outgoing[u] {
                let v = self.endpoints[e].1;
                let candidate = d + self.edges[e].duration;
                if dist[v].is_none_or(|best| candidate < best) {
                    dist[v] = Some(candidate);
                    heap.push(Entry(candidate, v));
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Diameter {
    Finite(f64),
    /// Some ordered pair of nodes is unreachable.
    Infinite,
}

impl Diameter {
    pub fn as_f64(self) -> f64 {
        match self {
            Diameter::Finite(d) => d,
            Diameter::Infinite => f64::INFINITY,
        }
    }
}

/// Largest minimum total duration over ordered node pairs.
pub fn diameter(graph: &SupermazeGraph) -> Diameter {
    let per_source: Vec<Option<f64>> = (0..graph.node_count())
        .into_par_iter()
        .map(|s| {
            graph
                .min_times_from(s)
                .into_iter()
                .try_fold(0.0_f64, |acc, d| d.map(|d| acc.max(d)))
        })
        .collect();
    per_source
        .into_iter()
        .try_fold(0.0_f64, |acc, d| d.map(|d| acc.max(d)))
        .map_or(Diameter::Infinite, Diameter::Finite)
}

/// A shortcut edge that undercuts the speed limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QslViolation {
    pub edge: EdgeId,
    pub from: String,
    pub to: String,
    pub declared_duration: f64,
    /// Infinite when the jump displaces the state with zero energy spread.
    pub required_duration: f64,
    pub report: QslReport,
}

/// Checks every shortcut edge that carries a synthesized shortcut and whose
/// source node carries a state. The final state is the target node's state when
/// present, otherwise the shortcut's image of the source state.
pub fn qsl_admissibility(graph: &SupermazeGraph) -> Vec<QslViolation> {
    let mut violations = Vec::new();
    for (id, edge) in graph.edges.iter().enumerate() {
        let EdgePayload::Shortcut(shortcut) = &edge.payload else {
            continue;
        };
        let (from, to) = graph.endpoints[id];
        let Some(psi) = &graph.nodes[from].state else {
            continue;
        };
        let Ok(report) = qsl_check(shortcut, psi) else {
            continue;
        };
        let final_state = match &graph.nodes[to].state {
            Some(state) if state.dim() == psi.dim() => state.clone(),
            _ => match shortcut.target.apply(psi) {
                Ok(state) => state,
                Err(_) => continue,
            },
        };
        let Ok(f) = fidelity(psi, &final_state) else {
            continue;
        };
        let angle = bures_angle(f);
        let required = if angle == 0.0 {
            0.0
        } else if report.delta_e > 0.0 {
            shortcut.hbar * angle / report.delta_e
        } else {
            f64::INFINITY
        };
        if edge.duration < required - QSL_SLACK {
            violations.push(QslViolation {
                edge: id,
                from: edge.from.clone(),
                to: edge.to.clone(),
                declared_duration: edge.duration,
                required_duration: required,
                report,
            });
        }
    }
    violations
}

/// Graphviz rendering: continuous edges solid, shortcut edges dashed.
pub fn to_dot(graph: &SupermazeGraph) -> String {
    fn quote(s: &str) -> String {
        format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
    }
    let mut out = String::from("digraph supermaze {\n");
    for node in &graph.nodes {
        let _ = writeln!(out, "  {} [label={}];", quote(&node.id), quote(&node.label));
    }
    for (id, edge) in graph.edges.iter().enumerate() {
        let style = match edge.kind {
            EdgeKind::Continuous => "solid",
            EdgeKind::Shortcut => "dashed",
        };
        let label = format!("e{id} t={} E={}", edge.duration, edge.energy_cost);
        let _ = writeln!(
            out,
            "  {} -> {} [style={style}, label={}];",
            quote(&edge.from),
            quote(&edge.to),
            quote(&label)
        );
    }
    out.push_str("}\n");
    out
}
