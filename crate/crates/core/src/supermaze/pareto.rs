//! Two-objective (time, energy) label-correcting search over simple paths.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{EdgeId, SupermazeGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub edges: Vec<EdgeId>,
    pub total_time: f64,
    pub total_energy: f64,
}

/// Non-dominated routes, ascending by time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParetoFrontier {
    pub routes: Vec<Route>,
}

impl ParetoFrontier {
    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    /// `(total_time, total_energy)` per route.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.routes
            .iter()
            .map(|r| (r.total_time, r.total_energy))
            .collect()
    }
}

struct Label {
    node: usize,
    time: f64,
    energy: f64,
    edges: Vec<EdgeId>,
    visited: Vec<bool>,
    alive: bool,
}

/// `a` is no worse in both objectives and strictly better in one.
fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1)
}

/// Every Pareto-optimal `(total_time, total_energy)` over simple paths from
/// `src` to `dst`. Among routes with identical totals the lexicographically
/// smallest edge-id sequence is kept.
pub fn route_pareto(graph: &SupermazeGraph, src: &str, dst: &str) -> Result<ParetoFrontier> {
    let s = graph
        .node_index(src)
        .ok_or_else(|| Error::UnknownNode(src.to_string()))?;
    let t = graph
        .node_index(dst)
        .ok_or_else(|| Error::UnknownNode(dst.to_string()))?;

    let n = graph.node_count();
    let mut arena: Vec<Label> = Vec::new();
    let mut at_node: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut queue = VecDeque::new();

    let mut visited = vec![false; n];
    visited[s] = true;
    arena.push(Label {
        node: s,
        time: 0.0,
        energy: 0.0,
        edges: Vec::new(),
        visited,
        alive: true,
    });
    at_node[s].push(0);
    queue.push_back(0);

    // Equal-cost labels are all retained; only strict domination prunes, so
    // every tie survives to the final selection.
    while let Some(current) = queue.pop_front() {
        if !arena[current].alive || arena[current].node == t {
            continue;
        }
        let node = arena[current].node;
        for &e in graph.outgoing(node) {
            let (_, v) = graph.endpoints(e);
            if arena[current].visited[v] {
                continue;
            }
            let edge = &graph.edges()[e];
            let cost = (
                arena[current].time + edge.duration,
                arena[current].energy + edge.energy_cost,
            );
            let beaten = |idx: &usize| {
                let l = &arena[*idx];
                l.alive && dominates((l.time, l.energy), cost)
            };
            if at_node[t].iter().any(beaten) || at_node[v].iter().any(beaten) {
                continue;
            }
            for &idx in &at_node[v] {
                let l = &mut arena[idx];
                if l.alive && dominates(cost, (l.time, l.energy)) {
                    l.alive = false;
                }
            }
            at_node[v].retain(|&idx| arena[idx].alive);

            let mut edges = arena[current].edges.clone();
            edges.push(e);
            let mut visited = arena[current].visited.clone();
            visited[v] = true;
            let idx = arena.len();
            arena.push(Label {
                node: v,
                time: cost.0,
                energy: cost.1,
                edges,
                visited,
                alive: true,
            });
            at_node[v].push(idx);
            queue.push_back(idx);
        }
    }

    let mut routes: Vec<Route> = at_node[t]
        .iter()
        .map(|&idx| &arena[idx])
        .filter(|l| l.alive)
        .map(|l| Route {
            edges: l.edges.clone(),
            total_time: l.time,
            total_energy: l.energy,
        })
        .collect();
    routes.sort_by(|a, b| {
        a.total_time
            .total_cmp(&b.total_time)
            .then(a.total_energy.total_cmp(&b.total_energy))
            .then_with(|| a.edges.cmp(&b.edges))
    });
    routes.dedup_by(|later, kept| {
        later.total_time == kept.total_time && later.total_energy == kept.total_energy
    });
    Ok(ParetoFrontier { routes })
}
