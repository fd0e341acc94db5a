//! Topological-complexity estimate of a supermaze's underlying undirected
//! graph, read as a 1-complex.
//!
//! A connected graph is homotopy equivalent to a wedge of `b1` circles, which
//! gives TC = 1 for trees, 2 for a circle, and 3 once `b1 >= 2`.

use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::supermaze::SupermazeGraph;

pub const TC_METHOD: &str = "graph-homotopy-classification";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTc {
    pub nodes: Vec<String>,
    pub edges: usize,
    pub b1: usize,
    pub tc: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TcReport {
    pub b0: usize,
    pub b1: usize,
    /// Present only for connected, non-empty graphs.
    pub tc: Option<u8>,
    pub components: Vec<ComponentTc>,
    /// False when start and goal may lie in different components.
    pub navigable: bool,
    pub strongly_connected: bool,
    pub method: String,
}

pub fn tc_from_b1(b1: usize) -> u8 {
    match b1 {
        0 => 1,
        1 => 2,
        _ => 3,
    }
}

/// Component label per node, numbered by first appearance.
fn component_labels(graph: &SupermazeGraph) -> (usize, Vec<usize>) {
    let n = graph.node_count();
    let mut uf = UnionFind::<usize>::new(n);
    for e in 0..graph.edge_count() {
        let (u, v) = graph.endpoints(e);
        uf.union(u, v);
    }
    let mut relabel = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut count = 0;
    for node in 0..n {
        let root = uf.find(node);
        if relabel[root] == usize::MAX {
            relabel[root] = count;
            count += 1;
        }
        labels.push(relabel[root]);
    }
    (count, labels)
}

/// `(b0, b1)` of the symmetrized multigraph. Self-loops and parallel edges
/// each contribute a cycle.
pub fn betti_numbers(graph: &SupermazeGraph) -> (usize, usize) {
    let (b0, _) = component_labels(graph);
    (b0, graph.edge_count() + b0 - graph.node_count())
}

pub fn is_strongly_connected(graph: &SupermazeGraph) -> bool {
    let mut g = DiGraph::<(), ()>::with_capacity(graph.node_count(), graph.edge_count());
    let ids: Vec<_> = (0..graph.node_count()).map(|_| g.add_node(())).collect();
    for e in 0..graph.edge_count() {
        let (u, v) = graph.endpoints(e);
        g.add_edge(ids[u], ids[v], ());
    }
    kosaraju_scc(&g).len() <= 1
}

pub fn tc_estimate(graph: &SupermazeGraph) -> TcReport {
    let (b0, labels) = component_labels(graph);
    let mut components: Vec<ComponentTc> = (0..b0)
        .map(|_| ComponentTc {
            nodes: Vec::new(),
            edges: 0,
            b1: 0,
            tc: 1,
        })
        .collect();
    for (node, &c) in labels.iter().enumerate() {
        components[c].nodes.push(graph.nodes()[node].id.clone());
    }
    for e in 0..graph.edge_count() {
        components[labels[graph.endpoints(e).0]].edges += 1;
    }
    for c in &mut components {
        c.b1 = c.edges + 1 - c.nodes.len();
        c.tc = tc_from_b1(c.b1);
    }
    let b1 = components.iter().map(|c| c.b1).sum();

    TcReport {
        b0,
        b1,
        tc: (b0 == 1).then(|| components[0].tc),
        navigable: b0 <= 1,
        strongly_connected: is_strongly_connected(graph),
        components,
        method: TC_METHOD.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supermaze::{build_graph, StateNode, SupermazeEdge};

    fn graph(n: usize, pairs: &[(usize, usize)]) -> SupermazeGraph {
        let nodes = (0..n).map(|i| StateNode::new(format!("n{i}"))).collect();
        let edges = pairs
            .iter()
            .map(|(a, b)| SupermazeEdge::continuous(format!("n{a}"), format!("n{b}"), 1.0))
            .collect();
        build_graph(nodes, edges).unwrap()
    }

    #[test]
    fn betti_examples() {
        assert_eq!(betti_numbers(&graph(3, &[(0, 1), (1, 2)])), (1, 0));
        assert_eq!(betti_numbers(&graph(3, &[(0, 1), (1, 2), (2, 0)])), (1, 1));
        assert_eq!(betti_numbers(&graph(2, &[(0, 1), (0, 1), (1, 0)])), (1, 2));
        assert_eq!(betti_numbers(&graph(0, &[])), (0, 0));
        assert_eq!(betti_numbers(&graph(1, &[(0, 0)])), (1, 1));
    }

    #[test]
    fn tc_examples() {
        let tree = tc_estimate(&graph(5, &[(0, 1), (0, 2), (2, 3), (2, 4)]));
        assert_eq!(tree.tc, Some(1));
        assert_eq!(tree.method, TC_METHOD);

        let cycle = tc_estimate(&graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]));
        assert_eq!(cycle.tc, Some(2));
        assert!(cycle.strongly_connected);

        let theta = tc_estimate(&graph(2, &[(0, 1), (0, 1), (0, 1)]));
        assert_eq!(theta.tc, Some(3));
        assert!(!theta.strongly_connected);
    }

    #[test]
    fn disconnected_graph_reports_per_component() {
        let r = tc_estimate(&graph(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]));
        assert_eq!((r.b0, r.b1), (2, 1));
        assert_eq!(r.tc, None);
        assert!(!r.navigable);
        let tcs: Vec<u8> = r.components.iter().map(|c| c.tc).collect();
        assert_eq!(tcs, vec![2, 1]);
        assert_eq!(r.components[1].nodes, vec!["n3", "n4"]);
    }

    #[test]
    fn subdivision_preserves_betti_numbers() {
        let before = betti_numbers(&graph(3, &[(0, 1), (1, 2), (2, 0)]));
        // n3 splits the edge n2 -> n0.
        let after = betti_numbers(&graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]));
        assert_eq!(before, after);
    }

    #[test]
    fn bridging_components_reduces_b0_only() {
        let (b0, b1) = betti_numbers(&graph(4, &[(0, 1), (2, 3)]));
        let (b0_after, b1_after) = betti_numbers(&graph(4, &[(0, 1), (2, 3), (1, 2)]));
        assert_eq!((b0_after, b1_after), (b0 - 1, b1));
    }
}
