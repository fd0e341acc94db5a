//! Deterministic fixtures for the benchmarks.

use num_complex::Complex64;
use supermaze::quantum::{CMatrix, Generator, TimeIndex};
use supermaze::relaxation::{Level, RateNetwork};
use supermaze::supermaze::{build_graph, StateNode, SupermazeEdge, SupermazeGraph};

/// Dense Hermitian matrix with entries `cos(i + 2j) + i sin(i - j)`.
pub fn hermitian(dim: usize) -> Generator {
    let raw = CMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = (i as f64, j as f64);
        Complex64::new((a + 2.0 * b).cos(), (a - b).sin())
    });
    let h = (&raw + raw.adjoint()).unscale(2.0);
    Generator::new(h, TimeIndex(0), "bench").expect("symmetrized matrix is Hermitian")
}

/// `layers` layers of `width` nodes, fully connected layer to layer, with
/// costs that trade time against energy so frontiers stay wide.
pub fn layered_graph(layers: usize, width: usize) -> SupermazeGraph {
    let id = |l: usize, k: usize| format!("L{l}_{k}");
    let mut nodes = vec![StateNode::new("src"), StateNode::new("dst")];
    let mut edges = Vec::new();
    for l in 0..layers {
        for k in 0..width {
            nodes.push(StateNode::new(id(l, k)));
        }
    }
    for k in 0..width {
        edges.push(SupermazeEdge::continuous("src", id(0, k), 1.0 + k as f64));
        edges.push(SupermazeEdge::continuous(id(layers - 1, k), "dst", 1.0));
    }
    for l in 1..layers {
        for a in 0..width {
            for b in 0..width {
                let fast = ((a * 7 + b * 3 + l) % 5) as f64;
                edges.push(SupermazeEdge::shortcut(
                    id(l - 1, a),
                    id(l, b),
                    1.0 + fast,
                    5.0 - fast,
                ));
            }
        }
    }
    build_graph(nodes, edges).expect("fixture graph is well formed")
}

/// Nearest-neighbour birth-death chain with thermal-looking rates.
pub fn chain_network(dim: usize) -> RateNetwork {
    let levels = (0..dim)
        .map(|i| Level::new(format!("s{i}"), i as f64))
        .collect();
    let mut rates = Vec::new();
    for i in 1..dim {
        rates.push((format!("s{i}"), format!("s{}", i - 1), 1.0));
        rates.push((format!("s{}", i - 1), format!("s{i}"), (-1.0f64).exp()));
    }
    RateNetwork::new(levels, &rates).expect("fixture rates are valid")
}
