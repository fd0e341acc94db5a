//! Independent reference implementations and random fixtures shared by the
//! integration tests. Nothing here calls into the algorithms it checks.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supermaze::relaxation::RateNetwork;
use supermaze::supermaze::{build_graph, StateNode, SupermazeEdge, SupermazeGraph};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMat {
    let a = CMat::from_fn(dim, dim, |_, _| random_complex(rng));
    (&a + a.adjoint()).unscale(2.0)
}

pub fn random_vector(rng: &mut impl Rng, dim: usize) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| random_complex(rng));
        let n = v.norm();
        if n > 1e-3 {
            return v.unscale(n);
        }
    }
}

/// Modified Gram-Schmidt on `first` followed by random fill vectors; the
/// result's first column is `first` (assumed unit norm).
pub fn unitary_with_first_column(rng: &mut impl Rng, first: &CVec) -> CMat {
    let dim = first.len();
    let mut cols: Vec<CVec> = vec![first.clone()];
    while cols.len() < dim {
        let mut v = CVec::from_fn(dim, |_, _| random_complex(rng));
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v.unscale(n));
        }
    }
    CMat::from_columns(&cols)
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMat {
    let first = random_vector(rng, dim);
    unitary_with_first_column(rng, &first)
}

/// Unit vector orthogonal to `psi`.
pub fn orthogonal_to(rng: &mut impl Rng, psi: &CVec) -> CVec {
    loop {
        let mut v = random_vector(rng, psi.len());
        let proj = psi.dotc(&v);
        v -= psi * proj;
        let n = v.norm();
        if n > 1e-3 {
            return v.unscale(n);
        }
    }
}

/// `exp(A)` by scaling and squaring with a 30-term Taylor series.
pub fn expm_taylor(a: &CMat) -> CMat {
    let dim = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = norm.log2().ceil().max(0.0) as i32 + 1;
    let scaled = a.unscale(2f64.powi(squarings));
    let mut term = CMat::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- rates

/// Levels `s0..s{dim-1}` with each ordered pair connected with probability
/// `density` at a rate drawn from `[0, max_rate)`.
pub fn random_rate_network(
    rng: &mut impl Rng,
    dim: usize,
    density: f64,
    max_rate: f64,
) -> RateNetwork {
    let levels = (0..dim)
        .map(|i| supermaze::relaxation::Level::new(format!("s{i}"), rng.random_range(0.0..5.0)))
        .collect();
    let mut rates = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            if i != j && rng.random_bool(density) {
                rates.push((
                    format!("s{i}"),
                    format!("s{j}"),
                    rng.random_range(0.0..max_rate),
                ));
            }
        }
    }
    RateNetwork::new(levels, &rates).unwrap()
}

pub fn random_distribution(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Dense `dp/dt = M p` generator assembled from the network's rate list.
pub fn master_matrix(net: &RateNetwork) -> Vec<Vec<f64>> {
    let n = net.dim();
    let mut m = vec![vec![0.0; n]; n];
    for (from, to, gamma) in net.rates() {
        let i = net.level_index(from).unwrap();
        let j = net.level_index(to).unwrap();
        m[j][i] += gamma;
        m[i][i] -= gamma;
    }
    m
}

fn matvec(m: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum())
        .collect()
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (coef, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += h * coef * v;
        }
    }
    out
}

/// Adaptive Dormand-Prince 5(4) integration of `dy/dt = M y`, sampled at
/// every time in `grid` (ascending, starting at or after 0).
pub fn rk45_linear(
    m: &[Vec<f64>],
    y0: &[f64],
    grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Vec<Vec<f64>> {
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = B1 - 5179.0 / 57600.0;
    const E3: f64 = B3 - 7571.0 / 16695.0;
    const E4: f64 = B4 - 393.0 / 640.0;
    const E5: f64 = B5 - -92097.0 / 339200.0;
    const E6: f64 = B6 - 187.0 / 2100.0;
    const E7: f64 = -1.0 / 40.0;

    let f = |y: &[f64]| matvec(m, y);
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut h: f64 = 1e-3;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        while t < target {
            let step = h.min(target - t);
            let k1 = f(&y);
            let k2 = f(&axpy(&y, step, &[(A21, &k1)]));
            let k3 = f(&axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(&axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(&axpy(
                &y,
                step,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            ));
            let k6 = f(&axpy(
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ));
            let y5 = axpy(
                &y,
                step,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = f(&y5);
            let err_vec = axpy(
                &vec![0.0; y.len()],
                step,
                &[
                    (E1, &k1),
                    (E3, &k3),
                    (E4, &k4),
                    (E5, &k5),
                    (E6, &k6),
                    (E7, &k7),
                ],
            );
            let err = err_vec
                .iter()
                .zip(y.iter().zip(&y5))
                .map(|(e, (a, b))| (e / (atol + rtol * a.abs().max(b.abs()))).powi(2))
                .sum::<f64>()
                / y.len() as f64;
            let err = err.sqrt();
            if err <= 1.0 {
                t += step;
                y = y5;
                if step < h && t >= target {
                    // clipped to the sample; keep the proposed size
                    continue;
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
        }
        out.push(y.clone());
    }
    out
}

// ---------------------------------------------------------------- graphs

pub struct RandomGraphSpec {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub max_duration: u32,
    pub max_energy: u32,
}

/// Graph with integer durations and energies, so every path sum is exact.
pub fn random_graph(rng: &mut impl Rng, spec: &RandomGraphSpec) -> SupermazeGraph {
    let n = rng.random_range(1..=spec.max_nodes);
    let m = rng.random_range(0..=spec.max_edges);
    let nodes = (0..n).map(|i| StateNode::new(format!("n{i}"))).collect();
    let edges = (0..m).map(|_| random_edge(rng, n, spec)).collect();
    build_graph(nodes, edges).unwrap()
}

pub fn random_edge(rng: &mut impl Rng, n: usize, spec: &RandomGraphSpec) -> SupermazeEdge {
    let from = format!("n{}", rng.random_range(0..n));
    let to = format!("n{}", rng.random_range(0..n));
    let duration = rng.random_range(0..=spec.max_duration) as f64;
    if rng.random_bool(0.5) {
        SupermazeEdge::continuous(from, to, duration)
    } else {
        SupermazeEdge::shortcut(
            from,
            to,
            duration,
            rng.random_range(0..=spec.max_energy) as f64,
        )
    }
}

pub fn edge_ends(g: &SupermazeGraph) -> Vec<(usize, usize)> {
    g.edges()
        .iter()
        .map(|e| (g.node_index(&e.from).unwrap(), g.node_index(&e.to).unwrap()))
        .collect()
}

/// Every simple path from `src` to `dst` as `(edges, time, energy)`.
pub fn all_simple_paths(g: &SupermazeGraph, src: usize, dst: usize) -> Vec<(Vec<usize>, f64, f64)> {
    fn dfs(
        g: &SupermazeGraph,
        ends: &[(usize, usize)],
        node: usize,
        dst: usize,
        on_path: &mut Vec<bool>,
        edges: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64, f64)>,
    ) {
        if node == dst {
            let (mut t, mut e) = (0.0, 0.0);
            for &id in edges.iter() {
                t += g.edges()[id].duration;
                e += g.edges()[id].energy_cost;
            }
            out.push((edges.clone(), t, e));
            return;
        }
        for (id, &(a, b)) in ends.iter().enumerate() {
            if a == node && !on_path[b] {
                on_path[b] = true;
                edges.push(id);
                dfs(g, ends, b, dst, on_path, edges, out);
                edges.pop();
                on_path[b] = false;
            }
        }
    }
    let ends = edge_ends(g);
    let mut on_path = vec![false; g.node_count()];
    on_path[src] = true;
    let mut out = Vec::new();
    dfs(g, &ends, src, dst, &mut on_path, &mut Vec::new(), &mut out);
    out
}

/// Non-dominated `(edges, time, energy)` by exhaustive enumeration; among
/// equal totals the lexicographically smallest edge sequence. Sorted by time.
pub fn brute_force_pareto(
    g: &SupermazeGraph,
    src: usize,
    dst: usize,
) -> Vec<(Vec<usize>, f64, f64)> {
    let paths = all_simple_paths(g, src, dst);
    let mut front: Vec<(Vec<usize>, f64, f64)> = paths
        .iter()
        .filter(|(_, t, e)| {
            !paths
                .iter()
                .any(|(_, t2, e2)| t2 <= t && e2 <= e && (t2 < t || e2 < e))
        })
        .cloned()
        .collect();
    front.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.2.total_cmp(&b.2))
            .then_with(|| a.0.cmp(&b.0))
    });
    front.dedup_by(|later, kept| later.1 == kept.1 && later.2 == kept.2);
    front
}

/// Largest all-pairs shortest time (Floyd-Warshall), infinite if any ordered
/// pair is unreachable.
pub fn floyd_warshall_diameter(g: &SupermazeGraph) -> f64 {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (id, (a, b)) in edge_ends(g).into_iter().enumerate() {
        d[a][b] = d[a][b].min(g.edges()[id].duration);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.iter().flatten().copied().fold(0.0, f64::max)
}

/// Component count by depth-first search on the symmetrized graph.
pub fn component_count(g: &SupermazeGraph) -> usize {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edge_ends(g) {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Edges left over after growing a spanning forest: the cycle rank.
pub fn non_tree_edges(g: &SupermazeGraph) -> usize {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut extra = 0;
    for (a, b) in edge_ends(g) {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra == rb {
            extra += 1;
        } else {
            parent[ra] = rb;
        }
    }
    extra
}

// ---------------------------------------------------------------- packings

/// Exact integer reflection closure of an integral Descartes quadruple, as
/// sorted quadruples, to `depth` generations.
pub fn integer_apollonian(root: [i64; 4], depth: usize) -> BTreeSet<[i64; 4]> {
    let sorted = |mut q: [i64; 4]| {
        q.sort_unstable();
        q
    };
    let mut seen = BTreeSet::from([sorted(root)]);
    let mut frontier = vec![root];
    for _ in 0..depth {
        let mut next = Vec::new();
        for q in &frontier {
            for i in 0..4 {
                let mut child = *q;
                let others: i64 = (0..4).filter(|&j| j != i).map(|j| q[j]).sum();
                child[i] = 2 * others - q[i];
                if seen.insert(sorted(child)) {
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    seen
}
