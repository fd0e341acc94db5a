//! Descartes' circle theorem in curvature form and Apollonian packings.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantization step for deduplicating generated quadruples.
pub const DEDUP_QUANTUM: f64 = 1e-9;

/// Curvatures of four mutually tangent circles (negative for an enclosing
/// circle, zero for a line).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CircleQuadruple(pub [f64; 4]);

impl CircleQuadruple {
    /// Replaces entry `i` by its other root: `k_i <- 2 sum_{j != i} k_j - k_i`.
    pub fn reflect(&self, i: usize) -> Self {
        let mut k = self.0;
        let others: f64 = (0..4).filter(|&j| j != i).map(|j| k[j]).sum();
        k[i] = 2.0 * others - k[i];
        Self(k)
    }

    pub fn residual(&self) -> f64 {
        descartes_residual(self)
    }

    /// Residual scaled as in the tangency invariant: `< 1e-9 * max(1, sum k^2)`.
    pub fn is_tangent(&self) -> bool {
        let sq: f64 = self.0.iter().map(|k| k * k).sum();
        self.residual() < 1e-9 * sq.max(1.0)
    }

    fn key(&self) -> [i64; 4] {
        let mut k = self.0.map(|x| (x / DEDUP_QUANTUM).round() as i64);
        k.sort_unstable();
        k
    }
}

/// Both roots `k4 = (k1 + k2 + k3) +/- 2 sqrt(k1 k2 + k2 k3 + k3 k1)`, larger first.
pub fn fourth_curvature(k1: f64, k2: f64, k3: f64) -> Result<(f64, f64)> {
    let radicand = k1 * k2 + k2 * k3 + k3 * k1;
    if radicand < 0.0 {
        return Err(Error::ComplexRoots(radicand));
    }
    let sum = k1 + k2 + k3;
    let root = 2.0 * radicand.sqrt();
    Ok((sum + root, sum - root))
}

/// `|(sum k)^2 - 2 sum k^2|`.
pub fn descartes_residual(q: &CircleQuadruple) -> f64 {
    let sum: f64 = q.0.iter().sum();
    let sq: f64 = q.0.iter().map(|k| k * k).sum();
    (sum * sum - 2.0 * sq).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratedQuadruple {
    pub curvatures: CircleQuadruple,
    pub depth: usize,
}

/// Breadth-first reflection closure of `root` up to `depth` generations,
/// deduplicated on sorted, quantized curvatures.
pub fn apollonian_generate(root: CircleQuadruple, depth: usize) -> Result<Vec<GeneratedQuadruple>> {
    if !root.is_tangent() {
        return Err(Error::InvalidRoot(root.residual()));
    }
    let mut seen = BTreeSet::from([root.key()]);
    let mut out = vec![GeneratedQuadruple {
        curvatures: root,
        depth: 0,
    }];
    let mut frontier = VecDeque::from([(root, 0usize)]);
    while let Some((q, d)) = frontier.pop_front() {
        if d == depth {
            continue;
        }
        for i in 0..4 {
            let child = q.reflect(i);
            if seen.insert(child.key()) {
                out.push(GeneratedQuadruple {
                    curvatures: child,
                    depth: d + 1,
                });
                frontier.push_back((child, d + 1));
            }
        }
    }
    Ok(out)
}
