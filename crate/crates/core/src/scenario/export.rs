//! CSV renderings. Floats use Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use crate::descartes::GeneratedQuadruple;
use crate::relaxation::RelaxationCurve;
use crate::supermaze::ParetoFrontier;

pub fn curve_csv(level_ids: &[String], curve: &RelaxationCurve) -> String {
    let mut out = String::from("time");
    for id in level_ids {
        let _ = write!(out, ",p_{id}");
    }
    out.push('\n');
    for (t, p) in curve.times.iter().zip(&curve.populations) {
        let _ = write!(out, "{t}");
        for x in p {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    out
}

/// One row per route; `edges` is a `;`-separated edge-id sequence.
pub fn frontier_csv(frontier: &ParetoFrontier) -> String {
    let mut out = String::from("rank,total_time,total_energy,edges\n");
    for (rank, r) in frontier.routes.iter().enumerate() {
        let edges: Vec<String> = r.edges.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(
            out,
            "{rank},{},{},{}",
            r.total_time,
            r.total_energy,
            edges.join(";")
        );
    }
    out
}

pub fn packing_csv(packing: &[GeneratedQuadruple]) -> String {
    let mut out = String::from("depth,k1,k2,k3,k4\n");
    for g in packing {
        let [a, b, c, d] = g.curvatures.0;
        let _ = writeln!(out, "{},{a},{b},{c},{d}", g.depth);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descartes::{apollonian_generate, CircleQuadruple};

    #[test]
    fn packing_rows_carry_depth() {
        let packing = apollonian_generate(CircleQuadruple([-1.0, 2.0, 2.0, 3.0]), 1).unwrap();
        let csv = packing_csv(&packing);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("depth,k1,k2,k3,k4"));
        assert_eq!(lines.next(), Some("0,-1,2,2,3"));
        assert_eq!(csv.lines().count(), 1 + packing.len());
    }

    #[test]
    fn floats_round_trip() {
        let curve = RelaxationCurve {
            times: vec![0.1],
            populations: vec![vec![1.0 / 3.0, 2.0 / 3.0]],
        };
        let csv = curve_csv(&["a".into(), "b".into()], &curve);
        let row: Vec<f64> = csv
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(row, vec![0.1, 1.0 / 3.0, 2.0 / 3.0]);
    }
}
