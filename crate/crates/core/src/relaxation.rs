//! Classical population master equations over a network of levels.
//!
//! Populations obey `dp/dt = M p` with `M_ij = gamma_ji` for `i != j` and
//! `M_ii = -sum_k gamma_ik`. Curves are sampled by exponentiating `M t`
//! directly at each grid point.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(p) = 1` for supplied distributions.
pub const DISTRIBUTION_TOL: f64 = 1e-9;
/// Relative width at which the equilibration crossing is accepted.
pub const BISECTION_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub id: String,
    #[serde(default)]
    pub label: String,
    pub energy: f64,
}

impl Level {
    pub fn new(id: impl Into<String>, energy: f64) -> Self {
        let id = id.into();
        Self {
            label: id.clone(),
            id,
            energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateNetwork {
    levels: Vec<Level>,
    // (from, to) -> gamma
    rates: BTreeMap<(usize, usize), f64>,
    index: BTreeMap<String, usize>,
}

impl RateNetwork {
    pub fn new<S: AsRef<str>>(levels: Vec<Level>, rates: &[(S, S, f64)]) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, level) in levels.iter().enumerate() {
            if index.insert(level.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(level.id.clone()));
            }
        }
        let mut net = Self {
            levels,
            rates: BTreeMap::new(),
            index,
        };
        for (from, to, gamma) in rates {
            net.insert_rate(from.as_ref(), to.as_ref(), *gamma, false)?;
        }
        Ok(net)
    }

    fn insert_rate(&mut self, from: &str, to: &str, gamma: f64, replace: bool) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidRate {
            from: from.to_string(),
            to: to.to_string(),
            reason: reason.to_string(),
        };
        let i = self.level_index(from)?;
        let j = self.level_index(to)?;
        if i == j {
            return Err(invalid("self-rates are not allowed"));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid("rate must be finite and non-negative"));
        }
        if self.rates.insert((i, j), gamma).is_some() && !replace {
            return Err(invalid("duplicate rate"));
        }
        Ok(())
    }

    /// Copy with one rate set (or overwritten).
    pub fn with_rate(&self, from: &str, to: &str, gamma: f64) -> Result<Self> {
        let mut net = self.clone();
        net.insert_rate(from, to, gamma, true)?;
        Ok(net)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn rate(&self, from: &str, to: &str) -> Result<f64> {
        let key = (self.level_index(from)?, self.level_index(to)?);
        Ok(self.rates.get(&key).copied().unwrap_or(0.0))
    }

    /// `(from, to, gamma)` in index order.
    pub fn rates(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        self.rates
            .iter()
            .map(|(&(i, j), &g)| (self.levels[i].id.as_str(), self.levels[j].id.as_str(), g))
    }

    pub fn rate_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (&(i, j), &gamma) in &self.rates {
            m[(j, i)] += gamma;
            m[(i, i)] -= gamma;
        }
        m
    }

    /// Point mass on one level.
    pub fn pure(&self, id: &str) -> Result<Vec<f64>> {
        let mut p = vec![0.0; self.dim()];
        p[self.level_index(id)?] = 1.0;
        Ok(p)
    }

    /// Closed communicating classes of the positive-rate graph.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::new();
        let ids: Vec<_> = (0..self.dim()).map(|_| g.add_node(())).collect();
        for (&(i, j), &gamma) in &self.rates {
            if gamma > 0.0 {
                g.add_edge(ids[i], ids[j], ());
            }
        }
        let mut classes: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|scc| {
                let mut members: Vec<usize> = scc.into_iter().map(|n| n.index()).collect();
                members.sort_unstable();
                members
            })
            .filter(|members| {
                members.iter().all(|&i| {
                    self.rates
                        .iter()
                        .all(|(&(a, b), &gamma)| a != i || gamma == 0.0 || members.contains(&b))
                })
            })
            .collect();
        classes.sort();
        classes
    }

    /// The unique stationary distribution, supported on the single closed class.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let classes = self.closed_classes();
        if classes.len() != 1 {
            return Err(Error::NoStationaryDistribution {
                classes: classes
                    .iter()
                    .map(|c| c.iter().map(|&i| self.levels[i].id.clone()).collect())
                    .collect(),
            });
        }
        let class = &classes[0];
        let m = self.rate_matrix();
        let k = class.len();
        let mut a = DMatrix::from_fn(k, k, |r, c| m[(class[r], class[c])]);
        let mut rhs = DVector::zeros(k);
        for c in 0..k {
            a[(k - 1, c)] = 1.0;
        }
        rhs[k - 1] = 1.0;
        let solution = a.lu().solve(&rhs).ok_or(Error::Decomposition)?;
        let mut pi = vec![0.0; self.dim()];
        for (r, &i) in class.iter().enumerate() {
            pi[i] = solution[r].max(0.0);
        }
        let total: f64 = pi.iter().sum();
        Ok(pi.into_iter().map(|x| x / total).collect())
    }

    /// Pairs whose forward/backward ratio departs from the Boltzmann factor at
    /// temperature `kt` by more than `rel_tol`. Informational only.
    pub fn detailed_balance_violations(&self, kt: f64, rel_tol: f64) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (&(i, j), &forward) in &self.rates {
            if i > j && self.rates.contains_key(&(j, i)) {
                continue;
            }
            let backward = self.rates.get(&(j, i)).copied().unwrap_or(0.0);
            let boltzmann = (-(self.levels[j].energy - self.levels[i].energy) / kt).exp();
            let lhs = forward;
            let rhs = backward * boltzmann;
            if (lhs - rhs).abs() > rel_tol * lhs.abs().max(rhs.abs()) {
                out.push((self.levels[i].id.clone(), self.levels[j].id.clone()));
            }
        }
        out
    }
}

/// `Gamma = (2 pi / hbar) |V|^2 rho`.
pub fn golden_rule_rate(coupling_sq: f64, dos: f64, hbar: f64) -> Result<f64> {
    if !(coupling_sq >= 0.0) {
        return Err(Error::NegativeInput(format!("coupling_sq = {coupling_sq}")));
    }
    if !(dos >= 0.0) {
        return Err(Error::NegativeInput(format!("dos = {dos}")));
    }
    Ok(2.0 * PI / hbar * coupling_sq * dos)
}

pub fn total_escape_rate(net: &RateNetwork, state_id: &str) -> Result<f64> {
    let i = net.level_index(state_id)?;
    Ok(net.rates.range((i, 0)..(i + 1, 0)).map(|(_, &g)| g).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationCurve {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
}

fn check_distribution(net: &RateNetwork, p0: &[f64]) -> Result<()> {
    if p0.len() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            found: p0.len(),
        });
    }
    if let Some(x) = p0.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDistribution(format!(
            "entry {x} is negative or not finite"
        )));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}"
        )));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(&t) = grid.first() {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidDuration(t));
        }
    }
    for (k, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::NonAscendingGrid(k + 1));
        }
    }
    Ok(())
}

fn populations_at(m: &DMatrix<f64>, p0: &DVector<f64>, t: f64) -> DVector<f64> {
    (m * t).exp() * p0
}

pub fn evolve_populations(net: &RateNetwork, p0: &[f64], grid: &[f64]) -> Result<RelaxationCurve> {
    check_distribution(net, p0)?;
    check_grid(grid)?;
    let m = net.rate_matrix();
    let p0 = DVector::from_column_slice(p0);
    let populations = grid
        .iter()
        .map(|&t| populations_at(&m, &p0, t).iter().copied().collect())
        .collect();
    Ok(RelaxationCurve {
        times: grid.to_vec(),
        populations,
    })
}

fn l1_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// First time the L1 distance to the stationary distribution drops below
/// `epsilon` and stays below it for the rest of `grid`. The crossing after the
/// last sample at or above `epsilon` is refined by bisection.
pub fn time_to_equilibrium_on_grid(
    net: &RateNetwork,
    p0: &[f64],
    epsilon: f64,
    grid: &[f64],
) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_distribution(net, p0)?;
    check_grid(grid)?;
    let pi = DVector::from_vec(net.stationary_distribution()?);
    let m = net.rate_matrix();
    let p0 = DVector::from_column_slice(p0);
    let distance = |t: f64| l1_distance(&populations_at(&m, &p0, t), &pi);

    let horizon = grid.last().copied().unwrap_or(0.0);
    let last_above = grid.iter().rposition(|&t| distance(t) >= epsilon);
    let Some(k) = last_above else {
        return grid
            .first()
            .copied()
            .ok_or(Error::NotReachedWithinGrid { horizon });
    };
    if k + 1 == grid.len() {
        return Err(Error::NotReachedWithinGrid { horizon });
    }
    let (mut lo, mut hi) = (grid[k], grid[k + 1]);
    while hi - lo > BISECTION_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if distance(mid) >= epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Samples per automatically chosen grid.
const AUTO_SAMPLES: usize = 2048;
const MAX_HORIZON_DOUBLINGS: usize = 40;

/// Equilibration time on an automatically sized uniform grid. The horizon
/// starts from the slowest relaxation mode and doubles until the distance has
/// settled below `epsilon`.
pub fn time_to_equilibrium(net: &RateNetwork, p0: &[f64], epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let slowest = net
        .rate_matrix()
        .complex_eigenvalues()
        .iter()
        .map(|z| -z.re)
        .filter(|&r| r > 1e-12)
        .fold(f64::INFINITY, f64::min);
    let mut horizon = if slowest.is_finite() {
        2.0 * ((2.0 / epsilon).ln() + 1.0) / slowest
    } else {
        1.0
    };
    for _ in 0..MAX_HORIZON_DOUBLINGS {
        let grid: Vec<f64> = (0..AUTO_SAMPLES)
            .map(|k| horizon * k as f64 / (AUTO_SAMPLES - 1) as f64)
            .collect();
        match time_to_equilibrium_on_grid(net, p0, epsilon, &grid) {
            Err(Error::NotReachedWithinGrid { .. }) => horizon *= 2.0,
            other => return other,
        }
    }
    Err(Error::NotReachedWithinGrid { horizon })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpembaVerdict {
    pub a: String,
    pub b: String,
    pub tau_a: f64,
    pub tau_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    /// `tau_a < tau_b`: the hotter preparation equilibrates first.
    pub anomaly: bool,
    /// `gamma_a > gamma_b`, reported alongside the verdict.
    pub escape_rate_criterion: bool,
}

/// Compares equilibration from pure preparations `a` (hotter) and `b`.
pub fn mpemba_compare(
    net: &RateNetwork,
    a_id: &str,
    b_id: &str,
    epsilon: f64,
) -> Result<MpembaVerdict> {
    let energy_a = net.levels[net.level_index(a_id)?].energy;
    let energy_b = net.levels[net.level_index(b_id)?].energy;
    if !(energy_a > energy_b) {
        return Err(Error::OrderingViolation {
            a: a_id.to_string(),
            b: b_id.to_string(),
            energy_a,
            energy_b,
        });
    }
    let tau_a = time_to_equilibrium(net, &net.pure(a_id)?, epsilon)?;
    let tau_b = time_to_equilibrium(net, &net.pure(b_id)?, epsilon)?;
    let gamma_a = total_escape_rate(net, a_id)?;
    let gamma_b = total_escape_rate(net, b_id)?;
    Ok(MpembaVerdict {
        a: a_id.to_string(),
        b: b_id.to_string(),
        tau_a,
        tau_b,
        gamma_a,
        gamma_b,
        anomaly: tau_a < tau_b,
        escape_rate_criterion: gamma_a > gamma_b,
    })
}

/// Ground, first and second excited levels with the cascade 2 -> 1 -> 0 plus
/// a direct 2 -> 0 channel.
pub fn three_level_cascade(gamma21: f64, gamma10: f64, gamma20: f64) -> Result<RateNetwork> {
    RateNetwork::new(
        vec![
            Level::new("0", 0.0),
            Level::new("1", 1.0),
            Level::new("2", 2.0),
        ],
        &[
            ("2", "1", gamma21),
            ("1", "0", gamma10),
            ("2", "0", gamma20),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level(gamma: f64) -> RateNetwork {
        RateNetwork::new(
            vec![Level::new("0", 0.0), Level::new("1", 1.0)],
            &[("1", "0", gamma)],
        )
        .unwrap()
    }

    /// L1 distance for the cascade from |2>: 2 (p1 + p2) in closed form.
    fn cascade_distance(t: f64) -> f64 {
        let p2 = (-1.1 * t).exp();
        let p1 = 0.1 * ((-0.1 * t).exp() - (-1.1 * t).exp());
        2.0 * (p1 + p2)
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    #[test]
    fn golden_rule_examples() {
        assert_eq!(golden_rule_rate(0.0, 3.0, 1.0).unwrap(), 0.0);
        assert!((golden_rule_rate(1.0, 1.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((golden_rule_rate(0.5, 2.0, 1.0).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!(matches!(
            golden_rule_rate(-1.0, 1.0, 1.0),
            Err(Error::NegativeInput(_))
        ));
    }

    #[test]
    fn escape_rate_examples() {
        let net = three_level_cascade(0.1, 0.1, 1.0).unwrap();
        assert!((total_escape_rate(&net, "2").unwrap() - 1.1).abs() < 1e-15);
        assert_eq!(total_escape_rate(&net, "1").unwrap(), 0.1);
        assert_eq!(total_escape_rate(&net, "0").unwrap(), 0.0);
        assert!(matches!(
            total_escape_rate(&net, "9"),
            Err(Error::UnknownState(_))
        ));
    }

    #[test]
    fn network_validation() {
        let levels = || vec![Level::new("0", 0.0), Level::new("1", 1.0)];
        assert!(matches!(
            RateNetwork::new(levels(), &[("1", "1", 0.1)]),
            Err(Error::InvalidRate { .. })
        ));
        assert!(matches!(
            RateNetwork::new(levels(), &[("1", "0", -0.1)]),
            Err(Error::InvalidRate { .. })
        ));
        assert!(matches!(
            RateNetwork::new(levels(), &[("1", "0", 0.1), ("1", "0", 0.2)]),
            Err(Error::InvalidRate { .. })
        ));
        assert!(matches!(
            RateNetwork::new(
                vec![Level::new("0", 0.0), Level::new("0", 1.0)],
                &[] as &[(&str, &str, f64)]
            ),
            Err(Error::DuplicateId(_))
        ));
    }

    #[test]
    fn stationary_start_gives_flat_curve() {
        let net = three_level_cascade(0.1, 0.1, 1.0).unwrap();
        let curve = evolve_populations(&net, &[1.0, 0.0, 0.0], &[0.0, 1.0, 50.0]).unwrap();
        for p in &curve.populations {
            assert_eq!(p, &vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn two_level_decay() {
        let curve = evolve_populations(&two_level(0.1), &[0.0, 1.0], &[0.0, 23.0]).unwrap();
        let expected = (-2.3_f64).exp();
        assert!((curve.populations[1][1] - expected).abs() < 1e-12);
        assert!((curve.populations[1][1] - 0.100).abs() < 1e-3);
    }

    #[test]
    fn cascade_matches_closed_form() {
        let net = three_level_cascade(0.1, 0.1, 1.0).unwrap();
        let grid: Vec<f64> = (0..50).map(|k| k as f64 * 1.7).collect();
        let curve = evolve_populations(&net, &net.pure("2").unwrap(), &grid).unwrap();
        for (t, p) in curve.times.iter().zip(&curve.populations) {
            let p1 = 0.1 * ((-0.1 * t).exp() - (-1.1 * t).exp());
            assert!((p[1] - p1).abs() < 1e-6);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn input_validation() {
        let net = two_level(0.1);
        assert!(matches!(
            evolve_populations(&net, &[0.5, 0.6], &[0.0]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(matches!(
            evolve_populations(&net, &[-0.5, 1.5], &[0.0]),
            Err(Error::InvalidDistribution(_))
        ));
        assert_eq!(
            evolve_populations(&net, &[0.0, 1.0], &[0.0, 2.0, 1.0]).unwrap_err(),
            Error::NonAscendingGrid(2)
        );
    }

    #[test]
    fn equilibration_examples() {
        let net = two_level(0.1);
        assert_eq!(time_to_equilibrium(&net, &[1.0, 0.0], 0.02).unwrap(), 0.0);

        let tau = time_to_equilibrium(&net, &[0.0, 1.0], 0.02).unwrap();
        let expected = (2.0_f64 / 0.02).ln() / 0.1;
        assert!((tau - expected).abs() < 1e-5 * expected);
        assert!((tau - 46.05).abs() < 0.01);

        let cascade = three_level_cascade(0.1, 0.1, 1.0).unwrap();
        let tau = time_to_equilibrium(&cascade, &cascade.pure("2").unwrap(), 0.02).unwrap();
        let oracle = bisect(|t| cascade_distance(t) - 0.02, 0.0, 200.0);
        assert!((tau - oracle).abs() < 1e-5 * oracle);
        assert!((tau - 23.03).abs() < 0.01);
    }

    #[test]
    fn equilibration_errors() {
        let split = RateNetwork::new(
            vec![
                Level::new("a", 0.0),
                Level::new("b", 0.0),
                Level::new("c", 1.0),
            ],
            &[("c", "a", 1.0), ("c", "b", 1.0)],
        )
        .unwrap();
        match time_to_equilibrium(&split, &[0.0, 0.0, 1.0], 0.02).unwrap_err() {
            Error::NoStationaryDistribution { classes } => {
                assert_eq!(classes, vec![vec!["a".to_string()], vec!["b".to_string()]]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let net = two_level(0.1);
        assert!(matches!(
            time_to_equilibrium_on_grid(&net, &[0.0, 1.0], 0.02, &[0.0, 1.0, 2.0]),
            Err(Error::NotReachedWithinGrid { horizon }) if horizon == 2.0
        ));
        assert!(matches!(
            time_to_equilibrium(&net, &[0.0, 1.0], 1.5),
            Err(Error::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn stationary_distribution_of_reversible_pair() {
        let net = RateNetwork::new(
            vec![Level::new("0", 0.0), Level::new("1", 1.0)],
            &[("1", "0", 0.3), ("0", "1", 0.1)],
        )
        .unwrap();
        let pi = net.stationary_distribution().unwrap();
        assert!((pi[0] - 0.75).abs() < 1e-14 && (pi[1] - 0.25).abs() < 1e-14);
        assert!(net
            .detailed_balance_violations(1.0 / 3.0_f64.ln(), 1e-9)
            .is_empty());
        assert_eq!(net.detailed_balance_violations(1.0, 1e-9).len(), 1);
    }

    #[test]
    fn mpemba_examples() {
        let net = three_level_cascade(0.1, 0.1, 1.0).unwrap();
        let v = mpemba_compare(&net, "2", "1", 0.02).unwrap();
        assert!(v.anomaly && v.escape_rate_criterion);
        assert!((v.tau_a - 23.03).abs() < 0.01 && (v.tau_b - 46.05).abs() < 0.01);
        assert!((v.gamma_a - 1.1).abs() < 1e-15 && v.gamma_b == 0.1);

        let no_channel = three_level_cascade(0.1, 0.1, 0.0).unwrap();
        let v = mpemba_compare(&no_channel, "2", "1", 0.02).unwrap();
        assert!(!v.anomaly && v.tau_a > v.tau_b);

        // A's only route runs through B.
        let chain = RateNetwork::new(
            vec![
                Level::new("g", 0.0),
                Level::new("b", 1.0),
                Level::new("a", 2.0),
            ],
            &[("a", "b", 5.0), ("b", "g", 0.2)],
        )
        .unwrap();
        assert!(!mpemba_compare(&chain, "a", "b", 0.02).unwrap().anomaly);

        assert!(matches!(
            mpemba_compare(&net, "1", "2", 0.02),
            Err(Error::OrderingViolation { .. })
        ));
    }

    #[test]
    fn direct_channel_never_slows_the_hot_start() {
        let mut last = f64::INFINITY;
        for k in 0..=20 {
            let g20 = 0.1 * k as f64;
            let net = three_level_cascade(0.1, 0.1, g20).unwrap();
            let tau = time_to_equilibrium(&net, &net.pure("2").unwrap(), 0.02).unwrap();
            assert!(tau <= last * (1.0 + 1e-6), "g20 = {g20}: {tau} > {last}");
            last = tau;
        }
    }
}
