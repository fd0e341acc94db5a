//! Multiple time coordinates: the generalized interval, single-coordinate
//! trajectory segments, and commutator-based consistency checks.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    check_dim, phase_aligned_max_diff, unitary_from_generator, Generator, QuantumState, TimeIndex,
};

/// Diagonal temporal metric with one characteristic speed per time axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalMetric {
    speeds: Vec<f64>,
    n_space: usize,
}

impl TemporalMetric {
    pub fn new(speeds: Vec<f64>, n_space: usize) -> Result<Self> {
        if speeds.is_empty() {
            return Err(Error::InvalidMetric(
                "at least one time coordinate required".into(),
            ));
        }
        if let Some(c) = speeds.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "speed {c} is not strictly positive"
            )));
        }
        Ok(Self { speeds, n_space })
    }

    pub fn n_times(&self) -> usize {
        self.speeds.len()
    }

    pub fn n_space(&self) -> usize {
        self.n_space
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeVector(pub Vec<f64>);

impl TimeVector {
    pub fn zeros(n_times: usize) -> Self {
        Self(vec![0.0; n_times])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    Timelike,
    Null,
    Spacelike,
}

/// `ds^2 = -sum_i (c_i dt_i)^2 + sum_j dx_j^2`.
pub fn interval(metric: &TemporalMetric, dt: &TimeVector, dx: &[f64]) -> Result<f64> {
    check_dim(metric.n_times(), dt.len())?;
    check_dim(metric.n_space(), dx.len())?;
    let temporal: f64 = metric
        .speeds
        .iter()
        .zip(&dt.0)
        .map(|(c, t)| (c * t) * (c * t))
        .sum();
    let spatial: f64 = dx.iter().map(|x| x * x).sum();
    Ok(spatial - temporal)
}

pub fn classify_interval(ds2: f64, tol: f64) -> IntervalKind {
    if ds2 < -tol {
        IntervalKind::Timelike
    } else if ds2 > tol {
        IntervalKind::Spacelike
    } else {
        IntervalKind::Null
    }
}

/// Commutator norm between the generators of two time coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub pair: (TimeIndex, TimeIndex),
    pub residual: f64,
}

/// Spectral norm of `[H_I, H_J]`. Zero means evolution along the two
/// coordinates is order independent.
pub fn consistency_residual(h_i: &Generator, h_j: &Generator) -> Result<ConsistencyReport> {
    check_dim(h_i.dim(), h_j.dim())?;
    let a = h_i.matrix();
    let b = h_j.matrix();
    let commutator = a * b - b * a;
    // sqrt(lambda_max(C^dagger C)); the Gram matrix is invariant under C -> -C.
    let gram = commutator.adjoint() * &commutator;
    let gram = (&gram + gram.adjoint()).unscale(2.0);
    let largest = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max);
    Ok(ConsistencyReport {
        pair: (h_i.time_index(), h_j.time_index()),
        residual: largest.sqrt(),
    })
}

/// One leg of a multi-time path: only `time_index` advances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySegment {
    pub time_index: TimeIndex,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTimePath {
    origin: TimeVector,
    segments: Vec<TrajectorySegment>,
}

impl MultiTimePath {
    pub fn new(origin: TimeVector, segments: Vec<TrajectorySegment>) -> Result<Self> {
        for seg in &segments {
            if seg.time_index.0 >= origin.len() {
                return Err(Error::TimeIndexOutOfRange {
                    index: seg.time_index.0,
                    n_times: origin.len(),
                });
            }
            if !(seg.duration >= 0.0) || !seg.duration.is_finite() {
                return Err(Error::InvalidDuration(seg.duration));
            }
        }
        Ok(Self { origin, segments })
    }

    /// The rectangle protocol: `t^1` for `tau1`, then `t^S` for `tau_s`, then
    /// `t^1` again for `tau1_after`.
    pub fn rectangle(
        n_times: usize,
        physical: TimeIndex,
        shortcut: TimeIndex,
        tau1: f64,
        tau_s: f64,
        tau1_after: f64,
    ) -> Result<Self> {
        Self::new(
            TimeVector::zeros(n_times),
            vec![
                TrajectorySegment {
                    time_index: physical,
                    duration: tau1,
                },
                TrajectorySegment {
                    time_index: shortcut,
                    duration: tau_s,
                },
                TrajectorySegment {
                    time_index: physical,
                    duration: tau1_after,
                },
            ],
        )
    }

    pub fn origin(&self) -> &TimeVector {
        &self.origin
    }

    pub fn segments(&self) -> &[TrajectorySegment] {
        &self.segments
    }

    /// Origin plus the per-coordinate sum of segment durations.
    pub fn final_time(&self) -> TimeVector {
        let mut t = self.origin.clone();
        for seg in &self.segments {
            t.0[seg.time_index.0] += seg.duration;
        }
        t
    }
}

/// Applies each segment's propagator in order. `generators` are looked up by
/// their bound time index; the first match wins.
pub fn evolve_path(
    psi: &QuantumState,
    path: &MultiTimePath,
    generators: &[Generator],
    hbar: f64,
) -> Result<QuantumState> {
    let mut state = psi.clone();
    for seg in &path.segments {
        let generator = generators
            .iter()
            .find(|g| g.time_index() == seg.time_index)
            .ok_or(Error::MissingGenerator(seg.time_index.0))?;
        check_dim(state.dim(), generator.dim())?;
        state = unitary_from_generator(generator, seg.duration, hbar)?.apply(&state)?;
    }
    let norm = state.norm();
    Ok(QuantumState::from_unit(state.amplitudes().unscale(norm)))
}

/// Phase-aligned entrywise distance between `U_S(tau_s) U_1(tau1)` and
/// `U_1(tau1) U_S(tau_s)`. `psi` fixes the working dimension.
pub fn rectangle_defect(
    psi: &QuantumState,
    h1: &Generator,
    hs: &Generator,
    tau1: f64,
    tau_s: f64,
    hbar: f64,
) -> Result<f64> {
    check_dim(psi.dim(), h1.dim())?;
    check_dim(psi.dim(), hs.dim())?;
    let u1 = unitary_from_generator(h1, tau1, hbar)?;
    let us = unitary_from_generator(hs, tau_s, hbar)?;
    let physical_first = u1.then(&us)?;
    let shortcut_first = us.then(&u1)?;
    phase_aligned_max_diff(physical_first.matrix(), shortcut_first.matrix())
}
