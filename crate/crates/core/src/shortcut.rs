//! Shortcut generators synthesized from target unitaries, and the
//! time-energy bound every shortcut has to respect.
//!
//! A shortcut with target `U` and duration `T` is realized by the generator
//! `H_S = (i hbar / T) log U`, using the principal logarithm whose eigenphases
//! lie in `(-pi, pi]`. The speed-limit check uses the Mandelstam-Tamm form:
//! the energy uncertainty of the initial state under `H_S`, times `T`, must be
//! at least `hbar` times the Bures angle between initial and final states.
//! For orthogonal endpoints that angle is `pi/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    check_dim, energy_stats, fidelity, phase_aligned_max_diff, unitary_from_generator, CMatrix,
    Generator, Propagator, QuantumState, TimeIndex, Tolerances,
};

/// Eigenphases closer than this to `-pi` are refused.
pub const BRANCH_CUT_TOL: f64 = 1e-9;
/// Slack when comparing `delta_e * T` against the bound.
pub const QSL_SLACK: f64 = 1e-9;
/// Fidelity above `1 - NO_DISPLACEMENT_TOL` counts as no displacement.
pub const NO_DISPLACEMENT_TOL: f64 = 1e-12;
/// Fidelity below this counts as an orthogonal jump.
pub const ORTHOGONAL_TOL: f64 = 1e-6;
/// Round-trip accuracy required of `exp(-i H_S T / hbar)`.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

/// Imaginary parts of unit eigenvalues below this are treated as round-off.
const EIGEN_IMAG_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ShortcutSpec {
    target: Propagator,
    duration: f64,
    time_index: TimeIndex,
}

impl ShortcutSpec {
    pub fn new(target: CMatrix, duration: f64) -> Result<Self> {
        Self::with_tolerance(target, duration, Tolerances::default().unitary)
    }

    pub fn with_tolerance(target: CMatrix, duration: f64, unitary_tol: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidDuration(duration));
        }
        Ok(Self {
            target: Propagator::from_matrix(target, duration, unitary_tol)?,
            duration,
            time_index: TimeIndex(1),
        })
    }

    /// Binds the synthesized generator to `time_index` (default `t1`).
    pub fn on_time_axis(mut self, time_index: TimeIndex) -> Self {
        self.time_index = time_index;
        self
    }

    pub fn target(&self) -> &Propagator {
        &self.target
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedShortcut {
    pub generator: Generator,
    pub target: Propagator,
    pub duration: f64,
    pub hbar: f64,
    /// Largest `|eigenvalue|` of `H_S`.
    pub spectral_cost: f64,
    /// Half the spectral width of `H_S`.
    pub bandwidth_cost: f64,
    /// Principal eigenphases of the target, ascending.
    pub eigenphases: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QslRegime {
    /// Initial and final states coincide; the bound is zero.
    NoDisplacement,
    /// Orthogonal endpoints; the bound is `pi hbar / 2`.
    Orthogonal,
    /// Partial displacement; checked against the angle-scaled bound and
    /// reported, not asserted.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QslReport {
    pub delta_e: f64,
    /// Mean energy above the ground level of `H_S`.
    pub mean_e: f64,
    pub duration: f64,
    /// `hbar * arccos(F)`; equals `orthogonal_bound` for orthogonal endpoints.
    pub bound: f64,
    pub orthogonal_bound: f64,
    pub product: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub final_fidelity: f64,
    pub regime: QslRegime,
}

/// `H_S = (i hbar / T) log U` with the principal branch.
pub fn synthesize_generator(spec: &ShortcutSpec, hbar: f64) -> Result<SynthesizedShortcut> {
    let target = spec.target.matrix();
    let dim = target.nrows();
    let (q, t) = Schur::try_new(target.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::Decomposition)?
        .unpack();

    let mut eigenphases = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut lambda = t[(k, k)];
        if lambda.im.abs() < EIGEN_IMAG_FLOOR {
            lambda.im = 0.0;
        }
        let phase = lambda.im.atan2(lambda.re);
        if phase < -PI + BRANCH_CUT_TOL {
            return Err(Error::DegenerateBranch { phase });
        }
        eigenphases.push(phase);
    }

    let scale = -hbar / spec.duration;
    let energies = DVector::from_iterator(
        dim,
        eigenphases.iter().map(|p| Complex64::new(scale * p, 0.0)),
    );
    let raw = &q * CMatrix::from_diagonal(&energies) * q.adjoint();
    let generator = Generator::hermitian_part(&raw, spec.time_index, "H_S".to_string());

    let reproduced = unitary_from_generator(&generator, spec.duration, hbar)?;
    let deviation = phase_aligned_max_diff(reproduced.matrix(), target)?;
    if !(deviation < ROUND_TRIP_TOL) {
        return Err(Error::Decomposition);
    }

    let spectrum = generator.spectrum();
    let lo = spectrum.first().copied().unwrap_or(0.0);
    let hi = spectrum.last().copied().unwrap_or(0.0);
    eigenphases.sort_by(f64::total_cmp);

    Ok(SynthesizedShortcut {
        spectral_cost: lo.abs().max(hi.abs()),
        bandwidth_cost: (hi - lo) / 2.0,
        generator,
        target: spec.target.clone(),
        duration: spec.duration,
        hbar,
        eigenphases,
    })
}

/// Bures angle `arccos(F)`, snapped to zero for coincident states.
pub fn bures_angle(fidelity: f64) -> f64 {
    if fidelity > 1.0 - NO_DISPLACEMENT_TOL {
        0.0
    } else {
        fidelity.clamp(0.0, 1.0).acos()
    }
}

pub fn qsl_check(shortcut: &SynthesizedShortcut, psi_initial: &QuantumState) -> Result<QslReport> {
    check_dim(shortcut.generator.dim(), psi_initial.dim())?;
    let (mean, delta_e) = energy_stats(psi_initial, &shortcut.generator)?;
    let ground = shortcut.generator.spectrum()[0];
    let psi_final = shortcut.target.apply(psi_initial)?;
    let final_fidelity = fidelity(psi_initial, &psi_final)?;

    let hbar = shortcut.hbar;
    let bound = hbar * bures_angle(final_fidelity);
    let product = delta_e * shortcut.duration;
    let regime = if final_fidelity > 1.0 - NO_DISPLACEMENT_TOL {
        QslRegime::NoDisplacement
    } else if final_fidelity < ORTHOGONAL_TOL {
        QslRegime::Orthogonal
    } else {
        QslRegime::Partial
    };

    Ok(QslReport {
        delta_e,
        mean_e: mean - ground,
        duration: shortcut.duration,
        bound,
        orthogonal_bound: hbar * FRAC_PI_2,
        product,
        margin: product - bound,
        satisfied: product >= bound - QSL_SLACK,
        final_fidelity,
        regime,
    })
}

/// Shortest duration compatible with the speed limit for an energy budget:
/// `hbar * arccos(|<psi_i|psi_f>|) / budget`.
pub fn minimal_duration(
    psi_i: &QuantumState,
    psi_f: &QuantumState,
    energy_budget: f64,
    hbar: f64,
) -> Result<f64> {
    if !(energy_budget > 0.0) {
        return Err(Error::NonPositiveBudget(energy_budget));
    }
    Ok(hbar * bures_angle(fidelity(psi_i, psi_f)?) / energy_budget)
}

pub fn apply_shortcut(
    psi: &QuantumState,
    shortcut: &SynthesizedShortcut,
) -> Result<(QuantumState, QslReport)> {
    let report = qsl_check(shortcut, psi)?;
    Ok((shortcut.target.apply(psi)?, report))
}
