//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here works with `DMatrix<Complex64>` at desk scale (dimension up
//! to a few dozen). Hermitian exponentials go through an eigendecomposition so
//! that propagators are unitary up to round-off.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DEFAULT_HBAR: f64 = 1.0;

/// Numeric tolerances used when validating inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub unitary: f64,
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            unitary: 1e-10,
            norm: 1e-10,
        }
    }
}

impl Tolerances {
    /// Same value for every check.
    pub fn uniform(tol: f64) -> Self {
        Self {
            hermitian: tol,
            unitary: tol,
            norm: tol,
        }
    }
}

/// Identifier of a time coordinate `t^I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeIndex(pub usize);

impl std::fmt::Display for TimeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// Unit-norm amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(CVector::from_vec(amplitudes), Tolerances::default().norm)
    }

    pub fn from_vector(amplitudes: CVector, norm_tol: f64) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::DimensionTooSmall(amplitudes.len()));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm * norm - 1.0).abs() > norm_tol {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = CVector::from_vec(amplitudes);
        if v.len() < 2 {
            return Err(Error::DimensionTooSmall(v.len()));
        }
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    /// Computational basis state `|k>`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if k >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k + 1,
            });
        }
        let mut v = CVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    /// Wraps a vector already known to be unit norm up to round-off.
    pub(crate) fn from_unit(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Hermitian operator generating translations along one time coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    matrix: CMatrix,
    time_index: TimeIndex,
    label: String,
}

impl Generator {
    pub fn new(matrix: CMatrix, time_index: TimeIndex, label: impl Into<String>) -> Result<Self> {
        Self::with_tolerance(matrix, time_index, label, Tolerances::default().hermitian)
    }

    pub fn with_tolerance(
        matrix: CMatrix,
        time_index: TimeIndex,
        label: impl Into<String>,
        hermitian_tol: f64,
    ) -> Result<Self> {
        let label = label.into();
        check_square(&matrix)?;
        if matrix.nrows() < 2 {
            return Err(Error::DimensionTooSmall(matrix.nrows()));
        }
        let deviation = hermiticity_deviation(&matrix);
        if !(deviation < hermitian_tol) {
            return Err(Error::NonHermitianInput { label, deviation });
        }
        Ok(Self {
            matrix,
            time_index,
            label,
        })
    }

    /// Builds a generator from the Hermitian part `(M + M^dagger) / 2`.
    pub(crate) fn hermitian_part(matrix: &CMatrix, time_index: TimeIndex, label: String) -> Self {
        Self {
            matrix: (matrix + matrix.adjoint()).unscale(2.0),
            time_index,
            label,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn time_index(&self) -> TimeIndex {
        self.time_index
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same operator, rebound to another time coordinate.
    pub fn rebind(&self, time_index: TimeIndex) -> Self {
        Self {
            time_index,
            ..self.clone()
        }
    }

    /// Real eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut values: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }
}

/// Unitary evolution operator accumulated over `elapsed` time.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    matrix: CMatrix,
    elapsed: f64,
}

impl Propagator {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
            elapsed: 0.0,
        }
    }

    /// Validates unitarity of an arbitrary matrix.
    pub fn from_matrix(matrix: CMatrix, elapsed: f64, unitary_tol: f64) -> Result<Self> {
        check_square(&matrix)?;
        let deviation = unitarity_deviation(&matrix);
        if !(deviation < unitary_tol) {
            return Err(Error::NonUnitaryTarget { deviation });
        }
        Ok(Self { matrix, elapsed })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// `later * self`: apply `self` first, then `later`.
    pub fn then(&self, later: &Propagator) -> Result<Propagator> {
        check_dim(self.dim(), later.dim())?;
        Ok(Propagator {
            matrix: &later.matrix * &self.matrix,
            elapsed: self.elapsed + later.elapsed,
        })
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        check_dim(self.dim(), state.dim())?;
        Ok(QuantumState::from_unit(&self.matrix * state.amplitudes()))
    }
}

/// `exp(-i H t / hbar)` via the eigendecomposition of `H`.
pub fn unitary_from_generator(h: &Generator, t: f64, hbar: f64) -> Result<Propagator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidDuration(t));
    }
    let eig = SymmetricEigen::new(h.matrix.clone());
    let phases = eig
        .eigenvalues
        .map(|lambda| Complex64::from_polar(1.0, -lambda * t / hbar));
    let v = &eig.eigenvectors;
    let matrix = v * CMatrix::from_diagonal(&phases) * v.adjoint();
    Ok(Propagator { matrix, elapsed: t })
}

/// Piecewise-constant time-ordered exponential. Later segments multiply on the
/// left; an empty schedule yields the identity of dimension `dim`.
pub fn time_ordered_exponential<'a, I>(dim: usize, schedule: I, hbar: f64) -> Result<Propagator>
where
    I: IntoIterator<Item = (&'a Generator, f64)>,
{
    let mut acc = Propagator::identity(dim);
    for (generator, duration) in schedule {
        check_dim(dim, generator.dim())?;
        let step = unitary_from_generator(generator, duration, hbar)?;
        acc = acc.then(&step)?;
    }
    Ok(acc)
}

/// `|<a|b>|`, clamped to `[0, 1]`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// Mean energy and energy uncertainty of `psi` under `h`.
pub fn energy_stats(psi: &QuantumState, h: &Generator) -> Result<(f64, f64)> {
    check_dim(h.dim(), psi.dim())?;
    let h_psi = h.matrix() * psi.amplitudes();
    let mean = psi.amplitudes().dotc(&h_psi).re;
    let second = h_psi.norm_squared();
    let variance = (second - mean * mean).max(0.0);
    Ok((mean, variance.sqrt()))
}

/// Entrywise maximum of `|a - b|` (phase-sensitive).
pub fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_same_shape(a, b)?;
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// Entrywise maximum of `|a - e^{i phi} b|` where `phi` aligns the two
/// matrices through the phase of `tr(b^dagger a)`.
pub fn phase_aligned_max_diff(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_same_shape(a, b)?;
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max))
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_entry_diff(m, &m.adjoint()).unwrap_or(f64::INFINITY)
}

pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_entry_diff(&(m.adjoint() * m), &CMatrix::identity(n, n)).unwrap_or(f64::INFINITY)
}

pub fn pauli_x() -> CMatrix {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    CMatrix::from_row_slice(2, 2, &[o, l, l, o])
}

pub fn pauli_y() -> CMatrix {
    let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    CMatrix::from_row_slice(2, 2, &[o, -i, i, o])
}

pub fn pauli_z() -> CMatrix {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    CMatrix::from_row_slice(2, 2, &[l, o, o, -l])
}

pub fn hadamard() -> CMatrix {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn check_same_shape(a: &CMatrix, b: &CMatrix) -> Result<()> {
    check_dim(a.nrows(), b.nrows())?;
    check_dim(a.ncols(), b.ncols())
}
