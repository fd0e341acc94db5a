//! Quantum supermaze toolkit: multi-time evolution, shortcut synthesis under
//! the quantum speed limit, Pareto routing on state graphs, topological
//! complexity, relaxation networks, and Apollonian packings.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod descartes;
pub mod error;
pub mod multitime;
pub mod quantum;
pub mod relaxation;
pub mod scenario;
pub mod shortcut;
pub mod supermaze;
pub mod topology;

pub use error::{Error, Result};
pub use quantum::{CMatrix, CVector, Generator, Propagator, QuantumState, TimeIndex, Tolerances};
pub use relaxation::{Level, RateNetwork};
pub use scenario::{load_scenario, ExperimentResult, Scenario, ScenarioError};
pub use shortcut::{QslReport, ShortcutSpec, SynthesizedShortcut};
pub use supermaze::{EdgeKind, StateNode, SupermazeEdge, SupermazeGraph};
