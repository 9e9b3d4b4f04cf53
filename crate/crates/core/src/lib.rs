//! Metrology of path-entangled twin Fock states `|m::m'>` read out by parity
//! detection in a two-mode interferometer with photon loss in each arm.
//!
//! The crate builds the lossy output density matrix (closed form and a
//! purification oracle), the beam-splitter-transformed parity operator, the
//! fringe coefficients `K1`, `K2`, and from them visibility, phase
//! sensitivity and state recommendations.

pub mod error;
pub mod metrology;
pub mod numerics;
pub mod parity;
pub mod sparse;
pub mod state_channel;
pub mod strategy;

pub use error::{Error, Result};
pub use metrology::{
    beats_snl_criterion, limits, optimal_sensitivity, sensitivity, visibility, ExpansionRegime, Limits,
    SensitivityPoint, Uncertainty, VisibilityReport,
};
pub use parity::{
    fringe_coefficients, parity_expectation, parity_expectation_trace, parity_operator, FringeCoefficients,
    ParityOperator,
};
pub use sparse::{ModePair, SparseOperator};
pub use state_channel::{
    lossy_density_matrix, oracle_density_matrix, LossPair, Phase, TwinFockState, TwoModeDensityMatrix,
};
pub use strategy::{
    recommend, snl_crossover_loss, sweep, Constraint, Objective, Quantity, RecommendationEntry, SweepGrid, SweepRow,
};
