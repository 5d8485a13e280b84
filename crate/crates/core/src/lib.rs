//! Generalized Pólya urns with nonlinear reinforcement: simulation of the
//! urn chain, the mean-field vector field on the simplex, stationary points
//! and their stability, Monte Carlo ensembles and phase diagrams.

// NaN inputs are rejected with `!(x > 0.0)`-style checks throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod field;
pub mod model;
pub mod montecarlo;
pub mod phase;
pub mod poly;
pub mod simplex;
pub mod stationary;
pub mod urn;
pub mod verify;

pub use error::{Result, UrnError};
pub use field::{drift, evaluate, jacobian_reduced, FlowEvaluation, VectorField};
pub use model::{Family, ModelSpec};
pub use montecarlo::{
    classify_limit, noise_positivity_check, run_ensemble, EnsembleConfig, EnsembleSummary,
    LimitCandidate, LimitClassification, Tolerances, Verdict,
};
pub use phase::{boundary_curves, sweep_cyclic, sweep_symmetric, PhaseGrid};
pub use poly::{find_positive_roots, PolyParams, Root, Variant};
pub use simplex::{ReducedCoordinates, SimplexPoint};
pub use stationary::{
    beta0, beta1, classify_stationary, cyclic_center_stability, cyclic_stationary_search,
    enumerate_stationary_points, phase_symmetric, two_type_root, PhaseVerdict, Stability,
    StationaryPoint, SymmetricPhase,
};
pub use urn::{
    simulate, step, transition_probabilities, SimulationParams, TrajectoryRecord, UrnState,
};
