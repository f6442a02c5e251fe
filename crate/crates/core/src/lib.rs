//! Modified trace distance of coherence.
//!
//! The crate computes `min_{p >= 0, delta incoherent} ||rho - p delta||_tr`
//! exactly on qubits and pure states, numerically on arbitrary density
//! matrices, and checks the exact values against dual certificates. The
//! [`experiments`] module reproduces how often the measure saturates at one
//! for Haar-random states of fixed rank.

// `!(x >= 0.0)` and friends also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod solver;
pub mod states;
pub mod verification;

pub use closed_forms::{
    close_phase_polygon, dual_certificate_pure, l1_coherence, pure_mod_trace, pure_optimal_witness,
    qubit_mod_trace, qubit_optimal_set, verify_dual, witness_eigenpair, DualCertificate,
    IncoherentWitness,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition, HermitianMatrix, C64};
pub use solver::{
    mod_trace_distance, subgradient_step, trace_distance_coherence, SolverOptions, SolverResult,
    StepSchedule,
};
pub use states::{
    block_direct_sum, canonicalize, haar_pure, random_density, DensityMatrix, DiagonalState,
    PureState, SampleStream,
};
