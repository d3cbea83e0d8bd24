//! Analysis of probabilistic quantum teleportation over arbitrary
//! bipartite channels.
//!
//! The shared entangled pair is encoded as an N×N complex coefficient
//! matrix. From it the crate computes the faithful-teleportation
//! probability, synthesizes von-Neumann measurement bases that match the
//! channel's entanglement, verifies the matching condition against an
//! independent brute-force tripartite simulation, and numerically
//! certifies that a two-dimensional partially entangled channel admits at
//! most two faithful vectors per orthonormal measurement basis.
//!
//! Module map:
//! - [`numerics`]: dense complex-matrix kernel (product, SVD, inverse, ...)
//! - [`channel`]: the entangled resource and its derived quantities
//! - [`measurement`]: measurement-operator synthesis, matching, completion
//! - [`simulator`]: protocol execution and the tripartite oracle
//! - [`frames`]: local unitary frame changes and invariance checks
//! - [`eta_search`]: the N = 2 case analysis and the faithful-count certificate
//! - [`io`]: JSON/file schemas for the CLI and external tools

pub mod channel;
pub mod error;
pub mod eta_search;
pub mod frames;
pub mod io;
pub mod measurement;
pub mod numerics;
pub mod simulator;

pub use channel::{QuantumChannel, SchmidtForm};
pub use error::{Error, Result};
pub use measurement::{MatchReport, MeasurementBasis, MeasurementOperator, RecoveryUnitary};
pub use numerics::{Complex64, ComplexMatrix, SvdResult, DEFAULT_TOL};
pub use simulator::{DensityMatrix, OutcomeRecord, PureState, QuantumState, TeleportationReport};
