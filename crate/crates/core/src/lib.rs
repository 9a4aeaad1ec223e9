//! Channel assignment for passive multi-channel sniffer networks.
//!
//! The crate maximizes Quality of Monitoring (QoM), the expected number of
//! active users whose transmissions are captured by a sniffer tuned to their
//! channel. Two observation settings are covered:
//!
//! * user-centric: the coverage graph and per-user activity probabilities are
//!   known and the [`solvers`] operate on them directly;
//! * sniffer-centric: only per-slot busy bits are observed and the
//!   [`inference`] routines recover a coverage graph and probabilities first.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the common `f64` instantiation.

pub mod bits;
pub mod error;
pub mod experiment;
pub mod inference;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod qom;
pub mod scalar;
pub mod simgen;
pub mod solvers;

pub use bits::BitMatrix;
pub use error::{Error, Result};
pub use model::{
    Assignment, InferenceScheme, MergeMode, Position, Scenario, TraceKind, TraceMatrix, UserSpec,
};
pub use scalar::Scalar;

pub type CoverageGraph = model::CoverageGraph<f64>;
pub type CoverageGraphF32 = model::CoverageGraph<f32>;
pub type InferredModel = model::InferredModel<f64>;
pub type InferredModelF32 = model::InferredModel<f32>;
pub type QomReport = qom::QomReport<f64>;
pub type LpSolution = solvers::LpSolution<f64>;
pub type ObservationStats = inference::ObservationStats<f64>;
