//! Tensor-based joint channel and imperfection estimation for RIS-assisted
//! MIMO links, plus the Monte Carlo harness that benchmarks the estimators.
//!
//! The received pilot signal of a RIS-assisted link factors as a trilinear
//! (static imperfections) or quadrilinear (per-frame imperfections) PARAFAC
//! model in the two hop channels, the known activation patterns and the
//! unknown per-element perturbations. This crate provides:
//!
//! * [`tensor`] / [`algebra`] / [`linalg`] — the dense complex tensor and
//!   matrix primitives (unfoldings, Khatri-Rao products, SVD-backed
//!   pseudo-inverse) the estimators are built from;
//! * [`model`] — channel, pattern and imperfection generators and the
//!   received-tensor synthesis for both imperfection models;
//! * [`estimators`] — the iterative ALS estimators, the closed-form per-column
//!   HOSVD estimator, genie-aided bounds, the imperfection-blind baseline and
//!   scaling-ambiguity removal;
//! * [`harness`] — reproducible seeded Monte Carlo sweeps producing NMSE,
//!   iteration, FLOP and runtime statistics.

pub mod algebra;
pub mod config;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod tensor;
pub mod types;

pub use config::{ChannelModel, SystemConfig};
pub use error::{Error, Result};
pub use estimators::{Algorithm, EstimateLti, EstimateSti};
pub use harness::{AggregateResult, ExperimentSpec, ResultRow, SweepAxis};
pub use tensor::DenseTensor;
pub use types::{CMat, CVec, C64};
