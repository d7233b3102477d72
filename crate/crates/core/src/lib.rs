//! Simulation and analysis of a cell-based photonic physically unclonable
//! function (PUF).
//!
//! The crate is organised bottom-up:
//!
//! - [`jones`]: 2x2 Jones calculus, Haar-random lossless components and
//!   extraction of the `(E_x^2, Δφ)` observables.
//! - [`puf`]: seeded PUF instances made of cells, each cell a shared prefix
//!   path feeding two output arms.
//! - [`encoding`]: the challenge grid, the 24-bit fixed-point encoder and
//!   the bit-index interpretations built from interim responses.
//! - [`dataset`]: bulk challenge-response dataset generation.
//! - [`metrics`]: uniqueness, uniformity, reliability, bit aliasing,
//!   autocorrelation and CRP scatter exports.
//! - [`attack`]: a per-bit neural response predictor and the
//!   training-set-size susceptibility sweep.

pub mod attack;
pub mod dataset;
pub mod encoding;
pub mod error;
pub mod jones;
pub mod metrics;
pub mod puf;

pub use attack::{
    clustered_lower_bound, evaluate_predictor, gradient_check, susceptibility_sweep, train_predictor, AttackConfig,
    AttackResult, Crp, FeatureMode, PredictorModel, SweepPoint,
};
pub use dataset::CrpDataset;
pub use encoding::{
    build_interpretation, encode_response, encode_state, quantize12_fraction, quantize12_phase,
    Bitstring24, GridConfig, Interpretation, ResponseSet,
};
pub use error::{Error, Result};
pub use jones::{JonesMatrix, JonesVector, Observables};
pub use metrics::{autocorrelation, bit_aliasing, crp_scatter, reliability, uniformity, uniqueness};
pub use puf::{CellLayout, CellModel, Output, PufInstance};
