//! Performance-curve modeling for correlation-based auditory attention
//! decoding (AAD).
//!
//! Given labeled (attended, unattended) correlation coefficients measured at a
//! single decision window length, [`model::model_curve`] predicts the decoding
//! accuracy at any other window length, with BCa bootstrap confidence
//! intervals. [`synthetic`] provides a Monte Carlo oracle with known latent
//! correlations and [`evaluation`] compares predictions against ground truth.

// `!(x > 0.0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod error;
pub mod evaluation;
pub mod model;
pub mod rng;
pub mod stats;
pub mod synthetic;

pub use bootstrap::{bca_interval, CiConfig, CiResult};
pub use error::{Error, Result};
pub use evaluation::{EvaluationReport, GroundTruthCurve};
pub use model::{
    estimate_model, extrapolate, model_curve, predict_accuracy, CorrelationPair, CurvePoint, DecisionVariableModel,
    LabeledCorrelationSet, PerformanceCurve,
};
pub use synthetic::{GeneratorMode, SyntheticScenario};
