//! Relation classification over shortest dependency paths.
//!
//! The pipeline reads SemEval-2010 Task 8 style annotations and CoNLL parses
//! ([`corpus`]), extracts and encodes the shortest dependency path between
//! the two nominals ([`deppath`]), and classifies it with a convolutional
//! network ([`network`]) trained with AdaGrad, optionally with reversed-path
//! negatives ([`training`]). [`infer_eval`] combines predictions for both
//! path directions and computes the macro-averaged F1 score.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which all file formats and tests assume.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod deppath;
pub mod embeddings;
pub mod error;
pub mod infer_eval;
pub mod linalg;
pub mod model;
pub mod network;
pub mod scalar;
pub mod synthetic;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Model = model::Model<f64>;
pub type NetworkParams = network::NetworkParams<f64>;
pub type Gradients = network::Gradients<f64>;
pub type EmbeddingTable = embeddings::EmbeddingTable<f64>;
pub type EvalInstance = infer_eval::EvalInstance<f64>;
pub type Prediction = infer_eval::Prediction<f64>;
pub type TrainingSet = training::TrainingSet<f64>;
pub type FitOutcome = training::FitOutcome<f64>;
