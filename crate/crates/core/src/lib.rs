//! Sentence-level tagging and evaluation toolkit for two African
//! American English grammatical features: Habitual Be and Multiple
//! Negation.
//!
//! The crate provides tokenization and clause segmentation ([`text`]),
//! a rule-based multiple-negation tagger ([`negation`]), a small
//! lexicon/suffix POS tagger ([`pos`]), a windowed linear classifier
//! for habitual "be" ([`habitual`]), dataset loading, balancing,
//! k-fold splitting and template augmentation ([`dataset`]),
//! classification reports ([`metrics`]), logistic regression by
//! maximum likelihood with Wald inference ([`glm`]), prediction-order
//! bias analyses ([`bias`]), and a chat-model annotation harness
//! ([`llm`]). The `aae-tagger` binary binds these into reproducible
//! command-line runs.
//!
//! Numeric code in [`glm`] is generic over the scalar type via
//! `num-traits`; the aliases below pin the common `f64` (and `f32`)
//! instantiations.

pub mod bias;
pub mod dataset;
pub mod glm;
pub mod habitual;
pub mod llm;
pub mod metrics;
pub mod negation;
pub mod pos;
pub mod text;

/// Double-precision design matrix, the default for all analyses.
pub type DesignMatrix64 = glm::DesignMatrix<f64>;
/// Single-precision design matrix for memory-constrained fits.
pub type DesignMatrix32 = glm::DesignMatrix<f32>;
/// Double-precision fit result.
pub type FitResult64 = glm::FitResult<f64>;
/// Single-precision fit result.
pub type FitResult32 = glm::FitResult<f32>;
