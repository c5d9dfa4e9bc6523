//! Feature-form extraction, scoring, and evaluation for factoid question
//! answering over dependency-parsed text.
//!
//! The crate turns CoNLL-U-annotated questions and documents into sparse
//! feature vectors across four categories (lexical, syntactic, semantic,
//! structural), scores question/document alignment by per-space overlap,
//! combines category averages into a single feature-form score, and wraps
//! the whole pipeline in a cross-validation evaluation harness with
//! deterministic, seed-driven reports.
//!
//! Modules mirror the pipeline stages:
//!
//! * [`corpus`]: CoNLL-U parsing, JSONL datasets, holdout and k-fold splits.
//! * [`features`]: sparse feature vectors with exact rational weights.
//! * [`lexical`], [`syntactic`], [`semantic`], [`structural`]: extractors.
//! * [`scoring`]: overlap scores, category averages, feature-form scores,
//!   and a small OLS regression.
//! * [`evaluation`]: answer ranking, judging, metrics, feature relevance,
//!   and cross-validation.
//! * [`resources`]: built-in stopword list, headword rules, hypernym
//!   lexicon, design-principle config, and answer-type map.

pub mod corpus;
pub mod evaluation;
pub mod lexical;
pub mod pipeline;
pub mod resources;
pub mod scoring;
pub mod semantic;
pub mod structural;
pub mod syntactic;
pub mod features;

pub use corpus::{Dataset, Document, QAInstance};
pub use features::{FeatureCategory, FeatureKey, FeatureSpace, FeatureVector, Weight};
