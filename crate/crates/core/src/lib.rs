//! Supervised training of submodular scoring functions for extractive
//! multi-document summarization.
//!
//! The crate is organized bottom-up:
//!
//! - [`corpus`]: dataset loading, sentence segmentation, tokenization.
//! - [`features`]: word-group feature maps for sentence pairs and words.
//! - [`scoring`]: pairwise and coverage objectives with incremental gains.
//! - [`greedy`]: budgeted cost-scaled greedy and an exhaustive oracle.
//! - [`rouge`]: ROUGE-1 F, the training losses and target summaries.
//! - [`learner`]: n-slack structural SVM trained by cutting planes.
//! - [`experiment`]: resampling protocol behind the command-line tool.

pub mod corpus;
pub mod error;
pub mod experiment;
pub mod features;
pub mod greedy;
pub mod learner;
pub mod rouge;
pub mod scoring;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
