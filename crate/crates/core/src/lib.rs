//! Toolkit for multilingual polarization corpora: robustness augmentation,
//! deterministic dataset assembly and validation sampling, shared-task
//! scoring, and appraisal-feature classifiers.

pub mod appraisal;
pub mod assemble;
pub mod augment;
pub mod config;
pub mod error;
pub mod io;
pub mod record;
pub mod schema;
pub mod score;
pub mod seed;

pub use error::{Error, Result};
pub use record::{Dataset, Provenance, Split, TextRecord};
pub use schema::{LanguageCode, Subtask, SubtaskLabels};
