//! Appraisal-side models: the multitask MSE + BCE loss used to train the
//! appraisal estimator, and per-language logistic regression over feature
//! vectors.

mod features;
mod loss;
mod lr;

pub use features::{align_labels, check_features, read_features, write_features, FeatureVector};
pub use loss::{
    multitask_loss, AppraisalOutput, AppraisalTargets, MultitaskLossConfig, APPRAISALS, EMOTIONS,
    EVENTS,
};
pub use lr::{
    evaluate_per_language, lr_predict, lr_train, split_80_20, split_indices, Labeled, LrConfig,
    LrModel, MIN_LANGUAGE_EXAMPLES,
};
