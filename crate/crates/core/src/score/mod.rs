//! Shared-task scoring: per-label F1, per-language macro F1, ROC AUC,
//! baseline deltas and leaderboard percentiles.

mod metrics;
mod percentile;
mod predictions;
mod report;
mod table;

pub use metrics::{f1, macro_f1_from_decisions, per_label_f1, roc_auc, Confusion};
pub use percentile::{parse_leaderboard, rank_percentile, read_leaderboard};
pub use predictions::{Prediction, PredictionSet, DEFAULT_THRESHOLD};
pub use report::{
    macro_f1, per_language_report, score_language, LanguageScores, ScoreReport, SelectionSummary,
};
pub use table::{baseline_delta, fmt4, render_plain, DeltaTable, MetricTable, AVERAGE_ROW};
