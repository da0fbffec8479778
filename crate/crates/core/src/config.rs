//! Finetuning hyperparameters emitted for the external training run.

use serde::{Deserialize, Serialize};

use crate::schema::Subtask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    Auc,
    MacroF1,
}

impl SelectionMetric {
    /// ROC AUC for binary detection, macro F1 for the multi-label subtasks.
    pub fn for_subtask(subtask: Subtask) -> Self {
        match subtask {
            Subtask::S1 => SelectionMetric::Auc,
            Subtask::S2 | Subtask::S3 => SelectionMetric::MacroF1,
        }
    }
}

// Learning rates are written the way they are usually quoted (2e-5).
fn scientific<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = serde_json::value::RawValue::from_string(format!("{v:e}"))
        .map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub subtask: Subtask,
    pub base_model: String,
    pub quantization: String,
    pub optimizer: String,
    pub lr_scheduler: String,
    #[serde(serialize_with = "scientific")]
    pub learning_rate: f64,
    pub warmup_ratio: f64,
    pub batch_size: u32,
    pub eval_interval_steps: u32,
    pub epochs: u32,
    pub selection_metric: SelectionMetric,
}

impl TrainingConfig {
    pub fn for_subtask(subtask: Subtask) -> Self {
        let base_model = match subtask {
            Subtask::S1 => "Qwen3-32B",
            Subtask::S2 | Subtask::S3 => "Gemma-3-27B-pt",
        };
        TrainingConfig {
            subtask,
            base_model: base_model.into(),
            quantization: "qlora-4bit".into(),
            optimizer: "paged_adamw".into(),
            lr_scheduler: "constant".into(),
            learning_rate: 2e-5,
            warmup_ratio: 0.03,
            batch_size: 1,
            eval_interval_steps: 500,
            epochs: 1,
            selection_metric: SelectionMetric::for_subtask(subtask),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_metric_by_subtask() {
        assert_eq!(
            TrainingConfig::for_subtask(Subtask::S1).selection_metric,
            SelectionMetric::Auc
        );
        assert_eq!(
            TrainingConfig::for_subtask(Subtask::S2).selection_metric,
            SelectionMetric::MacroF1
        );
        assert_eq!(
            TrainingConfig::for_subtask(Subtask::S3).selection_metric,
            SelectionMetric::MacroF1
        );
    }

    #[test]
    fn serialized_defaults() {
        for s in Subtask::ALL {
            let json = TrainingConfig::for_subtask(s).to_json();
            assert!(json.contains("\"learning_rate\": 2e-5"), "{json}");
            assert!(json.contains("\"warmup_ratio\": 0.03"));
            assert!(json.contains("\"batch_size\": 1,"));
            assert!(json.contains("\"eval_interval_steps\": 500"));
            assert!(json.contains("\"epochs\": 1"));
            let back: TrainingConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(back, TrainingConfig::for_subtask(s));
        }
    }
}
