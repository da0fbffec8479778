use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_jsonl, write_jsonl};
use crate::schema::{LanguageCode, Subtask};

/// Default decision threshold: a label is predicted when its score exceeds it.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    scores: Vec<f64>,
    decisions: Vec<bool>,
}

impl Prediction {
    /// Scores in [0, 1]; decisions derived at [`DEFAULT_THRESHOLD`].
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        Self::with_decisions(scores, None)
    }

    pub fn with_decisions(scores: Vec<f64>, decisions: Option<Vec<bool>>) -> Result<Self> {
        if scores
            .iter()
            .any(|s| !s.is_finite() || !(0.0..=1.0).contains(s))
        {
            return Err(Error::Validation(format!(
                "scores must lie in [0, 1]: {scores:?}"
            )));
        }
        let decisions = match decisions {
            Some(d) if d.len() != scores.len() => {
                return Err(Error::Dimension {
                    expected: scores.len(),
                    actual: d.len(),
                })
            }
            Some(d) => d,
            None => scores.iter().map(|s| *s > DEFAULT_THRESHOLD).collect(),
        };
        Ok(Prediction { scores, decisions })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn decisions(&self) -> &[bool] {
        &self.decisions
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionLine {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    scores: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decisions: Option<Vec<u8>>,
}

/// Predictions keyed by record id.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    subtask: Subtask,
    entries: BTreeMap<String, (Option<LanguageCode>, Prediction)>,
}

impl PredictionSet {
    pub fn new(subtask: Subtask) -> Self {
        PredictionSet {
            subtask,
            entries: BTreeMap::new(),
        }
    }

    pub fn subtask(&self) -> Subtask {
        self.subtask
    }

    pub fn insert(
        &mut self,
        id: impl Into<String>,
        lang: Option<LanguageCode>,
        pred: Prediction,
    ) -> Result<()> {
        let id = id.into();
        if pred.scores.len() != self.subtask.width() {
            return Err(Error::Schema(format!(
                "prediction {id:?} has {} scores, {} expects {}",
                pred.scores.len(),
                self.subtask,
                self.subtask.width()
            )));
        }
        if self.entries.insert(id.clone(), (lang, pred)).is_some() {
            return Err(Error::DuplicateId(id));
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Prediction> {
        self.entries.get(id).map(|(_, p)| p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<LanguageCode>, &Prediction)> {
        self.entries.iter().map(|(id, (l, p))| (id.as_str(), *l, p))
    }

    pub fn read(path: &Path, subtask: Subtask) -> Result<Self> {
        let mut set = PredictionSet::new(subtask);
        for (line_no, line) in read_jsonl::<PredictionLine>(path)? {
            let at = |e: Error| Error::parse(line_no, e.to_string());
            let lang = line
                .lang
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(at)?;
            let decisions = line
                .decisions
                .map(|d| {
                    d.into_iter()
                        .map(|v| match v {
                            0 => Ok(false),
                            1 => Ok(true),
                            other => Err(Error::Schema(format!("decision {other} is not 0 or 1"))),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()
                .map_err(at)?;
            let pred = Prediction::with_decisions(line.scores, decisions).map_err(at)?;
            set.insert(line.id, lang, pred).map_err(at)?;
        }
        Ok(set)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let lines: Vec<PredictionLine> = self
            .entries
            .iter()
            .map(|(id, (lang, p))| PredictionLine {
                id: id.clone(),
                lang: lang.map(|l| l.as_str().to_string()),
                scores: p.scores.clone(),
                decisions: Some(p.decisions.iter().map(|d| *d as u8).collect()),
            })
            .collect();
        write_jsonl(path, &lines)
    }
}
