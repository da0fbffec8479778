use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::metrics::{per_label_f1, roc_auc};
use super::predictions::{Prediction, PredictionSet};
use super::table::{fmt4, MetricTable};
use crate::error::{Error, Result};
use crate::record::Dataset;
use crate::schema::{LanguageCode, Subtask, SubtaskLabels};

/// Scores for one language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageScores {
    pub macro_f1: f64,
    pub per_label_f1: Vec<f64>,
    /// `None` where a label has only one class in the gold data.
    pub auc: Vec<Option<f64>>,
    /// Gold positives per label.
    pub support: Vec<usize>,
    pub records: usize,
}

impl LanguageScores {
    /// Mean AUC over the labels where it is defined.
    pub fn mean_auc(&self) -> Option<f64> {
        mean(self.auc.iter().flatten().copied())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Score aligned gold labels and predictions for one language.
pub fn score_language(
    subtask: Subtask,
    gold: &[SubtaskLabels],
    preds: &[&Prediction],
) -> LanguageScores {
    assert_eq!(gold.len(), preds.len(), "gold and predictions must align");
    let decisions: Vec<Vec<bool>> = preds.iter().map(|p| p.decisions().to_vec()).collect();
    let per_label_f1 = per_label_f1(subtask, gold, &decisions);
    let macro_f1 = per_label_f1.iter().sum::<f64>() / per_label_f1.len() as f64;
    let mut auc = Vec::with_capacity(subtask.width());
    let mut support = Vec::with_capacity(subtask.width());
    for j in 0..subtask.width() {
        let bits: Vec<bool> = gold.iter().map(|g| g.get(j)).collect();
        let scores: Vec<f64> = preds.iter().map(|p| p.scores()[j]).collect();
        support.push(bits.iter().filter(|b| **b).count());
        auc.push(match roc_auc(&scores, &bits) {
            Ok(v) => Some(v),
            Err(Error::UndefinedAuc { .. }) => {
                log::warn!(
                    "AUC undefined for label {:?}: single class",
                    subtask.label_names()[j]
                );
                None
            }
            Err(e) => unreachable!("scores validated on construction: {e}"),
        });
    }
    LanguageScores {
        macro_f1,
        per_label_f1,
        auc,
        support,
        records: gold.len(),
    }
}

/// Per-language scores, rows in canonical language order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub subtask: Subtask,
    pub languages: BTreeMap<LanguageCode, LanguageScores>,
    /// AUC per label over all languages pooled together.
    pub pooled_auc: Vec<Option<f64>>,
}

/// Checkpoint-selection summaries; both AUC variants are reported since
/// either may be meant by "validation AUC".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionSummary {
    pub mean_macro_f1_over_languages: Option<f64>,
    pub mean_auc_over_languages: Option<f64>,
    pub pooled_auc: Option<f64>,
}

impl ScoreReport {
    pub fn from_languages(
        subtask: Subtask,
        rows: Vec<(LanguageCode, Vec<SubtaskLabels>, Vec<&Prediction>)>,
    ) -> Self {
        let mut languages = BTreeMap::new();
        let mut pooled_gold: Vec<SubtaskLabels> = Vec::new();
        let mut pooled_preds: Vec<&Prediction> = Vec::new();
        for (lang, gold, preds) in rows {
            if !lang.supports(subtask) || gold.is_empty() {
                continue;
            }
            languages.insert(lang, score_language(subtask, &gold, &preds));
            pooled_gold.extend(gold);
            pooled_preds.extend(preds);
        }
        let pooled_auc = (0..subtask.width())
            .map(|j| {
                let bits: Vec<bool> = pooled_gold.iter().map(|g| g.get(j)).collect();
                let scores: Vec<f64> = pooled_preds.iter().map(|p| p.scores()[j]).collect();
                roc_auc(&scores, &bits).ok()
            })
            .collect();
        ScoreReport {
            subtask,
            languages,
            pooled_auc,
        }
    }

    pub fn selection_summary(&self) -> SelectionSummary {
        SelectionSummary {
            mean_macro_f1_over_languages: mean(self.languages.values().map(|s| s.macro_f1)),
            mean_auc_over_languages: mean(
                self.languages.values().filter_map(LanguageScores::mean_auc),
            ),
            pooled_auc: mean(self.pooled_auc.iter().flatten().copied()),
        }
    }

    /// `language,label,f1,auc,support`, one row per language and label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("language,label,f1,auc,support\n");
        for (lang, s) in &self.languages {
            for (j, name) in self.subtask.label_names().iter().enumerate() {
                let auc = s.auc[j].map(fmt4).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{lang},{name},{},{auc},{}",
                    fmt4(s.per_label_f1[j]),
                    s.support[j]
                );
            }
        }
        out
    }

    /// `language,macro_f1`, one row per language.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("language,macro_f1\n");
        for (lang, s) in &self.languages {
            let _ = writeln!(out, "{lang},{}", fmt4(s.macro_f1));
        }
        out
    }

    /// Macro F1 as a one-column table keyed by language.
    pub fn macro_f1_table(&self) -> MetricTable {
        let mut t = MetricTable::new(vec!["macro_f1".into()]);
        for (lang, s) in &self.languages {
            t.insert(*lang, vec![Some(s.macro_f1)]).expect("one column");
        }
        t
    }

    /// Per-label F1, languages as rows and labels as columns.
    pub fn label_f1_table(&self) -> MetricTable {
        self.label_table(|s, j| Some(s.per_label_f1[j]))
    }

    /// Per-label AUC, languages as rows and labels as columns.
    pub fn label_auc_table(&self) -> MetricTable {
        self.label_table(|s, j| s.auc[j])
    }

    fn label_table(&self, cell: impl Fn(&LanguageScores, usize) -> Option<f64>) -> MetricTable {
        let names = self
            .subtask
            .label_names()
            .iter()
            .map(|n| n.to_string())
            .collect();
        let mut t = MetricTable::new(names);
        for (lang, s) in &self.languages {
            let row = (0..self.subtask.width()).map(|j| cell(s, j)).collect();
            t.insert(*lang, row).expect("schema width");
        }
        t
    }

    /// Plain-text table: languages as rows, macro F1 and per-label F1 columns.
    pub fn render_table(&self) -> String {
        let mut headers = vec!["Language".to_string(), "Macro F1".to_string()];
        headers.extend(self.subtask.label_names().iter().map(|n| n.to_string()));
        let mut rows = Vec::new();
        for (lang, s) in &self.languages {
            let mut row = vec![lang.to_string(), fmt4(s.macro_f1)];
            row.extend(s.per_label_f1.iter().map(|v| fmt4(*v)));
            rows.push(row);
        }
        super::table::render_plain(&headers, &rows)
    }
}

fn gold_and_preds<'a>(
    preds: &'a PredictionSet,
    gold: &Dataset,
    lang: LanguageCode,
) -> Result<(Vec<SubtaskLabels>, Vec<&'a Prediction>)> {
    if preds.subtask() != gold.subtask() {
        return Err(Error::Schema(format!(
            "{} predictions scored against {} gold data",
            preds.subtask(),
            gold.subtask()
        )));
    }
    let mut labels = Vec::new();
    let mut matched = Vec::new();
    for r in gold.iter().filter(|r| r.lang() == lang) {
        let l = r
            .labels()
            .ok_or_else(|| Error::Validation(format!("gold record {:?} is unlabeled", r.id())))?;
        let p = preds
            .get(r.id())
            .ok_or_else(|| Error::MissingPrediction(r.id().to_string()))?;
        labels.push(*l);
        matched.push(p);
    }
    Ok((labels, matched))
}

/// Macro F1 for one language.
pub fn macro_f1(preds: &PredictionSet, gold: &Dataset, lang: LanguageCode) -> Result<f64> {
    let (labels, matched) = gold_and_preds(preds, gold, lang)?;
    if labels.is_empty() {
        return Err(Error::Validation(format!(
            "no gold records for language {lang}"
        )));
    }
    Ok(score_language(gold.subtask(), &labels, &matched).macro_f1)
}

/// Score every language present in the gold data.
pub fn per_language_report(preds: &PredictionSet, gold: &Dataset) -> Result<ScoreReport> {
    let mut rows = Vec::new();
    for lang in gold.languages() {
        let (labels, matched) = gold_and_preds(preds, gold, lang)?;
        rows.push((lang, labels, matched));
    }
    Ok(ScoreReport::from_languages(gold.subtask(), rows))
}
