use crate::error::{Error, Result};
use crate::schema::{Subtask, SubtaskLabels};

/// Binary confusion counts for one label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (gold, pred) in pairs {
            match (gold, pred) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn positive_f1(&self) -> f64 {
        f1(self.tp, self.fp, self.fn_)
    }

    /// F1 with the negative class treated as positive.
    pub fn negative_f1(&self) -> f64 {
        f1(self.tn, self.fn_, self.fp)
    }
}

/// `2tp / (2tp + fp + fn)`, and 0 when the denominator is 0.
pub fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

/// Per-label F1 in schema order.
///
/// For the binary subtask the single entry is the mean of the polarized and
/// non-polarized class F1; for the multi-label subtasks each entry is the
/// label's positive-class F1.
pub fn per_label_f1(subtask: Subtask, gold: &[SubtaskLabels], decisions: &[Vec<bool>]) -> Vec<f64> {
    assert_eq!(gold.len(), decisions.len(), "gold and decisions must align");
    (0..subtask.width())
        .map(|j| {
            let c =
                Confusion::from_pairs(gold.iter().zip(decisions).map(|(g, d)| (g.get(j), d[j])));
            if subtask.is_multilabel() {
                c.positive_f1()
            } else {
                (c.positive_f1() + c.negative_f1()) / 2.0
            }
        })
        .collect()
}

/// Unweighted mean of [`per_label_f1`].
pub fn macro_f1_from_decisions(
    subtask: Subtask,
    gold: &[SubtaskLabels],
    decisions: &[Vec<bool>],
) -> f64 {
    let per = per_label_f1(subtask, gold, decisions);
    per.iter().sum::<f64>() / per.len() as f64
}

/// ROC AUC via the Mann-Whitney rank sum with mid-ranks for ties.
///
/// Equals the probability that a random positive scores above a random
/// negative, counting ties as one half.
pub fn roc_auc(scores: &[f64], gold: &[bool]) -> Result<f64> {
    if scores.len() != gold.len() {
        return Err(Error::Dimension {
            expected: gold.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores"));
    }
    let positives = gold.iter().filter(|g| **g).count();
    let negatives = gold.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuc {
            positives,
            negatives,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum of positives keeps mid-ranks integral
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the mid-rank (i + j + 2) / 2
        let twice_mid = (i + j + 2) as u128;
        let pos_in_group = order[i..=j].iter().filter(|&&k| gold[k]).count() as u128;
        twice_rank_sum += twice_mid * pos_in_group;
        i = j + 1;
    }
    let p = positives as u128;
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2 * positives * negatives) as f64)
}
