use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::features::{check_features, FeatureVector};
use super::loss::{bce_with_logits, sigmoid};
use crate::error::{Error, Result};
use crate::schema::{LanguageCode, Subtask, SubtaskLabels};
use crate::score::{Prediction, PredictionSet, ScoreReport};
use crate::seed::{rng_for, DEFAULT_SEED};

const MODEL_FORMAT: &str = "polarkit-lr/1";

/// Bias used for a label seen with one class only; sigmoid(30) is within
/// 1e-13 of 1.
const SATURATED_BIAS: f64 = 30.0;

/// Languages with fewer examples are skipped by [`evaluate_per_language`].
pub const MIN_LANGUAGE_EXAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrConfig {
    pub seed: u64,
    /// L2 strength; the penalty is `l2 / (2n) * |w|^2` on the mean log-loss.
    pub l2: f64,
    pub max_epochs: usize,
    /// Stop once every gradient component is below this in magnitude.
    pub tolerance: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            seed: DEFAULT_SEED,
            l2: 1.0,
            max_epochs: 100,
            tolerance: 1e-6,
        }
    }
}

impl LrConfig {
    fn check(&self) -> Result<()> {
        if !self.l2.is_finite() || self.l2 < 0.0 {
            return Err(Error::Validation(format!(
                "l2 must be >= 0, got {}",
                self.l2
            )));
        }
        if !self.tolerance.is_finite() || self.tolerance < 0.0 {
            return Err(Error::Validation("tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// One-vs-rest logistic regression, one binary classifier per label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    format: String,
    subtask: Subtask,
    schema_hash: String,
    label_names: Vec<String>,
    dim: usize,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    /// Labels trained on a single class, predicted as that class.
    skipped: Vec<bool>,
    config: LrConfig,
    feature_provenance: String,
    /// Objective value after initialisation and after each epoch, per label.
    loss_history: Vec<Vec<f64>>,
}

impl LrModel {
    /// Assemble a model from explicit parameters.
    pub fn from_parts(
        subtask: Subtask,
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        config: LrConfig,
    ) -> Result<Self> {
        if weights.len() != subtask.width() || bias.len() != subtask.width() {
            return Err(Error::Dimension {
                expected: subtask.width(),
                actual: weights.len().max(bias.len()),
            });
        }
        let dim = weights.first().map_or(0, Vec::len);
        if let Some(w) = weights.iter().find(|w| w.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                actual: w.len(),
            });
        }
        if weights
            .iter()
            .flatten()
            .chain(&bias)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("model parameter"));
        }
        Ok(LrModel {
            format: MODEL_FORMAT.into(),
            subtask,
            schema_hash: subtask.schema_hash(),
            label_names: subtask
                .label_names()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            dim,
            skipped: vec![false; weights.len()],
            loss_history: vec![Vec::new(); weights.len()],
            weights,
            bias,
            config,
            feature_provenance: String::new(),
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.feature_provenance = provenance.into();
        self
    }

    pub fn subtask(&self) -> Subtask {
        self.subtask
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn skipped(&self) -> &[bool] {
        &self.skipped
    }

    pub fn config(&self) -> &LrConfig {
        &self.config
    }

    pub fn feature_provenance(&self) -> &str {
        &self.feature_provenance
    }

    pub fn loss_history(&self) -> &[Vec<f64>] {
        &self.loss_history
    }

    /// Probability per label for one feature vector.
    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| sigmoid(dot(w, x) + b))
            .collect())
    }

    /// Fail unless the model was trained for `subtask`.
    pub fn ensure_subtask(&self, subtask: Subtask) -> Result<()> {
        if self.subtask != subtask {
            return Err(Error::Schema(format!(
                "model was trained for {}, not {subtask}",
                self.subtask
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// Load a model file, rejecting unknown formats and schema mismatches.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: LrModel =
            serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Schema(format!(
                "unsupported model format {:?}",
                model.format
            )));
        }
        if model.schema_hash != model.subtask.schema_hash() {
            return Err(Error::Schema(format!(
                "model schema hash {} does not match {} ({})",
                model.schema_hash,
                model.subtask,
                model.subtask.schema_hash()
            )));
        }
        let rebuilt = LrModel::from_parts(
            model.subtask,
            model.weights.clone(),
            model.bias.clone(),
            model.config,
        )?;
        if rebuilt.dim != model.dim || model.skipped.len() != model.weights.len() {
            return Err(Error::Schema("model dimensions are inconsistent".into()));
        }
        Ok(model)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Fit {
    weights: Vec<f64>,
    bias: f64,
    history: Vec<f64>,
}

/// Objective and gradient at `(w, b)`.
fn objective(xs: &[&[f64]], ys: &[bool], w: &[f64], b: f64, l2: f64) -> (f64, Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = dot(w, x) + b;
        loss += bce_with_logits(z, y);
        let r = sigmoid(z) - if y { 1.0 } else { 0.0 };
        for (g, xi) in gw.iter_mut().zip(x.iter()) {
            *g += r * xi;
        }
        gb += r;
    }
    let reg = l2 / n;
    for (g, wi) in gw.iter_mut().zip(w) {
        *g = *g / n + reg * wi;
    }
    loss = loss / n + 0.5 * reg * dot(w, w);
    (loss, gw, gb / n)
}

/// Full-batch gradient descent from zero.
///
/// The first step is the inverse of a bound on the objective's curvature;
/// a step that would raise the loss is halved and retried, so the recorded
/// losses never increase.
fn fit_binary(xs: &[&[f64]], ys: &[bool], dim: usize, cfg: &LrConfig) -> Fit {
    let n = xs.len() as f64;
    let mean_sq = xs.iter().map(|x| dot(x, x)).sum::<f64>() / n;
    let mut step = 1.0 / (0.25 * (mean_sq + 1.0) + cfg.l2 / n);
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let (mut loss, mut gw, mut gb) = objective(xs, ys, &w, b, cfg.l2);
    let mut history = vec![loss];
    'epochs: for _ in 0..cfg.max_epochs {
        if gw.iter().chain([&gb]).all(|g| g.abs() < cfg.tolerance) {
            break;
        }
        loop {
            let cw: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
            let cb = b - step * gb;
            let (c_loss, c_gw, c_gb) = objective(xs, ys, &cw, cb, cfg.l2);
            if c_loss <= loss {
                (w, b, loss, gw, gb) = (cw, cb, c_loss, c_gw, c_gb);
                history.push(loss);
                break;
            }
            step *= 0.5;
            if step < f64::EPSILON {
                break 'epochs;
            }
        }
    }
    Fit {
        weights: w,
        bias: b,
        history,
    }
}

/// Fit one L2-regularised logistic regression per label.
///
/// A label with a single class in `labels` gets zero weights and a saturated
/// bias towards that class, with a warning.
pub fn lr_train(
    features: &[FeatureVector],
    labels: &[SubtaskLabels],
    cfg: &LrConfig,
) -> Result<LrModel> {
    cfg.check()?;
    if features.len() != labels.len() {
        return Err(Error::Dimension {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    let first = labels
        .first()
        .ok_or_else(|| Error::Validation("no training examples".into()))?;
    let subtask = first.subtask();
    if let Some(l) = labels.iter().find(|l| l.subtask() != subtask) {
        return Err(Error::Schema(format!(
            "mixed label schemas: {subtask} and {}",
            l.subtask()
        )));
    }
    let dim = check_features(features)?;
    let xs: Vec<&[f64]> = features.iter().map(|f| f.values.as_slice()).collect();
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    let mut skipped = Vec::new();
    let mut history = Vec::new();
    for (j, name) in subtask.label_names().iter().enumerate() {
        let ys: Vec<bool> = labels.iter().map(|l| l.get(j)).collect();
        let positives = ys.iter().filter(|y| **y).count();
        if positives == 0 || positives == ys.len() {
            log::warn!(
                "label {name:?} has a single class in training data; predicting it constantly"
            );
            weights.push(vec![0.0; dim]);
            bias.push(if positives == 0 {
                -SATURATED_BIAS
            } else {
                SATURATED_BIAS
            });
            skipped.push(true);
            history.push(Vec::new());
            continue;
        }
        let fit = fit_binary(&xs, &ys, dim, cfg);
        weights.push(fit.weights);
        bias.push(fit.bias);
        skipped.push(false);
        history.push(fit.history);
    }
    let mut model = LrModel::from_parts(subtask, weights, bias, *cfg)?;
    model.skipped = skipped;
    model.loss_history = history;
    Ok(model)
}

/// Probabilities and 0.5-threshold decisions for every feature vector.
pub fn lr_predict(model: &LrModel, features: &[FeatureVector]) -> Result<PredictionSet> {
    let mut set = PredictionSet::new(model.subtask);
    for f in features {
        let probs = model.probabilities(&f.values)?;
        set.insert(f.id.clone(), Some(f.lang), Prediction::from_scores(probs)?)?;
    }
    Ok(set)
}

/// Indices of a seeded shuffle split: the first `ceil(0.8 n)` train, the
/// rest test.
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_for(seed, &["split"]));
    let test = idx.split_off((4 * n).div_ceil(5));
    (idx, test)
}

/// Features and their aligned labels.
pub type Labeled = (Vec<FeatureVector>, Vec<SubtaskLabels>);

pub fn split_80_20(
    features: &[FeatureVector],
    labels: &[SubtaskLabels],
    seed: u64,
) -> Result<(Labeled, Labeled)> {
    if features.len() != labels.len() {
        return Err(Error::Dimension {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    if features.is_empty() {
        return Err(Error::Validation("cannot split an empty set".into()));
    }
    let (train, test) = split_indices(features.len(), seed);
    let take =
        |ix: &[usize]| -> Labeled { ix.iter().map(|&i| (features[i].clone(), labels[i])).unzip() };
    Ok((take(&train), take(&test)))
}

/// Per language: split 80/20, train on the larger part and score the
/// held-out part. Languages under [`MIN_LANGUAGE_EXAMPLES`] are skipped.
pub fn evaluate_per_language(
    features: &[FeatureVector],
    labels: &[SubtaskLabels],
    cfg: &LrConfig,
) -> Result<ScoreReport> {
    if features.len() != labels.len() {
        return Err(Error::Dimension {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    let subtask = labels
        .first()
        .ok_or_else(|| Error::Validation("no examples to evaluate".into()))?
        .subtask();
    check_features(features)?;
    let mut models = Vec::new();
    for lang in LanguageCode::ALL {
        let (fs, ls): Labeled = features
            .iter()
            .zip(labels)
            .filter(|(f, _)| f.lang == lang)
            .map(|(f, l)| (f.clone(), *l))
            .unzip();
        if fs.is_empty() {
            continue;
        }
        if fs.len() < MIN_LANGUAGE_EXAMPLES {
            log::warn!(
                "skipping {lang}: {} examples, need {MIN_LANGUAGE_EXAMPLES}",
                fs.len()
            );
            continue;
        }
        let ((train_f, train_l), (test_f, test_l)) = split_80_20(&fs, &ls, cfg.seed)?;
        let model = lr_train(&train_f, &train_l, cfg)?;
        let preds = lr_predict(&model, &test_f)?;
        models.push((lang, test_f, test_l, preds));
    }
    let rows = models
        .iter()
        .map(|(lang, test_f, test_l, preds)| {
            let matched = test_f
                .iter()
                .map(|f| preds.get(&f.id).expect("predicted every test id"))
                .collect();
            (*lang, test_l.clone(), matched)
        })
        .collect();
    Ok(ScoreReport::from_languages(subtask, rows))
}
