use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EMOTIONS: [&str; 7] = [
    "anger", "disgust", "fear", "sadness", "shame", "joy", "guilt",
];
pub const APPRAISALS: [&str; 5] = [
    "consequences to self",
    "consequences to others",
    "degree of control",
    "degree of responsibility",
    "alignment with social values",
];
pub const EVENTS: [&str; 4] = ["general", "past", "future", "prospective"];

/// Gold targets for one text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppraisalTargets {
    emotions: [f64; 7],
    appraisals: [bool; 5],
    events: [bool; 4],
}

impl AppraisalTargets {
    pub fn new(emotions: [f64; 7], appraisals: [bool; 5], events: [bool; 4]) -> Result<Self> {
        if emotions
            .iter()
            .any(|e| !e.is_finite() || !(0.0..=1.0).contains(e))
        {
            return Err(Error::Validation(format!(
                "emotion targets must lie in [0, 1]: {emotions:?}"
            )));
        }
        Ok(AppraisalTargets {
            emotions,
            appraisals,
            events,
        })
    }

    pub fn emotions(&self) -> &[f64; 7] {
        &self.emotions
    }

    pub fn appraisals(&self) -> &[bool; 5] {
        &self.appraisals
    }

    pub fn events(&self) -> &[bool; 4] {
        &self.events
    }
}

/// Model outputs: emotion intensities and logits for the two binary heads.
/// Also used for the gradient, which has the same shape.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AppraisalOutput {
    pub emotions: [f64; 7],
    pub appraisal_logits: [f64; 5],
    pub event_logits: [f64; 4],
}

impl AppraisalOutput {
    pub const LEN: usize = 16;

    /// Flattened in field order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::LEN);
        v.extend_from_slice(&self.emotions);
        v.extend_from_slice(&self.appraisal_logits);
        v.extend_from_slice(&self.event_logits);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != Self::LEN {
            return Err(Error::Dimension {
                expected: Self::LEN,
                actual: v.len(),
            });
        }
        let mut out = AppraisalOutput::default();
        out.emotions.copy_from_slice(&v[..7]);
        out.appraisal_logits.copy_from_slice(&v[7..12]);
        out.event_logits.copy_from_slice(&v[12..]);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultitaskLossConfig {
    w_mse: f64,
    w_bce: f64,
}

impl Default for MultitaskLossConfig {
    fn default() -> Self {
        MultitaskLossConfig {
            w_mse: 1.0,
            w_bce: 1.0,
        }
    }
}

impl MultitaskLossConfig {
    pub fn new(w_mse: f64, w_bce: f64) -> Result<Self> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !ok(w_mse) || !ok(w_bce) || w_mse + w_bce <= 0.0 {
            return Err(Error::Validation(format!(
                "loss weights must be >= 0 with a positive sum, got ({w_mse}, {w_bce})"
            )));
        }
        Ok(MultitaskLossConfig { w_mse, w_bce })
    }

    pub fn w_mse(&self) -> f64 {
        self.w_mse
    }

    pub fn w_bce(&self) -> f64 {
        self.w_bce
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(z)` against `y`, without forming the
/// probability.
pub(crate) fn bce_with_logits(z: f64, y: bool) -> f64 {
    let y = if y { 1.0 } else { 0.0 };
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Mean BCE over one head and its gradient with respect to the logits.
fn bce_head<const N: usize>(logits: &[f64; N], targets: &[bool; N]) -> (f64, [f64; N]) {
    let n = N as f64;
    let mut loss = 0.0;
    let mut grad = [0.0; N];
    for i in 0..N {
        loss += bce_with_logits(logits[i], targets[i]);
        grad[i] = (sigmoid(logits[i]) - if targets[i] { 1.0 } else { 0.0 }) / n;
    }
    (loss / n, grad)
}

/// `w_mse * MSE(emotions) + w_bce * (BCE(appraisals) + BCE(events))`, each
/// term averaged over its components, with the exact gradient.
pub fn multitask_loss(
    pred: &AppraisalOutput,
    target: &AppraisalTargets,
    cfg: &MultitaskLossConfig,
) -> Result<(f64, AppraisalOutput)> {
    if pred.to_vec().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("multitask prediction"));
    }
    let mut grad = AppraisalOutput::default();
    let mut mse = 0.0;
    for i in 0..7 {
        let d = pred.emotions[i] - target.emotions[i];
        mse += d * d;
        grad.emotions[i] = cfg.w_mse * 2.0 * d / 7.0;
    }
    mse /= 7.0;
    let (bce_a, g_a) = bce_head(&pred.appraisal_logits, &target.appraisals);
    let (bce_e, g_e) = bce_head(&pred.event_logits, &target.events);
    for (g, v) in grad.appraisal_logits.iter_mut().zip(g_a) {
        *g = cfg.w_bce * v;
    }
    for (g, v) in grad.event_logits.iter_mut().zip(g_e) {
        *g = cfg.w_bce * v;
    }
    Ok((cfg.w_mse * mse + cfg.w_bce * (bce_a + bce_e), grad))
}
