//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use polarkit::appraisal::{
    multitask_loss, AppraisalOutput, AppraisalTargets, FeatureVector, MultitaskLossConfig,
};
use polarkit::{Dataset, LanguageCode, Split, Subtask, SubtaskLabels, TextRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-language macro F1 of the submitted system.
pub const SYSTEM_F1_CSV: &str = "\
language,S1,S2,S3
amh,0.6619,0.5116,0.4310
arb,0.8348,0.6279,0.5157
ben,0.8415,0.3050,0.1272
deu,0.7398,0.5399,0.4044
eng,0.8058,0.4519,0.3697
fas,0.7690,0.5250,0.3208
hau,0.7401,0.1689,0.0000
hin,0.7974,0.7573,0.7453
ita,0.7303,0.3019,-
khm,0.6293,0.6323,0.2482
mya,0.8788,0.6835,-
nep,0.8915,0.8026,0.5669
ori,0.8013,0.4628,0.1227
pan,0.7736,0.3734,0.4933
pol,0.8158,0.5350,-
rus,0.8077,0.4952,-
spa,0.7788,0.6256,0.3965
swa,0.7658,0.4226,0.4570
tel,0.8818,0.2573,0.2143
tur,0.8008,0.5692,0.4125
urd,0.7743,0.7791,0.8108
zho,0.9237,0.8199,0.4912
";

/// Per-language difference to the official baseline. Languages without
/// subtask 3 data are absent from the S3 column.
pub const BASELINE_DELTA_CSV: &str = "\
language,S1,S2,S3
amh,-0.0532,0.1400,-0.0123
arb,0.0391,0.1424,0.1255
ben,-0.0113,0.0163,0.0404
deu,0.0684,0.1321,0.0559
eng,0.0256,0.1186,-0.0403
fas,-0.0734,0.0624,0.1204
hau,-0.0352,-0.0349,-0.7456
hin,0.0595,-0.0338,0.5105
ita,0.0530,-0.0740,-
khm,-0.0299,0.0055,-0.3613
mya,0.0578,0.2063,-
nep,0.0117,0.0807,0.4355
ori,0.0248,-0.0972,-0.2614
pan,-0.0162,0.0084,0.0372
pol,0.0917,0.0859,-
rus,0.0620,-0.0952,-
spa,0.0522,0.0321,-0.1123
swa,0.0087,-0.0191,0.2365
tel,0.2378,-0.0572,-0.4595
tur,0.1051,0.0984,-0.3568
urd,-0.0147,0.0664,0.2792
zho,0.0546,0.1502,0.4912
";

/// Reported averages of the delta columns.
pub const REPORTED_DELTA_AVERAGES: [f64; 3] = [0.0326, 0.0425, -0.0008];

/// Baseline table reconstructed as system minus delta, as CSV.
pub fn baseline_csv() -> String {
    let mut out = String::from("language,S1,S2,S3\n");
    for (sys, delta) in SYSTEM_F1_CSV
        .lines()
        .skip(1)
        .zip(BASELINE_DELTA_CSV.lines().skip(1))
    {
        let s: Vec<&str> = sys.split(',').collect();
        let d: Vec<&str> = delta.split(',').collect();
        assert_eq!(s[0], d[0]);
        out.push_str(s[0]);
        for j in 1..4 {
            let cell = match (s[j].parse::<f64>(), d[j].parse::<f64>()) {
                (Ok(a), Ok(b)) => format!("{}", a - b),
                _ => "-".to_string(),
            };
            out.push(',');
            out.push_str(&cell);
        }
        out.push('\n');
    }
    out
}

/// Binary corpus with `per_cell` records in every (language, label) cell.
pub fn binary_corpus(per_cell: usize) -> Dataset {
    let mut records = Vec::new();
    for lang in LanguageCode::ALL {
        for polarized in [true, false] {
            for i in 0..per_cell {
                let id = format!("{lang}-{}-{i}", u8::from(polarized));
                let text =
                    format!("{lang} text {i} polarized={polarized} contact user{i}@mail.example");
                records.push(
                    TextRecord::original(
                        id,
                        &text,
                        lang,
                        Some(SubtaskLabels::binary(polarized)),
                        Split::Train,
                    )
                    .unwrap(),
                );
            }
        }
    }
    Dataset::new(Subtask::S1, records).unwrap()
}

/// Multi-label records for one language, each label set independently with
/// its probability in `freqs`.
pub fn multilabel_language(
    subtask: Subtask,
    lang: LanguageCode,
    n: usize,
    freqs: &[f64],
    seed: u64,
) -> Vec<TextRecord> {
    assert_eq!(freqs.len(), subtask.width());
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let bits: Vec<bool> = freqs.iter().map(|f| r.gen_bool(*f)).collect();
            let labels = SubtaskLabels::from_bits(subtask, &bits).unwrap();
            TextRecord::original(
                format!("{lang}-{i}"),
                &format!("{lang} sample {i}"),
                lang,
                Some(labels),
                Split::Train,
            )
            .unwrap()
        })
        .collect()
}

/// Exhaustive pairwise AUC: positives ranked above negatives, ties as one half.
pub fn pairwise_auc(scores: &[f64], gold: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, gi) in gold.iter().enumerate() {
        for (j, gj) in gold.iter().enumerate() {
            if *gi && !*gj {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// F1 from explicit precision and recall, zero when undefined.
pub fn f1_from_scratch(gold: &[bool], pred: &[bool]) -> f64 {
    let tp = gold.iter().zip(pred).filter(|(g, p)| **g && **p).count() as f64;
    let predicted = pred.iter().filter(|p| **p).count() as f64;
    let actual = gold.iter().filter(|g| **g).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / predicted;
    let recall = tp / actual;
    2.0 * precision * recall / (precision + recall)
}

/// Macro F1 recomputed without the library: both classes for subtask 1,
/// the positive class per label otherwise.
pub fn macro_f1_from_scratch(subtask: Subtask, gold: &[SubtaskLabels], pred: &[Vec<bool>]) -> f64 {
    let per: Vec<f64> = (0..subtask.width())
        .map(|j| {
            let g: Vec<bool> = gold.iter().map(|l| l.get(j)).collect();
            let p: Vec<bool> = pred.iter().map(|d| d[j]).collect();
            if subtask == Subtask::S1 {
                let ng: Vec<bool> = g.iter().map(|b| !b).collect();
                let np: Vec<bool> = p.iter().map(|b| !b).collect();
                (f1_from_scratch(&g, &p) + f1_from_scratch(&ng, &np)) / 2.0
            } else {
                f1_from_scratch(&g, &p)
            }
        })
        .collect();
    per.iter().sum::<f64>() / per.len() as f64
}

/// Random loss configuration: emotions around [0, 1], logits in [-8, 8].
pub fn random_loss_case(
    r: &mut ChaCha8Rng,
) -> (AppraisalOutput, AppraisalTargets, MultitaskLossConfig) {
    let mut pred = AppraisalOutput::default();
    for e in pred.emotions.iter_mut() {
        *e = r.gen_range(-0.5..1.5);
    }
    for z in pred
        .appraisal_logits
        .iter_mut()
        .chain(pred.event_logits.iter_mut())
    {
        *z = r.gen_range(-8.0..8.0);
    }
    let emotions: [f64; 7] = std::array::from_fn(|_| r.gen_range(0.0..=1.0));
    let appraisals: [bool; 5] = std::array::from_fn(|_| r.gen());
    let events: [bool; 4] = std::array::from_fn(|_| r.gen());
    let target = AppraisalTargets::new(emotions, appraisals, events).unwrap();
    let cfg = loop {
        if let Ok(c) = MultitaskLossConfig::new(r.gen_range(0.0..2.0), r.gen_range(0.0..2.0)) {
            break c;
        }
    };
    (pred, target, cfg)
}

/// Relative error between the analytic gradient and central differences
/// with step `h`: `|a - n| / max(|a|, |n|)` over the whole gradient vector.
pub fn gradient_relative_error(
    pred: &AppraisalOutput,
    target: &AppraisalTargets,
    cfg: &MultitaskLossConfig,
    h: f64,
) -> f64 {
    let (_, grad) = multitask_loss(pred, target, cfg).unwrap();
    let analytic = grad.to_vec();
    let base = pred.to_vec();
    let numeric: Vec<f64> = (0..base.len())
        .map(|i| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[i] += h;
            minus[i] -= h;
            let lp = multitask_loss(&AppraisalOutput::from_slice(&plus).unwrap(), target, cfg)
                .unwrap()
                .0;
            let lm = multitask_loss(&AppraisalOutput::from_slice(&minus).unwrap(), target, cfg)
                .unwrap()
                .0;
            (lp - lm) / (2.0 * h)
        })
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
    let scale = norm(&analytic).max(norm(&numeric));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Points in [-3, 3]^2 labeled by `x + y > 0`, at least `margin` from the
/// separating line.
pub fn separable_points(
    n: usize,
    margin: f64,
    seed: u64,
) -> (Vec<FeatureVector>, Vec<SubtaskLabels>) {
    let mut r = rng(seed);
    let mut feats = Vec::new();
    let mut labels = Vec::new();
    while feats.len() < n {
        let x: f64 = r.gen_range(-3.0..3.0);
        let y: f64 = r.gen_range(-3.0..3.0);
        let d = (x + y) / std::f64::consts::SQRT_2;
        if d.abs() < margin {
            continue;
        }
        feats.push(FeatureVector {
            id: format!("p{}", feats.len()),
            lang: LanguageCode::Eng,
            values: vec![x, y],
        });
        labels.push(SubtaskLabels::binary(d > 0.0));
    }
    (feats, labels)
}

/// Uniform noise features with balanced, independent binary labels.
pub fn noise_features(
    lang: LanguageCode,
    n: usize,
    dim: usize,
    seed: u64,
) -> (Vec<FeatureVector>, Vec<SubtaskLabels>) {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let values = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
            (
                FeatureVector {
                    id: format!("{lang}-{i}"),
                    lang,
                    values,
                },
                SubtaskLabels::binary(i % 2 == 0),
            )
        })
        .unzip()
}

const FRAGMENTS: &[&str] = &[
    "Hello",
    "WORLD",
    "straße",
    "İstanbul",
    "ΣΊΣΥΦΟΣ",
    "ﬁne",
    "Привет",
    "مرحبا",
    "नमस्ते",
    "你好",
    "ሰላም",
    "ਸਤ ਸ੍ਰੀ ਅਕਾਲ",
    "ଓଡ଼ିଆ",
    "ខ្មែរ",
    "မြန်မာ",
    "కాదు",
    "Türkçe",
    "جی",
    "polar",
    "mail",
    "a.b@example.org",
    "@user_1",
    "+1 (555) 123-4567",
    "555-0199",
    "[EMAIL]",
    "[USER]",
    "[PHONE]",
    "@@x",
    "x@y",
    "12",
    "٣٤٥٦٧٨٩٠",
    "e\u{301}",
    "ǅ",
    "ß",
    "ﬀ",
    " ",
    "  ",
    "\t",
    ",",
    ".",
    "!",
    "🙂",
];

/// Random text assembled from multilingual words, PII-looking tokens, tags
/// and casing edge cases.
pub fn multilingual_string(r: &mut ChaCha8Rng) -> String {
    let k = r.gen_range(1..12);
    let mut s = String::new();
    for _ in 0..k {
        s.push_str(FRAGMENTS[r.gen_range(0..FRAGMENTS.len())]);
        if r.gen_bool(0.6) {
            s.push(' ');
        }
    }
    s
}

/// Macro F1 from confusion counts tallied here, using `2tp / (2tp + fp + fn)`.
pub fn macro_f1_by_counts(subtask: Subtask, gold: &[SubtaskLabels], pred: &[Vec<bool>]) -> f64 {
    let f1 = |tp: usize, fp: usize, fn_: usize| {
        if 2 * tp + fp + fn_ == 0 {
            0.0
        } else {
            (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
        }
    };
    let mut total = 0.0;
    for j in 0..subtask.width() {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (g, p) in gold.iter().zip(pred) {
            match (g.get(j), p[j]) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        total += if subtask == Subtask::S1 {
            (f1(tp, fp, fn_) + f1(tn, fn_, fp)) / 2.0
        } else {
            f1(tp, fp, fn_)
        };
    }
    total / subtask.width() as f64
}
