//! Acceptance checks, one line per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use polarkit::appraisal::{evaluate_per_language, lr_predict, lr_train, FeatureVector, LrConfig};
use polarkit::assemble::{merge_and_dedup, sample_validation, ValidationPlan};
use polarkit::augment::{
    anonymize, apply_augmentation, dedup, homoglyphy, to_lowercase, to_uppercase, AugmentationPlan,
    ConfusablesTable,
};
use polarkit::io::dataset_to_bytes;
use polarkit::score::{
    baseline_delta, macro_f1_from_decisions, per_language_report, roc_auc, MetricTable, Prediction,
    PredictionSet,
};
use polarkit::seed::{derive_seed, DEFAULT_SEED};
use polarkit::{Dataset, LanguageCode, Provenance, Split, Subtask, SubtaskLabels, TextRecord};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let note = format!(
        "{:.2}s of {:.0}s",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    match result {
        Ok(d) if elapsed < limit => Ok(format!("{d}; {note}")),
        Ok(d) => Err(format!("{d}; too slow: {note}")),
        Err(d) => Err(format!("{d}; {note}")),
    }
}

fn table3_averages() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mine = MetricTable::from_csv(SYSTEM_F1_CSV).map_err(|e| e.to_string())?;
        let baseline = MetricTable::from_csv(&baseline_csv()).map_err(|e| e.to_string())?;
        let delta = baseline_delta(&mine, &baseline).map_err(|e| e.to_string())?;
        let present: Vec<usize> = (0..3)
            .map(|j| {
                delta
                    .deltas
                    .languages()
                    .filter(|l| delta.deltas.row(*l).unwrap()[j].is_some())
                    .count()
            })
            .collect();
        let mut ok = present == [22, 22, 18];
        let mut parts = Vec::new();
        for ((avg, reported), name) in delta
            .average
            .iter()
            .zip(REPORTED_DELTA_AVERAGES)
            .zip(["S1", "S2", "S3"])
        {
            let avg = avg.unwrap_or(f64::NAN);
            ok &= (avg - reported).abs() <= 5e-4;
            parts.push(format!("{name} {avg:.6} vs {reported}"));
        }
        check(ok, format!("{} (languages {present:?})", parts.join(", ")))
    })
}

fn sampling_arithmetic() -> Outcome {
    let corpus = binary_corpus(110);
    let split = sample_validation(&corpus, &ValidationPlan::for_subtask(Subtask::S1))
        .map_err(|e| e.to_string())?;
    let validation = split.validation.len();

    let mut r = rng(1000);
    let records: Vec<TextRecord> = (0..1000)
        .map(|i| {
            let text = format!("{} #{i}", multilingual_string(&mut r));
            TextRecord::original(
                format!("n{i}"),
                &text,
                LanguageCode::ALL[i % 22],
                Some(SubtaskLabels::binary(i % 2 == 0)),
                Split::Train,
            )
            .unwrap()
        })
        .collect();
    let ds = Dataset::new(Subtask::S1, records).map_err(|e| e.to_string())?;
    let out = apply_augmentation(
        &ds,
        &AugmentationPlan::default(),
        &ConfusablesTable::builtin(),
    )
    .map_err(|e| e.to_string())?;
    let per: Vec<usize> = Provenance::TECHNIQUES
        .iter()
        .map(|t| out.candidates[t])
        .collect();
    check(
        validation == 4400 && per == [50; 4],
        format!("validation records {validation}, candidates per technique {per:?}"),
    )
}

fn metric_oracles() -> Outcome {
    timed(Duration::from_secs(30), || {
        let mut r = rng(2024);
        let mut worst_auc = 0.0f64;
        let mut f1_mismatches = 0;
        let mut auc_checked = 0;
        for _ in 0..10_000 {
            let n = r.gen_range(1..=20);
            let scores: Vec<f64> = (0..n)
                .map(|_| {
                    if r.gen_bool(0.5) {
                        r.gen_range(0..4) as f64 / 3.0
                    } else {
                        r.gen()
                    }
                })
                .collect();
            let gold: Vec<bool> = (0..n).map(|_| r.gen()).collect();
            if gold.iter().any(|g| *g) && gold.iter().any(|g| !*g) {
                let v = roc_auc(&scores, &gold).map_err(|e| e.to_string())?;
                worst_auc = worst_auc.max((v - pairwise_auc(&scores, &gold)).abs());
                auc_checked += 1;
            } else if roc_auc(&scores, &gold).is_ok() {
                return Err("single-class AUC accepted".into());
            }
            let subtask = Subtask::ALL[r.gen_range(0..3)];
            let w = subtask.width();
            let labels: Vec<SubtaskLabels> = (0..n)
                .map(|_| {
                    SubtaskLabels::from_bits(subtask, &(0..w).map(|_| r.gen()).collect::<Vec<_>>())
                        .unwrap()
                })
                .collect();
            let decisions: Vec<Vec<bool>> =
                (0..n).map(|_| (0..w).map(|_| r.gen()).collect()).collect();
            if macro_f1_from_decisions(subtask, &labels, &decisions)
                != macro_f1_by_counts(subtask, &labels, &decisions)
            {
                f1_mismatches += 1;
            }
        }
        check(
            worst_auc <= 1e-12 && f1_mismatches == 0,
            format!("max AUC error {worst_auc:.1e} over {auc_checked} instances, macro-F1 mismatches {f1_mismatches}/10000"),
        )
    })
}

fn gradient_check() -> Outcome {
    let mut r = rng(31337);
    let worst = (0..1000)
        .map(|_| {
            let (pred, target, cfg) = random_loss_case(&mut r);
            gradient_relative_error(&pred, &target, &cfg, 1e-5)
        })
        .fold(0.0f64, f64::max);
    check(
        worst < 1e-5,
        format!("max relative error {worst:.2e} over 1000 configurations"),
    )
}

fn augmentation_invariants() -> Outcome {
    let table = ConfusablesTable::builtin();
    let mut r = rng(77);
    let mut failures = Vec::new();
    let mut mappable = 0;
    let mut texts = Vec::with_capacity(10_000);
    for i in 0..10_000u64 {
        let s = multilingual_string(&mut r);
        let a = anonymize(&s);
        let l = to_lowercase(&s);
        let u = to_uppercase(&s);
        if anonymize(&a) != a || to_lowercase(&l) != l || to_uppercase(&u) != u {
            failures.push(format!("idempotence {s:?}"));
        }
        let h = homoglyphy(&s, &table, 0.1, i).map_err(|e| e.to_string())?;
        if h.chars().count() != s.chars().count() || h != homoglyphy(&s, &table, 0.1, i).unwrap() {
            failures.push(format!("homoglyph length/determinism {s:?}"));
        }
        if s.chars().any(|c| table.is_mappable(c)) {
            mappable += 1;
            if h == s {
                failures.push(format!("no substitution {s:?}"));
            }
        }
        texts.push(s);
    }
    let records: Vec<TextRecord> = texts
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.trim().is_empty())
        .map(|(i, t)| {
            let bits: Vec<bool> = (0..5).map(|j| (i >> j) & 1 == 1).collect();
            TextRecord::original(
                format!("s{i}"),
                t,
                LanguageCode::ALL[i % 22],
                Some(SubtaskLabels::from_bits(Subtask::S2, &bits).unwrap()),
                Split::Train,
            )
            .unwrap()
        })
        .collect();
    let ds = Dataset::new(Subtask::S2, records).map_err(|e| e.to_string())?;
    let once = dedup(&ds);
    if dedup(&once) != once {
        failures.push("dedup not idempotent".into());
    }
    let out =
        apply_augmentation(&ds, &AugmentationPlan::default(), &table).map_err(|e| e.to_string())?;
    let mut derived = 0;
    for rec in out.dataset.iter().filter(|r| r.provenance().is_derived()) {
        derived += 1;
        let parent = ds.get(rec.parent_id().unwrap()).unwrap();
        if rec.labels() != parent.labels() {
            failures.push(format!("labels changed for {}", rec.id()));
        }
    }
    check(
        failures.is_empty(),
        format!(
            "10000 strings ({mappable} mappable), {} unique records, {derived} derived records, {} violations{}",
            once.len(),
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    )
}

fn lr_correctness() -> Outcome {
    let cfg = LrConfig::default();
    let e = |e: polarkit::Error| e.to_string();

    let (feats, labels) = separable_points(200, 0.5, 9);
    let model = lr_train(&feats, &labels, &cfg).map_err(e)?;
    let preds = lr_predict(&model, &feats).map_err(e)?;
    let correct = feats
        .iter()
        .zip(&labels)
        .filter(|(f, l)| preds.get(&f.id).unwrap().decisions()[0] == l.get(0))
        .count();
    let epochs = model.loss_history()[0].len() - 1;

    let zeros: Vec<FeatureVector> = (0..800)
        .map(|i| FeatureVector {
            id: format!("z{i}"),
            lang: LanguageCode::Eng,
            values: vec![0.0; 4],
        })
        .collect();
    let zlabels: Vec<SubtaskLabels> = (0..800)
        .map(|i| SubtaskLabels::binary(i % 5 == 0))
        .collect();
    let zmodel = lr_train(&zeros, &zlabels, &cfg).map_err(e)?;
    let oracle = (0.2f64 / 0.8).ln();
    let bias_err = (zmodel.bias()[0] - oracle).abs();

    let runs = 100;
    let mut aucs = Vec::with_capacity(runs);
    for seed in 0..runs as u64 {
        let (f, l) = noise_features(LanguageCode::Khm, 2000, 5, 5000 + seed);
        let report = evaluate_per_language(&f, &l, &LrConfig { seed, ..cfg }).map_err(e)?;
        aucs.push(report.languages[&LanguageCode::Khm].auc[0].unwrap());
    }
    let mean_auc = aucs.iter().sum::<f64>() / runs as f64;
    let within = aucs.iter().filter(|a| (0.45..=0.55).contains(*a)).count();

    let again = lr_train(&feats, &labels, &cfg).map_err(e)?;
    let bitwise = model.to_json() == again.to_json();

    check(
        correct == 200 && epochs <= 100 && bias_err <= 1e-3 && (0.45..=0.55).contains(&mean_auc) && bitwise,
        format!(
            "separable accuracy {correct}/200 in {epochs} epochs, intercept error {bias_err:.1e}, \
             noise AUC mean {mean_auc:.4} ({within}/{runs} seeds individually in [0.45, 0.55]), bitwise deterministic {bitwise}"
        ),
    )
}

/// Merged, sampled, augmented and scored bytes for a fixed corpus.
fn pipeline_bytes() -> Result<Vec<u8>, polarkit::Error> {
    let full = binary_corpus(24);
    let train = full.filter(|r| !r.id().ends_with('0'));
    let dev_records: Vec<TextRecord> = full
        .iter()
        .filter(|r| r.id().ends_with('0') || r.id().ends_with('1'))
        .map(|r| {
            TextRecord::original(
                format!("dev-{}", r.id()),
                r.text(),
                r.lang(),
                r.labels().copied(),
                Split::Dev,
            )
            .unwrap()
        })
        .collect();
    let dev = Dataset::new(Subtask::S1, dev_records)?;
    let merged = merge_and_dedup(&train, &dev)?;
    let plan = ValidationPlan::for_subtask(Subtask::S1)
        .with_per_cell(8)
        .with_seed(DEFAULT_SEED);
    let split = sample_validation(&merged, &plan)?;
    let augmented = apply_augmentation(
        &split.train_rest,
        &AugmentationPlan::default(),
        &ConfusablesTable::builtin(),
    )?;
    let mut preds = PredictionSet::new(Subtask::S1);
    for r in &split.validation {
        let s = derive_seed(DEFAULT_SEED, &["prediction", r.id()]) as f64 / u64::MAX as f64;
        preds.insert(r.id(), Some(r.lang()), Prediction::from_scores(vec![s])?)?;
    }
    let report = per_language_report(&preds, &split.validation)?;
    let mut bytes = dataset_to_bytes(&merged);
    bytes.extend(split.manifest_csv(&merged).into_bytes());
    bytes.extend(dataset_to_bytes(&split.validation));
    bytes.extend(dataset_to_bytes(&augmented.dataset));
    bytes.extend(report.to_csv().into_bytes());
    bytes.extend(report.summary_csv().into_bytes());
    Ok(bytes)
}

fn end_to_end_determinism() -> Outcome {
    let a = pipeline_bytes().map_err(|e| e.to_string())?;
    let b = pipeline_bytes().map_err(|e| e.to_string())?;
    check(
        a == b && !a.is_empty(),
        format!("{} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("baseline delta averages", table3_averages),
        ("sampling arithmetic", sampling_arithmetic),
        ("metric oracle equivalence", metric_oracles),
        ("multitask loss gradient check", gradient_check),
        ("augmentation invariants", augmentation_invariants),
        ("logistic regression correctness", lr_correctness),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    println!();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
