use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use polarkit::appraisal::{
    align_labels, evaluate_per_language, lr_predict, lr_train, read_features, LrConfig, LrModel,
};
use polarkit::assemble::{merge_and_dedup, sample_validation, SamplingMode, ValidationPlan};
use polarkit::augment::{apply_augmentation, AugmentationPlan, ConfusablesTable};
use polarkit::config::TrainingConfig;
use polarkit::io::{read_dataset, write_dataset};
use polarkit::score::{
    baseline_delta, fmt4, per_language_report, rank_percentile, read_leaderboard, MetricTable,
    PredictionSet,
};
use polarkit::{Dataset, LanguageCode, Provenance};
use serde_json::json;

use crate::manifest::{sha256_file, RunManifest};
use crate::{
    AssembleArgs, AugmentArgs, Command, DeltaArgs, EmitConfigArgs, Failure, LrCommand, LrDataArgs,
    LrEvalArgs, LrPredictArgs, LrTrainArgs, ModeArg, PercentileArgs, SampleArgs, ScoreArgs,
};

pub const CONFUSABLES_ENV: &str = "POLARKIT_CONFUSABLES";

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Augment(a) => augment(a),
        Command::Assemble(a) => assemble(a),
        Command::Sample(a) => sample(a),
        Command::Score(a) => score(a),
        Command::Delta(a) => delta(a),
        Command::Percentile(a) => percentile(a),
        Command::Lr(LrCommand::Train(a)) => lr_train_cmd(a),
        Command::Lr(LrCommand::Eval(a)) => lr_eval_cmd(a),
        Command::Lr(LrCommand::Predict(a)) => lr_predict_cmd(a),
        Command::EmitConfig(a) => emit_config(a),
    }
}

/// Prefix errors that carry no path of their own with the input file.
fn in_file<T>(path: &Path, r: polarkit::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        polarkit::Error::Io { .. } => Failure::Data(e),
        other => Failure::Data(polarkit::Error::Validation(format!(
            "{}: {other}",
            path.display()
        ))),
    })
}

fn prepare_out(out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn parse_lang(s: &str) -> Result<LanguageCode, Failure> {
    s.trim()
        .parse()
        .map_err(|e: polarkit::Error| Failure::Usage(e.to_string()))
}

fn load_confusables(
    explicit: Option<&Path>,
    manifest: &mut RunManifest,
) -> Result<(ConfusablesTable, String), Failure> {
    let from_env = std::env::var_os(CONFUSABLES_ENV).map(std::path::PathBuf::from);
    match explicit.map(Path::to_path_buf).or(from_env) {
        Some(path) => {
            let table = in_file(&path, ConfusablesTable::load(&path))?;
            manifest.input(&path)?;
            Ok((table, path.display().to_string()))
        }
        None => Ok((ConfusablesTable::builtin(), "builtin".into())),
    }
}

fn augmentation_plan(a: &AugmentArgs) -> Result<AugmentationPlan, Failure> {
    let usage = |e: polarkit::Error| Failure::Usage(e.to_string());
    let base =
        AugmentationPlan::uniform(a.total_frac, a.seed.seed, a.homoglyph_rate).map_err(usage)?;
    if a.per_technique_frac.is_empty() {
        return Ok(base);
    }
    let mut per: BTreeMap<Provenance, f64> = Provenance::TECHNIQUES
        .iter()
        .map(|t| (*t, base.fraction(*t)))
        .collect();
    for item in &a.per_technique_frac {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected TECHNIQUE=FRACTION, got {item:?}")))?;
        let technique: Provenance = name.trim().parse().map_err(usage)?;
        if !technique.is_derived() {
            return Err(Failure::Usage(format!(
                "{name:?} is not an augmentation technique"
            )));
        }
        let f: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad fraction {value:?}")))?;
        per.insert(technique, f);
    }
    AugmentationPlan::new(per, a.seed.seed, a.homoglyph_rate).map_err(usage)
}

fn augment(a: AugmentArgs) -> Result<(), Failure> {
    if a.subtask.is_multilabel() && !a.allow_multilabel {
        return Err(Failure::Usage(format!(
            "{} data is not augmented by default; pass --allow-multilabel to do it anyway",
            a.subtask
        )));
    }
    let plan = augmentation_plan(&a)?;
    let mut manifest = RunManifest::new(Some(plan.seed()));
    let (table, table_source) = load_confusables(a.confusables.as_deref(), &mut manifest)?;
    let ds = in_file(&a.input, read_dataset(&a.input, a.subtask))?;
    manifest.input(&a.input)?;
    let outcome = apply_augmentation(&ds, &plan, &table)?;
    prepare_out(&a.out)?;
    write_dataset(&outcome.dataset, &a.out.join("augmented.jsonl"))?;
    manifest.count("input_records", ds.len());
    manifest.count("output_records", outcome.dataset.len());
    manifest.count("removed_duplicates", outcome.removed);
    let candidates: BTreeMap<&str, usize> = outcome
        .candidates
        .iter()
        .map(|(t, k)| (t.as_str(), *k))
        .collect();
    manifest.count("candidates", json!(candidates));
    manifest.count("homoglyph_rate", plan.homoglyph_rate());
    manifest.count("confusables", table_source);
    manifest.write(&a.out)?;
    println!(
        "{} -> {} records ({} duplicates removed)",
        ds.len(),
        outcome.dataset.len(),
        outcome.removed
    );
    Ok(())
}

fn assemble(a: AssembleArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new(None);
    let train = in_file(&a.train, read_dataset(&a.train, a.subtask))?;
    let dev = in_file(&a.dev, read_dataset(&a.dev, a.subtask))?;
    manifest.input(&a.train)?;
    manifest.input(&a.dev)?;
    let merged = merge_and_dedup(&train, &dev)?;
    prepare_out(&a.out)?;
    write_dataset(&merged, &a.out.join("merged.jsonl"))?;
    manifest.count("train_records", train.len());
    manifest.count("dev_records", dev.len());
    manifest.count("merged_records", merged.len());
    manifest.write(&a.out)?;
    println!(
        "merged {} + {} -> {} records",
        train.len(),
        dev.len(),
        merged.len()
    );
    Ok(())
}

fn sample(a: SampleArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new(Some(a.seed.seed));
    let ds = in_file(&a.input, read_dataset(&a.input, a.subtask))?;
    manifest.input(&a.input)?;
    let mut plan = ValidationPlan::for_subtask(a.subtask)
        .with_seed(a.seed.seed)
        .with_per_cell(a.per_cell);
    if let Some(mode) = a.mode {
        plan.mode = match mode {
            ModeArg::Binary => SamplingMode::PerLanguagePerLabel,
            ModeArg::Distributional => SamplingMode::PerLanguageDistributional,
        };
    }
    if let Some(langs) = &a.languages {
        plan = plan.with_languages(
            langs
                .iter()
                .map(|l| parse_lang(l))
                .collect::<Result<_, _>>()?,
        );
    }
    let split = sample_validation(&ds, &plan)?;
    prepare_out(&a.out)?;
    write_dataset(&split.validation, &a.out.join("validation.jsonl"))?;
    write_dataset(&split.train_rest, &a.out.join("train.jsonl"))?;
    write_text(&a.out.join("assignment.csv"), &split.manifest_csv(&ds))?;
    let mut shortfalls = String::from("language,label,taken,requested\n");
    for s in &split.shortfalls {
        shortfalls.push_str(&format!(
            "{},{},{},{}\n",
            s.lang, s.label, s.taken, s.requested
        ));
        log::warn!(
            "{} / {}: only {} of {} records",
            s.lang,
            s.label,
            s.taken,
            s.requested
        );
    }
    write_text(&a.out.join("shortfalls.csv"), &shortfalls)?;
    manifest.count("input_records", ds.len());
    manifest.count("validation_records", split.validation.len());
    manifest.count("train_records", split.train_rest.len());
    manifest.count("shortfalls", split.shortfalls.len());
    manifest.write(&a.out)?;
    println!(
        "validation {} / train {} ({} short cells)",
        split.validation.len(),
        split.train_rest.len(),
        split.shortfalls.len()
    );
    Ok(())
}

fn score(a: ScoreArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new(None);
    let preds = in_file(&a.pred, PredictionSet::read(&a.pred, a.subtask))?;
    let gold = in_file(&a.gold, read_dataset(&a.gold, a.subtask))?;
    manifest.input(&a.pred)?;
    manifest.input(&a.gold)?;
    let report = per_language_report(&preds, &gold)?;
    prepare_out(&a.out)?;
    write_text(&a.out.join("scores.csv"), &report.to_csv())?;
    write_text(&a.out.join("summary.csv"), &report.summary_csv())?;
    write_text(&a.out.join("table.txt"), &report.render_table())?;
    let selection = report.selection_summary();
    let selection_json = serde_json::to_string_pretty(&selection).expect("serializes") + "\n";
    write_text(&a.out.join("selection.json"), &selection_json)?;
    manifest.count("gold_records", gold.len());
    manifest.count("predictions", preds.len());
    manifest.count("languages", report.languages.len());
    manifest.write(&a.out)?;
    print!("{}", report.render_table());
    Ok(())
}

fn delta(a: DeltaArgs) -> Result<(), Failure> {
    let mine = in_file(&a.mine, MetricTable::read(&a.mine))?;
    let baseline = in_file(&a.baseline, MetricTable::read(&a.baseline))?;
    let table = baseline_delta(&mine, &baseline)?;
    let csv = table.to_csv();
    if let Some(out) = &a.out {
        let mut manifest = RunManifest::new(None);
        manifest.input(&a.mine)?;
        manifest.input(&a.baseline)?;
        prepare_out(out)?;
        write_text(&out.join("delta.csv"), &csv)?;
        manifest.count("languages", table.deltas.len());
        manifest.count(
            "average",
            json!(table
                .average
                .iter()
                .map(|v| v.map(fmt4))
                .collect::<Vec<_>>()),
        );
        manifest.write(out)?;
    }
    print!("{csv}");
    Ok(())
}

fn percentile(a: PercentileArgs) -> Result<(), Failure> {
    let board = in_file(&a.leaderboard, read_leaderboard(&a.leaderboard))?;
    let scores: Vec<f64> = board.iter().map(|(_, s)| *s).collect();
    let p = rank_percentile(a.mine, &scores)?;
    if let Some(out) = &a.out {
        let mut manifest = RunManifest::new(None);
        manifest.input(&a.leaderboard)?;
        prepare_out(out)?;
        let body = json!({ "score": a.mine, "systems": scores.len(), "percentile": p });
        write_text(
            &out.join("percentile.json"),
            &(serde_json::to_string_pretty(&body).expect("json") + "\n"),
        )?;
        manifest.count("systems", scores.len());
        manifest.count("percentile", p);
        manifest.write(out)?;
    }
    println!("{p:.1}");
    Ok(())
}

fn lr_config(d: &LrDataArgs) -> LrConfig {
    LrConfig {
        seed: d.seed.seed,
        l2: d.l2,
        max_epochs: d.max_epochs,
        ..LrConfig::default()
    }
}

fn load_labeled(
    d: &LrDataArgs,
    manifest: &mut RunManifest,
) -> Result<
    (
        Vec<polarkit::appraisal::FeatureVector>,
        Vec<polarkit::SubtaskLabels>,
    ),
    Failure,
> {
    let feats = in_file(&d.features, read_features(&d.features))?;
    let gold: Dataset = in_file(&d.labels, read_dataset(&d.labels, d.subtask))?;
    manifest.input(&d.features)?;
    manifest.input(&d.labels)?;
    Ok(align_labels(&feats, &gold)?)
}

fn lr_train_cmd(a: LrTrainArgs) -> Result<(), Failure> {
    let d = &a.data;
    let cfg = lr_config(d);
    let mut manifest = RunManifest::new(Some(cfg.seed));
    let (mut feats, mut labels) = load_labeled(d, &mut manifest)?;
    if let Some(lang) = &a.lang {
        let lang = parse_lang(lang)?;
        let keep: Vec<bool> = feats.iter().map(|f| f.lang == lang).collect();
        let mut k = keep.iter();
        feats.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        labels.retain(|_| *k.next().unwrap());
    }
    let provenance = match &a.provenance {
        Some(p) => p.clone(),
        None => format!(
            "{} sha256:{}",
            d.features.display(),
            sha256_file(&d.features)?
        ),
    };
    let model = lr_train(&feats, &labels, &cfg)?.with_provenance(provenance);
    prepare_out(&d.out)?;
    model.write(&d.out.join("model.json"))?;
    manifest.count("examples", feats.len());
    manifest.count("dim", model.dim());
    manifest.count(
        "single_class_labels",
        model.skipped().iter().filter(|s| **s).count(),
    );
    manifest.write(&d.out)?;
    println!(
        "trained on {} examples of dimension {}",
        feats.len(),
        model.dim()
    );
    Ok(())
}

fn lr_eval_cmd(a: LrEvalArgs) -> Result<(), Failure> {
    let d = &a.data;
    let cfg = lr_config(d);
    let mut manifest = RunManifest::new(Some(cfg.seed));
    let (feats, labels) = load_labeled(d, &mut manifest)?;
    let report = evaluate_per_language(&feats, &labels, &cfg)?;
    prepare_out(&d.out)?;
    write_text(&d.out.join("scores.csv"), &report.to_csv())?;
    write_text(
        &d.out.join("macro_f1.csv"),
        &report.macro_f1_table().to_csv(),
    )?;
    write_text(
        &d.out.join("label_auc.csv"),
        &report.label_auc_table().to_csv(),
    )?;
    write_text(&d.out.join("table.txt"), &report.render_table())?;
    manifest.count("examples", feats.len());
    manifest.count("languages", report.languages.len());
    manifest.write(&d.out)?;
    print!("{}", report.render_table());
    Ok(())
}

fn lr_predict_cmd(a: LrPredictArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new(None);
    let model = in_file(&a.model, LrModel::read(&a.model))?;
    model.ensure_subtask(a.subtask)?;
    let feats = in_file(&a.features, read_features(&a.features))?;
    manifest.input(&a.model)?;
    manifest.input(&a.features)?;
    let preds = lr_predict(&model, &feats)?;
    prepare_out(&a.out)?;
    preds.write(&a.out.join("predictions.jsonl"))?;
    manifest.count("predictions", preds.len());
    manifest.write(&a.out)?;
    println!("{} predictions", preds.len());
    Ok(())
}

fn emit_config(a: EmitConfigArgs) -> Result<(), Failure> {
    let text = TrainingConfig::for_subtask(a.subtask).to_json() + "\n";
    match &a.out {
        Some(out) => {
            prepare_out(out)?;
            write_text(&out.join("training_config.json"), &text)?;
            let mut manifest = RunManifest::new(None);
            manifest.count("subtask", a.subtask.to_string());
            manifest.write(out)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
