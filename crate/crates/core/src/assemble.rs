//! Training-pool assembly and validation sampling.
//!
//! The pool is train + dev, de-duplicated. Validation is drawn per language:
//! for binary detection a fixed number of records per (language, label)
//! cell, for the multi-label subtasks a fixed number per language whose
//! label marginals track the pool's.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::{index, SliceRandom};

use crate::augment::dedup;
use crate::error::{Error, Result};
use crate::record::Dataset;
use crate::schema::{LanguageCode, Subtask};
use crate::seed::{rng_for, DEFAULT_SEED};

pub const DEFAULT_PER_CELL: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// `per_cell_count` records for each (language, label) cell.
    PerLanguagePerLabel,
    /// `per_cell_count` records per language, matching label marginals.
    PerLanguageDistributional,
}

impl SamplingMode {
    pub fn for_subtask(subtask: Subtask) -> Self {
        if subtask.is_multilabel() {
            SamplingMode::PerLanguageDistributional
        } else {
            SamplingMode::PerLanguagePerLabel
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationPlan {
    pub mode: SamplingMode,
    pub per_cell_count: usize,
    pub seed: u64,
    /// Languages that must be sampled. `None` samples every language present.
    pub languages: Option<Vec<LanguageCode>>,
}

impl ValidationPlan {
    pub fn for_subtask(subtask: Subtask) -> Self {
        ValidationPlan {
            mode: SamplingMode::for_subtask(subtask),
            per_cell_count: DEFAULT_PER_CELL,
            seed: DEFAULT_SEED,
            languages: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_per_cell(mut self, n: usize) -> Self {
        self.per_cell_count = n;
        self
    }

    pub fn with_languages(mut self, langs: Vec<LanguageCode>) -> Self {
        self.languages = Some(langs);
        self
    }
}

/// A sampling cell that had fewer records than requested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortfall {
    pub lang: LanguageCode,
    pub label: String,
    pub taken: usize,
    pub requested: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationSplit {
    pub validation: Dataset,
    pub train_rest: Dataset,
    pub shortfalls: Vec<Shortfall>,
}

impl ValidationSplit {
    /// `id,assignment` CSV covering every input record, in input order.
    pub fn manifest_csv(&self, input: &Dataset) -> String {
        let validation: HashSet<&str> = self.validation.iter().map(|r| r.id()).collect();
        let mut out = String::from("id,assignment\n");
        for r in input {
            let which = if validation.contains(r.id()) {
                "validation"
            } else {
                "train"
            };
            let _ = writeln!(out, "{},{}", csv_field(r.id()), which);
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Concatenate train and dev (in that order) and de-duplicate by text.
pub fn merge_and_dedup(train: &Dataset, dev: &Dataset) -> Result<Dataset> {
    if train.subtask() != dev.subtask() {
        return Err(Error::Schema(format!(
            "cannot merge {} train data with {} dev data",
            train.subtask(),
            dev.subtask()
        )));
    }
    let mut records = train.records().to_vec();
    records.extend(dev.records().iter().cloned());
    // drop textual duplicates first so a dev copy of a train record with the
    // same id does not trip the uniqueness check
    let mut seen = HashSet::new();
    records.retain(|r| seen.insert((r.id().to_string(), r.text().to_string())));
    Ok(dedup(&Dataset::new(train.subtask(), records)?))
}

fn requested_languages(ds: &Dataset, plan: &ValidationPlan) -> Vec<LanguageCode> {
    plan.languages.clone().unwrap_or_else(|| ds.languages())
}

fn require_labels(ds: &Dataset) -> Result<()> {
    match ds.iter().find(|r| r.labels().is_none()) {
        Some(r) => Err(Error::Validation(format!(
            "record {:?} is unlabeled and cannot be sampled for validation",
            r.id()
        ))),
        None => Ok(()),
    }
}

fn partition(ds: &Dataset, chosen: &HashSet<usize>, shortfalls: Vec<Shortfall>) -> ValidationSplit {
    let mut i = 0;
    let validation = ds.filter(|_| {
        let hit = chosen.contains(&i);
        i += 1;
        hit
    });
    let mut i = 0;
    let train_rest = ds.filter(|_| {
        let hit = chosen.contains(&i);
        i += 1;
        !hit
    });
    ValidationSplit {
        validation,
        train_rest,
        shortfalls,
    }
}

fn binary_cell_name(positive: bool) -> &'static str {
    if positive {
        "polarized"
    } else {
        "not polarized"
    }
}

/// Sample up to `per_cell_count` records per (language, label) cell.
///
/// A cell with no records is an error; partially filled cells are reported
/// in [`ValidationSplit::shortfalls`].
pub fn sample_validation_binary(ds: &Dataset, plan: &ValidationPlan) -> Result<ValidationSplit> {
    if ds.subtask() != Subtask::S1 {
        return Err(Error::Schema(format!(
            "per-label sampling needs subtask 1 data, got {}",
            ds.subtask()
        )));
    }
    if plan.mode != SamplingMode::PerLanguagePerLabel {
        return Err(Error::Validation(
            "binary sampling needs per-language-per-label mode".into(),
        ));
    }
    require_labels(ds)?;
    let mut cells: BTreeMap<(LanguageCode, bool), Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.iter().enumerate() {
        let positive = r.labels().expect("checked").get(0);
        cells.entry((r.lang(), positive)).or_default().push(i);
    }
    let mut chosen = HashSet::new();
    let mut shortfalls = Vec::new();
    for lang in requested_languages(ds, plan) {
        for positive in [true, false] {
            let name = binary_cell_name(positive);
            let members = cells
                .get(&(lang, positive))
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            if members.is_empty() {
                return Err(Error::EmptyCell {
                    lang: lang.to_string(),
                    label: name.to_string(),
                });
            }
            let k = plan.per_cell_count.min(members.len());
            if k < plan.per_cell_count {
                shortfalls.push(Shortfall {
                    lang,
                    label: name.to_string(),
                    taken: k,
                    requested: plan.per_cell_count,
                });
            }
            let mut rng = rng_for(plan.seed, &["validation", lang.as_str(), name]);
            for j in index::sample(&mut rng, members.len(), k) {
                chosen.insert(members[j]);
            }
        }
    }
    Ok(partition(ds, &chosen, shortfalls))
}

/// Distance of selected marginal counts from their targets: the number of
/// labels off by more than one dominates, then the summed absolute deficit.
fn deficit_score(counts: &[i64], targets: &[i64]) -> (i64, i64) {
    counts
        .iter()
        .zip(targets)
        .fold((0, 0), |(over, sum), (c, t)| {
            let d = (t - c).abs();
            (over + (d - 1).max(0), sum + d)
        })
}

/// Choose `n` of `masks` so that per-label counts track `targets`.
///
/// Greedy phase: repeatedly take the record that most reduces the summed
/// absolute deficit, ties resolved by `order` (a seeded shuffle). Repair
/// phase: swap a selected record for an unselected one while that strictly
/// improves [`deficit_score`].
fn select_by_marginals(
    masks: &[u8],
    order: &[usize],
    width: usize,
    n: usize,
    targets: &[i64],
) -> Vec<usize> {
    let mut pools: BTreeMap<u8, VecDeque<usize>> = BTreeMap::new();
    for &i in order {
        pools.entry(masks[i]).or_default().push_back(i);
    }
    let rank: Vec<usize> = {
        let mut r = vec![0; masks.len()];
        for (pos, &i) in order.iter().enumerate() {
            r[i] = pos;
        }
        r
    };
    let bit = |mask: u8, j: usize| ((mask >> j) & 1) as i64;
    let mut counts = vec![0i64; width];
    let mut taken: BTreeMap<u8, Vec<usize>> = BTreeMap::new();

    for _ in 0..n {
        let mut best: Option<(i64, usize, u8)> = None;
        for (&mask, pool) in &pools {
            let Some(&head) = pool.front() else { continue };
            let gain: i64 = (0..width)
                .map(|j| {
                    (targets[j] - counts[j]).abs() - (targets[j] - counts[j] - bit(mask, j)).abs()
                })
                .sum();
            let better = match best {
                None => true,
                Some((g, r, _)) => gain > g || (gain == g && rank[head] < r),
            };
            if better {
                best = Some((gain, rank[head], mask));
            }
        }
        let (_, _, mask) = best.expect("n never exceeds the pool size");
        let i = pools
            .get_mut(&mask)
            .expect("pool")
            .pop_front()
            .expect("nonempty");
        for (j, c) in counts.iter_mut().enumerate() {
            *c += bit(mask, j);
        }
        taken.entry(mask).or_default().push(i);
    }

    loop {
        let current = deficit_score(&counts, targets);
        let mut best: Option<((i64, i64), u8, u8)> = None;
        for (&out_mask, out) in &taken {
            if out.is_empty() {
                continue;
            }
            for (&in_mask, pool) in &pools {
                if in_mask == out_mask || pool.is_empty() {
                    continue;
                }
                let trial: Vec<i64> = (0..width)
                    .map(|j| counts[j] - bit(out_mask, j) + bit(in_mask, j))
                    .collect();
                let score = deficit_score(&trial, targets);
                if score < current && best.is_none_or(|(s, _, _)| score < s) {
                    best = Some((score, out_mask, in_mask));
                }
            }
        }
        let Some((_, out_mask, in_mask)) = best else {
            break;
        };
        let removed = taken
            .get_mut(&out_mask)
            .and_then(Vec::pop)
            .expect("nonempty");
        pools.entry(out_mask).or_default().push_front(removed);
        let added = pools
            .get_mut(&in_mask)
            .and_then(VecDeque::pop_front)
            .expect("nonempty");
        taken.entry(in_mask).or_default().push(added);
        for (j, c) in counts.iter_mut().enumerate() {
            *c += bit(in_mask, j) - bit(out_mask, j);
        }
    }
    taken.into_values().flatten().collect()
}

/// Per-label target counts for a sample of `n` out of records with `masks`.
pub fn marginal_targets(masks: &[u8], width: usize, n: usize) -> Vec<i64> {
    (0..width)
        .map(|j| {
            let hits = masks.iter().filter(|m| (*m >> j) & 1 == 1).count();
            (n as f64 * hits as f64 / masks.len() as f64).round() as i64
        })
        .collect()
}

/// Sample `min(per_cell_count, available)` records per language so that each
/// label's count stays within one of its pool frequency times the sample size
/// whenever such a subset exists.
pub fn sample_validation_multilabel(
    ds: &Dataset,
    plan: &ValidationPlan,
) -> Result<ValidationSplit> {
    if !ds.subtask().is_multilabel() {
        return Err(Error::Schema(format!(
            "distributional sampling needs subtask 2 or 3 data, got {}",
            ds.subtask()
        )));
    }
    if plan.mode != SamplingMode::PerLanguageDistributional {
        return Err(Error::Validation(
            "multi-label sampling needs per-language distributional mode".into(),
        ));
    }
    require_labels(ds)?;
    let width = ds.subtask().width();
    let mut by_lang: BTreeMap<LanguageCode, Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.iter().enumerate() {
        by_lang.entry(r.lang()).or_default().push(i);
    }
    let mut chosen = HashSet::new();
    let mut shortfalls = Vec::new();
    for lang in requested_languages(ds, plan) {
        let members = by_lang.get(&lang).ok_or_else(|| {
            Error::Validation(format!("language {lang} has no records to sample from"))
        })?;
        let n = plan.per_cell_count.min(members.len());
        if n < plan.per_cell_count {
            shortfalls.push(Shortfall {
                lang,
                label: "*".into(),
                taken: n,
                requested: plan.per_cell_count,
            });
        }
        if n == members.len() {
            chosen.extend(members.iter().copied());
            continue;
        }
        let masks: Vec<u8> = members
            .iter()
            .map(|&i| ds.records()[i].labels().expect("checked").mask())
            .collect();
        let targets = marginal_targets(&masks, width, n);
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.shuffle(&mut rng_for(plan.seed, &["validation", lang.as_str()]));
        for local in select_by_marginals(&masks, &order, width, n, &targets) {
            chosen.insert(members[local]);
        }
    }
    Ok(partition(ds, &chosen, shortfalls))
}

/// Dispatch on the plan's mode.
pub fn sample_validation(ds: &Dataset, plan: &ValidationPlan) -> Result<ValidationSplit> {
    match plan.mode {
        SamplingMode::PerLanguagePerLabel => sample_validation_binary(ds, plan),
        SamplingMode::PerLanguageDistributional => sample_validation_multilabel(ds, plan),
    }
}
