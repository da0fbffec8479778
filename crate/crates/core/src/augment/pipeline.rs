use std::collections::BTreeMap;

use rand::seq::index;

use super::confusables::ConfusablesTable;
use super::homoglyph::{check_rate, homoglyphy, DEFAULT_HOMOGLYPH_RATE};
use super::{anonymize, dedup, to_lowercase, to_uppercase};
use crate::error::{Error, Result};
use crate::record::{Dataset, Provenance, Split, TextRecord};
use crate::seed::{derive_seed, rng_for, DEFAULT_SEED};

/// How much of the training set each technique duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentationPlan {
    total_fraction: f64,
    per_technique: BTreeMap<Provenance, f64>,
    seed: u64,
    homoglyph_rate: f64,
}

impl Default for AugmentationPlan {
    /// 20% in total, 5% per technique, seed 42, 10% homoglyph rate.
    fn default() -> Self {
        AugmentationPlan::uniform(0.20, DEFAULT_SEED, DEFAULT_HOMOGLYPH_RATE)
            .expect("default plan is valid")
    }
}

impl AugmentationPlan {
    pub fn new(
        per_technique: BTreeMap<Provenance, f64>,
        seed: u64,
        homoglyph_rate: f64,
    ) -> Result<Self> {
        for t in per_technique.keys() {
            if !t.is_derived() {
                return Err(Error::Validation(
                    "augmentation fractions are keyed by technique".into(),
                ));
            }
        }
        for (t, f) in &per_technique {
            if !f.is_finite() || *f < 0.0 {
                return Err(Error::Validation(format!("fraction for {t} must be >= 0")));
            }
        }
        check_rate(homoglyph_rate)?;
        let total_fraction = per_technique.values().sum();
        Ok(AugmentationPlan {
            total_fraction,
            per_technique,
            seed,
            homoglyph_rate,
        })
    }

    /// Split `total_fraction` evenly over the four techniques.
    pub fn uniform(total_fraction: f64, seed: u64, homoglyph_rate: f64) -> Result<Self> {
        let each = total_fraction / Provenance::TECHNIQUES.len() as f64;
        let per = Provenance::TECHNIQUES.iter().map(|t| (*t, each)).collect();
        let plan = Self::new(per, seed, homoglyph_rate)?;
        Ok(AugmentationPlan {
            total_fraction,
            ..plan
        })
    }

    pub fn total_fraction(&self) -> f64 {
        self.total_fraction
    }

    pub fn fraction(&self, technique: Provenance) -> f64 {
        self.per_technique.get(&technique).copied().unwrap_or(0.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn homoglyph_rate(&self) -> f64 {
        self.homoglyph_rate
    }

    /// Number of source records a technique duplicates from `n` records:
    /// `ceil(fraction * n)`, at least one for a nonempty set with a positive
    /// fraction, never more than `n`.
    pub fn candidate_count(&self, technique: Provenance, n: usize) -> usize {
        let f = self.fraction(technique);
        if n == 0 || f <= 0.0 {
            return 0;
        }
        // absorb representation error such as 0.05 * 100 = 5.000000000000001
        let k = (f * n as f64 - 1e-9).ceil().max(1.0) as usize;
        k.min(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentOutcome {
    pub dataset: Dataset,
    /// Duplicates created per technique before de-duplication.
    pub candidates: BTreeMap<Provenance, usize>,
    /// Records removed by the final de-duplication.
    pub removed: usize,
}

fn transform(
    technique: Provenance,
    record: &TextRecord,
    plan: &AugmentationPlan,
    table: &ConfusablesTable,
) -> Result<String> {
    Ok(match technique {
        Provenance::Anonymized => anonymize(record.text()),
        Provenance::Lowercased => to_lowercase(record.text()),
        Provenance::Uppercased => to_uppercase(record.text()),
        Provenance::Homoglyphed => {
            let seed = derive_seed(plan.seed, &[record.id(), technique.as_str()]);
            homoglyphy(record.text(), table, plan.homoglyph_rate, seed)?
        }
        Provenance::Original => unreachable!("not a technique"),
    })
}

/// Duplicate a seeded sample of records per technique, transform the copies,
/// append them and de-duplicate.
///
/// Each technique samples independently over the whole dataset, so one
/// record may be picked by several techniques.
pub fn apply_augmentation(
    ds: &Dataset,
    plan: &AugmentationPlan,
    table: &ConfusablesTable,
) -> Result<AugmentOutcome> {
    if let Some(r) = ds.iter().find(|r| r.split() == Split::Test) {
        return Err(Error::Validation(format!(
            "test record {:?} cannot be augmented",
            r.id()
        )));
    }
    let n = ds.len();
    let mut records = ds.records().to_vec();
    let mut candidates = BTreeMap::new();
    for technique in Provenance::TECHNIQUES {
        let k = plan.candidate_count(technique, n);
        let mut rng = rng_for(plan.seed, &["augment", technique.as_str()]);
        let mut picked = index::sample(&mut rng, n, k).into_vec();
        picked.sort_unstable();
        for i in picked {
            let source = &ds.records()[i];
            let text = transform(technique, source, plan, table)?;
            records.push(source.derive(technique, &text)?);
        }
        candidates.insert(technique, k);
    }
    let augmented = Dataset::new(ds.subtask(), records)?;
    let before = augmented.len();
    let dataset = dedup(&augmented);
    Ok(AugmentOutcome {
        removed: before - dataset.len(),
        dataset,
        candidates,
    })
}
