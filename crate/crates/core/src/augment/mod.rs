//! Training-set augmentation: anonymized, lower-cased, upper-cased and
//! homoglyphed duplicates of sampled records, followed by de-duplication.

mod anonymize;
mod confusables;
mod homoglyph;
mod pipeline;

pub use anonymize::{anonymize, EMAIL_TAG, PHONE_TAG, USER_TAG};
pub use confusables::ConfusablesTable;
pub use homoglyph::{homoglyphy, DEFAULT_HOMOGLYPH_RATE};
pub use pipeline::{apply_augmentation, AugmentOutcome, AugmentationPlan};

use std::collections::HashMap;

use crate::record::{canonical_text, Dataset};

/// Full Unicode lower-case mapping. Caseless scripts pass through unchanged.
pub fn to_lowercase(text: &str) -> String {
    text.to_lowercase()
}

/// Full Unicode upper-case mapping (`ß` becomes `SS`).
pub fn to_uppercase(text: &str) -> String {
    text.to_uppercase()
}

/// Collapse records whose canonical text is identical.
///
/// Within each group of equal texts the first original record wins; if the
/// group has no original, the first record wins. Survivors keep their input
/// order.
pub fn dedup(ds: &Dataset) -> Dataset {
    let mut winner: HashMap<String, usize> = HashMap::with_capacity(ds.len());
    for (i, r) in ds.iter().enumerate() {
        let key = canonical_text(r.text());
        match winner.get(&key) {
            None => {
                winner.insert(key, i);
            }
            Some(&w) => {
                let current = &ds.records()[w];
                if current.provenance().is_derived() && !r.provenance().is_derived() {
                    winner.insert(key, i);
                }
            }
        }
    }
    let mut keep = vec![false; ds.len()];
    for &i in winner.values() {
        keep[i] = true;
    }
    let mut idx = 0;
    ds.filter(|_| {
        let k = keep[idx];
        idx += 1;
        k
    })
}
