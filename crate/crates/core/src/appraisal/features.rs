use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_jsonl, write_jsonl};
use crate::record::Dataset;
use crate::schema::{LanguageCode, SubtaskLabels};

/// One feature line: `{"id": ..., "lang": ..., "values": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub id: String,
    pub lang: LanguageCode,
    pub values: Vec<f64>,
}

/// Check that vectors are finite, share one dimension and have unique ids.
/// Returns the dimension (0 for an empty list).
pub fn check_features(features: &[FeatureVector]) -> Result<usize> {
    let dim = features.first().map_or(0, |f| f.values.len());
    let mut seen = BTreeSet::new();
    for f in features {
        if f.values.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: f.values.len(),
            });
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value"));
        }
        if !seen.insert(f.id.as_str()) {
            return Err(Error::DuplicateId(f.id.clone()));
        }
    }
    Ok(dim)
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let rows = read_jsonl::<FeatureVector>(path)?;
    let dim = rows.first().map_or(0, |(_, f)| f.values.len());
    let mut seen = BTreeSet::new();
    for (line, f) in &rows {
        if f.values.len() != dim {
            return Err(Error::parse(
                *line,
                format!("{} values, expected {dim}", f.values.len()),
            ));
        }
        if !seen.insert(f.id.clone()) {
            return Err(Error::parse(*line, format!("duplicate id {:?}", f.id)));
        }
    }
    Ok(rows.into_iter().map(|(_, f)| f).collect())
}

pub fn write_features(path: &Path, features: &[FeatureVector]) -> Result<()> {
    check_features(features)?;
    write_jsonl(path, features)
}

/// Pair each feature vector with its gold labels, in feature order.
///
/// Every feature id must be labeled in `gold`, with a matching language.
pub fn align_labels(
    features: &[FeatureVector],
    gold: &Dataset,
) -> Result<(Vec<FeatureVector>, Vec<SubtaskLabels>)> {
    let by_id: HashMap<&str, _> = gold.iter().map(|r| (r.id(), r)).collect();
    let mut labels = Vec::with_capacity(features.len());
    for f in features {
        let r = by_id.get(f.id.as_str()).ok_or_else(|| {
            Error::Validation(format!("no gold record for feature id {:?}", f.id))
        })?;
        if r.lang() != f.lang {
            return Err(Error::Validation(format!(
                "feature {:?} is {} but its record is {}",
                f.id,
                f.lang,
                r.lang()
            )));
        }
        let l = r
            .labels()
            .ok_or_else(|| Error::Validation(format!("record {:?} is unlabeled", f.id)))?;
        labels.push(*l);
    }
    Ok((features.to_vec(), labels))
}
