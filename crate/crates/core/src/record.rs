//! Labeled text records and the immutable [`Dataset`] container.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::schema::{LanguageCode, Subtask, SubtaskLabels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::Schema(format!("unknown split {other:?}"))),
        }
    }
}

/// Where a record's text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Anonymized,
    Lowercased,
    Uppercased,
    Homoglyphed,
}

impl Provenance {
    /// The four augmentation techniques, in the order the pipeline applies them.
    pub const TECHNIQUES: [Provenance; 4] = [
        Provenance::Anonymized,
        Provenance::Lowercased,
        Provenance::Uppercased,
        Provenance::Homoglyphed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::Anonymized => "anonymized",
            Provenance::Lowercased => "lowercased",
            Provenance::Uppercased => "uppercased",
            Provenance::Homoglyphed => "homoglyphed",
        }
    }

    pub fn is_derived(self) -> bool {
        self != Provenance::Original
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Provenance::Original),
            "anonymized" => Ok(Provenance::Anonymized),
            "lowercased" => Ok(Provenance::Lowercased),
            "uppercased" => Ok(Provenance::Uppercased),
            "homoglyphed" => Ok(Provenance::Homoglyphed),
            other => Err(Error::Schema(format!("unknown provenance {other:?}"))),
        }
    }
}

/// Canonical form used for all text comparisons.
pub fn canonical_text(text: &str) -> String {
    text.nfc().collect()
}

/// One labeled (or unlabeled) text.
///
/// Text is stored in NFC. `labels` is `None` for unlabeled records, which
/// is distinct from a label vector with no bits set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextRecord {
    id: String,
    text: String,
    lang: LanguageCode,
    labels: Option<SubtaskLabels>,
    split: Split,
    provenance: Provenance,
    parent_id: Option<String>,
}

impl TextRecord {
    pub fn new(
        id: impl Into<String>,
        text: &str,
        lang: LanguageCode,
        labels: Option<SubtaskLabels>,
        split: Split,
        provenance: Provenance,
        parent_id: Option<String>,
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Validation("record id is empty".into()));
        }
        let text = canonical_text(text);
        if text.trim().is_empty() {
            return Err(Error::Validation(format!("record {id:?} has empty text")));
        }
        if provenance.is_derived() && parent_id.is_none() {
            return Err(Error::Validation(format!(
                "record {id:?} is {provenance} but names no parent"
            )));
        }
        if let Some(l) = labels {
            if !lang.supports(l.subtask()) {
                return Err(Error::Validation(format!(
                    "language {lang} is not part of subtask 3 (record {id:?})"
                )));
            }
        }
        Ok(TextRecord {
            id,
            text,
            lang,
            labels,
            split,
            provenance,
            parent_id,
        })
    }

    /// An original record (no parent).
    pub fn original(
        id: impl Into<String>,
        text: &str,
        lang: LanguageCode,
        labels: Option<SubtaskLabels>,
        split: Split,
    ) -> Result<Self> {
        Self::new(id, text, lang, labels, split, Provenance::Original, None)
    }

    /// A copy of this record with transformed text, id `<parent>#<technique>`
    /// and identical labels.
    pub fn derive(&self, technique: Provenance, text: &str) -> Result<Self> {
        if !technique.is_derived() {
            return Err(Error::Validation(
                "derived records need an augmentation provenance".into(),
            ));
        }
        Self::new(
            format!("{}#{}", self.id, technique),
            text,
            self.lang,
            self.labels,
            self.split,
            technique,
            Some(self.id.clone()),
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn lang(&self) -> LanguageCode {
        self.lang
    }

    pub fn labels(&self) -> Option<&SubtaskLabels> {
        self.labels.as_ref()
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn parent_id(&self) -> Option<&str> {
        self.parent_id.as_deref()
    }
}

/// An ordered, validated, immutable collection of records for one subtask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    subtask: Subtask,
    records: Vec<TextRecord>,
}

impl Dataset {
    pub fn new(subtask: Subtask, records: Vec<TextRecord>) -> Result<Self> {
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if seen.insert(r.id(), i).is_some() {
                return Err(Error::DuplicateId(r.id().to_string()));
            }
            if let Some(l) = r.labels() {
                if l.subtask() != subtask {
                    return Err(Error::Schema(format!(
                        "record {:?} carries {} labels in a {subtask} dataset",
                        r.id(),
                        l.subtask()
                    )));
                }
            }
            if !r.lang().supports(subtask) {
                return Err(Error::Validation(format!(
                    "language {} is not part of subtask 3 (record {:?})",
                    r.lang(),
                    r.id()
                )));
            }
        }
        for r in &records {
            if let Some(parent) = r.parent_id().and_then(|p| seen.get(p)) {
                if records[*parent].labels() != r.labels() {
                    return Err(Error::Validation(format!(
                        "derived record {:?} has labels different from its parent",
                        r.id()
                    )));
                }
            }
        }
        Ok(Dataset { subtask, records })
    }

    pub fn empty(subtask: Subtask) -> Self {
        Dataset {
            subtask,
            records: Vec::new(),
        }
    }

    pub fn subtask(&self) -> Subtask {
        self.subtask
    }

    pub fn records(&self) -> &[TextRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TextRecord> {
        self.records.iter()
    }

    pub fn get(&self, id: &str) -> Option<&TextRecord> {
        self.records.iter().find(|r| r.id() == id)
    }

    pub fn into_records(self) -> Vec<TextRecord> {
        self.records
    }

    /// Languages present, in canonical order.
    pub fn languages(&self) -> Vec<LanguageCode> {
        let present: HashSet<LanguageCode> = self.records.iter().map(|r| r.lang()).collect();
        LanguageCode::ALL
            .into_iter()
            .filter(|l| present.contains(l))
            .collect()
    }

    /// Keep the records for which `keep` is true, preserving order.
    pub fn filter(&self, mut keep: impl FnMut(&TextRecord) -> bool) -> Dataset {
        Dataset {
            subtask: self.subtask,
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a TextRecord;
    type IntoIter = std::slice::Iter<'a, TextRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}
