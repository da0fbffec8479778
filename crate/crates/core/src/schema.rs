//! Languages, subtasks and their label spaces.
//!
//! The label order returned by [`Subtask::label_names`] is the canonical bit
//! order used by every file format and report in this crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

macro_rules! languages {
    ($($variant:ident => $code:literal),+ $(,)?) => {
        /// One of the 22 shared-task languages, identified by a 3-letter code.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum LanguageCode {
            $($variant),+
        }

        impl LanguageCode {
            /// All languages in canonical (alphabetical) row order.
            pub const ALL: [LanguageCode; 22] = [$(LanguageCode::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(LanguageCode::$variant => $code),+
                }
            }
        }

        impl FromStr for LanguageCode {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($code => Ok(LanguageCode::$variant),)+
                    other => Err(Error::Schema(format!("unknown language code {other:?}"))),
                }
            }
        }
    };
}

languages! {
    Amh => "amh", Arb => "arb", Ben => "ben", Deu => "deu", Eng => "eng", Fas => "fas",
    Hau => "hau", Hin => "hin", Ita => "ita", Khm => "khm", Mya => "mya", Nep => "nep",
    Ori => "ori", Pan => "pan", Pol => "pol", Rus => "rus", Spa => "spa", Swa => "swa",
    Tel => "tel", Tur => "tur", Urd => "urd", Zho => "zho",
}

impl LanguageCode {
    /// Whether the language takes part in the manifestation subtask.
    pub fn in_subtask3(self) -> bool {
        !matches!(
            self,
            LanguageCode::Ita | LanguageCode::Mya | LanguageCode::Pol | LanguageCode::Rus
        )
    }

    pub fn supports(self, subtask: Subtask) -> bool {
        subtask != Subtask::S3 || self.in_subtask3()
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for LanguageCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LanguageCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

const S1_LABELS: &[&str] = &["polarization"];
const S2_LABELS: &[&str] = &[
    "political",
    "racial/ethnic",
    "religious",
    "gender/sexual",
    "other",
];
const S3_LABELS: &[&str] = &[
    "stereotype",
    "vilification",
    "dehumanization",
    "extreme language",
    "lack of empathy",
    "invalidation",
];

/// The three subtasks: binary detection, polarization type, manifestation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subtask {
    #[serde(rename = "1")]
    S1,
    #[serde(rename = "2")]
    S2,
    #[serde(rename = "3")]
    S3,
}

impl Subtask {
    pub const ALL: [Subtask; 3] = [Subtask::S1, Subtask::S2, Subtask::S3];

    pub fn label_names(self) -> &'static [&'static str] {
        match self {
            Subtask::S1 => S1_LABELS,
            Subtask::S2 => S2_LABELS,
            Subtask::S3 => S3_LABELS,
        }
    }

    pub fn width(self) -> usize {
        self.label_names().len()
    }

    pub fn is_multilabel(self) -> bool {
        self != Subtask::S1
    }

    pub fn number(self) -> u8 {
        match self {
            Subtask::S1 => 1,
            Subtask::S2 => 2,
            Subtask::S3 => 3,
        }
    }

    /// Languages that take part in this subtask, in canonical order.
    pub fn languages(self) -> Vec<LanguageCode> {
        LanguageCode::ALL
            .into_iter()
            .filter(|l| l.supports(self))
            .collect()
    }

    /// Stable digest of the label space; model files carry it so a model
    /// trained for one schema refuses to score another.
    pub fn schema_hash(self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(format!("subtask{}", self.number()));
        for name in self.label_names() {
            h.update([0u8]);
            h.update(name.as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

impl fmt::Display for Subtask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.number())
    }
}

impl FromStr for Subtask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "s1" | "subtask1" => Ok(Subtask::S1),
            "2" | "s2" | "subtask2" => Ok(Subtask::S2),
            "3" | "s3" | "subtask3" => Ok(Subtask::S3),
            other => Err(Error::Schema(format!("unknown subtask {other:?}"))),
        }
    }
}

/// A fixed-width label bit vector for one subtask.
///
/// Bit `i` corresponds to `subtask.label_names()[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubtaskLabels {
    subtask: Subtask,
    bits: u8,
}

impl SubtaskLabels {
    pub fn from_bits(subtask: Subtask, bits: &[bool]) -> Result<Self> {
        if bits.len() != subtask.width() {
            return Err(Error::Schema(format!(
                "{subtask} expects {} label bits, got {}",
                subtask.width(),
                bits.len()
            )));
        }
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, &b)| if b { acc | (1 << i) } else { acc });
        Ok(SubtaskLabels {
            subtask,
            bits: mask,
        })
    }

    /// Parse the 0/1 integer array used by the line format.
    pub fn from_ints(subtask: Subtask, ints: &[i64]) -> Result<Self> {
        let bits = ints
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Schema(format!("label value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(subtask, &bits)
    }

    pub fn binary(polarized: bool) -> Self {
        SubtaskLabels {
            subtask: Subtask::S1,
            bits: polarized as u8,
        }
    }

    /// Build from a set of label names; unknown names are a schema error.
    pub fn from_names<S: AsRef<str>>(subtask: Subtask, names: &[S]) -> Result<Self> {
        let mut bits = vec![false; subtask.width()];
        for name in names {
            let name = name.as_ref();
            let idx = subtask
                .label_names()
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Schema(format!("{subtask} has no label {name:?}")))?;
            bits[idx] = true;
        }
        Self::from_bits(subtask, &bits)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.subtask
            .label_names()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.get(*i))
            .map(|(_, n)| *n)
            .collect()
    }

    pub fn subtask(&self) -> Subtask {
        self.subtask
    }

    pub fn width(&self) -> usize {
        self.subtask.width()
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.width() && self.bits & (1 << i) != 0
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.width()).map(|i| self.get(i)).collect()
    }

    pub fn to_ints(&self) -> Vec<u8> {
        (0..self.width()).map(|i| self.get(i) as u8).collect()
    }

    /// Raw bit mask; bit `i` is label `i`.
    pub fn mask(&self) -> u8 {
        self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_two_languages_eighteen_in_subtask3() {
        assert_eq!(LanguageCode::ALL.len(), 22);
        assert_eq!(Subtask::S3.languages().len(), 18);
        for code in ["ita", "mya", "pol", "rus"] {
            let l: LanguageCode = code.parse().unwrap();
            assert!(!l.in_subtask3());
        }
        assert!(LanguageCode::Hau.in_subtask3());
    }

    #[test]
    fn language_codes_round_trip() {
        for l in LanguageCode::ALL {
            assert_eq!(l.as_str().parse::<LanguageCode>().unwrap(), l);
        }
        assert!("xyz".parse::<LanguageCode>().is_err());
        assert!("ENG".parse::<LanguageCode>().is_err());
    }

    #[test]
    fn widths() {
        assert_eq!(Subtask::S1.width(), 1);
        assert_eq!(Subtask::S2.width(), 5);
        assert_eq!(Subtask::S3.width(), 6);
        assert_eq!(Subtask::S2.label_names()[1], "racial/ethnic");
        assert_eq!(Subtask::S3.label_names()[3], "extreme language");
    }

    #[test]
    fn width_mismatch_is_schema_error() {
        let err = SubtaskLabels::from_ints(Subtask::S2, &[0, 1, 0, 0, 0, 1]).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert!(SubtaskLabels::from_ints(Subtask::S1, &[2]).is_err());
    }

    #[test]
    fn every_label_value_renders_and_parses_by_name() {
        for subtask in Subtask::ALL {
            for mask in 0u32..(1 << subtask.width()) {
                let bits: Vec<bool> = (0..subtask.width()).map(|i| mask & (1 << i) != 0).collect();
                let labels = SubtaskLabels::from_bits(subtask, &bits).unwrap();
                let back = SubtaskLabels::from_names(subtask, &labels.names()).unwrap();
                assert_eq!(labels, back);
                assert_eq!(labels.bits(), bits);
            }
        }
    }

    #[test]
    fn schema_hashes_differ() {
        let hashes: std::collections::HashSet<_> =
            Subtask::ALL.iter().map(|s| s.schema_hash()).collect();
        assert_eq!(hashes.len(), 3);
    }
}
