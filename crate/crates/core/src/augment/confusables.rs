//! Cross-script look-alike character table.
//!
//! File format: UTF-8, one mapping per line, `source<TAB>sub1 sub2 ...`.
//! Blank lines and lines starting with `#` are ignored. Every source and
//! substitute is a single code point, and every substitute belongs to a
//! different Unicode script than its source.

use std::collections::BTreeMap;
use std::path::Path;

use unicode_script::{Script, UnicodeScript};

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/confusables.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusablesTable {
    entries: BTreeMap<char, Vec<char>>,
}

fn single_char(token: &str, line: usize) -> Result<char> {
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::parse(
            line,
            format!("{token:?} is not a single code point"),
        )),
    }
}

fn distinct_scripts(a: char, b: char) -> bool {
    let (sa, sb) = (a.script(), b.script());
    sa != sb && sb != Script::Common && sb != Script::Inherited
}

impl ConfusablesTable {
    pub fn new(entries: BTreeMap<char, Vec<char>>) -> Result<Self> {
        for (&src, subs) in &entries {
            if subs.is_empty() {
                return Err(Error::Validation(format!("{src:?} has no substitutes")));
            }
            for &sub in subs {
                if sub == src {
                    return Err(Error::Validation(format!("{src:?} maps to itself")));
                }
                if !distinct_scripts(src, sub) {
                    return Err(Error::Validation(format!(
                        "{src:?} ({:?}) and {sub:?} ({:?}) are not from different scripts",
                        src.script(),
                        sub.script()
                    )));
                }
            }
        }
        Ok(ConfusablesTable { entries })
    }

    /// The table shipped with the crate: Latin, Cyrillic and Greek pairs.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("built-in confusables table is valid")
    }

    pub fn parse(source: &str) -> Result<Self> {
        let mut entries: BTreeMap<char, Vec<char>> = BTreeMap::new();
        for (i, raw) in source.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (src, subs) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected source<TAB>substitutes"))?;
            let src = single_char(src, line_no)?;
            let slot = entries.entry(src).or_default();
            for token in subs.split_whitespace() {
                let sub = single_char(token, line_no)?;
                if !slot.contains(&sub) {
                    slot.push(sub);
                }
            }
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn substitutes(&self, c: char) -> Option<&[char]> {
        self.entries.get(&c).map(Vec::as_slice)
    }

    pub fn is_mappable(&self, c: char) -> bool {
        self.entries.contains_key(&c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &[char])> {
        self.entries.iter().map(|(c, v)| (*c, v.as_slice()))
    }
}
