//! Line-oriented JSON record files.
//!
//! One JSON object per line, UTF-8. Dataset lines carry the keys `id`,
//! `text`, `lang`, `labels` (0/1 array in canonical label order, or `null`),
//! `split`, `provenance` and an optional `parent_id`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{Dataset, Provenance, Split, TextRecord};
use crate::schema::{LanguageCode, Subtask, SubtaskLabels};

#[derive(Debug, Serialize, Deserialize)]
struct RecordLine {
    id: String,
    text: String,
    lang: String,
    labels: Option<Vec<i64>>,
    split: String,
    #[serde(default = "original")]
    provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent_id: Option<String>,
}

fn original() -> String {
    Provenance::Original.as_str().to_string()
}

/// Parse every non-blank line of `path` as `T`, reporting 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value =
            serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        out.push((line_no, value));
    }
    Ok(out)
}

/// Write one JSON document per item. An empty iterator produces an empty file.
pub fn write_jsonl<'a, T, I>(path: &Path, items: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn record_from_line(subtask: Subtask, line_no: usize, line: RecordLine) -> Result<TextRecord> {
    let at = |e: Error| match e {
        Error::Schema(m) => Error::Schema(format!("line {line_no}: {m}")),
        Error::Validation(m) => Error::Validation(format!("line {line_no}: {m}")),
        other => other,
    };
    let lang: LanguageCode = line.lang.parse().map_err(at)?;
    let labels = line
        .labels
        .map(|ints| SubtaskLabels::from_ints(subtask, &ints))
        .transpose()
        .map_err(at)?;
    let split: Split = line.split.parse().map_err(at)?;
    let provenance: Provenance = line.provenance.parse().map_err(at)?;
    TextRecord::new(
        line.id,
        &line.text,
        lang,
        labels,
        split,
        provenance,
        line.parent_id,
    )
    .map_err(at)
}

fn line_from_record(r: &TextRecord) -> RecordLine {
    RecordLine {
        id: r.id().to_string(),
        text: r.text().to_string(),
        lang: r.lang().as_str().to_string(),
        labels: r
            .labels()
            .map(|l| l.to_ints().into_iter().map(i64::from).collect()),
        split: r.split().as_str().to_string(),
        provenance: r.provenance().as_str().to_string(),
        parent_id: r.parent_id().map(str::to_string),
    }
}

/// Read a dataset file for the given subtask. Text is NFC-normalized on read.
pub fn read_dataset(path: &Path, subtask: Subtask) -> Result<Dataset> {
    let records = read_jsonl::<RecordLine>(path)?
        .into_iter()
        .map(|(n, line)| record_from_line(subtask, n, line))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(subtask, records)
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let lines: Vec<RecordLine> = ds.iter().map(line_from_record).collect();
    write_jsonl(path, &lines)
}

/// Serialize a dataset to the exact bytes [`write_dataset`] would produce.
pub fn dataset_to_bytes(ds: &Dataset) -> Vec<u8> {
    let mut out = Vec::new();
    for r in ds {
        serde_json::to_writer(&mut out, &line_from_record(r)).expect("in-memory write");
        out.push(b'\n');
    }
    out
}
