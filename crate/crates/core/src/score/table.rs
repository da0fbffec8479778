use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::schema::LanguageCode;

/// Label of the terminal averages row.
pub const AVERAGE_ROW: &str = "Average";

/// Four decimals, with negative zero printed as zero.
pub fn fmt4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

/// Left-aligned text table with a rule under the header.
pub fn render_plain(headers: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = line(headers);
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("  "));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Languages as rows, named metric columns; `None` marks an absent cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    columns: Vec<String>,
    rows: BTreeMap<LanguageCode, Vec<Option<f64>>>,
}

fn parse_cell(raw: &str) -> std::result::Result<Option<f64>, String> {
    let raw = raw.trim();
    if raw.is_empty() || raw == "-" {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| format!("not a number: {raw:?}"))?;
    if !v.is_finite() {
        return Err(format!("not finite: {raw:?}"));
    }
    Ok(Some(v))
}

impl MetricTable {
    pub fn new(columns: Vec<String>) -> Self {
        MetricTable {
            columns,
            rows: BTreeMap::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn languages(&self) -> impl Iterator<Item = LanguageCode> + '_ {
        self.rows.keys().copied()
    }

    pub fn row(&self, lang: LanguageCode) -> Option<&[Option<f64>]> {
        self.rows.get(&lang).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, lang: LanguageCode, row: Vec<Option<f64>>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Dimension {
                expected: self.columns.len(),
                actual: row.len(),
            });
        }
        if row.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("metric table cell"));
        }
        if self.rows.insert(lang, row).is_some() {
            return Err(Error::DuplicateId(lang.to_string()));
        }
        Ok(())
    }

    /// Mean of each column over the languages present in it.
    pub fn column_means(&self) -> Vec<Option<f64>> {
        (0..self.columns.len())
            .map(|j| {
                let present: Vec<f64> = self.rows.values().filter_map(|r| r[j]).collect();
                (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
            })
            .collect()
    }

    /// Parse CSV with a `language` first column. Empty or `-` cells are
    /// absent; an `Average` row is ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(1, e.to_string()))?
            .clone();
        if headers.get(0).map(str::to_ascii_lowercase).as_deref() != Some("language") {
            return Err(Error::parse(1, "first column must be `language`"));
        }
        let mut table = MetricTable::new(headers.iter().skip(1).map(String::from).collect());
        if table.columns.is_empty() {
            return Err(Error::parse(1, "no metric columns"));
        }
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
            let name = &record[0];
            if name.eq_ignore_ascii_case(AVERAGE_ROW) {
                continue;
            }
            let lang: LanguageCode = name
                .parse()
                .map_err(|e: Error| Error::parse(line, e.to_string()))?;
            let row = record
                .iter()
                .skip(1)
                .map(parse_cell)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|m| Error::parse(line, m))?;
            table
                .insert(lang, row)
                .map_err(|e| Error::parse(line, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    fn write_rows(&self, w: &mut csv::Writer<Vec<u8>>) {
        let mut header = vec!["language".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (lang, row) in &self.rows {
            let mut cells = vec![lang.to_string()];
            cells.extend(
                row.iter()
                    .map(|v| v.map(fmt4).unwrap_or_else(|| "-".into())),
            );
            w.write_record(&cells).expect("in-memory write");
        }
    }

    /// CSV with cells rounded to four decimals and `-` for absent cells.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_rows(&mut w);
        finish(w)
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Cellwise `mine - baseline` with a terminal row of column means.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTable {
    pub deltas: MetricTable,
    pub average: Vec<Option<f64>>,
}

impl DeltaTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.deltas.write_rows(&mut w);
        let mut cells = vec![AVERAGE_ROW.to_string()];
        cells.extend(
            self.average
                .iter()
                .map(|v| v.map(fmt4).unwrap_or_else(|| "-".into())),
        );
        w.write_record(&cells).expect("in-memory write");
        finish(w)
    }
}

/// Subtract a baseline table from ours, language by language.
///
/// Both tables must list the same languages and columns. A cell absent on
/// either side is absent in the result and left out of the average.
pub fn baseline_delta(mine: &MetricTable, baseline: &MetricTable) -> Result<DeltaTable> {
    if mine.columns != baseline.columns {
        return Err(Error::Validation(format!(
            "column mismatch: {:?} vs {:?}",
            mine.columns, baseline.columns
        )));
    }
    let ours: Vec<_> = mine.languages().collect();
    let theirs: Vec<_> = baseline.languages().collect();
    if ours != theirs {
        let only = |a: &[LanguageCode], b: &[LanguageCode]| {
            a.iter()
                .filter(|l| !b.contains(l))
                .map(|l| l.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        return Err(Error::Validation(format!(
            "language sets differ: only in mine [{}], only in baseline [{}]",
            only(&ours, &theirs),
            only(&theirs, &ours)
        )));
    }
    let mut deltas = MetricTable::new(mine.columns.clone());
    for (lang, row) in &mine.rows {
        let base = &baseline.rows[lang];
        let diff = row
            .iter()
            .zip(base)
            .map(|(a, b)| Some((*a)? - (*b)?))
            .collect();
        deltas.insert(*lang, diff)?;
    }
    let average = deltas.column_means();
    Ok(DeltaTable { deltas, average })
}
