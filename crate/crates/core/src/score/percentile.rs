use std::path::Path;

use crate::error::{Error, Result};

/// Percentage of systems scoring strictly below `mine`. Ties do not count
/// as worse. `all_scores` must contain `mine`.
pub fn rank_percentile(mine: f64, all_scores: &[f64]) -> Result<f64> {
    if !mine.is_finite() || all_scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("leaderboard score"));
    }
    if !all_scores.contains(&mine) {
        return Err(Error::Validation(format!(
            "score {mine} is not on the leaderboard"
        )));
    }
    let worse = all_scores.iter().filter(|s| **s < mine).count();
    Ok(100.0 * worse as f64 / all_scores.len() as f64)
}

/// A leaderboard CSV with a `system,score` header.
pub fn read_leaderboard(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_leaderboard(&text)
}

pub fn parse_leaderboard(text: &str) -> Result<Vec<(String, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["system", "score"] {
        return Err(Error::parse(1, "expected header `system,score`"));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(line, e.to_string()))?;
        let score: f64 = record[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("not a number: {:?}", &record[1])))?;
        out.push((record[0].to_string(), score));
    }
    Ok(out)
}
