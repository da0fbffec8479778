use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::confusables::ConfusablesTable;
use crate::error::{Error, Result};

pub const DEFAULT_HOMOGLYPH_RATE: f64 = 0.10;

pub fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "homoglyph rate must be in (0, 1], got {rate}"
        )))
    }
}

/// Index of the first replaced position among `m` candidates, drawn from the
/// distribution of independent Bernoulli(`rate`) trials conditioned on at
/// least one success. This is what redrawing until something is replaced
/// produces, without the unbounded loop.
fn first_success(rng: &mut ChaCha8Rng, m: usize, rate: f64) -> usize {
    if rate >= 1.0 || m == 1 {
        return 0;
    }
    let q = 1.0 - rate;
    let u: f64 = rng.gen();
    let none = q.powi(m as i32);
    let j = ((1.0 - u * (1.0 - none)).ln() / q.ln()).floor();
    (j.max(0.0) as usize).min(m - 1)
}

/// Replace characters by cross-script look-alikes.
///
/// Each character with a table entry is replaced with probability `rate`
/// by a uniformly chosen substitute, conditioned on at least one
/// replacement when any character is mappable. The output has the same
/// number of code points as the input and depends only on
/// `(text, table, rate, seed)`.
pub fn homoglyphy(text: &str, table: &ConfusablesTable, rate: f64, seed: u64) -> Result<String> {
    check_rate(rate)?;
    let mut chars: Vec<char> = text.chars().collect();
    let mappable: Vec<usize> = chars
        .iter()
        .enumerate()
        .filter(|(_, c)| table.is_mappable(**c))
        .map(|(i, _)| i)
        .collect();
    if mappable.is_empty() {
        return Ok(text.to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = first_success(&mut rng, mappable.len(), rate);
    for (k, &pos) in mappable.iter().enumerate().skip(first) {
        if k > first && rng.gen::<f64>() >= rate {
            continue;
        }
        let subs = table.substitutes(chars[pos]).expect("mappable");
        chars[pos] = subs[rng.gen_range(0..subs.len())];
    }
    Ok(chars.into_iter().collect())
}
