//! PUF quality metrics, response autocorrelation and CRP scatter exports.
//!
//! The Hamming-based metrics accumulate integer bit counts and divide once,
//! so results are the correctly rounded value of the exact rational.

use crate::encoding::{Bitstring24, Interpretation, ResponseSet};
use crate::error::{domain, shape, Error, Result};

fn check_aligned(sets: &[&ResponseSet]) -> Result<(usize, usize)> {
    let first = sets.first().ok_or_else(|| domain("no response sets given"))?;
    let (m, n) = (first.len(), first.width());
    for (i, s) in sets.iter().enumerate() {
        if s.len() != m || s.width() != n {
            return Err(shape(format!(
                "response set {i} has {} x {}-bit responses, expected {m} x {n}-bit",
                s.len(),
                s.width()
            )));
        }
    }
    if m == 0 {
        return Err(domain("response sets are empty"));
    }
    Ok((m, n))
}

fn hamming(a: u32, b: u32) -> u64 {
    u64::from((a ^ b).count_ones())
}

/// Mean pairwise normalized Hamming distance across `k ≥ 2` PUFs, with
/// responses aligned by challenge.
pub fn uniqueness(responses: &[&ResponseSet]) -> Result<f64> {
    let k = responses.len();
    if k < 2 {
        return Err(domain(format!("uniqueness needs at least 2 PUFs, got {k}")));
    }
    let (m, n) = check_aligned(responses)?;
    let mut total = 0u64;
    for i in 0..k {
        for j in i + 1..k {
            total += responses[i]
                .values()
                .iter()
                .zip(responses[j].values())
                .map(|(&a, &b)| hamming(a, b))
                .sum::<u64>();
        }
    }
    let pairs = (k * (k - 1) / 2) as u64;
    Ok(total as f64 / (pairs * (m * n) as u64) as f64)
}

/// Fraction of one bits over all responses of one PUF.
pub fn uniformity(responses: &ResponseSet) -> Result<f64> {
    let (m, n) = check_aligned(&[responses])?;
    let ones: u64 = responses.values().iter().map(|v| u64::from(v.count_ones())).sum();
    Ok(ones as f64 / (m * n) as f64)
}

/// `1 - mean normalized Hamming distance` between a baseline and `k`
/// repeated measurements of the same challenges.
///
/// Perfectly repeatable responses score 1.
pub fn reliability(baseline: &ResponseSet, repeats: &[&ResponseSet]) -> Result<f64> {
    if repeats.is_empty() {
        return Err(domain("reliability needs at least one repeat"));
    }
    let mut all = vec![baseline];
    all.extend_from_slice(repeats);
    let (m, n) = check_aligned(&all)?;
    let total: u64 = repeats
        .iter()
        .map(|r| {
            baseline
                .values()
                .iter()
                .zip(r.values())
                .map(|(&a, &b)| hamming(a, b))
                .sum::<u64>()
        })
        .sum();
    let bits = (repeats.len() * m * n) as u64;
    Ok((bits - total) as f64 / bits as f64)
}

/// Fraction of ones at `bit_position` (0 = MSB) across all responses of
/// all `k` PUFs.
pub fn bit_aliasing(responses: &[&ResponseSet], bit_position: usize) -> Result<f64> {
    let (m, n) = check_aligned(responses)?;
    if bit_position >= n {
        return Err(domain(format!("bit position {bit_position} is outside 0..{n}")));
    }
    let shift = n - 1 - bit_position;
    let ones: u64 = responses
        .iter()
        .flat_map(|r| r.values())
        .map(|v| u64::from((v >> shift) & 1))
        .sum();
    Ok(ones as f64 / (responses.len() * m) as f64)
}

/// Bit aliasing at every position, position 0 first.
pub fn bit_aliasing_profile(responses: &[&ResponseSet]) -> Result<Vec<f64>> {
    let (_, n) = check_aligned(responses)?;
    (0..n).map(|p| bit_aliasing(responses, p)).collect()
}

/// Sample autocorrelation for lags `0..=max_lag`.
///
/// Uses the biased estimator: every lag's cross-product sum is divided by
/// the full-length sum of squared deviations, so `acf(0) = 1` and
/// `|acf(τ)| ≤ 1`.
pub fn autocorrelation(sequence: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let m = sequence.len();
    if m < 2 {
        return Err(domain(format!("autocorrelation needs at least 2 samples, got {m}")));
    }
    if max_lag >= m {
        return Err(domain(format!("max lag {max_lag} must be below the length {m}")));
    }
    let mean = sequence.iter().sum::<f64>() / m as f64;
    let centered: Vec<f64> = sequence.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|x| x * x).sum();
    if !(denom > 0.0) {
        return Err(Error::Degenerate(
            "constant sequence has no autocorrelation".to_string(),
        ));
    }
    Ok((0..=max_lag)
        .map(|lag| {
            if lag == 0 {
                return 1.0;
            }
            let s: f64 = centered[..m - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum();
            s / denom
        })
        .collect())
}

/// Autocorrelation of an interpretation's responses read as integers, in
/// challenge order.
pub fn response_autocorrelation(interp: &Interpretation, max_lag: usize) -> Result<Vec<f64>> {
    let seq: Vec<f64> = interp.responses.values().iter().map(|&v| f64::from(v)).collect();
    autocorrelation(&seq, max_lag)
}

/// `(challenge, response)` integer pairs in challenge order.
pub fn crp_scatter(challenges: &[Bitstring24], interp: &Interpretation) -> Result<Vec<(u32, u32)>> {
    if challenges.len() != interp.responses.len() {
        return Err(shape(format!(
            "{} challenges but {} responses",
            challenges.len(),
            interp.responses.len()
        )));
    }
    Ok(challenges
        .iter()
        .zip(interp.responses.values())
        .map(|(c, &r)| (c.value(), r))
        .collect())
}

/// Mean, median and population standard deviation of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        } else {
            sorted[mid]
        };
        Some(Self {
            count: values.len(),
            mean,
            median,
            std_dev: var.sqrt(),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        })
    }
}
