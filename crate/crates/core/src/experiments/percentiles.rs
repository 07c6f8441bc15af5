use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercentileSummary {
    pub p5: f64,
    pub median: f64,
    pub p95: f64,
    /// Number of values summarized.
    pub n: usize,
}

impl PercentileSummary {
    /// Placeholder for a cell with no finite values.
    pub const MISSING: PercentileSummary = PercentileSummary {
        p5: f64::NAN,
        median: f64::NAN,
        p95: f64::NAN,
        n: 0,
    };

    pub fn is_missing(&self) -> bool {
        self.n == 0
    }
}

/// Nearest-rank percentile of sorted data: the value at rank `ceil(p/100 * n)`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// 5th, 50th and 95th nearest-rank percentiles.
pub fn summarize_percentiles(values: &[f64]) -> Result<PercentileSummary> {
    if values.is_empty() {
        return Err(Error::invalid("cannot summarize an empty sequence"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("cannot summarize NaN values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(PercentileSummary {
        p5: nearest_rank(&sorted, 5.0),
        median: nearest_rank(&sorted, 50.0),
        p95: nearest_rank(&sorted, 95.0),
        n: sorted.len(),
    })
}

/// Summary of the finite entries, or [`PercentileSummary::MISSING`].
pub fn summarize_finite(values: &[f64]) -> PercentileSummary {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    summarize_percentiles(&finite).unwrap_or(PercentileSummary::MISSING)
}
