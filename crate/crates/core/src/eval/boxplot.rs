use serde::{Deserialize, Serialize};

use super::EvalError;

/// Tukey boxplot summary with 1.5·IQR fences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub const FENCE_FACTOR: f64 = 1.5;

/// Quantile `p` of sorted data by linear interpolation at position `p·(n−1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(EvalError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - FENCE_FACTOR * iqr, q3 + FENCE_FACTOR * iqr);
    let inside = |v: &f64| *v >= lo_fence && *v <= hi_fence;
    let whisker_low = sorted.iter().copied().find(inside).unwrap_or(q1);
    let whisker_high = sorted.iter().rev().copied().find(inside).unwrap_or(q3);
    let outliers = sorted.iter().copied().filter(|v| !inside(v)).collect();
    Ok(BoxplotStats {
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        whisker_low,
        whisker_high,
        outliers,
    })
}
