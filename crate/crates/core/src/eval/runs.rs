use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{boxplot_stats, BoxplotStats, EvalError, Prf};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    #[serde(flatten)]
    pub prf: Prf,
}

/// Results of one stack over all seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSetReport {
    pub stack: String,
    pub per_seed: Vec<SeedMetrics>,
    /// Per-metric minima across seeds; the reported table row.
    pub min: Prf,
    pub mean: Prf,
    pub max: Prf,
    /// Over per-seed F1.
    pub boxplot: BoxplotStats,
}

pub fn summarize_runs(per_seed: &[SeedMetrics], stack: &str) -> Result<RunSetReport, EvalError> {
    if per_seed.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let col = |f: fn(&Prf) -> f64| per_seed.iter().map(|s| f(&s.prf)).collect::<Vec<f64>>();
    let (p, r, f1) = (col(|m| m.precision), col(|m| m.recall), col(|m| m.f1));
    let reduce = |g: fn(&[f64]) -> f64| Prf { precision: g(&p), recall: g(&r), f1: g(&f1) };
    Ok(RunSetReport {
        stack: stack.to_string(),
        per_seed: per_seed.to_vec(),
        min: reduce(|v| v.iter().copied().fold(f64::INFINITY, f64::min)),
        mean: reduce(|v| v.iter().sum::<f64>() / v.len() as f64),
        max: reduce(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        boxplot: boxplot_stats(&f1)?,
    })
}

/// `stack,P_min,R_min,F1_min`, one row per stack.
pub fn report_csv(reports: &[RunSetReport]) -> String {
    let mut out = String::from("stack,P_min,R_min,F1_min\n");
    for r in reports {
        writeln!(out, "{},{},{},{}", r.stack, r.min.precision, r.min.recall, r.min.f1).unwrap();
    }
    out
}

/// Boxplot statistics per stack, outliers separated by semicolons.
pub fn boxplot_csv(reports: &[RunSetReport]) -> String {
    let mut out = String::from("stack,min,whisker_low,q1,median,q3,whisker_high,max,outliers\n");
    for r in reports {
        let b = &r.boxplot;
        let outliers: Vec<String> = b.outliers.iter().map(f64::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.stack,
            b.min,
            b.whisker_low,
            b.q1,
            b.median,
            b.q3,
            b.whisker_high,
            b.max,
            outliers.join(";")
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeds(f1s: &[f64]) -> Vec<SeedMetrics> {
        f1s.iter()
            .enumerate()
            .map(|(i, &f1)| SeedMetrics { seed: i as u64 + 1, prf: Prf { precision: f1 + 0.01, recall: f1 - 0.01, f1 } })
            .collect()
    }

    #[test]
    fn reported_row_is_minimum() {
        let r = summarize_runs(&seeds(&[80.3, 81.2, 80.9]), "w2v").unwrap();
        assert_eq!(r.min.f1, 80.3);
        assert_eq!(r.max.f1, 81.2);
        assert_eq!(r.per_seed.len(), 3);
    }

    #[test]
    fn singleton() {
        let r = summarize_runs(&seeds(&[0.7]), "x").unwrap();
        assert_eq!(r.min, r.max);
        assert_eq!(r.boxplot.q1, r.boxplot.q3);
        assert!(summarize_runs(&[], "x").is_err());
    }

    #[test]
    fn csv_shapes() {
        let r = summarize_runs(&seeds(&[0.1, 0.2, 0.3, 0.4, 5.0]), "base").unwrap();
        let csv = report_csv(std::slice::from_ref(&r));
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("base,"));
        let b = boxplot_csv(&[r]);
        assert!(b.lines().nth(1).unwrap().ends_with(",5"));
    }
}
