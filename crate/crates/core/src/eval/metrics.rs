use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;

use super::EvalError;

/// `counts[gold][pred]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        Self { k, counts: vec![0; k * k] }
    }

    pub fn from_counts(k: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), k * k);
        Self { k, counts }
    }

    pub fn classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, gold: usize, pred: usize) -> u64 {
        self.counts[gold * self.k + pred]
    }

    pub fn add(&mut self, gold: usize, pred: usize) {
        self.counts[gold * self.k + pred] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn tp(&self, c: usize) -> u64 {
        self.get(c, c)
    }

    /// Predicted as `c` but gold is another class.
    pub fn fp(&self, c: usize) -> u64 {
        (0..self.k).map(|g| self.get(g, c)).sum::<u64>() - self.tp(c)
    }

    /// Gold `c` predicted as another class.
    pub fn fn_(&self, c: usize) -> u64 {
        (0..self.k).map(|p| self.get(c, p)).sum::<u64>() - self.tp(c)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.k)
    }
}

pub fn confusion(preds: &[usize], golds: &[usize], k: usize) -> Result<ConfusionMatrix, EvalError> {
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch { preds: preds.len(), golds: golds.len() });
    }
    let mut cm = ConfusionMatrix::zeros(k);
    for (&p, &g) in preds.iter().zip(golds) {
        if p >= k || g >= k {
            return Err(EvalError::ClassOutOfRange { class: p.max(g), classes: k });
        }
        cm.add(g, p);
    }
    Ok(cm)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Precision, recall and F1 from raw counts; 0/0 is taken as 0.
pub fn prf(tp: u64, fp: u64, fn_: u64) -> Prf {
    let (tp, fp, fn_) = (tp as f64, fp as f64, fn_ as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    Prf { precision, recall, f1: ratio(2.0 * precision * recall, precision + recall) }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub name: String,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    #[serde(flatten)]
    pub prf: Prf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub micro: Prf,
    /// Unweighted over classes other than the catch-all.
    pub macro_avg: Prf,
    pub negative_index: Option<usize>,
}

pub fn aggregate(cm: &ConfusionMatrix, labels: &LabelSet) -> Result<MetricsReport, EvalError> {
    if cm.classes() != labels.len() {
        return Err(EvalError::ClassCountMismatch { matrix: cm.classes(), labels: labels.len() });
    }
    let per_class: Vec<ClassMetrics> = (0..cm.classes())
        .map(|c| {
            let (tp, fp, fn_) = (cm.tp(c), cm.fp(c), cm.fn_(c));
            ClassMetrics { name: labels.names()[c].clone(), tp, fp, fn_, prf: prf(tp, fp, fn_) }
        })
        .collect();
    let (tp, fp, fn_) = per_class
        .iter()
        .fold((0, 0, 0), |(a, b, c), m| (a + m.tp, b + m.fp, c + m.fn_));
    let counted: Vec<&ClassMetrics> = per_class
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != labels.negative_index())
        .map(|(_, m)| m)
        .collect();
    let n = counted.len() as f64;
    let mean = |f: fn(&Prf) -> f64| ratio(counted.iter().map(|m| f(&m.prf)).sum(), n);
    let macro_avg = Prf { precision: mean(|p| p.precision), recall: mean(|p| p.recall), f1: mean(|p| p.f1) };
    Ok(MetricsReport { per_class, micro: prf(tp, fp, fn_), macro_avg, negative_index: labels.negative_index() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DirectionPolicy;

    fn labels(k: usize, with_other: bool) -> LabelSet {
        let mut names: Vec<String> = (0..k - usize::from(with_other)).map(|i| format!("R{i}")).collect();
        if with_other {
            names.push("Other".into());
        }
        LabelSet::from_labels(names.iter().map(String::as_str), DirectionPolicy::Collapse)
    }

    #[test]
    fn prf_spot_values() {
        let p = prf(3, 1, 2);
        assert_eq!(p.precision, 0.75);
        assert_eq!(p.recall, 0.6);
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(prf(0, 0, 0), Prf::default());
        let eq = prf(4, 4, 4);
        assert_eq!(eq.f1, eq.precision);
    }

    #[test]
    fn confusion_cases() {
        let cm = confusion(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        for g in 0..3 {
            for p in 0..3 {
                assert_eq!(cm.get(g, p), u64::from(g == p));
            }
        }
        assert_eq!(confusion(&[], &[], 4).unwrap(), ConfusionMatrix::zeros(4));
        assert!(matches!(confusion(&[0], &[], 2), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(confusion(&[5], &[0], 2), Err(EvalError::ClassOutOfRange { .. })));
    }

    #[test]
    fn perfect_classifier() {
        let ls = labels(4, true);
        let golds = [0, 1, 2, 3, 0, 1];
        let r = aggregate(&confusion(&golds, &golds, 4).unwrap(), &ls).unwrap();
        assert!(r.per_class.iter().all(|c| c.prf.f1 == 1.0));
        assert_eq!(r.macro_avg.f1, 1.0);
        assert_eq!(r.micro.f1, 1.0);
    }

    #[test]
    fn absent_class_counts_as_zero_in_macro() {
        let ls = labels(3, false);
        let r = aggregate(&confusion(&[0, 1], &[0, 1], 3).unwrap(), &ls).unwrap();
        assert_eq!(r.per_class[2].prf, Prf::default());
        assert!((r.macro_avg.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn macro_excludes_negative() {
        let ls = labels(3, true);
        assert_eq!(ls.negative_index(), Some(0));
        // "Other" is always wrong, the rest always right.
        let r = aggregate(&confusion(&[1, 1, 2], &[0, 1, 2], 3).unwrap(), &ls).unwrap();
        assert_eq!(r.per_class[0].prf.f1, 0.0);
        assert!((r.macro_avg.recall - 1.0).abs() < 1e-15);
        assert!((r.macro_avg.precision - 0.75).abs() < 1e-15);
    }

    #[test]
    fn micro_is_accuracy_for_single_label() {
        let ls = labels(3, false);
        let r = aggregate(&confusion(&[0, 2, 1, 1], &[0, 1, 1, 2], 3).unwrap(), &ls).unwrap();
        assert_eq!(r.micro.precision, r.micro.recall);
        assert_eq!(r.micro.f1, 0.5);
    }

    #[test]
    fn class_count_checked() {
        assert!(aggregate(&ConfusionMatrix::zeros(2), &labels(3, false)).is_err());
    }
}
