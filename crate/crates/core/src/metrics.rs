//! Confusion counts, precision/recall/F1 and a histogram KL-divergence
//! estimator for comparing class-conditional feature distributions.
//!
//! Galloping (+1) is the positive class. Ratios whose denominator is zero are
//! reported as `None` and serialized as `NA`; they are never replaced by 0.

use std::fmt;

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::svm::SvmModel;

/// CSV header matching [`MetricsReport::csv_row`].
pub const REPORT_HEADER: &str = "tp,fp,fn,tn,precision,recall,f1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledPrediction {
    pub true_label: Label,
    pub predicted_label: Label,
}

impl LabeledPrediction {
    pub fn new(true_label: Label, predicted_label: Label) -> Self {
        Self {
            true_label,
            predicted_label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl MetricsReport {
    /// Builds the full report from counts.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let mut r = Self {
            tp,
            fp,
            fn_,
            tn,
            precision: None,
            recall: None,
            f1: None,
        };
        r.precision = precision(&r);
        r.recall = recall(&r);
        r.f1 = match (r.precision, r.recall) {
            (Some(p), Some(q)) => f1(p, q),
            _ => None,
        };
        r
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| (self.tp + self.tn) as f64 / n as f64)
    }

    /// `tp,fp,fn,tn,precision,recall,f1`
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.tp,
            self.fp,
            self.fn_,
            self.tn,
            fmt_metric(self.precision),
            fmt_metric(self.recall),
            fmt_metric(self.f1)
        )
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "precision={} recall={} f1={} (tp={} fp={} fn={} tn={})",
            fmt_metric(self.precision),
            fmt_metric(self.recall),
            fmt_metric(self.f1),
            self.tp,
            self.fp,
            self.fn_,
            self.tn
        )
    }
}

pub fn fmt_metric(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => "NA".to_string(),
    }
}

/// Counts only; the ratio fields of the returned report are filled in as well.
pub fn confusion(pairs: &[LabeledPrediction]) -> Result<MetricsReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for p in pairs {
        match (p.true_label, p.predicted_label) {
            (Label::Galloping, Label::Galloping) => tp += 1,
            (Label::Normal, Label::Galloping) => fp += 1,
            (Label::Galloping, Label::Normal) => fn_ += 1,
            (Label::Normal, Label::Normal) => tn += 1,
        }
    }
    Ok(MetricsReport::from_counts(tp, fp, fn_, tn))
}

/// `tp / (tp + fn)`, `None` when there are no positive samples.
pub fn recall(report: &MetricsReport) -> Option<f64> {
    let d = report.tp + report.fn_;
    (d > 0).then(|| report.tp as f64 / d as f64)
}

/// `tp / (tp + fp)`, `None` when nothing was predicted positive.
pub fn precision(report: &MetricsReport) -> Option<f64> {
    let d = report.tp + report.fp;
    (d > 0).then(|| report.tp as f64 / d as f64)
}

/// Harmonic mean of precision and recall; `None` when both are zero or
/// either lies outside [0, 1].
pub fn f1(precision: f64, recall: f64) -> Option<f64> {
    let valid = |v: f64| (0.0..=1.0).contains(&v);
    if !valid(precision) || !valid(recall) || precision + recall == 0.0 {
        return None;
    }
    Some(2.0 * precision * recall / (precision + recall))
}

/// Predicts every sample of `test` (raw, unscaled values containing the
/// model's features) and tallies the confusion counts.
pub fn evaluate(model: &SvmModel, test: &Dataset) -> Result<MetricsReport> {
    let prepared = model.prepare(test)?;
    let pairs = prepared
        .rows()
        .zip(prepared.labels())
        .map(|(x, &y)| Ok(LabeledPrediction::new(y, model.predict(x)?)))
        .collect::<Result<Vec<_>>>()?;
    confusion(&pairs)
}

/// Default bin count for [`kl_divergence`].
pub const DEFAULT_KL_BINS: usize = 20;

/// Histogram estimate of KL(P || Q) in nats.
///
/// Both samples are binned on a shared support spanning the pooled min/max
/// with `bins` equal-width bins. Each bin receives an extra `1/N` of mass
/// (N being that sample's size) before normalizing, i.e. bin probability
/// `(count + 1) / (N + bins)`.
pub fn kl_divergence(p_values: &[f64], q_values: &[f64], bins: usize) -> Result<f64> {
    if p_values.is_empty() || q_values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 bins, got {bins}")));
    }
    if p_values.iter().chain(q_values).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite value in KL input".into()));
    }
    let (lo, hi) = p_values
        .iter()
        .chain(q_values)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi <= lo {
        log::info!("KL divergence: pooled range is degenerate, returning 0");
        return Ok(0.0);
    }
    let p = smoothed_histogram(p_values, lo, hi, bins);
    let q = smoothed_histogram(q_values, lo, hi, bins);
    let kl = p
        .iter()
        .zip(&q)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum::<f64>();
    // rounding can leave a tiny negative residue on identical inputs
    Ok(kl.max(0.0))
}

fn smoothed_histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let denom = (values.len() + bins) as f64;
    counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect()
}

/// KL divergence between the galloping and normal groups of one column.
pub fn class_kl(dataset: &Dataset, column: usize, bins: usize) -> Result<f64> {
    let mut gal = Vec::new();
    let mut nor = Vec::new();
    for (row, label) in dataset.rows().zip(dataset.labels()) {
        match label {
            Label::Galloping => gal.push(row[column]),
            Label::Normal => nor.push(row[column]),
        }
    }
    kl_divergence(&gal, &nor, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Galloping as G, Normal as N};

    fn pairs(list: &[(Label, Label)]) -> Vec<LabeledPrediction> {
        list.iter().map(|&(y, p)| LabeledPrediction::new(y, p)).collect()
    }

    #[test]
    fn confusion_counts() {
        let r = confusion(&pairs(&[(G, G), (G, N), (N, N), (N, G)])).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (1, 1, 1, 1));
        assert!(confusion(&[]).is_err());
    }

    #[test]
    fn all_correct_and_all_flipped() {
        let list = [(G, G), (G, G), (N, N), (N, N), (N, N)];
        let r = confusion(&pairs(&list)).unwrap();
        assert_eq!((r.fp, r.fn_), (0, 0));
        let flipped: Vec<_> = list.iter().map(|&(y, p)| (y, p.flipped())).collect();
        let f = confusion(&pairs(&flipped)).unwrap();
        assert_eq!((f.tp, f.fn_, f.tn, f.fp), (r.fn_, r.tp, r.fp, r.tn));
    }

    #[test]
    fn ratios() {
        let r = MetricsReport::from_counts(1, 0, 1, 0);
        assert_eq!(recall(&r), Some(0.5));
        let r = MetricsReport::from_counts(0, 0, 3, 5);
        assert_eq!(precision(&r), None);
        assert_eq!(r.f1, None);
        let r = MetricsReport::from_counts(3, 1, 0, 0);
        assert_eq!(precision(&r), Some(0.75));
        let r = MetricsReport::from_counts(0, 4, 0, 2);
        assert_eq!(recall(&r), None);
    }

    #[test]
    fn f1_values() {
        assert_eq!(f1(1.0, 1.0), Some(1.0));
        assert!((f1(0.5, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1(0.3, 0.3), Some(0.3));
        assert_eq!(f1(0.0, 0.0), None);
        assert_eq!(f1(1.2, 0.5), None);
    }

    #[test]
    fn zero_precision_and_recall_give_undefined_f1() {
        // tp = 0 with both denominators positive
        let r = MetricsReport::from_counts(0, 2, 3, 1);
        assert_eq!(r.precision, Some(0.0));
        assert_eq!(r.recall, Some(0.0));
        assert_eq!(r.f1, None);
        assert_eq!(r.csv_row(), "0,2,3,1,0,0,NA");
    }

    #[test]
    fn kl_identical_is_zero() {
        let v: Vec<f64> = (0..500).map(|i| (i as f64 * 0.37).sin()).collect();
        assert!(kl_divergence(&v, &v, 20).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn kl_degenerate_range() {
        assert_eq!(kl_divergence(&[2.0, 2.0], &[2.0], 10).unwrap(), 0.0);
        assert!(kl_divergence(&[1.0], &[2.0], 1).is_err());
        assert!(kl_divergence(&[], &[2.0], 5).is_err());
    }

    #[test]
    fn kl_smoothing_by_hand() {
        // p = {0, 0}, q = {1, 1}, 2 bins over [0, 1]:
        // p_hat = (3/4, 1/4), q_hat = (1/4, 3/4)
        let got = kl_divergence(&[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        let want = 0.75 * 3f64.ln() + 0.25 * (1.0f64 / 3.0).ln();
        assert!((got - want).abs() < 1e-15);
    }
}
