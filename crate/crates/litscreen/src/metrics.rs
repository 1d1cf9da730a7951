//! Evaluation mathematics: confusion matrices, derived classification
//! metrics, Fleiss' kappa inter-rater agreement, work saved over
//! sampling, and dispersion moments.
//!
//! Every derived metric is a fraction in [0, 1] or `None` when its
//! denominator is zero; `None` renders as "—" and never as NaN. All
//! functions here are pure and thread-safe.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Decision;
use crate::error::{Error, Result};

/// TP/TN/FP/FN counts; the root of every derived metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: u64,
    pub true_negatives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl ConfusionMatrix {
    pub fn from_counts(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix {
            true_positives: tp,
            true_negatives: tn,
            false_positives: fp,
            false_negatives: fn_,
        }
    }

    /// Tally (ground truth, predicted) pairs. An included ground truth
    /// with an included prediction is a true positive; an excluded truth
    /// with an included prediction is a false positive, and so on.
    pub fn from_pairs(pairs: &[(Decision, Decision)]) -> Self {
        let mut cm = ConfusionMatrix::default();
        for &(truth, predicted) in pairs {
            cm.record(truth, predicted);
        }
        cm
    }

    pub fn record(&mut self, truth: Decision, predicted: Decision) {
        use Decision::*;
        match (truth, predicted) {
            (Include, Include) => self.true_positives += 1,
            (Exclude, Exclude) => self.true_negatives += 1,
            (Exclude, Include) => self.false_positives += 1,
            (Include, Exclude) => self.false_negatives += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }
}

/// The full metric set for one run. A field is `None` when its
/// denominator is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub npv: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub f2: Option<f64>,
    pub mcc_normalized: Option<f64>,
}

/// Column order used by text and markdown renderings.
pub const METRIC_COLUMNS: [&str; 7] = ["Rec", "Prec", "Spec", "NPV", "bAcc", "F2", "MCC"];

impl MetricsReport {
    /// Values in [`METRIC_COLUMNS`] order.
    pub fn column_values(&self) -> [Option<f64>; 7] {
        [
            self.recall,
            self.precision,
            self.specificity,
            self.npv,
            self.balanced_accuracy,
            self.f2,
            self.mcc_normalized,
        ]
    }

    /// (snake_case name, value) pairs for machine-readable exports.
    pub fn named_values(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("recall", self.recall),
            ("precision", self.precision),
            ("specificity", self.specificity),
            ("npv", self.npv),
            ("balanced_accuracy", self.balanced_accuracy),
            ("f2", self.f2),
            ("mcc_normalized", self.mcc_normalized),
        ]
    }
}

/// Format a metric value at three decimals, "—" when undefined.
pub fn fmt_metric(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.3}"),
        None => "—".to_string(),
    }
}

fn ratio(numerator: u64, denominator: u64) -> Option<f64> {
    if denominator == 0 {
        None
    } else {
        Some(numerator as f64 / denominator as f64)
    }
}

/// Compute every derived metric of a confusion matrix.
///
/// Precision TP/(TP+FP); recall TP/(TP+FN); specificity TN/(TN+FP);
/// NPV TN/(TN+FN); balanced accuracy (Rec+Spec)/2; F2 weights recall
/// twice as heavily as precision; MCC is normalized to [0, 1] via
/// raw/2 + 0.5 so that 0.5 marks random-level performance.
pub fn metrics_report(cm: &ConfusionMatrix) -> MetricsReport {
    let tp = cm.true_positives;
    let tn = cm.true_negatives;
    let fp = cm.false_positives;
    let fn_ = cm.false_negatives;

    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let npv = ratio(tn, tn + fn_);

    let balanced_accuracy = match (recall, specificity) {
        (Some(r), Some(s)) => Some((r + s) / 2.0),
        _ => None,
    };

    let f2 = match (precision, recall) {
        (Some(p), Some(r)) if 4.0 * p + r > 0.0 => Some(5.0 * p * r / (4.0 * p + r)),
        _ => None,
    };

    let product = (tp + fp) as u128 * (tp + fn_) as u128 * (tn + fp) as u128 * (tn + fn_) as u128;
    let mcc_normalized = if product == 0 {
        None
    } else {
        let numerator = (tp as i128 * tn as i128 - fp as i128 * fn_ as i128) as f64;
        Some(numerator / (2.0 * (product as f64).sqrt()) + 0.5)
    };

    MetricsReport {
        precision,
        recall,
        specificity,
        npv,
        balanced_accuracy,
        f2,
        mcc_normalized,
    }
}

/// Interpretation bands for kappa values (Landis & Koch scale).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl AgreementBand {
    pub fn from_kappa(kappa: f64) -> AgreementBand {
        if kappa < 0.0 {
            AgreementBand::Poor
        } else if kappa < 0.21 {
            AgreementBand::Slight
        } else if kappa < 0.41 {
            AgreementBand::Fair
        } else if kappa < 0.61 {
            AgreementBand::Moderate
        } else if kappa < 0.81 {
            AgreementBand::Substantial
        } else {
            AgreementBand::AlmostPerfect
        }
    }
}

impl fmt::Display for AgreementBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgreementBand::Poor => "poor",
            AgreementBand::Slight => "slight",
            AgreementBand::Fair => "fair",
            AgreementBand::Moderate => "moderate",
            AgreementBand::Substantial => "substantial",
            AgreementBand::AlmostPerfect => "almost perfect",
        })
    }
}

/// Fleiss' kappa with its observed / expected agreement components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementResult {
    pub kappa: f64,
    pub p_o: f64,
    pub p_e: f64,
    pub band: AgreementBand,
    /// True when every decision fell in one category, making chance
    /// agreement (p_e) equal to 1; kappa is reported as 1 in that case.
    pub degenerate: bool,
}

/// Fleiss' kappa over an items × raters matrix of binary decisions.
///
/// Observed agreement is the mean over items of the pairwise agreement
/// fraction; expected agreement is the sum of squared overall category
/// proportions.
pub fn fleiss_kappa(decisions: &[Vec<Decision>]) -> Result<AgreementResult> {
    let items = decisions.len();
    if items < 2 {
        return Err(Error::AgreementShape {
            what: "items",
            needed: 2,
            got: items,
        });
    }
    let raters = decisions[0].len();
    if raters < 2 {
        return Err(Error::AgreementShape {
            what: "raters",
            needed: 2,
            got: raters,
        });
    }
    for (item, row) in decisions.iter().enumerate() {
        if row.len() != raters {
            return Err(Error::RaggedMatrix {
                item,
                got: row.len(),
                expected: raters,
            });
        }
    }

    let n = raters as f64;
    let mut total_include = 0u64;
    let mut p_o_sum = 0.0;
    for row in decisions {
        let inc = row.iter().filter(|d| **d == Decision::Include).count() as f64;
        let exc = n - inc;
        total_include += inc as u64;
        p_o_sum += (inc * inc + exc * exc - n) / (n * (n - 1.0));
    }
    let p_o = p_o_sum / items as f64;

    let total = (items * raters) as f64;
    let p_include = total_include as f64 / total;
    let p_exclude = 1.0 - p_include;
    let p_e = p_include * p_include + p_exclude * p_exclude;

    if p_e >= 1.0 {
        return Ok(AgreementResult {
            kappa: 1.0,
            p_o,
            p_e,
            band: AgreementBand::AlmostPerfect,
            degenerate: true,
        });
    }
    let kappa = (p_o - p_e) / (1.0 - p_e);
    Ok(AgreementResult {
        kappa,
        p_o,
        p_e,
        band: AgreementBand::from_kappa(kappa),
        degenerate: false,
    })
}

/// Work saved over sampling at the achieved recall:
/// (TN+FN)/N − 1 + Rec. May be negative; undefined when the matrix has
/// no ground-truth inclusions.
pub fn wss_at_recall(cm: &ConfusionMatrix) -> Result<f64> {
    let positives = cm.true_positives + cm.false_negatives;
    if positives == 0 {
        return Err(Error::RecallUndefined);
    }
    let excluded_by_classifier = (cm.true_negatives + cm.false_negatives) as f64;
    let recall = cm.true_positives as f64 / positives as f64;
    Ok(excluded_by_classifier / cm.total() as f64 - 1.0 + recall)
}

/// Moment and spread statistics of a value series. Fields are `None`
/// when the series is too short (std dev needs 2 values, kurtosis 4).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DispersionStats {
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub std_dev: Option<f64>,
    pub iqr: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

/// Linear-interpolation quantile (type 7) over a sorted slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Sample standard deviation (n−1), type-7 IQR, and bias-corrected
/// excess kurtosis (zero for a normal distribution).
pub fn dispersion_stats(values: &[f64]) -> DispersionStats {
    let n = values.len();
    if n == 0 {
        return DispersionStats::default();
    }
    // a constant series has exactly zero spread; computing it through
    // the general path would leave rounding dust
    if values.iter().all(|v| *v == values[0]) {
        return DispersionStats {
            mean: Some(values[0]),
            median: Some(values[0]),
            std_dev: (n >= 2).then_some(0.0),
            iqr: Some(0.0),
            excess_kurtosis: None,
        };
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);

    let std_dev = if n >= 2 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Some((ss / (nf - 1.0)).sqrt())
    } else {
        None
    };

    let excess_kurtosis = if n >= 4 {
        let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
        let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
        if m2 == 0.0 {
            None
        } else {
            let g2 = m4 / (m2 * m2) - 3.0;
            Some(((nf + 1.0) * g2 + 6.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)))
        }
    } else {
        None
    };

    DispersionStats {
        mean: Some(mean),
        median: Some(median),
        std_dev,
        iqr: Some(iqr),
        excess_kurtosis,
    }
}
