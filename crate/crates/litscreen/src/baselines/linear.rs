//! Linear models: logistic regression and a linear-kernel support
//! vector classifier, both trained by deterministic full-batch descent
//! on standardized features.

use serde::{Deserialize, Serialize};

use crate::baselines::FeatureVector;
use crate::corpus::Decision;
use crate::error::{Error, Result};

/// Regularization applied to logistic regression weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Penalty {
    None,
    L2,
    /// Mixed L1/L2; `l1_ratio` is the L1 share.
    ElasticNet { l1_ratio: f64 },
}

impl Penalty {
    pub fn parse(name: &str, l1_ratio: f64) -> Result<Penalty> {
        match name.to_ascii_lowercase().as_str() {
            "none" => Ok(Penalty::None),
            "l2" => Ok(Penalty::L2),
            "elasticnet" => Ok(Penalty::ElasticNet { l1_ratio }),
            other => Err(Error::BadHyperparameter {
                name: "penalty".into(),
                message: format!("unknown penalty `{other}`"),
            }),
        }
    }
}

/// Per-dimension standardization learned from training data. Linear
/// models fit on raw embedding means condition poorly; scaling is part
/// of the model and applied symmetrically at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &[FeatureVector]) -> Standardizer {
        let d = features.first().map_or(0, |f| f.values.len());
        let n = features.len() as f64;
        let mut means = vec![0.0; d];
        for fv in features {
            for (m, v) in means.iter_mut().zip(&fv.values) {
                *m += v;
            }
        }
        for m in means.iter_mut() {
            *m /= n;
        }
        let mut scales = vec![0.0; d];
        for fv in features {
            for ((s, v), m) in scales.iter_mut().zip(&fv.values).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in scales.iter_mut() {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, scales }
    }

    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_shapes(features: &[FeatureVector], labels: &[Decision]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            got: labels.len(),
        });
    }
    let d = features.first().map_or(0, |f| f.values.len());
    for fv in features {
        if fv.values.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: fv.values.len(),
            });
        }
    }
    let includes = labels.iter().filter(|l| **l == Decision::Include).count();
    if includes == 0 || includes == labels.len() {
        return Err(Error::SingleClassTraining);
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub penalty: Penalty,
    /// Inverse regularization strength.
    pub c: f64,
    pub max_iter: usize,
    pub learning_rate: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            penalty: Penalty::L2,
            c: 1.0,
            max_iter: 300,
            learning_rate: 0.5,
        }
    }
}

/// Binary logistic regression fit by full-batch gradient descent
/// (proximal step for the L1 part of elastic net).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    weights: Vec<f64>,
    bias: f64,
    standardizer: Standardizer,
}

impl LogisticModel {
    pub fn fit(
        features: &[FeatureVector],
        labels: &[Decision],
        params: &LogisticParams,
    ) -> Result<LogisticModel> {
        let d = check_shapes(features, labels)?;
        let n = features.len();
        let standardizer = Standardizer::fit(features);
        let x: Vec<Vec<f64>> = features
            .iter()
            .map(|f| standardizer.transform(&f.values))
            .collect();
        let y: Vec<f64> = labels.iter().map(|l| l.as_bit() as f64).collect();

        let lambda = 1.0 / (params.c * n as f64);
        let (l1, l2) = match params.penalty {
            Penalty::None => (0.0, 0.0),
            Penalty::L2 => (0.0, lambda),
            Penalty::ElasticNet { l1_ratio } => {
                (lambda * l1_ratio, lambda * (1.0 - l1_ratio))
            }
        };

        let mut weights = vec![0.0f64; d];
        let mut bias = 0.0f64;
        let lr = params.learning_rate;
        for _ in 0..params.max_iter {
            let mut grad_w = vec![0.0f64; d];
            let mut grad_b = 0.0f64;
            for (xi, &yi) in x.iter().zip(&y) {
                let margin: f64 =
                    bias + weights.iter().zip(xi).map(|(w, v)| w * v).sum::<f64>();
                let err = sigmoid(margin) - yi;
                for (g, v) in grad_w.iter_mut().zip(xi) {
                    *g += err * v;
                }
                grad_b += err;
            }
            let inv_n = 1.0 / n as f64;
            for ((w, g), _) in weights.iter_mut().zip(&grad_w).zip(0..d) {
                *w -= lr * (g * inv_n + l2 * *w);
            }
            bias -= lr * grad_b * inv_n;
            if l1 > 0.0 {
                let threshold = lr * l1;
                for w in weights.iter_mut() {
                    *w = w.signum() * (w.abs() - threshold).max(0.0);
                }
            }
        }
        Ok(LogisticModel {
            weights,
            bias,
            standardizer,
        })
    }

    /// Probability of inclusion.
    pub fn score(&self, features: &FeatureVector) -> f64 {
        let x = self.standardizer.transform(&features.values);
        let margin: f64 = self.bias + self.weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>();
        sigmoid(margin)
    }

    pub fn predict(&self, features: &FeatureVector) -> Decision {
        if self.score(features) >= 0.5 {
            Decision::Include
        } else {
            Decision::Exclude
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvcParams {
    pub c: f64,
    pub max_iter: usize,
    pub learning_rate: f64,
}

impl Default for SvcParams {
    fn default() -> Self {
        SvcParams {
            c: 1.0,
            max_iter: 500,
            learning_rate: 0.1,
        }
    }
}

/// Linear support vector classifier fit by full-batch subgradient
/// descent on the hinge loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvc {
    weights: Vec<f64>,
    bias: f64,
    standardizer: Standardizer,
}

impl LinearSvc {
    pub fn fit(
        features: &[FeatureVector],
        labels: &[Decision],
        params: &SvcParams,
    ) -> Result<LinearSvc> {
        let d = check_shapes(features, labels)?;
        let n = features.len();
        let standardizer = Standardizer::fit(features);
        let x: Vec<Vec<f64>> = features
            .iter()
            .map(|f| standardizer.transform(&f.values))
            .collect();
        // hinge labels in {-1, +1}
        let y: Vec<f64> = labels
            .iter()
            .map(|l| if *l == Decision::Include { 1.0 } else { -1.0 })
            .collect();

        let lambda = 1.0 / (params.c * n as f64);
        let mut weights = vec![0.0f64; d];
        let mut bias = 0.0f64;
        let inv_n = 1.0 / n as f64;
        for _ in 0..params.max_iter {
            let mut grad_w = vec![0.0f64; d];
            let mut grad_b = 0.0f64;
            for (xi, &yi) in x.iter().zip(&y) {
                let margin: f64 =
                    bias + weights.iter().zip(xi).map(|(w, v)| w * v).sum::<f64>();
                if yi * margin < 1.0 {
                    for (g, v) in grad_w.iter_mut().zip(xi) {
                        *g -= yi * v;
                    }
                    grad_b -= yi;
                }
            }
            for (w, g) in weights.iter_mut().zip(&grad_w) {
                *w -= params.learning_rate * (g * inv_n + lambda * *w);
            }
            bias -= params.learning_rate * grad_b * inv_n;
        }
        Ok(LinearSvc {
            weights,
            bias,
            standardizer,
        })
    }

    /// Margin squashed to (0, 1); 0.5 corresponds to the decision plane.
    pub fn score(&self, features: &FeatureVector) -> f64 {
        let x = self.standardizer.transform(&features.values);
        let margin: f64 = self.bias + self.weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>();
        sigmoid(margin)
    }

    pub fn predict(&self, features: &FeatureVector) -> Decision {
        if self.score(features) >= 0.5 {
            Decision::Include
        } else {
            Decision::Exclude
        }
    }
}
