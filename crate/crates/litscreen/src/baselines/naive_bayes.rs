//! Complement naive Bayes for imbalanced binary text classification.
//!
//! Class weights are estimated from the *complement* of each class, so
//! the minority class is scored against the plentiful counts of the
//! other class. Features must be non-negative counts conceptually; when
//! embedding features dip below zero, a per-dimension shift learned from
//! the training data makes them usable.

use serde::{Deserialize, Serialize};

use crate::baselines::FeatureVector;
use crate::corpus::Decision;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnbParams {
    /// Additive smoothing.
    pub alpha: f64,
}

impl Default for CnbParams {
    fn default() -> Self {
        CnbParams { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementNb {
    /// log θ of the complement of the include class.
    weights_include: Vec<f64>,
    /// log θ of the complement of the exclude class.
    weights_exclude: Vec<f64>,
    /// Per-dimension shift making training features non-negative
    /// (zero where training data already was).
    shifts: Vec<f64>,
}

impl ComplementNb {
    pub fn fit(
        features: &[FeatureVector],
        labels: &[Decision],
        params: &CnbParams,
    ) -> Result<ComplementNb> {
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
        if params.alpha < 0.0 {
            return Err(Error::BadHyperparameter {
                name: "alpha".into(),
                message: "must be non-negative".into(),
            });
        }

        let mut shifts = vec![0.0f64; d];
        for fv in features {
            for (shift, v) in shifts.iter_mut().zip(&fv.values) {
                if *v < *shift {
                    *shift = *v;
                }
            }
        }

        // complement sums: for class c, counts over documents NOT in c
        let mut complement_include = vec![0.0f64; d];
        let mut complement_exclude = vec![0.0f64; d];
        for (fv, label) in features.iter().zip(labels) {
            let target = match label {
                Decision::Include => &mut complement_exclude,
                Decision::Exclude => &mut complement_include,
            };
            for ((t, v), shift) in target.iter_mut().zip(&fv.values).zip(&shifts) {
                *t += v - shift;
            }
        }

        let log_theta = |complement: &[f64]| -> Vec<f64> {
            let total: f64 = complement.iter().sum();
            let denominator = params.alpha * d as f64 + total;
            complement
                .iter()
                .map(|c| ((params.alpha + c) / denominator).ln())
                .collect()
        };

        Ok(ComplementNb {
            weights_include: log_theta(&complement_include),
            weights_exclude: log_theta(&complement_exclude),
            shifts,
        })
    }

    /// Complement score of each class: lower means a better fit.
    fn class_scores(&self, features: &FeatureVector) -> (f64, f64) {
        let mut include = 0.0;
        let mut exclude = 0.0;
        for ((&v, &shift), (wi, we)) in features
            .values
            .iter()
            .zip(&self.shifts)
            .zip(self.weights_include.iter().zip(&self.weights_exclude))
        {
            let f = (v - shift).max(0.0);
            include += f * wi;
            exclude += f * we;
        }
        (include, exclude)
    }

    /// Probability-like score of inclusion; 0.5 marks the class boundary.
    pub fn score(&self, features: &FeatureVector) -> f64 {
        let (include, exclude) = self.class_scores(features);
        // lower complement score wins; squash the difference
        1.0 / (1.0 + (include - exclude).exp())
    }

    pub fn predict(&self, features: &FeatureVector) -> Decision {
        if self.score(features) >= 0.5 {
            Decision::Include
        } else {
            Decision::Exclude
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector {
            values: values.to_vec(),
            all_oov: false,
        }
    }

    /// Four documents over a two-term vocabulary with hand-computable
    /// complement counts.
    fn toy() -> (Vec<FeatureVector>, Vec<Decision>) {
        (
            vec![
                fv(&[3.0, 0.0]), // include
                fv(&[2.0, 1.0]), // include
                fv(&[0.0, 4.0]), // exclude
                fv(&[1.0, 3.0]), // exclude
            ],
            vec![
                Decision::Include,
                Decision::Include,
                Decision::Exclude,
                Decision::Exclude,
            ],
        )
    }

    #[test]
    fn predictions_match_hand_computed_complement_scores() {
        let (x, y) = toy();
        let alpha = 1.0;
        let model = ComplementNb::fit(&x, &y, &CnbParams { alpha }).unwrap();

        // complement of include = exclude docs: term sums (1, 7), total 8
        // complement of exclude = include docs: term sums (5, 1), total 6
        // θ_include = [(1+1)/(2+8), (1+7)/(2+8)] = [0.2, 0.8]
        // θ_exclude = [(1+5)/(2+6), (1+1)/(2+6)] = [0.75, 0.25]
        let w_inc = [0.2f64.ln(), 0.8f64.ln()];
        let w_exc = [0.75f64.ln(), 0.25f64.ln()];
        for (xi, yi) in x.iter().zip(&y) {
            let s_inc: f64 = xi.values.iter().zip(&w_inc).map(|(f, w)| f * w).sum();
            let s_exc: f64 = xi.values.iter().zip(&w_exc).map(|(f, w)| f * w).sum();
            let expected = if s_inc <= s_exc {
                Decision::Include
            } else {
                Decision::Exclude
            };
            assert_eq!(model.predict(xi), expected);
            assert_eq!(model.predict(xi), *yi);
        }
    }

    #[test]
    fn negative_features_are_shifted_not_rejected() {
        let x = vec![
            fv(&[-1.0, 2.0]),
            fv(&[-0.5, 1.5]),
            fv(&[2.0, -1.0]),
            fv(&[1.5, -0.5]),
        ];
        let y = vec![
            Decision::Include,
            Decision::Include,
            Decision::Exclude,
            Decision::Exclude,
        ];
        let model = ComplementNb::fit(&x, &y, &CnbParams::default()).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(xi, yi)| model.predict(xi) == **yi)
            .count();
        assert_eq!(correct, 4);
    }

    #[test]
    fn rejects_single_class_and_negative_alpha() {
        let (x, _) = toy();
        let y = vec![Decision::Include; 4];
        assert!(matches!(
            ComplementNb::fit(&x, &y, &CnbParams::default()),
            Err(Error::SingleClassTraining)
        ));
        let (x, y) = toy();
        assert!(ComplementNb::fit(&x, &y, &CnbParams { alpha: -1.0 }).is_err());
    }
}
