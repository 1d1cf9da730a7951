//! Random forest of Gini-split decision trees on bootstrap samples.
//!
//! Each tree gets its own seeded RNG stream, so forests are fully
//! deterministic under a fixed seed.

use rand::seq::index::sample as index_sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::FeatureVector;
use crate::corpus::Decision;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    /// Number of features considered per split.
    pub max_features: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_depth: 80,
            max_features: 2,
            min_samples_leaf: 3,
            min_samples_split: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        p_include: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, values: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p_include } => return *p_include,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if values[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<Tree>,
    dimension: usize,
}

impl RandomForest {
    pub fn fit(
        features: &[FeatureVector],
        labels: &[Decision],
        params: &ForestParams,
        seed: u64,
    ) -> Result<RandomForest> {
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

        let n = features.len();
        let y: Vec<u8> = labels.iter().map(|l| l.as_bit()).collect();
        let mut trees = Vec::with_capacity(params.n_estimators);
        for t in 0..params.n_estimators {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add((t as u64).wrapping_mul(0x9E3779B97F4A7C15)));
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = TreeBuilder {
                features,
                labels: &y,
                params,
                dimension: d,
                nodes: Vec::new(),
            };
            builder.grow(bootstrap, 0, &mut rng);
            trees.push(Tree {
                nodes: builder.nodes,
            });
        }
        Ok(RandomForest {
            trees,
            dimension: d,
        })
    }

    /// Fraction of trees voting for inclusion.
    pub fn score(&self, features: &FeatureVector) -> f64 {
        let sum: f64 = self
            .trees
            .iter()
            .map(|t| t.predict(&features.values))
            .sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, features: &FeatureVector) -> Decision {
        if self.score(features) >= 0.5 {
            Decision::Include
        } else {
            Decision::Exclude
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

struct TreeBuilder<'a> {
    features: &'a [FeatureVector],
    labels: &'a [u8],
    params: &'a ForestParams,
    dimension: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    /// Grow a subtree over `indices`; returns the node index.
    fn grow(&mut self, indices: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = indices.len();
        let includes: usize = indices.iter().filter(|&&i| self.labels[i] == 1).count();
        let p_include = includes as f64 / n as f64;

        let pure = includes == 0 || includes == n;
        if pure || depth >= self.params.max_depth || n < self.params.min_samples_split {
            return self.leaf(p_include);
        }

        let tried = self.params.max_features.min(self.dimension);
        let candidate_features = index_sample(rng, self.dimension, tried);

        let mut best: Option<(f64, usize, f64)> = None; // (impurity, feature, threshold)
        for feature in candidate_features {
            let mut order: Vec<usize> = indices.clone();
            order.sort_by(|&a, &b| {
                self.features[a].values[feature]
                    .total_cmp(&self.features[b].values[feature])
            });
            let mut left_n = 0usize;
            let mut left_inc = 0usize;
            for split_at in 1..n {
                let previous = order[split_at - 1];
                left_n += 1;
                left_inc += (self.labels[previous] == 1) as usize;

                let lo = self.features[previous].values[feature];
                let hi = self.features[order[split_at]].values[feature];
                if lo == hi {
                    continue;
                }
                let right_n = n - left_n;
                if left_n < self.params.min_samples_leaf
                    || right_n < self.params.min_samples_leaf
                {
                    continue;
                }
                let right_inc = includes - left_inc;
                let impurity = weighted_gini(left_inc, left_n, right_inc, right_n);
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    best = Some((impurity, feature, (lo + hi) / 2.0));
                }
            }
        }

        let Some((_, feature, threshold)) = best else {
            return self.leaf(p_include);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.features[i].values[feature] <= threshold);

        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { p_include }); // placeholder
        let left = self.grow(left_idx, depth + 1, rng);
        let right = self.grow(right_idx, depth + 1, rng);
        self.nodes[slot] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        slot
    }

    fn leaf(&mut self, p_include: f64) -> usize {
        self.nodes.push(Node::Leaf { p_include });
        self.nodes.len() - 1
    }
}

fn weighted_gini(left_inc: usize, left_n: usize, right_inc: usize, right_n: usize) -> f64 {
    let gini = |inc: usize, n: usize| {
        let p = inc as f64 / n as f64;
        2.0 * p * (1.0 - p)
    };
    let total = (left_n + right_n) as f64;
    gini(left_inc, left_n) * left_n as f64 / total
        + gini(right_inc, right_n) * right_n as f64 / total
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

    fn blobs(n_per_class: usize) -> (Vec<FeatureVector>, Vec<Decision>) {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n_per_class {
            let jitter = (i % 9) as f64 * 0.03;
            features.push(fv(&[1.0 + jitter, 0.5 - jitter, jitter]));
            labels.push(Decision::Include);
            features.push(fv(&[-1.0 - jitter, -0.5 + jitter, -jitter]));
            labels.push(Decision::Exclude);
        }
        (features, labels)
    }

    fn small_params() -> ForestParams {
        ForestParams {
            n_estimators: 20,
            max_depth: 10,
            max_features: 2,
            min_samples_leaf: 2,
            min_samples_split: 4,
        }
    }

    #[test]
    fn forest_separates_clean_blobs() {
        let (x, y) = blobs(40);
        let forest = RandomForest::fit(&x, &y, &small_params(), 3).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(xi, yi)| forest.predict(xi) == **yi)
            .count();
        assert!(correct as f64 / x.len() as f64 >= 0.95);
    }

    #[test]
    fn forest_is_deterministic_under_a_seed() {
        let (x, y) = blobs(25);
        let a = RandomForest::fit(&x, &y, &small_params(), 11).unwrap();
        let b = RandomForest::fit(&x, &y, &small_params(), 11).unwrap();
        assert_eq!(a, b);
        let c = RandomForest::fit(&x, &y, &small_params(), 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![fv(&[0.0]), fv(&[1.0])];
        let y = vec![Decision::Exclude, Decision::Exclude];
        assert!(matches!(
            RandomForest::fit(&x, &y, &small_params(), 0),
            Err(Error::SingleClassTraining)
        ));
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let (x, y) = blobs(25);
        let forest = RandomForest::fit(&x, &y, &small_params(), 5).unwrap();
        for xi in &x {
            let s = forest.score(xi);
            assert!((0.0..=1.0).contains(&s));
        }
    }
}
