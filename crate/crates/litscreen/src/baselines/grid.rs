//! Hyperparameter values, grids, and the default search spaces.
//!
//! Grids live in config files as `kind → parameter → value list`
//! tables (TOML or JSON). Candidate enumeration is deterministic:
//! parameters iterate alphabetically and candidates are indexed in
//! mixed-radix order, so "first seen" is well defined for tie-breaking.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::ClassifierKind;
use crate::error::{Error, Result};

/// One hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Float(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Text(_) => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        match self {
            ParamValue::Int(v) if *v >= 0 => Some(*v as usize),
            ParamValue::Float(v) if *v >= 0.0 && v.fract() == 0.0 => Some(*v as usize),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Text(s) => write!(f, "{s}"),
        }
    }
}

/// A resolved hyperparameter assignment.
pub type ParamMap = BTreeMap<String, ParamValue>;

/// Helpers for reading typed values out of a [`ParamMap`].
pub fn param_f64(params: &ParamMap, name: &str, default: f64) -> Result<f64> {
    match params.get(name) {
        None => Ok(default),
        Some(v) => v.as_f64().ok_or_else(|| Error::BadHyperparameter {
            name: name.into(),
            message: format!("expected a number, got `{v}`"),
        }),
    }
}

pub fn param_usize(params: &ParamMap, name: &str, default: usize) -> Result<usize> {
    match params.get(name) {
        None => Ok(default),
        Some(v) => v.as_usize().ok_or_else(|| Error::BadHyperparameter {
            name: name.into(),
            message: format!("expected a non-negative integer, got `{v}`"),
        }),
    }
}

pub fn param_text<'a>(params: &'a ParamMap, name: &str, default: &'a str) -> &'a str {
    params.get(name).and_then(ParamValue::as_str).unwrap_or(default)
}

/// A parameter → value-list search space.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid(pub BTreeMap<String, Vec<ParamValue>>);

impl ParamGrid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, values: Vec<ParamValue>) -> Self {
        self.0.insert(name.into(), values);
        self
    }

    pub fn with_floats(self, name: impl Into<String>, values: &[f64]) -> Self {
        self.with(name, values.iter().map(|&v| ParamValue::Float(v)).collect())
    }

    pub fn with_ints(self, name: impl Into<String>, values: &[i64]) -> Self {
        self.with(name, values.iter().map(|&v| ParamValue::Int(v)).collect())
    }

    pub fn with_texts(self, name: impl Into<String>, values: &[&str]) -> Self {
        self.with(
            name,
            values.iter().map(|v| ParamValue::Text(v.to_string())).collect(),
        )
    }

    /// Total number of candidate assignments.
    pub fn candidate_count(&self) -> usize {
        if self.0.is_empty() {
            return 0;
        }
        self.0.values().map(Vec::len).product()
    }

    /// Candidate at mixed-radix index `i`, parameters in alphabetical order.
    pub fn candidate(&self, mut index: usize) -> ParamMap {
        let mut map = ParamMap::new();
        for (name, values) in &self.0 {
            let radix = values.len().max(1);
            map.insert(name.clone(), values[index % radix].clone());
            index /= radix;
        }
        map
    }

    /// Draw `n` distinct candidates. When the grid holds no more than
    /// `n` assignments, every candidate is returned in index order;
    /// otherwise a seeded random subset is drawn and sorted by index,
    /// keeping first-seen order deterministic.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<ParamMap> {
        let total = self.candidate_count();
        if total == 0 {
            return Vec::new();
        }
        if total <= n {
            return (0..total).map(|i| self.candidate(i)).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index_sample(&mut rng, total, n).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| self.candidate(i)).collect()
    }
}

/// `[10^a, ..., 10^b]` with `n` logarithmically spaced points. Integer
/// powers are computed exactly so grid values print as clean decimals.
pub fn logspace(start_exp: f64, end_exp: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![pow10(start_exp)];
    }
    let step = (end_exp - start_exp) / (n - 1) as f64;
    (0..n).map(|i| pow10(start_exp + step * i as f64)).collect()
}

fn pow10(exp: f64) -> f64 {
    if exp.fract() == 0.0 && (-18.0..=18.0).contains(&exp) {
        let k = exp as i32;
        let mag = 10u64.pow(k.unsigned_abs()) as f64;
        if k >= 0 {
            mag
        } else {
            1.0 / mag
        }
    } else {
        10f64.powf(exp)
    }
}

/// Default search space per classifier kind.
///
/// The SVC grid is restricted to the linear kernel; the non-linear
/// kernels are out of scope at desk scale.
pub fn default_grid(kind: ClassifierKind) -> ParamGrid {
    let log7 = logspace(-3.0, 3.0, 7);
    match kind {
        ClassifierKind::Random => ParamGrid::new().with_floats("p_include", &[0.5]),
        ClassifierKind::LogisticRegression => ParamGrid::new()
            .with_texts("penalty", &["none", "l2", "elasticnet"])
            .with_floats("C", &log7),
        ClassifierKind::ComplementNaiveBayes => ParamGrid::new().with_floats("alpha", &log7),
        ClassifierKind::LinearSvc => ParamGrid::new()
            .with_texts("kernel", &["linear"])
            .with_floats("C", &log7),
        ClassifierKind::RandomForest => ParamGrid::new()
            .with_ints("max_depth", &[80, 90, 100, 110])
            .with_ints("max_features", &[2, 3])
            .with_ints("min_samples_leaf", &[3, 4, 5])
            .with_ints("min_samples_split", &[8, 10, 12])
            .with_ints("n_estimators", &[100, 200, 300, 1000]),
    }
}

/// Load grids from a TOML (or JSON) file shaped as
/// `[kind]` tables of `parameter = [values...]`.
pub fn load_grids(path: impl AsRef<Path>) -> Result<BTreeMap<ClassifierKind, ParamGrid>> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path)?;
    let by_kind: BTreeMap<String, BTreeMap<String, Vec<ParamValue>>> =
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            serde_json::from_str(&raw)?
        } else {
            toml::from_str(&raw).map_err(|e| Error::Config(e.to_string()))?
        };
    let mut grids = BTreeMap::new();
    for (name, params) in by_kind {
        let kind: ClassifierKind = name
            .parse()
            .map_err(|_| Error::UnknownClassifier(name.clone()))?;
        grids.insert(kind, ParamGrid(params));
    }
    Ok(grids)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_produces_clean_decade_values() {
        assert_eq!(
            logspace(-3.0, 3.0, 7),
            vec![0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]
        );
    }

    #[test]
    fn default_cnb_grid_is_the_seven_point_logspace() {
        let grid = default_grid(ClassifierKind::ComplementNaiveBayes);
        let alphas: Vec<f64> = grid.0["alpha"].iter().map(|v| v.as_f64().unwrap()).collect();
        assert_eq!(alphas, vec![0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]);
    }

    #[test]
    fn candidate_enumeration_covers_the_product() {
        let grid = ParamGrid::new()
            .with_floats("a", &[1.0, 2.0])
            .with_texts("b", &["x", "y", "z"]);
        assert_eq!(grid.candidate_count(), 6);
        let all: Vec<ParamMap> = (0..6).map(|i| grid.candidate(i)).collect();
        let unique: std::collections::HashSet<String> =
            all.iter().map(|m| format!("{m:?}")).collect();
        assert_eq!(unique.len(), 6);
    }

    #[test]
    fn sample_returns_whole_grid_when_small() {
        let grid = ParamGrid::new().with_floats("alpha", &[0.1, 1.0]);
        let candidates = grid.sample(10, 0);
        assert_eq!(candidates.len(), 2);
        assert_eq!(candidates[0]["alpha"], ParamValue::Float(0.1));
    }

    #[test]
    fn sample_is_deterministic_for_a_seed() {
        let grid = default_grid(ClassifierKind::RandomForest);
        let a = grid.sample(10, 7);
        let b = grid.sample(10, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
    }

    #[test]
    fn grids_load_from_toml() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grids.toml");
        std::fs::write(
            &path,
            "[complement_naive_bayes]\nalpha = [0.001, 1.0, 10.0]\n\n[logistic_regression]\npenalty = [\"none\", \"l2\"]\nC = [1.0]\n",
        )
        .unwrap();
        let grids = load_grids(&path).unwrap();
        let cnb = &grids[&ClassifierKind::ComplementNaiveBayes];
        assert_eq!(cnb.candidate_count(), 3);
        let lr = &grids[&ClassifierKind::LogisticRegression];
        assert_eq!(lr.candidate_count(), 2);
    }
}
