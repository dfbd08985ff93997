//! Labeled datasets and class probability vectors.

use thiserror::Error;

/// Tolerance for the "probabilities sum to one" invariant.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("feature vector has non-finite entry at index {0}")]
    NonFiniteFeature(usize),
    #[error("expected feature dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("class distribution must have at least one class")]
    EmptyDistribution,
}

/// One labeled observation: a class index paired with a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    label: usize,
    features: Vec<f64>,
}

impl Example {
    pub fn new(label: usize, features: Vec<f64>, classes: usize) -> Result<Self, DataError> {
        if label >= classes {
            return Err(DataError::LabelOutOfRange { label, classes });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFiniteFeature(i));
        }
        Ok(Example { label, features })
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }
}

/// An ordered training set with fixed feature dimension and class count.
///
/// Immutable after construction; safe to share across parallel workers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    dim: usize,
    classes: usize,
}

impl Dataset {
    /// Empty dataset with the given feature dimension and class count.
    pub fn empty(dim: usize, classes: usize) -> Self {
        Dataset { examples: Vec::new(), dim, classes }
    }

    pub fn from_examples(
        dim: usize,
        classes: usize,
        examples: Vec<Example>,
    ) -> Result<Self, DataError> {
        for ex in &examples {
            if ex.features.len() != dim {
                return Err(DataError::DimensionMismatch {
                    expected: dim,
                    got: ex.features.len(),
                });
            }
            if ex.label >= classes {
                return Err(DataError::LabelOutOfRange { label: ex.label, classes });
            }
        }
        Ok(Dataset { examples, dim, classes })
    }

    /// Binary dataset from `(label, features)` pairs; panics on invalid
    /// input, intended for tests and small fixtures.
    pub fn binary(dim: usize, pairs: &[(usize, &[f64])]) -> Self {
        let examples = pairs
            .iter()
            .map(|&(y, x)| Example::new(y, x.to_vec(), 2).expect("valid example"))
            .collect();
        Dataset::from_examples(dim, 2, examples).expect("valid dataset")
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example> {
        self.examples.iter()
    }

    /// A copy with the examples reordered by `perm` (new position i takes
    /// old element perm[i]).
    pub fn permuted(&self, perm: &[usize]) -> Dataset {
        assert_eq!(perm.len(), self.len());
        let examples = perm.iter().map(|&i| self.examples[i].clone()).collect();
        Dataset { examples, dim: self.dim, classes: self.classes }
    }

    /// A copy with example `index` replaced.
    pub fn with_replaced(&self, index: usize, example: Example) -> Result<Dataset, DataError> {
        if example.features.len() != self.dim {
            return Err(DataError::DimensionMismatch {
                expected: self.dim,
                got: example.features.len(),
            });
        }
        if example.label >= self.classes {
            return Err(DataError::LabelOutOfRange { label: example.label, classes: self.classes });
        }
        let mut examples = self.examples.clone();
        examples[index] = example;
        Ok(Dataset { examples, dim: self.dim, classes: self.classes })
    }

    /// A copy keeping only the examples at `indices`, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let examples = indices.iter().map(|&i| self.examples[i].clone()).collect();
        Dataset { examples, dim: self.dim, classes: self.classes }
    }
}

/// A probability vector over classes: every entry in [0, 1], entries
/// summing to one within [`PROB_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    probs: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, DataError> {
        if probs.is_empty() {
            return Err(DataError::EmptyDistribution);
        }
        for &p in &probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(DataError::ProbabilityOutOfRange(p));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(DataError::ProbabilitySum(sum));
        }
        Ok(ClassDistribution { probs })
    }

    /// Binary distribution from the probability of class 1.
    pub fn binary(p1: f64) -> Result<Self, DataError> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(DataError::ProbabilityOutOfRange(p1));
        }
        Ok(ClassDistribution { probs: vec![1.0 - p1, p1] })
    }

    /// Uniform distribution over `classes` classes.
    pub fn uniform(classes: usize) -> Self {
        assert!(classes >= 1);
        ClassDistribution { probs: vec![1.0 / classes as f64; classes] }
    }

    /// Normalizes a vector of nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self, DataError> {
        if weights.is_empty() {
            return Err(DataError::EmptyDistribution);
        }
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite()) || sum <= 0.0 {
            return Err(DataError::ProbabilitySum(sum));
        }
        for &w in weights {
            if w < 0.0 || !w.is_finite() {
                return Err(DataError::ProbabilityOutOfRange(w));
            }
        }
        Ok(ClassDistribution { probs: weights.iter().map(|w| w / sum).collect() })
    }

    pub fn prob(&self, class: usize) -> f64 {
        self.probs[class]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn classes(&self) -> usize {
        self.probs.len()
    }

    /// Probability of class 1; panics unless binary.
    pub fn p1(&self) -> f64 {
        assert_eq!(self.probs.len(), 2, "p1() requires a binary distribution");
        self.probs[1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_probabilities() {
        assert!(ClassDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ClassDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(ClassDistribution::new(vec![]).is_err());
        assert!(ClassDistribution::new(vec![0.25, 0.75]).is_ok());
        assert!(ClassDistribution::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(ClassDistribution::new(vec![0.5, 0.5 + 1e-11]).is_err());
    }

    #[test]
    fn rejects_bad_examples() {
        assert!(Example::new(2, vec![0.0], 2).is_err());
        assert!(Example::new(0, vec![f64::NAN], 2).is_err());
        assert!(Example::new(1, vec![1.0, -2.0], 2).is_ok());
    }

    #[test]
    fn dataset_checks_dimensions() {
        let e = Example::new(0, vec![1.0, 2.0], 2).unwrap();
        assert!(Dataset::from_examples(3, 2, vec![e.clone()]).is_err());
        assert!(Dataset::from_examples(2, 2, vec![e]).is_ok());
        assert_eq!(Dataset::empty(4, 2).len(), 0);
    }

    #[test]
    fn permuted_and_subset_preserve_metadata() {
        let data = Dataset::binary(1, &[(0, &[0.0]), (1, &[1.0]), (1, &[2.0])]);
        let p = data.permuted(&[2, 0, 1]);
        assert_eq!(p.examples()[0].features()[0], 2.0);
        let s = data.subset(&[1]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.classes(), 2);
    }
}
