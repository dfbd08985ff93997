//! Simulable task priors: finite mixtures of conditional models with a
//! shared feature law, plus size priors for the training-set length.
//!
//! Data generation follows the two-stage mechanism: draw a model from the
//! prior, then draw iid labeled examples from that model.

use crate::data::{Dataset, Example};
use crate::linalg::dot;
use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PriorError {
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("sine amplitude {0} outside [0, 1]")]
    AmplitudeOutOfRange(f64),
    #[error("prior needs at least one model")]
    EmptyPrior,
    #[error("prior weights must be nonnegative with positive sum")]
    BadWeights,
    #[error("models disagree on feature dimension: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("size prior needs 1 <= n_min <= n_max, got [{0}, {1}]")]
    BadSizeRange(usize, usize),
    #[error("feature law parameters invalid: {0}")]
    BadFeatureLaw(String),
}

/// A conditional label model p(y | x) for binary classification.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalModel {
    /// Label 1 with fixed probability, independent of the features.
    ConstantBernoulli { p1: f64 },
    /// Logistic regression: p(1|x) = sigmoid(w.x + b).
    Logistic { weights: Vec<f64>, offset: f64 },
    /// Sine-modulated task: p(1|x) = 1/2 + amplitude * sin(freq.x + phase) / 2.
    SineTask { amplitude: f64, frequency: Vec<f64>, phase: f64 },
}

impl ConditionalModel {
    pub fn constant_bernoulli(p1: f64) -> Result<Self, PriorError> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(PriorError::ProbabilityOutOfRange(p1));
        }
        Ok(ConditionalModel::ConstantBernoulli { p1 })
    }

    pub fn logistic(weights: Vec<f64>, offset: f64) -> Self {
        ConditionalModel::Logistic { weights, offset }
    }

    pub fn sine_task(amplitude: f64, frequency: Vec<f64>, phase: f64) -> Result<Self, PriorError> {
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(PriorError::AmplitudeOutOfRange(amplitude));
        }
        Ok(ConditionalModel::SineTask { amplitude, frequency, phase })
    }

    /// The reference task p0(1|x) = 1/2 + sin(sum(x))/2 in dimension `d`.
    pub fn default_sine(d: usize) -> Self {
        ConditionalModel::SineTask { amplitude: 1.0, frequency: vec![1.0; d], phase: 0.0 }
    }

    /// Feature dimension this model expects, if it constrains one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConditionalModel::ConstantBernoulli { .. } => None,
            ConditionalModel::Logistic { weights, .. } => Some(weights.len()),
            ConditionalModel::SineTask { frequency, .. } => Some(frequency.len()),
        }
    }

    /// p(1 | x). Always in [0, 1] by construction of each variant.
    pub fn p1(&self, x: &[f64]) -> f64 {
        match self {
            ConditionalModel::ConstantBernoulli { p1 } => *p1,
            ConditionalModel::Logistic { weights, offset } => {
                let t = dot(weights, x) + offset;
                1.0 / (1.0 + (-t).exp())
            }
            ConditionalModel::SineTask { amplitude, frequency, phase } => {
                0.5 + amplitude * (dot(frequency, x) + phase).sin() / 2.0
            }
        }
    }

    /// p(y | x) for y in {0, 1}.
    pub fn prob(&self, y: usize, x: &[f64]) -> f64 {
        let p1 = self.p1(x);
        if y == 1 {
            p1
        } else {
            1.0 - p1
        }
    }

    pub fn log_prob(&self, y: usize, x: &[f64]) -> f64 {
        self.prob(y, x).ln()
    }
}

/// Marginal law of the feature vector, shared by all models in a prior.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureLaw {
    /// Standard normal in `d` dimensions.
    StandardNormal { d: usize },
    /// Uniform on the axis-aligned box `[lower_i, upper_i]`.
    UniformBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Finitely supported law; used by diagnostics with enumerable
    /// expectations.
    Atoms { points: Vec<Vec<f64>>, weights: Vec<f64> },
}

impl FeatureLaw {
    pub fn standard_normal(d: usize) -> Self {
        FeatureLaw::StandardNormal { d }
    }

    pub fn uniform_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, PriorError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(PriorError::BadFeatureLaw("box bounds length mismatch".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u || !l.is_finite() || !u.is_finite()) {
            return Err(PriorError::BadFeatureLaw("box bounds must be finite with lower <= upper".into()));
        }
        Ok(FeatureLaw::UniformBox { lower, upper })
    }

    pub fn atoms(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, PriorError> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(PriorError::BadFeatureLaw("atoms and weights must be nonempty and equal length".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(PriorError::BadFeatureLaw("atoms disagree on dimension".into()));
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || sum <= 0.0 {
            return Err(PriorError::BadWeights);
        }
        let weights = weights.iter().map(|w| w / sum).collect();
        Ok(FeatureLaw::Atoms { points, weights })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeatureLaw::StandardNormal { d } => *d,
            FeatureLaw::UniformBox { lower, .. } => lower.len(),
            FeatureLaw::Atoms { points, .. } => points[0].len(),
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            FeatureLaw::StandardNormal { d } => rng.standard_normal_vector(*d),
            FeatureLaw::UniformBox { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| l + (u - l) * rng.uniform())
                .collect(),
            FeatureLaw::Atoms { points, weights } => {
                let k = sample_index(weights, rng);
                points[k].clone()
            }
        }
    }
}

/// A finite prior: K conditional models with weights and a shared
/// feature law.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePrior {
    models: Vec<ConditionalModel>,
    weights: Vec<f64>,
    feature_law: FeatureLaw,
}

impl FinitePrior {
    pub fn new(
        models: Vec<ConditionalModel>,
        weights: Vec<f64>,
        feature_law: FeatureLaw,
    ) -> Result<Self, PriorError> {
        if models.is_empty() {
            return Err(PriorError::EmptyPrior);
        }
        if weights.len() != models.len() {
            return Err(PriorError::BadWeights);
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || sum <= 0.0 {
            return Err(PriorError::BadWeights);
        }
        let d = feature_law.dim();
        for m in &models {
            if let Some(md) = m.dim() {
                if md != d {
                    return Err(PriorError::DimensionMismatch(md, d));
                }
            }
        }
        let weights = weights.iter().map(|w| w / sum).collect();
        Ok(FinitePrior { models, weights, feature_law })
    }

    /// Equal-weight prior.
    pub fn uniform(models: Vec<ConditionalModel>, feature_law: FeatureLaw) -> Result<Self, PriorError> {
        let k = models.len();
        Self::new(models, vec![1.0; k], feature_law)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[ConditionalModel] {
        &self.models
    }

    pub fn model(&self, k: usize) -> &ConditionalModel {
        &self.models[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn feature_law(&self) -> &FeatureLaw {
        &self.feature_law
    }

    pub fn dim(&self) -> usize {
        self.feature_law.dim()
    }
}

/// The task mixture used to pre-train the bundled demo transformer:
/// the reference sine task, a spread of constant-probability tasks, six
/// seeded logistic tasks, and four seeded sine tasks with random
/// frequencies. Weights favor the reference task. Fully deterministic.
pub fn default_task_mixture(d: usize) -> FinitePrior {
    let mut models = vec![ConditionalModel::default_sine(d)];
    let mut weights = vec![2.0];
    for &p in &[0.2, 0.35, 0.5, 0.65, 0.8] {
        models.push(ConditionalModel::ConstantBernoulli { p1: p });
        weights.push(0.6);
    }
    let mut rng = crate::rng::SeedSpec::new(779, 0).rng();
    for _ in 0..6 {
        let w: Vec<f64> = (0..d).map(|_| rng.normal() * 1.2).collect();
        models.push(ConditionalModel::Logistic { weights: w, offset: 0.3 * rng.normal() });
        weights.push(1.0);
    }
    for _ in 0..4 {
        let freq: Vec<f64> = (0..d).map(|_| rng.normal() * 0.8).collect();
        let phase = rng.uniform() * std::f64::consts::TAU;
        models.push(ConditionalModel::SineTask { amplitude: 1.0, frequency: freq, phase });
        weights.push(1.0);
    }
    FinitePrior::new(models, weights, FeatureLaw::standard_normal(d))
        .expect("mixture is valid by construction")
}

/// Uniform distribution over training-set sizes {n_min, ..., n_max}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizePrior {
    n_min: usize,
    n_max: usize,
}

impl SizePrior {
    pub fn uniform(n_min: usize, n_max: usize) -> Result<Self, PriorError> {
        if n_min < 1 || n_min > n_max {
            return Err(PriorError::BadSizeRange(n_min, n_max));
        }
        Ok(SizePrior { n_min, n_max })
    }

    /// Degenerate size prior concentrated on one size.
    pub fn fixed(n: usize) -> Result<Self, PriorError> {
        Self::uniform(n, n)
    }

    pub fn n_min(&self) -> usize {
        self.n_min
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

/// Draws a hypothesis index with the prior's weights.
pub fn sample_task(prior: &FinitePrior, rng: &mut Rng) -> usize {
    sample_index(prior.weights(), rng)
}

/// Inverse-CDF draw from a normalized weight vector.
fn sample_index(weights: &[f64], rng: &mut Rng) -> usize {
    let u = rng.uniform();
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cum += w;
        if u < cum {
            return i;
        }
    }
    weights.len() - 1
}

/// Draws `n` iid examples: features from the law, labels Bernoulli with
/// the model's p(1|x).
pub fn sample_dataset(
    model: &ConditionalModel,
    feature_law: &FeatureLaw,
    n: usize,
    rng: &mut Rng,
) -> Dataset {
    let d = feature_law.dim();
    let mut examples = Vec::with_capacity(n);
    for _ in 0..n {
        let x = feature_law.sample(rng);
        let p1 = model.p1(&x);
        let y = usize::from(rng.uniform() < p1);
        examples.push(Example::new(y, x, 2).expect("sampled example is valid"));
    }
    Dataset::from_examples(d, 2, examples).expect("sampled dataset is valid")
}

/// Uniform draw on {n_min, ..., n_max}.
pub fn sample_size(size_prior: &SizePrior, rng: &mut Rng) -> usize {
    rng.range_inclusive(size_prior.n_min as u64, size_prior.n_max as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn sine_defaults_match_reference_task() {
        let m = ConditionalModel::default_sine(5);
        let x = vec![0.1, 0.2, -0.3, 0.4, 0.0];
        let s: f64 = x.iter().sum();
        assert!((m.p1(&x) - (0.5 + s.sin() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn model_probabilities_valid_and_complementary() {
        let mut rng = Rng::from_seed(11);
        let models = [
            ConditionalModel::constant_bernoulli(0.3).unwrap(),
            ConditionalModel::logistic(vec![2.0, -1.0, 0.5], 0.2),
            ConditionalModel::sine_task(0.8, vec![1.0, 2.0, -1.0], 0.7).unwrap(),
        ];
        for _ in 0..10_000 {
            let x = rng.standard_normal_vector(3);
            for m in &models {
                let p1 = m.p1(&x);
                assert!((0.0..=1.0).contains(&p1), "p1 = {p1}");
                assert_eq!(m.prob(0, &x) + m.prob(1, &x), 1.0);
            }
        }
    }

    #[test]
    fn sample_task_degenerate_cases() {
        let law = FeatureLaw::standard_normal(1);
        let single = FinitePrior::uniform(
            vec![ConditionalModel::constant_bernoulli(0.5).unwrap()],
            law.clone(),
        )
        .unwrap();
        let mut rng = Rng::from_seed(1);
        for _ in 0..100 {
            assert_eq!(sample_task(&single, &mut rng), 0);
        }
        let lopsided = FinitePrior::new(
            vec![
                ConditionalModel::constant_bernoulli(0.2).unwrap(),
                ConditionalModel::constant_bernoulli(0.8).unwrap(),
            ],
            vec![1.0, 0.0],
            law,
        )
        .unwrap();
        for _ in 0..1000 {
            assert_eq!(sample_task(&lopsided, &mut rng), 0);
        }
    }

    #[test]
    fn sample_task_frequencies_match_weights() {
        let law = FeatureLaw::standard_normal(1);
        let prior = FinitePrior::new(
            vec![
                ConditionalModel::constant_bernoulli(0.2).unwrap(),
                ConditionalModel::constant_bernoulli(0.8).unwrap(),
            ],
            vec![0.5, 0.5],
            law,
        )
        .unwrap();
        let mut rng = Rng::from_seed(3);
        let draws = 100_000;
        let zeros = (0..draws).filter(|_| sample_task(&prior, &mut rng) == 0).count();
        let freq = zeros as f64 / draws as f64;
        assert!((0.49..0.51).contains(&freq), "freq {freq}");
    }

    #[test]
    fn sample_dataset_edge_cases() {
        let law = FeatureLaw::standard_normal(2);
        let mut rng = Rng::from_seed(4);
        let empty = sample_dataset(
            &ConditionalModel::constant_bernoulli(0.5).unwrap(),
            &law,
            0,
            &mut rng,
        );
        assert!(empty.is_empty());
        let ones = sample_dataset(
            &ConditionalModel::constant_bernoulli(1.0).unwrap(),
            &law,
            100,
            &mut rng,
        );
        assert!(ones.iter().all(|e| e.label() == 1));
    }

    #[test]
    fn sine_task_label_mean_is_half_by_symmetry() {
        let law = FeatureLaw::standard_normal(5);
        let model = ConditionalModel::default_sine(5);
        let mut rng = Rng::from_seed(5);
        let data = sample_dataset(&model, &law, 100_000, &mut rng);
        let mean = data.iter().map(|e| e.label() as f64).sum::<f64>() / data.len() as f64;
        assert!((0.47..0.53).contains(&mean), "mean {mean}");
    }

    #[test]
    fn conditional_frequencies_match_decile_bins() {
        // Bin samples by p(1|x) deciles; per-bin label frequency must
        // match the bin-average probability within 3 standard errors.
        let law = FeatureLaw::standard_normal(2);
        let model = ConditionalModel::logistic(vec![1.5, -0.7], 0.1);
        let mut rng = Rng::from_seed(6);
        let data = sample_dataset(&model, &law, 100_000, &mut rng);
        let mut bins = vec![(0.0f64, 0.0f64, 0usize); 10];
        for e in data.iter() {
            let p = model.p1(e.features());
            let b = ((p * 10.0) as usize).min(9);
            bins[b].0 += p;
            bins[b].1 += e.label() as f64;
            bins[b].2 += 1;
        }
        for (sum_p, sum_y, count) in bins {
            if count < 100 {
                continue;
            }
            let avg_p = sum_p / count as f64;
            let freq = sum_y / count as f64;
            let se = (avg_p * (1.0 - avg_p) / count as f64).sqrt().max(1e-12);
            assert!(
                (freq - avg_p).abs() <= 3.0 * se,
                "bin freq {freq} vs avg p {avg_p} (count {count})"
            );
        }
    }

    #[test]
    fn sample_size_uniform_range() {
        let fixed = SizePrior::fixed(7).unwrap();
        let mut rng = Rng::from_seed(7);
        assert_eq!(sample_size(&fixed, &mut rng), 7);

        let wide = SizePrior::uniform(1, 1023).unwrap();
        let draws = 100_000;
        let mut sum = 0usize;
        for _ in 0..draws {
            let n = sample_size(&wide, &mut rng);
            assert!((1..=1023).contains(&n));
            sum += n;
        }
        let mean = sum as f64 / draws as f64;
        assert!((502.0..522.0).contains(&mean), "mean {mean}");
    }

    #[test]
    fn invalid_constructions_rejected() {
        assert!(ConditionalModel::constant_bernoulli(1.5).is_err());
        assert!(ConditionalModel::sine_task(1.2, vec![1.0], 0.0).is_err());
        assert!(SizePrior::uniform(0, 5).is_err());
        assert!(SizePrior::uniform(6, 5).is_err());
        let law = FeatureLaw::standard_normal(2);
        assert!(FinitePrior::new(vec![], vec![], law.clone()).is_err());
        assert!(FinitePrior::new(
            vec![ConditionalModel::logistic(vec![1.0], 0.0)],
            vec![1.0],
            law,
        )
        .is_err());
    }
}
