//! The predictor zoo: pure maps from (test feature, dataset) to class
//! probabilities. All predictors here are symmetric in the dataset
//! ordering up to floating-point summation order.

pub(crate) mod transformer;
mod tree;
mod window;

pub use transformer::{
    layer_norm, transformer_forward, AttentionTrace, HeadParams, TransformerError,
    TransformerParams,
};
pub use tree::{bic_weights, ensemble_predict, tree_predict, EnsembleParams, TreeParams};
pub use window::{window_predict, BandwidthScaling, WindowSmootherParams};

use crate::data::{ClassDistribution, Dataset};
use crate::linalg::euclidean_distance;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside
/// every log-likelihood in this crate, keeping objectives finite when a
/// predictor returns a hard 0 or 1.
pub const PROB_CLAMP: f64 = 1e-6;

pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// A fixed predictor: dataset plus test feature in, class probabilities
/// out. No state is updated by prediction.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &[f64], data: &Dataset) -> ClassDistribution;

    /// Human-readable name for reports.
    fn name(&self) -> String {
        "predictor".to_string()
    }
}

/// Ignores the data and returns a fixed distribution.
#[derive(Debug, Clone)]
pub struct ConstantPredictor {
    output: ClassDistribution,
}

impl ConstantPredictor {
    pub fn new(output: ClassDistribution) -> Self {
        ConstantPredictor { output }
    }

    pub fn uniform(classes: usize) -> Self {
        ConstantPredictor { output: ClassDistribution::uniform(classes) }
    }
}

impl Predictor for ConstantPredictor {
    fn predict(&self, _x: &[f64], _data: &Dataset) -> ClassDistribution {
        self.output.clone()
    }

    fn name(&self) -> String {
        "constant".to_string()
    }
}

/// Returns `c` regardless of the inputs.
pub fn constant_predict(c: &ClassDistribution, _x: &[f64], _data: &Dataset) -> ClassDistribution {
    c.clone()
}

/// Neighbor-restriction rule: keep `k_n = min(cap, ceil(n^(4/(d+4))))`
/// nearest neighbors of the test feature, Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizerConfig {
    pub cap: usize,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        LocalizerConfig { cap: 500 }
    }
}

impl LocalizerConfig {
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 1);
        LocalizerConfig { cap }
    }

    /// Neighbor count for a dataset of size `n` in dimension `d`,
    /// clamped to `[1, n]`.
    pub fn k_n(&self, n: usize, d: usize) -> usize {
        let raw = (n as f64).powf(4.0 / (4.0 + d as f64)).ceil() as usize;
        raw.min(self.cap).clamp(1, n.max(1))
    }
}

/// Indices of the `k_n` nearest examples to `x`, ties broken by lower
/// original index, returned in ascending original order.
pub fn nearest_indices(data: &Dataset, x: &[f64], k: usize) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = data
        .iter()
        .enumerate()
        .map(|(i, e)| (euclidean_distance(e.features(), x), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1))
    };
    // (distance, index) is a total order, so the k smallest form a
    // unique set; partial selection keeps this O(n)
    if k < keyed.len() {
        keyed.select_nth_unstable_by(k - 1, cmp);
        keyed.truncate(k);
    }
    let mut keep: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
    keep.sort_unstable();
    keep
}

/// The sub-dataset of the `k_n` nearest neighbors of `x`, preserving the
/// original relative order.
pub fn localize(data: &Dataset, x: &[f64], config: &LocalizerConfig) -> Dataset {
    let k = config.k_n(data.len(), data.dim());
    data.subset(&nearest_indices(data, x, k))
}

/// Wraps any predictor, restricting its context to the nearest
/// neighbors of the test feature before prediction.
pub struct Localized<P> {
    pub inner: P,
    pub config: LocalizerConfig,
}

impl<P> Localized<P> {
    pub fn new(inner: P, config: LocalizerConfig) -> Self {
        Localized { inner, config }
    }
}

impl<P: Predictor> Predictor for Localized<P> {
    fn predict(&self, x: &[f64], data: &Dataset) -> ClassDistribution {
        let reduced = localize(data, x, &self.config);
        self.inner.predict(x, &reduced)
    }

    fn name(&self) -> String {
        format!("localized({})", self.inner.name())
    }
}

/// Mixes another predictor's output with the uniform distribution:
/// (1 - epsilon) * p + epsilon / C. Used as a degraded challenger in
/// optimality checks.
pub struct UniformMix<P> {
    pub inner: P,
    pub epsilon: f64,
}

impl<P> UniformMix<P> {
    pub fn new(inner: P, epsilon: f64) -> Self {
        assert!((0.0..=1.0).contains(&epsilon));
        UniformMix { inner, epsilon }
    }
}

impl<P: Predictor> Predictor for UniformMix<P> {
    fn predict(&self, x: &[f64], data: &Dataset) -> ClassDistribution {
        let base = self.inner.predict(x, data);
        let c = base.classes() as f64;
        let probs: Vec<f64> = base
            .probs()
            .iter()
            .map(|p| (1.0 - self.epsilon) * p + self.epsilon / c)
            .collect();
        ClassDistribution::new(probs).expect("mixture stays a distribution")
    }

    fn name(&self) -> String {
        format!("mix({}, {})", self.inner.name(), self.epsilon)
    }
}

impl Predictor for WindowSmootherParams {
    fn predict(&self, x: &[f64], data: &Dataset) -> ClassDistribution {
        window_predict(self, x, data)
    }

    fn name(&self) -> String {
        format!("window(theta={}, {:?})", self.bandwidth, self.scaling)
    }
}

impl Predictor for EnsembleParams {
    fn predict(&self, x: &[f64], data: &Dataset) -> ClassDistribution {
        ensemble_predict(self, x[0], data)
    }

    fn name(&self) -> String {
        format!("ensemble(K={})", self.members().len())
    }
}

impl Predictor for TransformerParams {
    fn predict(&self, x: &[f64], data: &Dataset) -> ClassDistribution {
        let (dist, _) = transformer_forward(self, x, data)
            .expect("transformer prediction requires a nonempty context");
        dist
    }

    fn name(&self) -> String {
        format!("transformer(H={})", self.heads.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    #[test]
    fn constant_predictor_ignores_inputs() {
        let c = ClassDistribution::binary(0.3).unwrap();
        let p = ConstantPredictor::new(c.clone());
        let data = Dataset::binary(1, &[(0, &[0.0]), (1, &[5.0])]);
        assert_eq!(p.predict(&[1.0], &data), c);
        assert_eq!(constant_predict(&c, &[9.0], &data), c);
    }

    #[test]
    fn k_n_matches_rule() {
        let cfg = LocalizerConfig::default();
        assert_eq!(cfg.k_n(1000, 5), 22);
        assert_eq!(cfg.k_n(4096, 5), 41);
        assert_eq!(cfg.k_n(3, 5), 2);
        // cap binds for huge n
        assert_eq!(LocalizerConfig::new(10).k_n(100_000, 1), 10);
        // clamped to n
        assert_eq!(cfg.k_n(1, 5), 1);
    }

    #[test]
    fn localize_keeps_full_dataset_when_k_large() {
        let data = Dataset::binary(1, &[(0, &[0.0]), (1, &[1.0]), (0, &[2.0])]);
        let cfg = LocalizerConfig::new(500);
        // k_n(3, 1) = ceil(3^{4/5}) = 3 -> unchanged
        let out = localize(&data, &[0.0], &cfg);
        assert_eq!(out, data);
    }

    #[test]
    fn localize_breaks_ties_by_lower_index() {
        // Samples at distances 0, 1, 1, 2; k = 2 must keep indices 0, 1.
        let data =
            Dataset::binary(1, &[(0, &[0.0]), (1, &[1.0]), (1, &[-1.0]), (0, &[2.0])]);
        let keep = nearest_indices(&data, &[0.0], 2);
        assert_eq!(keep, vec![0, 1]);
    }

    #[test]
    fn localize_preserves_relative_order() {
        let data =
            Dataset::binary(1, &[(0, &[5.0]), (1, &[0.1]), (0, &[4.0]), (1, &[0.2])]);
        let out = data.subset(&nearest_indices(&data, &[0.0], 2));
        let feats: Vec<f64> = out.iter().map(|e| e.features()[0]).collect();
        assert_eq!(feats, vec![0.1, 0.2]);
    }
}
