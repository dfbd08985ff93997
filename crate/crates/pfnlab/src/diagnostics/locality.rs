//! Label-locality probe: resample labels of samples far from the test
//! point and measure the output change.

use crate::data::{Dataset, Example};
use crate::linalg::euclidean_distance;
use crate::predictors::{LocalizerConfig, Predictor};
use crate::priors::{sample_dataset, ConditionalModel, FeatureLaw};
use crate::rng::{Rng, SeedSpec};
use rayon::prelude::*;

/// How the far/near threshold `epsilon_n` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonRule {
    /// Radius of the k_n-th nearest neighbor under the localizer rule,
    /// tying the probe to the retained neighbor set.
    KthNeighborRadius(LocalizerConfig),
    /// A fixed radius for every n.
    Fixed(f64),
}

impl EpsilonRule {
    fn epsilon(&self, data: &Dataset, x: &[f64]) -> f64 {
        match self {
            EpsilonRule::Fixed(e) => {
                assert!(*e > 0.0, "epsilon rule must yield a positive radius");
                *e
            }
            EpsilonRule::KthNeighborRadius(config) => {
                let k = config.k_n(data.len(), data.dim());
                let mut dists: Vec<f64> = data
                    .iter()
                    .map(|e| euclidean_distance(e.features(), x))
                    .collect();
                dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
                dists[k - 1]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalityRow {
    pub n: usize,
    /// Mean threshold over replicates (the threshold varies with the
    /// dataset under the neighbor-radius rule).
    pub mean_epsilon: f64,
    pub mean_abs_change: f64,
    pub max_abs_change: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityProbeReport {
    pub rows: Vec<LocalityRow>,
    pub seed: u64,
}

/// For each replicate: keep labels of samples within `epsilon_n` of the
/// fixed test point, resample labels outside it from `p_tilde(.|X_i)`,
/// and record the absolute change of the class-1 prediction.
#[allow(clippy::too_many_arguments)]
pub fn locality_probe(
    predictor: &dyn Predictor,
    p0: &ConditionalModel,
    p_tilde: &ConditionalModel,
    feature_law: &FeatureLaw,
    n_grid: &[usize],
    rule: EpsilonRule,
    replicates: usize,
    seed: SeedSpec,
) -> LocalityProbeReport {
    assert!(replicates >= 1);
    let mut test_rng = seed.child(0).rng();
    let x_star = feature_law.sample(&mut test_rng);

    let rows = n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let n_seed = seed.child(1 + ni as u64);
            let results: Vec<(f64, f64)> = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    let mut rng = n_seed.child(r as u64).rng();
                    let data = sample_dataset(p0, feature_law, n, &mut rng);
                    let eps = rule.epsilon(&data, &x_star);
                    let flipped = resample_far_labels(&data, &x_star, eps, p_tilde, &mut rng);
                    let before = predictor.predict(&x_star, &data).p1();
                    let after = predictor.predict(&x_star, &flipped).p1();
                    (eps, (before - after).abs())
                })
                .collect();
            let mean_epsilon = results.iter().map(|r| r.0).sum::<f64>() / replicates as f64;
            let mean_abs_change = results.iter().map(|r| r.1).sum::<f64>() / replicates as f64;
            let max_abs_change = results.iter().map(|r| r.1).fold(0.0, f64::max);
            LocalityRow { n, mean_epsilon, mean_abs_change, max_abs_change, replicates }
        })
        .collect();
    LocalityProbeReport { rows, seed: seed.derived() }
}

/// The modified dataset of the locality construction: labels within the
/// closed epsilon-ball of `x` are kept, labels outside are redrawn from
/// `p_tilde`.
pub fn resample_far_labels(
    data: &Dataset,
    x: &[f64],
    epsilon: f64,
    p_tilde: &ConditionalModel,
    rng: &mut Rng,
) -> Dataset {
    let examples = data
        .iter()
        .map(|e| {
            if euclidean_distance(e.features(), x) <= epsilon {
                e.clone()
            } else {
                let y = usize::from(rng.uniform() < p_tilde.p1(e.features()));
                Example::new(y, e.features().to_vec(), 2).unwrap()
            }
        })
        .collect();
    Dataset::from_examples(data.dim(), data.classes(), examples).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::{Localized, WindowSmootherParams};

    #[test]
    fn window_smoother_with_covering_epsilon_never_changes() {
        // Out-of-window samples never enter the estimate, so any epsilon
        // at least the bandwidth gives exactly zero change.
        let p0 = ConditionalModel::default_sine(1);
        let tilde = ConditionalModel::constant_bernoulli(0.1).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let w = WindowSmootherParams::fixed(0.7);
        let report = locality_probe(
            &w,
            &p0,
            &tilde,
            &law,
            &[16, 64, 256],
            EpsilonRule::Fixed(0.7),
            20,
            SeedSpec::new(1, 0),
        );
        for row in &report.rows {
            assert_eq!(row.mean_abs_change, 0.0, "n = {}", row.n);
            assert_eq!(row.max_abs_change, 0.0);
        }
    }

    #[test]
    fn localized_wrapper_with_neighbor_radius_never_changes() {
        // The retained neighbor set lies inside the epsilon ball by
        // construction, so the flip is invisible to the wrapper.
        let p0 = ConditionalModel::default_sine(2);
        let tilde = ConditionalModel::constant_bernoulli(0.9).unwrap();
        let law = FeatureLaw::standard_normal(2);
        let cfg = LocalizerConfig::default();
        let localized = Localized::new(WindowSmootherParams::fixed(5.0), cfg);
        let report = locality_probe(
            &localized,
            &p0,
            &tilde,
            &law,
            &[32, 128],
            EpsilonRule::KthNeighborRadius(cfg),
            20,
            SeedSpec::new(2, 0),
        );
        for row in &report.rows {
            assert_eq!(row.mean_abs_change, 0.0, "n = {}", row.n);
        }
    }

    #[test]
    fn changes_are_probabilities() {
        let p0 = ConditionalModel::default_sine(1);
        let tilde = ConditionalModel::constant_bernoulli(0.5).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let w = WindowSmootherParams::fixed(2.0);
        let report = locality_probe(
            &w,
            &p0,
            &tilde,
            &law,
            &[8, 32],
            EpsilonRule::Fixed(0.1),
            15,
            SeedSpec::new(3, 0),
        );
        for row in &report.rows {
            assert!((0.0..=1.0).contains(&row.mean_abs_change));
            assert!((0.0..=1.0).contains(&row.max_abs_change));
        }
    }
}
