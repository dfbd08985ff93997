//! Symmetrization of an asymmetric predictor by permutation averaging:
//! compares the replicate variance of a predictor with the variance of
//! its order-averaged version.

use crate::data::{ClassDistribution, Dataset};
use crate::predictors::Predictor;
use crate::priors::{sample_dataset, ConditionalModel, FeatureLaw};
use crate::rng::SeedSpec;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub mean_raw: f64,
    pub var_raw: f64,
    pub mean_symmetrized: f64,
    pub var_symmetrized: f64,
    /// Paired estimate of var_raw - var_symmetrized.
    pub variance_gap: f64,
    /// Standard error of the paired gap.
    pub variance_gap_se: f64,
    pub replicates: usize,
    /// True when all n! permutations were enumerated.
    pub exact: bool,
    pub seed: u64,
}

/// Averages the class-1 prediction over dataset orderings: all `n!`
/// permutations when `n <= 8`, otherwise `permutation_samples` random
/// ones. The sum is divided once, so exact enumeration of a 0/1-valued
/// predictor stays exact in floating point.
pub fn symmetrized_prediction(
    predictor: &dyn Predictor,
    x: &[f64],
    data: &Dataset,
    permutation_samples: usize,
    seed: SeedSpec,
) -> (f64, bool) {
    let n = data.len();
    if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sum = 0.0;
        let mut count = 0usize;
        // Heap's algorithm, iterative
        let mut c = vec![0usize; n];
        sum += predictor.predict(x, &data.permuted(&perm)).p1();
        count += 1;
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                sum += predictor.predict(x, &data.permuted(&perm)).p1();
                count += 1;
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        (sum / count as f64, true)
    } else {
        let mut rng = seed.rng();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sum = 0.0;
        for _ in 0..permutation_samples {
            rng.shuffle(&mut perm);
            sum += predictor.predict(x, &data.permuted(&perm)).p1();
        }
        (sum / permutation_samples as f64, false)
    }
}

/// Draws replicate datasets, evaluates the raw and the symmetrized
/// predictor at a fixed test point, and reports means, variances, and a
/// paired variance-gap estimate with its standard error.
#[allow(clippy::too_many_arguments)]
pub fn symmetrize_check(
    predictor: &dyn Predictor,
    p0: &ConditionalModel,
    feature_law: &FeatureLaw,
    n: usize,
    replicates: usize,
    permutation_samples: usize,
    seed: SeedSpec,
) -> SymmetryReport {
    assert!(replicates >= 2);
    let mut test_rng = seed.child(0).rng();
    let x_star = feature_law.sample(&mut test_rng);

    let pairs: Vec<(f64, f64, bool)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let rep_seed = seed.child(1 + r as u64);
            let mut rng = rep_seed.rng();
            let data = sample_dataset(p0, feature_law, n, &mut rng);
            let raw = predictor.predict(&x_star, &data).p1();
            let (sym, exact) = symmetrized_prediction(
                predictor,
                &x_star,
                &data,
                permutation_samples,
                rep_seed.child(1),
            );
            (raw, sym, exact)
        })
        .collect();

    let m = replicates as f64;
    let mean_raw = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_sym = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let var_raw =
        pairs.iter().map(|p| (p.0 - mean_raw).powi(2)).sum::<f64>() / (m - 1.0);
    let var_sym =
        pairs.iter().map(|p| (p.1 - mean_sym).powi(2)).sum::<f64>() / (m - 1.0);

    // paired gap: per-replicate squared deviations around the respective means
    let gaps: Vec<f64> = pairs
        .iter()
        .map(|p| (p.0 - mean_raw).powi(2) - (p.1 - mean_sym).powi(2))
        .collect();
    let gap_mean = gaps.iter().sum::<f64>() / m;
    let gap_var = gaps.iter().map(|g| (g - gap_mean).powi(2)).sum::<f64>() / (m - 1.0);
    let gap_se = (gap_var / m).sqrt();

    SymmetryReport {
        mean_raw,
        var_raw,
        mean_symmetrized: mean_sym,
        var_symmetrized: var_sym,
        variance_gap: gap_mean,
        variance_gap_se: gap_se,
        replicates,
        exact: pairs.iter().all(|p| p.2),
        seed: seed.derived(),
    }
}

/// Predicts class 1 with certainty exactly when the first sample's
/// label is 1. Deliberately order-sensitive; its exact symmetrization
/// is the empirical class frequency.
pub struct FirstLabelPredictor;

impl Predictor for FirstLabelPredictor {
    fn predict(&self, _x: &[f64], data: &Dataset) -> ClassDistribution {
        assert!(!data.is_empty(), "first-label predictor needs data");
        ClassDistribution::binary(if data.examples()[0].label() == 1 { 1.0 } else { 0.0 })
            .unwrap()
    }

    fn name(&self) -> String {
        "first-label".to_string()
    }
}
