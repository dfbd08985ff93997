//! Bias/variance decomposition of a predictor over replicate datasets.

use crate::predictors::Predictor;
use crate::priors::{sample_dataset, ConditionalModel, FeatureLaw};
use crate::rng::SeedSpec;
use rayon::prelude::*;

/// Class-1 predictions of `M` replicate datasets at `T` shared test
/// points, plus the true conditional probabilities.
#[derive(Debug, Clone)]
pub struct ReplicateGrid {
    pub test_points: Vec<Vec<f64>>,
    pub p0_values: Vec<f64>,
    /// `preds[r][t]`: prediction of replicate `r` at test point `t`.
    pub preds: Vec<Vec<f64>>,
}

/// Draws `T` test features once, then `M` replicate datasets of size
/// `n`, evaluating the predictor at every (replicate, test point) pair.
/// Test features come from the stream `seed.child(0)`; replicate `r`
/// uses `seed.child(1 + r)`.
pub fn replicate_predictions(
    predictor: &dyn Predictor,
    p0: &ConditionalModel,
    feature_law: &FeatureLaw,
    n: usize,
    replicates: usize,
    test_points: usize,
    seed: SeedSpec,
) -> ReplicateGrid {
    let mut test_rng = seed.child(0).rng();
    let xs: Vec<Vec<f64>> = (0..test_points).map(|_| feature_law.sample(&mut test_rng)).collect();
    let p0_values: Vec<f64> = xs.iter().map(|x| p0.p1(x)).collect();

    let preds: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.child(1 + r as u64).rng();
            let data = sample_dataset(p0, feature_law, n, &mut rng);
            xs.iter().map(|x| predictor.predict(x, &data).p1()).collect()
        })
        .collect();

    ReplicateGrid { test_points: xs, p0_values, preds }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasVarianceRow {
    pub n: usize,
    pub mean_sq_bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub replicates: usize,
    pub test_points: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasVarianceReport {
    pub rows: Vec<BiasVarianceRow>,
}

impl BiasVarianceReport {
    pub fn row_for(&self, n: usize) -> Option<&BiasVarianceRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// For each `n` in the grid: averages over test points of the squared
/// bias `(E[q] - p0)^2` (replicate mean as the expectation estimate) and
/// of the unbiased replicate variance of `q`. The reported `mse` is the
/// sum of the two estimates.
#[allow(clippy::too_many_arguments)]
pub fn bias_variance(
    predictor: &dyn Predictor,
    p0: &ConditionalModel,
    feature_law: &FeatureLaw,
    n_grid: &[usize],
    replicates: usize,
    test_points: usize,
    seed: SeedSpec,
) -> BiasVarianceReport {
    assert!(replicates >= 2, "variance needs at least two replicates");
    assert!(test_points >= 1);
    let rows = n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let grid = replicate_predictions(
                predictor,
                p0,
                feature_law,
                n,
                replicates,
                test_points,
                seed.child(ni as u64),
            );
            row_from_grid(n, &grid, replicates, test_points, seed)
        })
        .collect();
    BiasVarianceReport { rows }
}

fn row_from_grid(
    n: usize,
    grid: &ReplicateGrid,
    replicates: usize,
    test_points: usize,
    seed: SeedSpec,
) -> BiasVarianceRow {
    let m = replicates as f64;
    let mut bias_acc = 0.0;
    let mut var_acc = 0.0;
    for t in 0..test_points {
        let mut sum = 0.0;
        for r in 0..replicates {
            sum += grid.preds[r][t];
        }
        let mean = sum / m;
        let mut sq_dev = 0.0;
        for r in 0..replicates {
            let d = grid.preds[r][t] - mean;
            sq_dev += d * d;
        }
        let bias = mean - grid.p0_values[t];
        bias_acc += bias * bias;
        var_acc += sq_dev / (m - 1.0);
    }
    let mean_sq_bias = bias_acc / test_points as f64;
    let variance = var_acc / test_points as f64;
    BiasVarianceRow {
        n,
        mean_sq_bias,
        variance,
        mse: mean_sq_bias + variance,
        replicates,
        test_points,
        seed: seed.derived(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ClassDistribution;
    use crate::data::Dataset;
    use crate::predictors::{ConstantPredictor, Predictor};
    use crate::rng::SeedSpec;

    #[test]
    fn constant_predictor_has_zero_variance_exact_bias() {
        let p0 = ConditionalModel::constant_bernoulli(0.7).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let c = ConstantPredictor::new(ClassDistribution::binary(0.4).unwrap());
        let report =
            bias_variance(&c, &p0, &law, &[8, 32], 20, 5, SeedSpec::new(1, 0));
        for row in &report.rows {
            // the replicate mean of a constant rounds within one ulp
            assert!(row.variance.abs() < 1e-30, "variance {}", row.variance);
            assert!((row.mean_sq_bias - (0.4f64 - 0.7).powi(2)).abs() < 1e-12);
            assert!((row.mse - (row.mean_sq_bias + row.variance)).abs() < 1e-15);
        }
    }

    /// Featureless class-frequency predictor: q(1) = mean of the labels.
    struct FrequencyPredictor;
    impl Predictor for FrequencyPredictor {
        fn predict(&self, _x: &[f64], data: &Dataset) -> ClassDistribution {
            let p = data.iter().map(|e| e.label() as f64).sum::<f64>() / data.len() as f64;
            ClassDistribution::binary(p).unwrap()
        }
    }

    #[test]
    fn frequency_predictor_variance_matches_binomial() {
        let p = 0.3;
        let p0 = ConditionalModel::constant_bernoulli(p).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let m = 3000;
        for &n in &[16usize, 64] {
            let report = bias_variance(
                &FrequencyPredictor,
                &p0,
                &law,
                &[n],
                m,
                1,
                SeedSpec::new(2, n as u64),
            );
            let row = &report.rows[0];
            let expect = p * (1.0 - p) / n as f64;
            // var of the variance estimator for a binomial mean:
            // approximately 2 expect^2 / (m - 1) plus kurtosis terms;
            // use 3 standard errors with the normal-theory formula.
            let se = expect * (2.0 / (m as f64 - 1.0)).sqrt() * 1.6;
            assert!(
                (row.variance - expect).abs() < 3.0 * se,
                "n={n}: variance {} vs binomial {expect}",
                row.variance
            );
        }
    }

    #[test]
    fn reports_are_bit_identical_across_runs() {
        let p0 = ConditionalModel::default_sine(2);
        let law = FeatureLaw::standard_normal(2);
        let c = ConstantPredictor::uniform(2);
        let a = bias_variance(&c, &p0, &law, &[4, 16], 10, 3, SeedSpec::new(3, 1));
        let b = bias_variance(&c, &p0, &law, &[4, 16], 10, 3, SeedSpec::new(3, 1));
        assert_eq!(a, b);
    }
}
