//! Infinite-context limit of the attention block: the value sum tends
//! to a sum of exponentially tilted token means. Estimated here by
//! self-normalized importance sampling and compared with the empirical
//! value sum at finite context sizes.

use crate::linalg::{norm2, sub};
use crate::predictors::transformer::forward_cached;
use crate::predictors::TransformerParams;
use crate::priors::{sample_dataset, ConditionalModel, FeatureLaw};
use crate::rng::SeedSpec;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct TiltRow {
    pub n: usize,
    /// Norm of u'(n) - limit, one entry per replicate.
    pub discrepancies: Vec<f64>,
    pub median_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiltReport {
    /// Per head: Monte-Carlo estimate of `W_v E_{V ~ g_h}[V]`.
    pub head_limits: Vec<Vec<f64>>,
    /// Sum of the per-head limits: the limiting value sum.
    pub u_prime_limit: Vec<f64>,
    pub rows: Vec<TiltRow>,
    pub mc_samples: usize,
    pub seed: u64,
}

/// Estimates the limiting value sum by drawing `mc_samples` tokens from
/// the task and tilting them with `exp(v' W_q V)` per head
/// (self-normalized, max-shifted), then measures the empirical value
/// sum's distance to that limit for each context size in `n_grid`.
#[allow(clippy::too_many_arguments)]
pub fn tilt_limit(
    params: &TransformerParams,
    x: &[f64],
    p0: &ConditionalModel,
    feature_law: &FeatureLaw,
    mc_samples: usize,
    n_grid: &[usize],
    replicates: usize,
    seed: SeedSpec,
) -> TiltReport {
    assert!(mc_samples >= 10_000, "tilt limit needs at least 10^4 Monte-Carlo samples");
    assert!(replicates >= 1);
    let dim = params.token_dim();

    // tokens V = (Y, X) drawn from the task
    let mut mc_rng = seed.child(0).rng();
    let tokens: Vec<Vec<f64>> = (0..mc_samples)
        .map(|_| {
            let feat = feature_law.sample(&mut mc_rng);
            let y = usize::from(mc_rng.uniform() < p0.p1(&feat));
            let mut t = Vec::with_capacity(dim);
            t.push(y as f64);
            t.extend_from_slice(&feat);
            t
        })
        .collect();

    let mut test_token = Vec::with_capacity(dim);
    test_token.push(0.0);
    test_token.extend_from_slice(x);

    let mut head_limits = Vec::with_capacity(params.heads.len());
    let mut u_prime_limit = vec![0.0; dim];
    for head in &params.heads {
        let query = head.w_q.tr_matvec(&test_token);
        let scores: Vec<f64> = tokens.iter().map(|t| crate::linalg::dot(&query, t)).collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut weight_sum = 0.0;
        let mut mean = vec![0.0; dim];
        for (t, &s) in tokens.iter().zip(&scores) {
            let w = (s - max).exp();
            weight_sum += w;
            for (m, &tv) in mean.iter_mut().zip(t) {
                *m += w * tv;
            }
        }
        for m in &mut mean {
            *m /= weight_sum;
        }
        let limit = head.w_v.matvec(&mean);
        for (acc, &l) in u_prime_limit.iter_mut().zip(&limit) {
            *acc += l;
        }
        head_limits.push(limit);
    }

    let rows = n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let n_seed = seed.child(1 + ni as u64);
            let mut discrepancies: Vec<f64> = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    let mut rng = n_seed.child(r as u64).rng();
                    let data = sample_dataset(p0, feature_law, n, &mut rng);
                    let cache = forward_cached(params, x, &data)
                        .expect("nonempty context");
                    norm2(&sub(&cache.u_prime, &u_prime_limit))
                })
                .collect();
            discrepancies.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median_discrepancy = median_of_sorted(&discrepancies);
            TiltRow { n, discrepancies, median_discrepancy }
        })
        .collect();

    TiltReport { head_limits, u_prime_limit, rows, mc_samples, seed: seed.derived() }
}

pub(crate) fn median_of_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::rng::Rng;

    #[test]
    fn zero_query_matrix_gives_untilted_mean() {
        // With W_q = 0 the tilt vanishes: the limit is W_v E[V].
        let mut rng = Rng::from_seed(1);
        let mut params = TransformerParams::seeded_init(2, 2, 1, 4, &mut rng);
        params.heads[0].w_q = Mat::zeros(3, 3);
        let p0 = ConditionalModel::constant_bernoulli(0.5).unwrap();
        let law = FeatureLaw::standard_normal(2);
        let report = tilt_limit(
            &params,
            &[0.3, -0.1],
            &p0,
            &law,
            200_000,
            &[],
            1,
            SeedSpec::new(1, 0),
        );
        // E[V] = (0.5, 0, 0); compare against W_v applied to it
        let expected = params.heads[0].w_v.matvec(&[0.5, 0.0, 0.0]);
        for (got, want) in report.u_prime_limit.iter().zip(&expected) {
            assert!((got - want).abs() < 0.01, "{got} vs {want}");
        }
    }

    #[test]
    fn two_atom_law_matches_enumeration() {
        // Finitely supported features allow computing the tilted mean in
        // closed form by enumerating (atom, label) pairs.
        let mut rng = Rng::from_seed(2);
        let params = TransformerParams::seeded_init(1, 2, 1, 4, &mut rng);
        let atoms = vec![vec![-1.0], vec![2.0]];
        let weights = vec![0.3, 0.7];
        let law = FeatureLaw::atoms(atoms.clone(), weights.clone()).unwrap();
        let p0 = ConditionalModel::logistic(vec![1.2], -0.3);
        let x = [0.5];

        let report =
            tilt_limit(&params, &x, &p0, &law, 400_000, &[], 1, SeedSpec::new(2, 0));

        // enumeration oracle over the four (atom, label) outcomes
        let head = &params.heads[0];
        let test_token = vec![0.0, 0.5];
        let query = head.w_q.tr_matvec(&test_token);
        let mut num = vec![0.0; 2];
        let mut den = 0.0;
        for (a, &wa) in atoms.iter().zip(&weights) {
            let p1 = p0.p1(a);
            for (y, py) in [(0.0, 1.0 - p1), (1.0, p1)] {
                let token = vec![y, a[0]];
                let w = wa * py * crate::linalg::dot(&query, &token).exp();
                den += w;
                for (nv, &tv) in num.iter_mut().zip(&token) {
                    *nv += w * tv;
                }
            }
        }
        let tilted_mean: Vec<f64> = num.iter().map(|v| v / den).collect();
        let expected = head.w_v.matvec(&tilted_mean);
        for (got, want) in report.u_prime_limit.iter().zip(&expected) {
            assert!((got - want).abs() < 0.02, "{got} vs {want}");
        }
    }

    #[test]
    fn discrepancy_decreases_with_context_size() {
        let mut rng = Rng::from_seed(3);
        let params = TransformerParams::seeded_init(2, 2, 2, 4, &mut rng);
        let p0 = ConditionalModel::default_sine(2);
        let law = FeatureLaw::standard_normal(2);
        let report = tilt_limit(
            &params,
            &[0.2, 0.4],
            &p0,
            &law,
            100_000,
            &[64, 512, 4096],
            11,
            SeedSpec::new(3, 0),
        );
        let medians: Vec<f64> = report.rows.iter().map(|r| r.median_discrepancy).collect();
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "medians not decreasing: {medians:?}"
        );
    }
}
