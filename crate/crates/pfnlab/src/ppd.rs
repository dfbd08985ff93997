//! Exact posterior predictive distribution for finite priors, the
//! KL-optimal reference member, and a paired optimality check against
//! challenger predictors.
//!
//! Posterior weights are accumulated in log space and normalized with
//! logsumexp; the shared feature marginal cancels and is never
//! evaluated. No un-normalized probability leaves this module.

use crate::data::{ClassDistribution, Dataset};
use crate::linalg::log_sum_exp;
use crate::predictors::Predictor;
use crate::priors::{
    sample_dataset, sample_size, sample_task, ConditionalModel, FeatureLaw, FinitePrior,
    SizePrior,
};
use crate::rng::{derive_seed, Rng, SeedSpec};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PpdError {
    #[error("every hypothesis has zero likelihood on the data; posterior is degenerate")]
    DegeneratePosterior,
    #[error("data dimension {got} does not match prior dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Posterior over the K hypotheses given a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorWeights {
    log_weights: Vec<f64>,
    weights: Vec<f64>,
}

impl PosteriorWeights {
    /// Normalized log weights (they sum to one after exponentiation).
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Log-space Bayes update: `log w_k + sum_i log p_k(Y_i | X_i)`,
/// normalized by logsumexp.
pub fn posterior_weights(
    prior: &FinitePrior,
    data: &Dataset,
) -> Result<PosteriorWeights, PpdError> {
    if !data.is_empty() && data.dim() != prior.dim() {
        return Err(PpdError::DimensionMismatch { expected: prior.dim(), got: data.dim() });
    }
    let mut log_joint: Vec<f64> = prior.weights().iter().map(|w| w.ln()).collect();
    for (k, model) in prior.models().iter().enumerate() {
        if log_joint[k] == f64::NEG_INFINITY {
            continue;
        }
        for e in data.iter() {
            log_joint[k] += model.log_prob(e.label(), e.features());
            if log_joint[k] == f64::NEG_INFINITY {
                break;
            }
        }
    }
    let norm = log_sum_exp(&log_joint);
    if norm == f64::NEG_INFINITY {
        return Err(PpdError::DegeneratePosterior);
    }
    let log_weights: Vec<f64> = log_joint.iter().map(|l| l - norm).collect();
    let weights: Vec<f64> = log_weights.iter().map(|l| l.exp()).collect();
    Ok(PosteriorWeights { log_weights, weights })
}

/// The exact posterior predictive: posterior-weighted mixture of the
/// hypotheses' conditional class probabilities at `x`.
pub fn exact_ppd(
    prior: &FinitePrior,
    data: &Dataset,
    x: &[f64],
) -> Result<ClassDistribution, PpdError> {
    let post = posterior_weights(prior, data)?;
    let mut p1 = 0.0;
    for (model, &w) in prior.models().iter().zip(post.weights()) {
        p1 += w * model.p1(x);
    }
    Ok(ClassDistribution::binary(p1.clamp(0.0, 1.0)).expect("mixture probability is valid"))
}

/// The exact PPD viewed as a predictor.
pub struct PpdPredictor {
    pub prior: FinitePrior,
}

impl PpdPredictor {
    pub fn new(prior: FinitePrior) -> Self {
        PpdPredictor { prior }
    }
}

impl Predictor for PpdPredictor {
    fn predict(&self, x: &[f64], data: &Dataset) -> ClassDistribution {
        exact_ppd(&self.prior, data, x).expect("posterior is nondegenerate on sampled data")
    }

    fn name(&self) -> String {
        format!("exact-ppd(K={})", self.prior.len())
    }
}

/// Monte-Carlo estimates of the expected conditional KL divergence from
/// a reference model to each prior member, and the argmin.
#[derive(Debug, Clone)]
pub struct KlReference {
    pub best_index: usize,
    pub kl_values: Vec<f64>,
    /// Per-hypothesis standard error of the KL estimate.
    pub mc_error: Vec<f64>,
}

/// Estimates `E_X KL(p0(.|X) || p_k(.|X))` for every prior member `k`
/// and returns the minimizer (ties broken by the lowest index).
pub fn kl_optimal_member(
    prior: &FinitePrior,
    p0: &ConditionalModel,
    feature_law: &FeatureLaw,
    mc_samples: usize,
    seed: SeedSpec,
) -> KlReference {
    assert!(mc_samples >= 1_000, "KL reference needs at least 1000 Monte-Carlo samples");
    let mut rng = seed.rng();
    let k = prior.len();
    let mut sums = vec![0.0; k];
    let mut sq_sums = vec![0.0; k];
    for _ in 0..mc_samples {
        let x = feature_law.sample(&mut rng);
        let p = p0.p1(&x);
        for (j, model) in prior.models().iter().enumerate() {
            let q = model.p1(&x);
            let kl = bernoulli_kl(p, q);
            sums[j] += kl;
            sq_sums[j] += kl * kl;
        }
    }
    let m = mc_samples as f64;
    let kl_values: Vec<f64> = sums.iter().map(|s| s / m).collect();
    let mc_error: Vec<f64> = sq_sums
        .iter()
        .zip(&kl_values)
        .map(|(&sq, &mean)| {
            let var = (sq / m - mean * mean).max(0.0);
            (var / m).sqrt()
        })
        .collect();
    let best_index = kl_values
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.partial_cmp(b).unwrap().then(ia.cmp(ib)))
        .map(|(i, _)| i)
        .expect("prior is nonempty");
    KlReference { best_index, kl_values, mc_error }
}

/// KL(Bernoulli(p) || Bernoulli(q)) in nats, with the 0 log 0 = 0
/// convention.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |pp: f64, qq: f64| {
        if pp == 0.0 {
            0.0
        } else {
            pp * (pp / qq).ln()
        }
    };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Paired mean log-likelihood comparison of the exact PPD against
/// challenger predictors on shared Monte-Carlo draws.
#[derive(Debug, Clone)]
pub struct OptimalityReport {
    pub ppd_mean_loglik: f64,
    pub challengers: Vec<ChallengerResult>,
    pub draws: usize,
}

#[derive(Debug, Clone)]
pub struct ChallengerResult {
    pub name: String,
    pub mean_loglik: f64,
    /// Mean of (PPD log-lik - challenger log-lik) over the paired draws.
    pub paired_gap: f64,
    /// Standard error of the paired gap.
    pub paired_se: f64,
}

/// Estimates the expected conditional log-likelihood of the exact PPD
/// and each challenger over draws of (task, size, dataset, query) from
/// the prior, using the same draws for every predictor.
pub fn ppd_optimality_check(
    prior: &FinitePrior,
    size_prior: &SizePrior,
    challengers: &[&dyn Predictor],
    mc_draws: usize,
    seed: SeedSpec,
) -> OptimalityReport {
    assert!(mc_draws >= 100, "optimality check needs at least 100 draws");
    let base = seed.derived();
    let mut ppd_sum = 0.0;
    let mut sums = vec![0.0; challengers.len()];
    let mut gap_sums = vec![0.0; challengers.len()];
    let mut gap_sq_sums = vec![0.0; challengers.len()];
    for j in 0..mc_draws {
        let mut rng = Rng::from_seed(derive_seed(base, j as u64));
        let task = sample_task(prior, &mut rng);
        let n = sample_size(size_prior, &mut rng);
        let model = prior.model(task);
        let data = sample_dataset(model, prior.feature_law(), n, &mut rng);
        let x = prior.feature_law().sample(&mut rng);
        let y = usize::from(rng.uniform() < model.p1(&x));

        let ppd = exact_ppd(prior, &data, &x).expect("sampled data has positive likelihood");
        let ll_ppd = crate::predictors::clamp_prob(ppd.prob(y)).ln();
        ppd_sum += ll_ppd;
        for (c, challenger) in challengers.iter().enumerate() {
            let pred = challenger.predict(&x, &data);
            let ll = crate::predictors::clamp_prob(pred.prob(y)).ln();
            sums[c] += ll;
            let gap = ll_ppd - ll;
            gap_sums[c] += gap;
            gap_sq_sums[c] += gap * gap;
        }
    }
    let m = mc_draws as f64;
    let challengers = challengers
        .iter()
        .enumerate()
        .map(|(c, challenger)| {
            let gap_mean = gap_sums[c] / m;
            let gap_var = (gap_sq_sums[c] / m - gap_mean * gap_mean).max(0.0);
            ChallengerResult {
                name: challenger.name(),
                mean_loglik: sums[c] / m,
                paired_gap: gap_mean,
                paired_se: (gap_var / m).sqrt(),
            }
        })
        .collect();
    OptimalityReport { ppd_mean_loglik: ppd_sum / m, challengers, draws: mc_draws }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::{ConstantPredictor, UniformMix};

    fn two_coin_prior(p_a: f64, p_b: f64, w_a: f64) -> FinitePrior {
        FinitePrior::new(
            vec![
                ConditionalModel::constant_bernoulli(p_a).unwrap(),
                ConditionalModel::constant_bernoulli(p_b).unwrap(),
            ],
            vec![w_a, 1.0 - w_a],
            FeatureLaw::standard_normal(1),
        )
        .unwrap()
    }

    #[test]
    fn empty_data_returns_prior() {
        let prior = two_coin_prior(0.9, 0.1, 0.3);
        let post = posterior_weights(&prior, &Dataset::empty(1, 2)).unwrap();
        assert!((post.weights()[0] - 0.3).abs() < 1e-15);
        assert!((post.weights()[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn single_observation_bayes_rule() {
        let prior = two_coin_prior(0.9, 0.1, 0.5);
        let data = Dataset::binary(1, &[(1, &[0.0])]);
        let post = posterior_weights(&prior, &data).unwrap();
        assert!((post.weights()[0] - 0.9).abs() < 1e-12);
        assert!((post.weights()[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn balanced_observations_recover_prior() {
        let prior = two_coin_prior(0.9, 0.1, 0.5);
        let data = Dataset::binary(1, &[(1, &[0.0]), (0, &[0.0])]);
        let post = posterior_weights(&prior, &data).unwrap();
        assert!((post.weights()[0] - 0.5).abs() < 1e-12);
        assert!((post.weights()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ppd_mixes_hypotheses() {
        let prior = two_coin_prior(0.9, 0.1, 0.5);
        let empty = exact_ppd(&prior, &Dataset::empty(1, 2), &[0.0]).unwrap();
        assert!((empty.p1() - 0.5).abs() < 1e-12);
        let data = Dataset::binary(1, &[(1, &[0.0])]);
        let one = exact_ppd(&prior, &data, &[0.0]).unwrap();
        assert!((one.p1() - 0.82).abs() < 1e-12);
    }

    #[test]
    fn posterior_concentrates_on_generating_model() {
        let prior = two_coin_prior(0.9, 0.1, 0.5);
        let mut rng = Rng::from_seed(42);
        let data = sample_dataset(
            prior.model(0),
            prior.feature_law(),
            5000,
            &mut rng,
        );
        let ppd = exact_ppd(&prior, &data, &[0.0]).unwrap();
        assert!((0.899..0.901).contains(&ppd.p1()), "p1 {}", ppd.p1());
    }

    #[test]
    fn degenerate_posterior_is_an_error() {
        let prior = two_coin_prior(1.0, 1.0, 0.5);
        let data = Dataset::binary(1, &[(0, &[0.0])]);
        assert_eq!(posterior_weights(&prior, &data).unwrap_err(), PpdError::DegeneratePosterior);
        assert_eq!(exact_ppd(&prior, &data, &[0.0]).unwrap_err(), PpdError::DegeneratePosterior);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let prior = two_coin_prior(0.9, 0.1, 0.5);
        let data = Dataset::binary(3, &[(1, &[0.0, 0.0, 0.0])]);
        assert!(matches!(
            posterior_weights(&prior, &data).unwrap_err(),
            PpdError::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn kl_reference_closed_form_bernoulli() {
        let prior = two_coin_prior(0.9, 0.6, 0.5);
        let p0 = ConditionalModel::constant_bernoulli(0.7).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let kl = kl_optimal_member(&prior, &p0, &law, 2000, SeedSpec::new(1, 0));
        // Constant models: the MC expectation is the closed form exactly.
        assert!((kl.kl_values[0] - 0.15366358680379852).abs() < 1e-12);
        assert!((kl.kl_values[1] - 0.02160085414354654).abs() < 1e-12);
        assert_eq!(kl.best_index, 1);
    }

    #[test]
    fn kl_zero_for_supported_model() {
        let prior = two_coin_prior(0.9, 0.6, 0.5);
        let p0 = ConditionalModel::constant_bernoulli(0.9).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let kl = kl_optimal_member(&prior, &p0, &law, 1000, SeedSpec::new(2, 0));
        assert_eq!(kl.best_index, 0);
        assert!(kl.kl_values[0].abs() <= 3.0 * kl.mc_error[0] + 1e-15);
    }

    #[test]
    fn kl_ties_break_to_lowest_index() {
        let prior = two_coin_prior(0.8, 0.8, 0.5);
        let p0 = ConditionalModel::constant_bernoulli(0.5).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let kl = kl_optimal_member(&prior, &p0, &law, 1000, SeedSpec::new(3, 0));
        assert_eq!(kl.best_index, 0);
    }

    #[test]
    fn optimality_paired_design() {
        let prior = two_coin_prior(0.9, 0.1, 0.5);
        let size_prior = SizePrior::uniform(1, 32).unwrap();
        let ppd_self = PpdPredictor::new(prior.clone());
        let uniform = ConstantPredictor::uniform(2);
        let mixed = UniformMix::new(PpdPredictor::new(prior.clone()), 0.1);
        let challengers: Vec<&dyn Predictor> = vec![&ppd_self, &uniform, &mixed];
        let report =
            ppd_optimality_check(&prior, &size_prior, &challengers, 400, SeedSpec::new(4, 0));

        // PPD against itself: exactly zero gap on every draw.
        assert_eq!(report.challengers[0].paired_gap, 0.0);
        assert_eq!(report.challengers[0].paired_se, 0.0);
        // Informative prior beats the uniform predictor clearly.
        let u = &report.challengers[1];
        assert!(u.paired_gap > 2.0 * u.paired_se, "gap {} se {}", u.paired_gap, u.paired_se);
        // Slight perturbation never wins by more than noise.
        let m = &report.challengers[2];
        assert!(m.paired_gap >= -2.0 * m.paired_se);
    }
}
