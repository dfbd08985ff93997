//! One-dimensional classification trees and their BIC-weighted ensemble.
//!
//! A tree is a sorted vector of split locations; leaf j is the interval
//! `(theta_j, theta_{j+1}]` with implicit endpoints at minus and plus
//! infinity. The ensemble averages member predictions with weights
//! proportional to `exp(-BIC)`.

use super::{clamp_prob, PROB_CLAMP};
use crate::data::{ClassDistribution, Dataset};
use crate::linalg::log_sum_exp;

/// Split locations of a depth-one-per-interval tree on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    splits: Vec<f64>,
}

impl TreeParams {
    /// Builds a tree from split locations; they are sorted and must be
    /// finite.
    pub fn new(mut splits: Vec<f64>) -> Self {
        assert!(splits.iter().all(|s| s.is_finite()), "splits must be finite");
        splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        TreeParams { splits }
    }

    pub fn splits(&self) -> &[f64] {
        &self.splits
    }

    pub fn num_splits(&self) -> usize {
        self.splits.len()
    }

    /// Index of the leaf interval `(theta_j, theta_{j+1}]` containing x.
    /// A point exactly at a split belongs to the left leaf.
    pub fn leaf_index(&self, x: f64) -> usize {
        self.splits.iter().filter(|&&s| s < x).count()
    }
}

/// Class frequencies among the samples falling in the same leaf as `x`.
/// An empty leaf yields the uniform distribution (convention).
pub fn tree_predict(params: &TreeParams, x: f64, data: &Dataset) -> ClassDistribution {
    debug_assert_eq!(data.dim(), 1, "trees are defined on scalar features");
    let leaf = params.leaf_index(x);
    let mut counts = vec![0usize; data.classes()];
    let mut total = 0usize;
    for e in data.iter() {
        if params.leaf_index(e.features()[0]) == leaf {
            counts[e.label()] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return ClassDistribution::uniform(data.classes());
    }
    let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
    ClassDistribution::new(probs).expect("frequencies form a distribution")
}

/// An ensemble of trees sharing the same split count.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleParams {
    members: Vec<TreeParams>,
}

impl EnsembleParams {
    pub fn new(members: Vec<TreeParams>) -> Self {
        assert!(!members.is_empty(), "ensemble needs at least one member");
        let s = members[0].num_splits();
        assert!(
            members.iter().all(|m| m.num_splits() == s),
            "ensemble members must share the split count"
        );
        EnsembleParams { members }
    }

    pub fn members(&self) -> &[TreeParams] {
        &self.members
    }

    pub fn num_splits(&self) -> usize {
        self.members[0].num_splits()
    }
}

/// Model-averaging weights proportional to exp(-BIC), with
/// `BIC_k = -2 * sum_i log q_k(Y_i | X_i, D) + S * log n`. Leaf
/// probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside
/// the log-likelihood so the criterion stays finite.
pub fn bic_weights(ensemble: &EnsembleParams, data: &Dataset) -> Vec<f64> {
    assert!(!data.is_empty(), "BIC weights need at least one sample");
    let n = data.len() as f64;
    let s = ensemble.num_splits() as f64;
    let neg_bic: Vec<f64> = ensemble
        .members
        .iter()
        .map(|tree| {
            let mut log_lik = 0.0;
            for e in data.iter() {
                let pred = tree_predict(tree, e.features()[0], data);
                log_lik += clamp_prob(pred.prob(e.label())).ln();
            }
            -(-2.0 * log_lik + s * n.ln())
        })
        .collect();
    let lse = log_sum_exp(&neg_bic);
    neg_bic.iter().map(|b| (b - lse).exp()).collect()
}

/// BIC-weighted average of member predictions, renormalized.
pub fn ensemble_predict(ensemble: &EnsembleParams, x: f64, data: &Dataset) -> ClassDistribution {
    let weights = bic_weights(ensemble, data);
    let mut probs = vec![0.0; data.classes()];
    for (tree, w) in ensemble.members.iter().zip(&weights) {
        let p = tree_predict(tree, x, data);
        for (acc, &pi) in probs.iter_mut().zip(p.probs()) {
            *acc += w * pi;
        }
    }
    ClassDistribution::from_weights(&probs).expect("weighted average renormalizes")
}

// PROB_CLAMP re-exported so doc references resolve in this module.
#[allow(unused)]
const _: f64 = PROB_CLAMP;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_splits_gives_global_frequency() {
        let data = Dataset::binary(1, &[(1, &[0.1]), (0, &[0.2]), (1, &[0.8]), (1, &[0.9])]);
        let p = tree_predict(&TreeParams::new(vec![]), 0.5, &data);
        assert_eq!(p.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn hand_enumerated_leaf() {
        let data = Dataset::binary(1, &[(1, &[0.1]), (1, &[0.2]), (0, &[0.8])]);
        let p = tree_predict(&TreeParams::new(vec![0.5]), 0.3, &data);
        assert_eq!(p.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn split_point_belongs_to_left_leaf() {
        let tree = TreeParams::new(vec![0.5]);
        assert_eq!(tree.leaf_index(0.5), 0);
        assert_eq!(tree.leaf_index(0.5 + 1e-12), 1);
        let data = Dataset::binary(1, &[(1, &[0.1]), (0, &[0.9])]);
        let p = tree_predict(&tree, 0.5, &data);
        assert_eq!(p.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn empty_leaf_is_uniform() {
        let data = Dataset::binary(1, &[(1, &[0.1])]);
        let p = tree_predict(&TreeParams::new(vec![0.5]), 0.9, &data);
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn single_member_weight_is_one() {
        let data = Dataset::binary(1, &[(1, &[0.1]), (0, &[0.9])]);
        let ens = EnsembleParams::new(vec![TreeParams::new(vec![0.5])]);
        assert_eq!(bic_weights(&ens, &data), vec![1.0]);
        let single = tree_predict(&ens.members()[0], 0.2, &data);
        let combined = ensemble_predict(&ens, 0.2, &data);
        for (a, b) in single.probs().iter().zip(combined.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_members_share_weight() {
        let data = Dataset::binary(1, &[(1, &[0.1]), (0, &[0.9]), (1, &[0.3])]);
        let tree = TreeParams::new(vec![0.5]);
        let ens = EnsembleParams::new(vec![tree.clone(), tree]);
        let w = bic_weights(&ens, &data);
        assert!((w[0] - 0.5).abs() < 1e-12);
        assert!((w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_gap_of_two_gives_e4_ratio() {
        // Two members with equal split counts and log-likelihoods -10
        // and -12 must get weights (e^4 / (1 + e^4), 1 / (1 + e^4)).
        // Checked against the weight formula directly.
        let neg_bic = [-(-2.0 * -10.0), -(-2.0 * -12.0)];
        let lse = log_sum_exp(&neg_bic);
        let w0 = (neg_bic[0] - lse).exp();
        let w1 = (neg_bic[1] - lse).exp();
        assert!((w0 - 0.9820137900379085).abs() < 1e-12, "w0 {w0}");
        assert!((w1 - 0.01798620996209155).abs() < 1e-12, "w1 {w1}");
    }

    #[test]
    fn ensemble_matches_brute_force_bic_average() {
        // Three samples, two trees with distinct splits; expected value
        // computed by expanding the BIC formula independently.
        let data = Dataset::binary(1, &[(1, &[0.1]), (0, &[0.4]), (1, &[0.8])]);
        let t1 = TreeParams::new(vec![0.3]);
        let t2 = TreeParams::new(vec![0.6]);
        let ens = EnsembleParams::new(vec![t1.clone(), t2.clone()]);

        let n = 3.0f64;
        let brute_bic = |tree: &TreeParams| {
            let mut ll = 0.0;
            for e in data.iter() {
                let p = tree_predict(tree, e.features()[0], &data).prob(e.label());
                ll += p.clamp(1e-6, 1.0 - 1e-6).ln();
            }
            -2.0 * ll + 1.0 * n.ln()
        };
        let (b1, b2) = (brute_bic(&t1), brute_bic(&t2));
        let z = (-b1).exp() + (-b2).exp();
        let (w1, w2) = ((-b1).exp() / z, (-b2).exp() / z);
        let expect_p1 = w1 * tree_predict(&t1, 0.2, &data).p1() + w2 * tree_predict(&t2, 0.2, &data).p1();

        let got = ensemble_predict(&ens, 0.2, &data);
        assert!((got.p1() - expect_p1).abs() < 1e-12, "{} vs {}", got.p1(), expect_p1);
        assert!((got.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
