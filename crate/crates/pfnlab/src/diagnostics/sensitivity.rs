//! Single-sample replacement sensitivity and its power-law fit.

use super::rate::{fit_rate, RateFit};
use crate::data::Example;
use crate::predictors::Predictor;
use crate::priors::{sample_dataset, ConditionalModel, FeatureLaw};
use crate::rng::SeedSpec;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityRow {
    pub n: usize,
    pub max_change: f64,
    pub mean_change: f64,
    pub trials: usize,
}

/// Replacement-sensitivity measurements per context size, with the
/// fitted decay exponent `alpha = -slope` and prefactor `L` of
/// `max_change ~ L * n^(-alpha)`. The fit is absent (flagged) when a
/// max change of zero makes the log-log regression undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityEstimate {
    pub rows: Vec<SensitivityRow>,
    pub fit: Option<RateFit>,
    pub seed: u64,
}

impl SensitivityEstimate {
    pub fn alpha(&self) -> Option<f64> {
        self.fit.map(|f| -f.slope)
    }

    pub fn prefactor(&self) -> Option<f64> {
        self.fit.map(|f| f.intercept.exp())
    }
}

/// For each `n` and trial: draw a dataset, replace one uniformly chosen
/// sample with a fresh draw from the task, and record the absolute
/// change of the class-1 prediction at a fixed test point (stream
/// `seed.child(0)`). The per-n maxima feed the log-log fit.
pub fn sensitivity_probe(
    predictor: &dyn Predictor,
    p0: &ConditionalModel,
    feature_law: &FeatureLaw,
    n_grid: &[usize],
    trials: usize,
    seed: SeedSpec,
) -> SensitivityEstimate {
    assert!(trials >= 10, "sensitivity probe needs at least 10 trials");
    let mut test_rng = seed.child(0).rng();
    let x_star = feature_law.sample(&mut test_rng);

    let rows: Vec<SensitivityRow> = n_grid
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let n_seed = seed.child(1 + ni as u64);
            let changes: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = n_seed.child(t as u64).rng();
                    let data = sample_dataset(p0, feature_law, n, &mut rng);
                    let idx = rng.below(n as u64) as usize;
                    let x_new = feature_law.sample(&mut rng);
                    let y_new = usize::from(rng.uniform() < p0.p1(&x_new));
                    let replaced = data
                        .with_replaced(idx, Example::new(y_new, x_new, 2).unwrap())
                        .unwrap();
                    let before = predictor.predict(&x_star, &data).p1();
                    let after = predictor.predict(&x_star, &replaced).p1();
                    (before - after).abs()
                })
                .collect();
            let max_change = changes.iter().cloned().fold(0.0, f64::max);
            let mean_change = changes.iter().sum::<f64>() / trials as f64;
            SensitivityRow { n, max_change, mean_change, trials }
        })
        .collect();

    let fit = if rows.len() >= 4 && rows.iter().all(|r| r.max_change > 0.0) {
        fit_rate(&rows.iter().map(|r| (r.n as f64, r.max_change)).collect::<Vec<_>>()).ok()
    } else {
        None
    };
    SensitivityEstimate { rows, fit, seed: seed.derived() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::{ConstantPredictor, WindowSmootherParams};

    #[test]
    fn constant_predictor_has_zero_changes_and_no_fit() {
        let p0 = ConditionalModel::constant_bernoulli(0.5).unwrap();
        let law = FeatureLaw::standard_normal(1);
        let c = ConstantPredictor::uniform(2);
        let est = sensitivity_probe(&c, &p0, &law, &[8, 16, 32, 64], 10, SeedSpec::new(1, 0));
        assert!(est.rows.iter().all(|r| r.max_change == 0.0));
        assert!(est.fit.is_none());
        assert!(est.alpha().is_none());
    }

    #[test]
    fn window_smoother_alpha_near_one() {
        let p0 = ConditionalModel::default_sine(1);
        let law = FeatureLaw::standard_normal(1);
        let w = WindowSmootherParams::fixed(1.0);
        let est = sensitivity_probe(
            &w,
            &p0,
            &law,
            &[64, 128, 256, 512, 1024],
            60,
            SeedSpec::new(2, 0),
        );
        let alpha = est.alpha().expect("changes are nonzero");
        assert!((0.8..1.2).contains(&alpha), "alpha {alpha}");
    }

    #[test]
    fn probe_is_deterministic() {
        let p0 = ConditionalModel::default_sine(1);
        let law = FeatureLaw::standard_normal(1);
        let w = WindowSmootherParams::fixed(0.8);
        let a = sensitivity_probe(&w, &p0, &law, &[16, 32, 64, 128], 12, SeedSpec::new(3, 0));
        let b = sensitivity_probe(&w, &p0, &law, &[16, 32, 64, 128], 12, SeedSpec::new(3, 0));
        assert_eq!(a, b);
    }
}
