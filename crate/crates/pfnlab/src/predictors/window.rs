//! Window smoother: class frequencies among samples within a Euclidean
//! ball of the test feature.

use crate::data::{ClassDistribution, Dataset};
use crate::linalg::euclidean_distance;

/// Bandwidth mode: a fixed radius, or one rescaled with the sample size
/// as `a_n * theta` with `a_n = n^(-1/(4+d))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthScaling {
    Fixed,
    Scaled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSmootherParams {
    pub bandwidth: f64,
    pub scaling: BandwidthScaling,
}

impl WindowSmootherParams {
    pub fn fixed(bandwidth: f64) -> Self {
        assert!(bandwidth > 0.0, "bandwidth must be positive");
        WindowSmootherParams { bandwidth, scaling: BandwidthScaling::Fixed }
    }

    pub fn scaled(bandwidth: f64) -> Self {
        assert!(bandwidth > 0.0, "bandwidth must be positive");
        WindowSmootherParams { bandwidth, scaling: BandwidthScaling::Scaled }
    }

    /// Effective window radius for a dataset of size `n` in dimension `d`.
    pub fn effective_bandwidth(&self, n: usize, d: usize) -> f64 {
        match self.scaling {
            BandwidthScaling::Fixed => self.bandwidth,
            BandwidthScaling::Scaled => {
                let a_n = (n.max(1) as f64).powf(-1.0 / (4.0 + d as f64));
                a_n * self.bandwidth
            }
        }
    }
}

/// Class frequencies among the samples with `||X_i - x|| < b`. An empty
/// window yields the uniform distribution (convention, not an error).
pub fn window_predict(
    params: &WindowSmootherParams,
    x: &[f64],
    data: &Dataset,
) -> ClassDistribution {
    let b = params.effective_bandwidth(data.len(), data.dim());
    let mut counts = vec![0usize; data.classes()];
    let mut total = 0usize;
    for e in data.iter() {
        if euclidean_distance(e.features(), x) < b {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_window_gives_certainty() {
        let data = Dataset::binary(1, &[(1, &[0.1]), (1, &[0.2]), (0, &[5.0])]);
        let p = window_predict(&WindowSmootherParams::fixed(1.0), &[0.0], &data);
        assert_eq!(p.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn hand_enumerated_window() {
        // Distances from 0.0: 0.0, 0.5, 0.9; theta = 0.6 keeps the first
        // two samples with labels 1 and 0.
        let data = Dataset::binary(1, &[(1, &[0.0]), (0, &[0.5]), (1, &[0.9])]);
        let p = window_predict(&WindowSmootherParams::fixed(0.6), &[0.0], &data);
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn empty_window_falls_back_to_uniform() {
        let data = Dataset::binary(1, &[(1, &[10.0]), (0, &[12.0])]);
        let p = window_predict(&WindowSmootherParams::fixed(0.5), &[0.0], &data);
        assert_eq!(p.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn window_boundary_is_exclusive() {
        let data = Dataset::binary(1, &[(1, &[0.5]), (0, &[0.1])]);
        let p = window_predict(&WindowSmootherParams::fixed(0.5), &[0.0], &data);
        // the sample at exactly distance 0.5 is outside the open ball
        assert_eq!(p.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn scaled_bandwidth_shrinks_with_n() {
        let p = WindowSmootherParams::scaled(1.0);
        let b64 = p.effective_bandwidth(64, 1);
        let b4096 = p.effective_bandwidth(4096, 1);
        assert!((b64 - 64f64.powf(-0.2)).abs() < 1e-15);
        assert!(b4096 < b64);
    }
}
