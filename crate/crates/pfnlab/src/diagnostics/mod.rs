//! Statistical measurement harness: bias/variance decomposition over
//! replicate datasets, single-sample sensitivity, label-locality probes,
//! symmetrization, attention tilt limits, and power-law rate fits.
//!
//! Every probe derives one child stream per replicate, evaluates
//! replicates in parallel, and reduces in a fixed order, so reports are
//! reproduced bit-identically under the same seed regardless of worker
//! count.

mod bias_variance;
mod locality;
mod rate;
mod sensitivity;
mod symmetry;
mod tilt;

pub use bias_variance::{bias_variance, replicate_predictions, BiasVarianceReport, BiasVarianceRow, ReplicateGrid};
pub use locality::{locality_probe, EpsilonRule, LocalityProbeReport, LocalityRow};
pub use rate::{fit_rate, RateFit};
pub use sensitivity::{sensitivity_probe, SensitivityEstimate, SensitivityRow};
pub use symmetry::{symmetrize_check, FirstLabelPredictor, SymmetryReport};
pub use tilt::{tilt_limit, TiltReport, TiltRow};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("rate fit needs at least 3 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("rate fit requires positive values; pair {index} has value {value}")]
    NonPositiveValue { index: usize, value: f64 },
}
