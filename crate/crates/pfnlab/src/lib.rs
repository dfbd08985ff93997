//! Desk-scale laboratory for prior-data fitted networks (PFNs).
//!
//! The crate simulates classification tasks from finite priors, computes
//! the exact posterior predictive distribution those tasks induce, fits
//! small in-context predictors (window smoother, BIC tree ensemble,
//! one-layer transformer) by Monte-Carlo empirical risk minimization,
//! and measures their bias/variance, sensitivity, and locality behavior
//! on replicate datasets.
//!
//! Everything is seeded: the same seed reproduces every report
//! bit-identically on a given platform, independent of worker count.

pub mod container;
pub mod data;
pub mod diagnostics;
pub mod linalg;
pub mod ppd;
pub mod predictors;
pub mod pretrain;
pub mod priors;
pub mod rng;

pub use data::{ClassDistribution, Dataset, Example};
pub use rng::{derive_seed, Rng, SeedSpec};
