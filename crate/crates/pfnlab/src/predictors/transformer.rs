//! One-layer multi-head transformer over labeled tokens.
//!
//! Tokens are `V_i = (Y_i, X_i)` in `R^(d+1)`; the test feature enters
//! as `v = (0, x)` with the unknown label slot set to zero. The forward
//! pass is, in order: per-head attention weights from the bilinear
//! scores `v' W_q V_j`, the value sum `u'`, a residual LayerNorm, a
//! one-hidden-layer ReLU block, a second residual LayerNorm, and a
//! softmax readout. Both LayerNorms share one gamma triple. Summation
//! over context positions is in ascending index order, so outputs are
//! deterministic for a fixed ordering and permutation-invariant up to
//! rounding.

use crate::data::{ClassDistribution, Dataset};
use crate::linalg::{dot, norm2, softmax, Mat};
use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TransformerError {
    #[error("transformer requires a nonempty context")]
    EmptyContext,
    #[error("gamma2 must be nonzero")]
    InvalidGamma,
    #[error("parameter matrix {name} expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    BadShape {
        name: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("feature dimension mismatch: params expect d={expected}, data has d={got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameters contain a non-finite entry")]
    NonFinite,
}

/// Per-head attention parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub w_q: Mat,
    pub w_v: Mat,
}

/// All weights of the one-layer network.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformerParams {
    pub heads: Vec<HeadParams>,
    pub w_r1: Mat,
    pub w_r2: Mat,
    pub w_o: Mat,
    pub gamma: [f64; 3],
}

impl TransformerParams {
    /// Validates shapes, finiteness, and `gamma2 != 0`.
    pub fn validate(&self) -> Result<(), TransformerError> {
        if self.gamma[1] == 0.0 {
            return Err(TransformerError::InvalidGamma);
        }
        let dim = self.token_dim();
        for h in &self.heads {
            check_shape("w_q", &h.w_q, dim, dim)?;
            check_shape("w_v", &h.w_v, dim, dim)?;
        }
        check_shape("w_r1", &self.w_r1, self.w_r1.rows(), dim)?;
        check_shape("w_r2", &self.w_r2, dim, self.w_r1.rows())?;
        check_shape("w_o", &self.w_o, self.w_o.rows(), dim)?;
        let finite = self
            .matrices()
            .iter()
            .all(|m| m.data().iter().all(|v| v.is_finite()))
            && self.gamma.iter().all(|g| g.is_finite());
        if !finite {
            return Err(TransformerError::NonFinite);
        }
        Ok(())
    }

    /// Token dimension d + 1.
    pub fn token_dim(&self) -> usize {
        self.w_o.cols()
    }

    pub fn feature_dim(&self) -> usize {
        self.token_dim() - 1
    }

    pub fn classes(&self) -> usize {
        self.w_o.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_r1.rows()
    }

    pub fn num_heads(&self) -> usize {
        self.heads.len()
    }

    fn matrices(&self) -> Vec<&Mat> {
        let mut ms: Vec<&Mat> = Vec::new();
        for h in &self.heads {
            ms.push(&h.w_q);
            ms.push(&h.w_v);
        }
        ms.push(&self.w_r1);
        ms.push(&self.w_r2);
        ms.push(&self.w_o);
        ms
    }

    /// Fresh parameters with entries iid uniform on [-0.1, 0.1] scaled
    /// by 1 / sqrt(d + 1), and gamma = (1, 1, 0). Keeps the initial
    /// attention near-uniform.
    pub fn seeded_init(
        d: usize,
        classes: usize,
        heads: usize,
        hidden: usize,
        rng: &mut Rng,
    ) -> Self {
        let dim = d + 1;
        let scale = 0.1 / (dim as f64).sqrt();
        let mut mat = |r: usize, c: usize| {
            let data = (0..r * c).map(|_| (2.0 * rng.uniform() - 1.0) * scale).collect();
            Mat::from_vec(r, c, data)
        };
        let heads = (0..heads)
            .map(|_| HeadParams { w_q: mat(dim, dim), w_v: mat(dim, dim) })
            .collect();
        TransformerParams {
            heads,
            w_r1: mat(hidden, dim),
            w_r2: mat(dim, hidden),
            w_o: mat(classes, dim),
            gamma: [1.0, 1.0, 0.0],
        }
    }

    /// [`seeded_init`](Self::seeded_init) plus an identity similarity of
    /// the given scale on the feature block of each head's query
    /// matrix, biasing head `h` toward attending to samples whose
    /// features align with the test feature. One scale per head; heads
    /// beyond the list keep the plain init. Consumes exactly the same
    /// random stream as `seeded_init`.
    pub fn seeded_init_with_similarity(
        d: usize,
        classes: usize,
        heads: usize,
        hidden: usize,
        rng: &mut Rng,
        scales: &[f64],
    ) -> Self {
        let mut params = Self::seeded_init(d, classes, heads, hidden, rng);
        for (head, &scale) in params.heads.iter_mut().zip(scales) {
            for i in 0..d {
                let v = head.w_q.get(1 + i, 1 + i) + scale;
                head.w_q.set(1 + i, 1 + i, v);
            }
        }
        params
    }

    /// Random parameters with every matrix rescaled to spectral norm at
    /// most one (via the Frobenius bound) and a gamma triple with
    /// `|gamma2|` bounded away from zero. The regime of the attention
    /// and bounded-difference bounds.
    pub fn random_constrained(
        d: usize,
        classes: usize,
        heads: usize,
        hidden: usize,
        rng: &mut Rng,
    ) -> Self {
        let dim = d + 1;
        let mut mat = |r: usize, c: usize| {
            let mut data = vec![0.0; r * c];
            rng.fill_normal(&mut data);
            let mut m = Mat::from_vec(r, c, data);
            m.clamp_spectral_to(1.0);
            m
        };
        let heads = (0..heads)
            .map(|_| HeadParams { w_q: mat(dim, dim), w_v: mat(dim, dim) })
            .collect();
        let mut out = TransformerParams {
            heads,
            w_r1: mat(hidden, dim),
            w_r2: mat(dim, hidden),
            w_o: mat(classes, dim),
            gamma: [0.0; 3],
        };
        out.gamma = [
            2.0 * rng.uniform() - 1.0,
            (0.1 + 1.9 * rng.uniform()) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 },
            2.0 * rng.uniform() - 1.0,
        ];
        out
    }

    /// Flat view of all parameters, gamma last; used by serialization
    /// and finite-difference checks.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for m in self.matrices() {
            out.extend_from_slice(m.data());
        }
        out.extend_from_slice(&self.gamma);
        out
    }

    /// Writes a flat vector (as produced by [`flatten`](Self::flatten))
    /// back into the parameter blocks.
    pub fn unflatten_into(&mut self, flat: &[f64]) {
        let mut idx = 0;
        let mut take = |m: &mut Mat| {
            let len = m.data().len();
            m.data_mut().copy_from_slice(&flat[idx..idx + len]);
            idx += len;
        };
        for h in &mut self.heads {
            take(&mut h.w_q);
            take(&mut h.w_v);
        }
        take(&mut self.w_r1);
        take(&mut self.w_r2);
        take(&mut self.w_o);
        self.gamma.copy_from_slice(&flat[idx..idx + 3]);
    }
}

fn check_shape(
    name: &'static str,
    m: &Mat,
    rows: usize,
    cols: usize,
) -> Result<(), TransformerError> {
    if m.rows() != rows || m.cols() != cols {
        return Err(TransformerError::BadShape {
            name,
            expected_rows: rows,
            expected_cols: cols,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(())
}

/// Attention weights and intermediate activations of one forward pass.
#[derive(Debug, Clone)]
pub struct AttentionTrace {
    /// H x n attention weights; each row sums to one.
    pub a: Vec<Vec<f64>>,
    pub u_prime: Vec<f64>,
    pub u: Vec<f64>,
    pub z_prime: Vec<f64>,
    pub z: Vec<f64>,
}

/// Everything the backward pass needs from a forward evaluation.
#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    pub tokens: Vec<Vec<f64>>,
    pub test_token: Vec<f64>,
    pub attn: Vec<Vec<f64>>,
    /// Per head: attention-weighted token mean `sum_j a_j V_j`.
    pub head_mean: Vec<Vec<f64>>,
    pub u_prime: Vec<f64>,
    pub t_pre_norm: Vec<f64>,
    pub u: Vec<f64>,
    pub hidden_pre: Vec<f64>,
    pub hidden_relu: Vec<f64>,
    pub z_prime: Vec<f64>,
    pub w_pre_norm: Vec<f64>,
    pub z: Vec<f64>,
    pub probs: Vec<f64>,
}

/// The LayerNorm used throughout: center by the mean, divide by the
/// Euclidean norm of the centered vector plus `|gamma2|`, scale by
/// `gamma1`, shift by `gamma3`.
pub fn layer_norm(v: &[f64], gamma: [f64; 3]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let denom = norm2(&centered) + gamma[1].abs();
    centered.iter().map(|c| gamma[0] * c / denom + gamma[2]).collect()
}

fn embed_token(label: usize, features: &[f64]) -> Vec<f64> {
    let mut t = Vec::with_capacity(features.len() + 1);
    t.push(label as f64);
    t.extend_from_slice(features);
    t
}

pub(crate) fn forward_cached(
    params: &TransformerParams,
    x: &[f64],
    data: &Dataset,
) -> Result<ForwardCache, TransformerError> {
    if data.is_empty() {
        return Err(TransformerError::EmptyContext);
    }
    if x.len() != params.feature_dim() || data.dim() != params.feature_dim() {
        return Err(TransformerError::DimensionMismatch {
            expected: params.feature_dim(),
            got: data.dim(),
        });
    }
    let dim = params.token_dim();
    let n = data.len();
    let tokens: Vec<Vec<f64>> = data
        .iter()
        .map(|e| embed_token(e.label(), e.features()))
        .collect();
    let test_token = embed_token(0, x);

    let mut attn = Vec::with_capacity(params.heads.len());
    let mut head_mean = Vec::with_capacity(params.heads.len());
    let mut u_prime = vec![0.0; dim];
    for head in &params.heads {
        let query = head.w_q.tr_matvec(&test_token);
        let scores: Vec<f64> = tokens.iter().map(|t| dot(&query, t)).collect();
        let a = softmax(&scores);
        let mut mean = vec![0.0; dim];
        for (j, token) in tokens.iter().enumerate() {
            let w = a[j];
            for (m, &tv) in mean.iter_mut().zip(token) {
                *m += w * tv;
            }
        }
        let value = head.w_v.matvec(&mean);
        for (acc, v) in u_prime.iter_mut().zip(&value) {
            *acc += v;
        }
        attn.push(a);
        head_mean.push(mean);
    }
    debug_assert_eq!(attn.len(), params.heads.len());
    debug_assert!(attn.iter().all(|row| row.len() == n));

    let t_pre_norm: Vec<f64> = test_token.iter().zip(&u_prime).map(|(v, u)| v + u).collect();
    let u = layer_norm(&t_pre_norm, params.gamma);
    let hidden_pre = params.w_r1.matvec(&u);
    let hidden_relu: Vec<f64> = hidden_pre.iter().map(|&h| h.max(0.0)).collect();
    let z_prime = params.w_r2.matvec(&hidden_relu);
    let w_pre_norm: Vec<f64> = u.iter().zip(&z_prime).map(|(a, b)| a + b).collect();
    let z = layer_norm(&w_pre_norm, params.gamma);
    let logits = params.w_o.matvec(&z);
    let probs = softmax(&logits);

    Ok(ForwardCache {
        tokens,
        test_token,
        attn,
        head_mean,
        u_prime,
        t_pre_norm,
        u,
        hidden_pre,
        hidden_relu,
        z_prime,
        w_pre_norm,
        z,
        probs,
    })
}

/// Full forward pass: class probabilities plus the attention trace.
pub fn transformer_forward(
    params: &TransformerParams,
    x: &[f64],
    data: &Dataset,
) -> Result<(ClassDistribution, AttentionTrace), TransformerError> {
    let cache = forward_cached(params, x, data)?;
    let dist = ClassDistribution::new(cache.probs.clone())
        .expect("softmax output is a distribution");
    let trace = AttentionTrace {
        a: cache.attn,
        u_prime: cache.u_prime,
        u: cache.u,
        z_prime: cache.z_prime,
        z: cache.z,
    };
    Ok((dist, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn small_params(rng: &mut Rng) -> TransformerParams {
        TransformerParams::seeded_init(2, 2, 2, 4, rng)
    }

    fn small_data(rng: &mut Rng, n: usize) -> Dataset {
        use crate::priors::{sample_dataset, ConditionalModel, FeatureLaw};
        let law = FeatureLaw::standard_normal(2);
        let model = ConditionalModel::logistic(vec![1.0, -1.0], 0.0);
        sample_dataset(&model, &law, n, rng)
    }

    #[test]
    fn single_sample_attention_is_one() {
        let mut rng = Rng::from_seed(1);
        let params = small_params(&mut rng);
        let data = small_data(&mut rng, 1);
        let (_, trace) = transformer_forward(&params, &[0.3, -0.2], &data).unwrap();
        for row in &trace.a {
            assert_eq!(row.len(), 1);
            assert_eq!(row[0], 1.0);
        }
    }

    #[test]
    fn zero_readout_gives_uniform() {
        let mut rng = Rng::from_seed(2);
        let mut params = small_params(&mut rng);
        params.w_o = Mat::zeros(2, 3);
        let data = small_data(&mut rng, 8);
        let (dist, _) = transformer_forward(&params, &[0.0, 0.0], &data).unwrap();
        assert_eq!(dist.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn empty_context_is_an_error() {
        let mut rng = Rng::from_seed(3);
        let params = small_params(&mut rng);
        let data = Dataset::empty(2, 2);
        assert_eq!(
            transformer_forward(&params, &[0.0, 0.0], &data).unwrap_err(),
            TransformerError::EmptyContext
        );
    }

    #[test]
    fn permutation_leaves_output_invariant() {
        let mut rng = Rng::from_seed(4);
        let params = small_params(&mut rng);
        let data = small_data(&mut rng, 32);
        let x = [0.5, 0.1];
        let (base, _) = transformer_forward(&params, &x, &data).unwrap();
        let mut perm: Vec<usize> = (0..32).collect();
        for _ in 0..5 {
            rng.shuffle(&mut perm);
            let (permuted, _) = transformer_forward(&params, &x, &data.permuted(&perm)).unwrap();
            for (a, b) in base.probs().iter().zip(permuted.probs()) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let mut rng = Rng::from_seed(5);
        let params = small_params(&mut rng);
        let data = small_data(&mut rng, 17);
        let (_, trace) = transformer_forward(&params, &[0.1, 0.2], &data).unwrap();
        for row in &trace.a {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn layer_norm_constant_vector_maps_to_gamma3() {
        let out = layer_norm(&[2.5, 2.5, 2.5], [3.0, 2.0, 0.7]);
        for v in out {
            assert!((v - 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn layer_norm_zero_mean_direct_form() {
        let v = [1.0, -1.0, 2.0, -2.0];
        let out = layer_norm(&v, [1.0, 1.0, 0.0]);
        let norm = norm2(&v);
        for (o, x) in out.iter().zip(&v) {
            assert!((o - x / (norm + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn layer_norm_lipschitz_bound_on_random_pairs() {
        let mut rng = Rng::from_seed(6);
        for _ in 0..2000 {
            let d = 2 + rng.below(6) as usize;
            let a = rng.standard_normal_vector(d);
            let b = rng.standard_normal_vector(d);
            let gamma = [
                4.0 * rng.uniform() - 2.0,
                (0.05 + rng.uniform()) * if rng.uniform() < 0.5 { -1.0 } else { 1.0 },
                rng.uniform(),
            ];
            let diff_in = norm2(&crate::linalg::sub(&a, &b));
            if diff_in == 0.0 {
                continue;
            }
            let diff_out = norm2(&crate::linalg::sub(
                &layer_norm(&a, gamma),
                &layer_norm(&b, gamma),
            ));
            let bound = 4.0 * gamma[0].abs() / gamma[1].abs() * diff_in;
            assert!(diff_out <= bound + 1e-9, "{diff_out} > {bound}");
        }
    }

    #[test]
    fn validate_catches_bad_params() {
        let mut rng = Rng::from_seed(7);
        let mut params = small_params(&mut rng);
        assert!(params.validate().is_ok());
        params.gamma[1] = 0.0;
        assert_eq!(params.validate().unwrap_err(), TransformerError::InvalidGamma);
        params.gamma[1] = 1.0;
        params.w_o.set(0, 0, f64::NAN);
        assert_eq!(params.validate().unwrap_err(), TransformerError::NonFinite);
    }

    #[test]
    fn flatten_roundtrip() {
        let mut rng = Rng::from_seed(8);
        let params = small_params(&mut rng);
        let flat = params.flatten();
        let mut other = TransformerParams::seeded_init(2, 2, 2, 4, &mut rng);
        other.unflatten_into(&flat);
        assert_eq!(params, other);
    }
}
