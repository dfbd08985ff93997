//! Log-log least-squares rate fitting.

use super::DiagnosticsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log(value)` on `log(n)`. A perfectly
/// constant series fits with slope zero and `r_squared` one (zero
/// residual). Values must be strictly positive.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit, DiagnosticsError> {
    if pairs.len() < 3 {
        return Err(DiagnosticsError::TooFewPairs(pairs.len()));
    }
    for (i, &(n, v)) in pairs.iter().enumerate() {
        if v <= 0.0 || !v.is_finite() {
            return Err(DiagnosticsError::NonPositiveValue { index: i, value: v });
        }
        if n <= 0.0 || !n.is_finite() {
            return Err(DiagnosticsError::NonPositiveValue { index: i, value: n });
        }
    }
    let m = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|&(n, _)| n.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, v)| v.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
    }
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = y_mean - slope * x_mean;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let fit = intercept + slope * x;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn exact_inverse_law_recovers_slope_minus_one() {
        let pairs: Vec<(f64, f64)> =
            [8.0, 16.0, 32.0, 64.0].iter().map(|&n| (n, 3.5 / n)).collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_inverse_law_stays_near_minus_one() {
        let mut rng = Rng::from_seed(42);
        let pairs: Vec<(f64, f64)> = (0..8)
            .map(|i| {
                let n = 2f64.powi(i + 3);
                let noise = 1.0 + 0.05 * (2.0 * rng.uniform() - 1.0);
                (n, 2.0 / n * noise)
            })
            .collect();
        let fit = fit_rate(&pairs).unwrap();
        assert!((-1.15..-0.85).contains(&fit.slope), "slope {}", fit.slope);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let pairs = [(10.0, 0.5), (100.0, 0.5), (1000.0, 0.5)];
        let fit = fit_rate(&pairs).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            fit_rate(&[(1.0, 1.0), (2.0, 1.0)]).unwrap_err(),
            DiagnosticsError::TooFewPairs(2)
        );
        assert!(matches!(
            fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).unwrap_err(),
            DiagnosticsError::NonPositiveValue { index: 1, .. }
        ));
    }
}
