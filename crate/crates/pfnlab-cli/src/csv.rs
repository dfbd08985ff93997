//! Deterministic CSV artifacts: '.' decimal point, ',' separator, '\n'
//! newlines, floats at 17 significant digits so parsing a written file
//! reproduces every value exactly.

use pfnlab::diagnostics::{
    BiasVarianceReport, LocalityProbeReport, SensitivityEstimate, SymmetryReport, TiltReport,
};
use pfnlab::ppd::OptimalityReport;
use pfnlab::pretrain::TrainingLog;
use std::io;
use std::path::Path;

/// 17 significant digits round-trip any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> io::Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

pub fn bias_variance_csv(path: &Path, report: &BiasVarianceReport) -> io::Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.mean_sq_bias),
                fmt_f64(r.variance),
                fmt_f64(r.mse),
                r.replicates.to_string(),
                r.test_points.to_string(),
                r.seed.to_string(),
            ]
        })
        .collect();
    write_csv(path, "n,mean_sq_bias,variance,mse,replicates,test_points,seed", &rows)
}

pub fn sensitivity_csv(path: &Path, est: &SensitivityEstimate) -> io::Result<()> {
    let rows: Vec<Vec<String>> = est
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.max_change),
                fmt_f64(r.mean_change),
                r.trials.to_string(),
                est.seed.to_string(),
            ]
        })
        .collect();
    write_csv(path, "n,max_change,mean_change,trials,seed", &rows)
}

/// Fit parameters; header-only when the fit is undefined (all-zero
/// changes).
pub fn sensitivity_fit_csv(path: &Path, est: &SensitivityEstimate) -> io::Result<()> {
    let mut rows = Vec::new();
    if let Some(fit) = est.fit {
        rows.push(vec![
            fmt_f64(-fit.slope),
            fmt_f64(fit.intercept.exp()),
            fmt_f64(fit.slope),
            fmt_f64(fit.intercept),
            fmt_f64(fit.r_squared),
        ]);
    }
    write_csv(path, "alpha,prefactor,slope,intercept,r_squared", &rows)
}

pub fn locality_csv(path: &Path, report: &LocalityProbeReport) -> io::Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.mean_epsilon),
                fmt_f64(r.mean_abs_change),
                fmt_f64(r.max_abs_change),
                r.replicates.to_string(),
                report.seed.to_string(),
            ]
        })
        .collect();
    write_csv(path, "n,mean_epsilon,mean_abs_change,max_abs_change,replicates,seed", &rows)
}

pub fn tilt_csv(path: &Path, report: &TiltReport) -> io::Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.median_discrepancy),
                r.discrepancies.len().to_string(),
                report.seed.to_string(),
            ]
        })
        .collect();
    write_csv(path, "n,median_discrepancy,replicates,seed", &rows)
}

pub fn tilt_heads_csv(path: &Path, report: &TiltReport) -> io::Result<()> {
    let mut rows = Vec::new();
    for (h, limit) in report.head_limits.iter().enumerate() {
        for (c, &v) in limit.iter().enumerate() {
            rows.push(vec![h.to_string(), c.to_string(), fmt_f64(v)]);
        }
    }
    for (c, &v) in report.u_prime_limit.iter().enumerate() {
        rows.push(vec!["sum".to_string(), c.to_string(), fmt_f64(v)]);
    }
    write_csv(path, "head,component,value", &rows)
}

pub fn symmetry_csv(path: &Path, report: &SymmetryReport, n: usize) -> io::Result<()> {
    let rows = vec![vec![
        n.to_string(),
        report.replicates.to_string(),
        fmt_f64(report.mean_raw),
        fmt_f64(report.var_raw),
        fmt_f64(report.mean_symmetrized),
        fmt_f64(report.var_symmetrized),
        fmt_f64(report.variance_gap),
        fmt_f64(report.variance_gap_se),
        (report.exact as u8).to_string(),
        report.seed.to_string(),
    ]];
    write_csv(
        path,
        "n,replicates,mean_raw,var_raw,mean_symmetrized,var_symmetrized,variance_gap,variance_gap_se,exact,seed",
        &rows,
    )
}

pub fn ppd_check_csv(path: &Path, report: &OptimalityReport) -> io::Result<()> {
    let mut rows = vec![vec![
        "exact-ppd".to_string(),
        fmt_f64(report.ppd_mean_loglik),
        fmt_f64(0.0),
        fmt_f64(0.0),
        report.draws.to_string(),
    ]];
    for c in &report.challengers {
        rows.push(vec![
            c.name.clone(),
            fmt_f64(c.mean_loglik),
            fmt_f64(c.paired_gap),
            fmt_f64(c.paired_se),
            report.draws.to_string(),
        ]);
    }
    write_csv(path, "challenger,mean_loglik,paired_gap,paired_se,draws", &rows)
}

pub fn training_log_csv(path: &Path, log: &TrainingLog) -> io::Result<()> {
    let mut rows: Vec<Vec<String>> = log
        .rows
        .iter()
        .map(|r| {
            let batch = if r.batch == usize::MAX {
                "epoch-end".to_string()
            } else {
                r.batch.to_string()
            };
            vec![r.epoch.to_string(), batch, fmt_f64(r.loss)]
        })
        .collect();
    rows.push(vec![
        "holdout".to_string(),
        "initial".to_string(),
        fmt_f64(log.initial_holdout_loss),
    ]);
    rows.push(vec!["holdout".to_string(), "final".to_string(), fmt_f64(log.final_holdout_loss)]);
    write_csv(path, "epoch,batch,loss", &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_roundtrip_exactly() {
        let values = [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-300,
            6.02e23,
            -0.0,
            f64::MIN_POSITIVE,
        ];
        for &v in &values {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{v} -> {s} -> {back}");
        }
    }

    #[test]
    fn writes_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, "a,b", &[vec!["1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n");
    }

    #[test]
    fn empty_report_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bv.csv");
        bias_variance_csv(&path, &BiasVarianceReport { rows: vec![] }).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "n,mean_sq_bias,variance,mse,replicates,test_points,seed\n"
        );
    }
}
