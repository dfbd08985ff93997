//! Minimal SVG line charts from CSV artifacts. Rendering is cosmetic;
//! every analysis reads the CSVs, never the images.

use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("column '{0}' not found in CSV header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse '{value}' as a number")]
    BadNumber { row: usize, value: String },
    #[error("need at least one data row")]
    Empty,
    #[error("log scale requires positive values (found {0})")]
    NonPositive(f64),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub fn read_series(
    csv_path: &Path,
    x_col: &str,
    y_cols: &[String],
) -> Result<Vec<Series>, PlotError> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|source| PlotError::Read { path: csv_path.display().to_string(), source })?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or(PlotError::Empty)?.split(',').collect();
    let col_index = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| PlotError::MissingColumn(name.to_string()))
    };
    let xi = col_index(x_col)?;
    let yis: Vec<usize> = y_cols.iter().map(|c| col_index(c)).collect::<Result<_, _>>()?;

    let mut series: Vec<Series> = y_cols
        .iter()
        .map(|c| Series { name: c.clone(), points: Vec::new() })
        .collect();
    for (r, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64, PlotError> {
            fields
                .get(i)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| PlotError::BadNumber {
                    row: r + 2,
                    value: fields.get(i).unwrap_or(&"<missing>").to_string(),
                })
        };
        let x = parse(xi)?;
        for (s, &yi) in series.iter_mut().zip(&yis) {
            s.points.push((x, parse(yi)?));
        }
    }
    if series.iter().any(|s| s.points.is_empty()) {
        return Err(PlotError::Empty);
    }
    Ok(series)
}

const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Renders the series as polylines; log-log rescales both axes.
pub fn render_svg(series: &[Series], log_log: bool, title: &str) -> Result<String, PlotError> {
    let (width, height, margin) = (640.0, 440.0, 60.0);
    let transform = |v: f64| -> Result<f64, PlotError> {
        if log_log {
            if v <= 0.0 {
                return Err(PlotError::NonPositive(v));
            }
            Ok(v.ln())
        } else {
            Ok(v)
        }
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(transform(x)?);
            ys.push(transform(y)?);
        }
    }
    let (x_min, x_max) = bounds(&xs);
    let (y_min, y_max) = bounds(&ys);
    let sx = |x: f64| margin + (x - x_min) / (x_max - x_min).max(1e-300) * (width - 2.0 * margin);
    let sy =
        |y: f64| height - margin - (y - y_min) / (y_max - y_min).max(1e-300) * (height - 2.0 * margin);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    let _ = write!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n");
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        width / 2.0,
        title
    );
    // axes
    let _ = write!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = margin,
        b = height - margin,
        r = width - margin,
        t = margin
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut path = String::new();
        let mut sorted = s.points.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (j, &(x, y)) in sorted.iter().enumerate() {
            let (px, py) = (sx(transform(x)?), sy(transform(y)?));
            let _ = write!(path, "{}{px:.2},{py:.2}", if j == 0 { "" } else { " " });
            let _ = write!(
                svg,
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"{color}\"/>\n"
            );
        }
        let _ = write!(
            svg,
            "<polyline points=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        );
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            width - margin + 6.0,
            margin + 16.0 * i as f64,
            s.name
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        (min - 0.5, max + 0.5)
    } else {
        (min, max)
    }
}

pub fn plot_csv(
    csv_path: &Path,
    x_col: &str,
    y_cols: &[String],
    out_path: &Path,
    log_log: bool,
) -> Result<(), PlotError> {
    let series = read_series(csv_path, x_col, y_cols)?;
    let title = csv_path.file_name().map(|f| f.to_string_lossy().to_string()).unwrap_or_default();
    let svg = render_svg(&series, log_log, &title)?;
    std::fs::write(out_path, svg)
        .map_err(|source| PlotError::Write { path: out_path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polyline_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        std::fs::write(&csv, "n,v\n2,4.0\n4,2.0\n8,1.0\n").unwrap();
        let out = dir.path().join("d.svg");
        plot_csv(&csv, "n", &["v".to_string()], &out, true).unwrap();
        let svg = std::fs::read_to_string(&out).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn log_scale_rejects_nonpositive() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        std::fs::write(&csv, "n,v\n2,0.0\n4,2.0\n").unwrap();
        let out = dir.path().join("d.svg");
        assert!(matches!(
            plot_csv(&csv, "n", &["v".to_string()], &out, true).unwrap_err(),
            PlotError::NonPositive(_)
        ));
    }

    #[test]
    fn missing_column_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        std::fs::write(&csv, "n,v\n2,1.0\n").unwrap();
        let out = dir.path().join("d.svg");
        assert!(matches!(
            plot_csv(&csv, "n", &["zzz".to_string()], &out, false).unwrap_err(),
            PlotError::MissingColumn(_)
        ));
    }
}
