//! Flat sectioned key-value experiment configs.
//!
//! Format: `[section]` headers followed by `key = value` lines; `#`
//! starts a comment; blank lines ignored. Values are plain tokens,
//! comma-separated lists, or model specs like `sine 1.0 0.0 1,1,1,1,1`.
//! Parse errors always carry the line or `section.key` they refer to.

use pfnlab::predictors::{BandwidthScaling, LocalizerConfig};
use pfnlab::priors::{ConditionalModel, FeatureLaw, FinitePrior, SizePrior};
use std::collections::BTreeMap;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("missing required key {0}")]
    Missing(String),
    #[error("invalid prior: {0}")]
    Prior(#[from] pfnlab::priors::PriorError),
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.to_string(), message: message.into() }
}

/// Raw parsed file: section -> key -> (value, line number).
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: line_no,
                    message: "section header must end with ']'".into(),
                })?;
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: "expected 'key = value'".into(),
            })?;
            if current.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: "key outside of any [section]".into(),
                });
            }
            let prev = sections
                .get_mut(&current)
                .unwrap()
                .insert(key.trim().to_string(), (value.trim().to_string(), line_no));
            if prev.is_some() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("duplicate key '{}' in [{}]", key.trim(), current),
                });
            }
        }
        Ok(RawConfig { sections })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|(v, _)| v.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.get(section, key).ok_or_else(|| ConfigError::Missing(format!("{section}.{key}")))
    }

    fn parse_val<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T, ConfigError> {
        let v = self.require(section, key)?;
        v.parse().map_err(|_| {
            field_err(&format!("{section}.{key}"), format!("cannot parse '{v}'"))
        })
    }

    fn parse_or<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
        default: T,
    ) -> Result<T, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                field_err(&format!("{section}.{key}"), format!("cannot parse '{v}'"))
            }),
        }
    }
}

fn parse_f64_list(field: &str, text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| field_err(field, format!("cannot parse '{}' as a number", t.trim())))
        })
        .collect()
}

fn parse_usize_list(field: &str, text: &str) -> Result<Vec<usize>, ConfigError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| field_err(field, format!("cannot parse '{}' as an integer", t.trim())))
        })
        .collect()
}

/// Parses a model spec: `bernoulli P` | `logistic OFFSET W1,...`
/// | `sine AMPLITUDE PHASE W1,...`.
pub fn parse_model(field: &str, text: &str) -> Result<ConditionalModel, ConfigError> {
    let mut parts = text.split_whitespace();
    let kind = parts.next().ok_or_else(|| field_err(field, "empty model spec"))?;
    let rest: Vec<&str> = parts.collect();
    match kind {
        "bernoulli" => {
            if rest.len() != 1 {
                return Err(field_err(field, "bernoulli takes one probability"));
            }
            let p = rest[0]
                .parse()
                .map_err(|_| field_err(field, format!("bad probability '{}'", rest[0])))?;
            Ok(ConditionalModel::constant_bernoulli(p)?)
        }
        "logistic" => {
            if rest.len() != 2 {
                return Err(field_err(field, "logistic takes OFFSET and W1,...,Wd"));
            }
            let offset = rest[0]
                .parse()
                .map_err(|_| field_err(field, format!("bad offset '{}'", rest[0])))?;
            let weights = parse_f64_list(field, rest[1])?;
            Ok(ConditionalModel::logistic(weights, offset))
        }
        "sine" => {
            if rest.len() != 3 {
                return Err(field_err(field, "sine takes AMPLITUDE PHASE W1,...,Wd"));
            }
            let amplitude = rest[0]
                .parse()
                .map_err(|_| field_err(field, format!("bad amplitude '{}'", rest[0])))?;
            let phase = rest[1]
                .parse()
                .map_err(|_| field_err(field, format!("bad phase '{}'", rest[1])))?;
            let frequency = parse_f64_list(field, rest[2])?;
            Ok(ConditionalModel::sine_task(amplitude, frequency, phase)?)
        }
        other => Err(field_err(field, format!("unknown model kind '{other}'"))),
    }
}

fn parse_feature_law(raw: &RawConfig, section: &str) -> Result<FeatureLaw, ConfigError> {
    let kind = raw.parse_or::<String>(section, "feature_law", "normal".to_string())?;
    match kind.as_str() {
        "normal" => {
            let d: usize = raw.parse_val(section, "d")?;
            if d == 0 {
                return Err(field_err(&format!("{section}.d"), "dimension must be positive"));
            }
            Ok(FeatureLaw::standard_normal(d))
        }
        "box" => {
            let lower =
                parse_f64_list(&format!("{section}.box_lower"), raw.require(section, "box_lower")?)?;
            let upper =
                parse_f64_list(&format!("{section}.box_upper"), raw.require(section, "box_upper")?)?;
            Ok(FeatureLaw::uniform_box(lower, upper)?)
        }
        other => Err(field_err(
            &format!("{section}.feature_law"),
            format!("unknown feature law '{other}'"),
        )),
    }
}

/// Prior over tasks: shared feature law plus weighted models.
pub fn parse_prior(raw: &RawConfig) -> Result<FinitePrior, ConfigError> {
    let law = parse_feature_law(raw, "prior")?;
    let count: usize = raw.parse_val("prior", "models")?;
    if count == 0 {
        return Err(field_err("prior.models", "need at least one model"));
    }
    let mut models = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for k in 0..count {
        let field = format!("prior.model.{k}");
        models.push(parse_model(&field, raw.require("prior", &format!("model.{k}"))?)?);
        weights.push(raw.parse_or("prior", &format!("weight.{k}"), 1.0)?);
    }
    Ok(FinitePrior::new(models, weights, law)?)
}

/// A single data-generating task: model plus feature law.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub model: ConditionalModel,
    pub feature_law: FeatureLaw,
}

pub fn parse_task(raw: &RawConfig) -> Result<TaskSpec, ConfigError> {
    let feature_law = parse_feature_law(raw, "task")?;
    let model = parse_model("task.model", raw.require("task", "model")?)?;
    if let Some(md) = model.dim() {
        if md != feature_law.dim() {
            return Err(field_err(
                "task.model",
                format!("model dimension {md} != feature law dimension {}", feature_law.dim()),
            ));
        }
    }
    Ok(TaskSpec { model, feature_law })
}

pub fn parse_size_prior(raw: &RawConfig) -> Result<SizePrior, ConfigError> {
    let n_min: usize = raw.parse_or("size_prior", "n_min", 1)?;
    let n_max: usize = raw.parse_or("size_prior", "n_max", 128)?;
    Ok(SizePrior::uniform(n_min, n_max)?)
}

/// Which predictor the experiment evaluates.
#[derive(Debug, Clone)]
pub enum PredictorSpec {
    Window { bandwidth: f64, scaling: BandwidthScaling },
    WindowFile { path: PathBuf },
    Ensemble { splits: Vec<Vec<f64>> },
    EnsembleFile { path: PathBuf },
    TransformerFile { path: PathBuf },
    Constant { p1: f64 },
    FirstLabel,
    Ppd,
}

#[derive(Debug, Clone)]
pub struct PredictorConfig {
    pub spec: PredictorSpec,
    pub localize: bool,
    pub localizer: LocalizerConfig,
}

pub fn parse_predictor(raw: &RawConfig) -> Result<PredictorConfig, ConfigError> {
    let kind = raw.require("predictor", "kind")?;
    let spec = match kind {
        "window" => {
            if let Some(path) = raw.get("predictor", "params_file") {
                PredictorSpec::WindowFile { path: PathBuf::from(path) }
            } else {
                let bandwidth: f64 = raw.parse_val("predictor", "bandwidth")?;
                if bandwidth <= 0.0 {
                    return Err(field_err("predictor.bandwidth", "must be positive"));
                }
                let scaling = if raw.parse_or("predictor", "scaled", false)? {
                    BandwidthScaling::Scaled
                } else {
                    BandwidthScaling::Fixed
                };
                PredictorSpec::Window { bandwidth, scaling }
            }
        }
        "ensemble" => {
            if let Some(path) = raw.get("predictor", "params_file") {
                PredictorSpec::EnsembleFile { path: PathBuf::from(path) }
            } else {
                let members: usize = raw.parse_val("predictor", "members")?;
                let mut splits = Vec::with_capacity(members);
                for k in 0..members {
                    let field = format!("predictor.splits.{k}");
                    splits.push(parse_f64_list(&field, raw.require("predictor", &format!("splits.{k}"))?)?);
                }
                PredictorSpec::Ensemble { splits }
            }
        }
        "transformer" => PredictorSpec::TransformerFile {
            path: PathBuf::from(raw.require("predictor", "params_file")?),
        },
        "constant" => PredictorSpec::Constant { p1: raw.parse_or("predictor", "p1", 0.5)? },
        "first-label" => PredictorSpec::FirstLabel,
        "ppd" => PredictorSpec::Ppd,
        other => {
            return Err(field_err("predictor.kind", format!("unknown predictor '{other}'")))
        }
    };
    let localize = raw.parse_or("predictor", "localize", false)?;
    let cap = raw.parse_or("predictor", "localize_cap", 500usize)?;
    if cap == 0 {
        return Err(field_err("predictor.localize_cap", "must be at least 1"));
    }
    Ok(PredictorConfig { spec, localize, localizer: LocalizerConfig::new(cap) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Pretrain,
    BiasVariance,
    Probe(ProbeKind),
    PpdCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Sensitivity,
    Locality,
    Tilt,
    Symmetry,
}

impl ProbeKind {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        match text {
            "sensitivity" => Ok(ProbeKind::Sensitivity),
            "locality" => Ok(ProbeKind::Locality),
            "tilt" => Ok(ProbeKind::Tilt),
            "symmetry" => Ok(ProbeKind::Symmetry),
            other => Err(field_err("probe.kind", format!("unknown probe kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PretrainSpec {
    pub family: String,
    pub m: usize,
    pub holdout: usize,
    pub out_name: String,
    // window
    pub window_scaling: BandwidthScaling,
    pub window_bracket: (f64, f64),
    pub window_scan_points: usize,
    pub window_iterations: usize,
    // ensemble
    pub members: usize,
    pub splits: usize,
    pub sweeps: usize,
    pub grid_points: usize,
    pub range: (f64, f64),
    pub shrink: f64,
    // transformer
    pub heads: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
}

pub fn parse_pretrain(raw: &RawConfig) -> Result<PretrainSpec, ConfigError> {
    let family: String = raw.parse_val("pretrain", "family")?;
    if !matches!(family.as_str(), "window" | "ensemble" | "transformer") {
        return Err(field_err("pretrain.family", format!("unknown family '{family}'")));
    }
    let m = raw.parse_or("pretrain", "m", 4096usize)?;
    if m == 0 {
        return Err(field_err("pretrain.m", "must be at least 1"));
    }
    let lr = raw.parse_or("pretrain", "lr", 0.2f64)?;
    if lr <= 0.0 {
        return Err(field_err("pretrain.lr", "learning rate must be positive"));
    }
    let bracket_lo = raw.parse_or("pretrain", "window_bracket_lo", 0.01f64)?;
    let bracket_hi = raw.parse_or("pretrain", "window_bracket_hi", 100.0f64)?;
    if bracket_lo <= 0.0 || bracket_hi <= bracket_lo {
        return Err(field_err("pretrain.window_bracket_lo", "need 0 < lo < hi"));
    }
    Ok(PretrainSpec {
        out_name: raw.parse_or("pretrain", "out_name", format!("{family}.params"))?,
        family,
        m,
        holdout: raw.parse_or("pretrain", "holdout", (m / 4).max(1))?,
        window_scaling: if raw.parse_or("pretrain", "window_scaled", false)? {
            BandwidthScaling::Scaled
        } else {
            BandwidthScaling::Fixed
        },
        window_bracket: (bracket_lo.ln(), bracket_hi.ln()),
        window_scan_points: raw.parse_or("pretrain", "window_scan_points", 33usize)?,
        window_iterations: raw.parse_or("pretrain", "window_iterations", 40usize)?,
        members: raw.parse_or("pretrain", "members", 4usize)?,
        splits: raw.parse_or("pretrain", "splits", 2usize)?,
        sweeps: raw.parse_or("pretrain", "sweeps", 3usize)?,
        grid_points: raw.parse_or("pretrain", "grid_points", 9usize)?,
        range: (
            raw.parse_or("pretrain", "range_lo", -3.0f64)?,
            raw.parse_or("pretrain", "range_hi", 3.0f64)?,
        ),
        shrink: raw.parse_or("pretrain", "shrink", 0.5f64)?,
        heads: raw.parse_or("pretrain", "heads", 2usize)?,
        hidden: raw.parse_or("pretrain", "hidden", 16usize)?,
        epochs: raw.parse_or("pretrain", "epochs", 5usize)?,
        batch: raw.parse_or("pretrain", "batch", 32usize)?,
        lr,
    })
}

#[derive(Debug, Clone)]
pub struct BiasVarianceSpec {
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub test_points: usize,
}

pub fn parse_bias_variance(raw: &RawConfig) -> Result<BiasVarianceSpec, ConfigError> {
    let n_grid =
        parse_usize_list("bias_variance.n_grid", raw.require("bias_variance", "n_grid")?)?;
    if n_grid.is_empty() || n_grid.iter().any(|&n| n == 0) {
        return Err(field_err("bias_variance.n_grid", "need positive sizes"));
    }
    let replicates = raw.parse_or("bias_variance", "replicates", 500usize)?;
    if replicates < 2 {
        return Err(field_err("bias_variance.replicates", "need at least 2 replicates"));
    }
    Ok(BiasVarianceSpec {
        n_grid,
        replicates,
        test_points: raw.parse_or("bias_variance", "test_points", 100usize)?,
    })
}

#[derive(Debug, Clone)]
pub struct ProbeSpec {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub replicates: usize,
    pub epsilon: EpsilonSpec,
    pub tilde_model: Option<ConditionalModel>,
    pub mc_samples: usize,
    pub permutation_samples: usize,
    pub symmetry_n: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum EpsilonSpec {
    Knn,
    Fixed(f64),
}

pub fn parse_probe(raw: &RawConfig) -> Result<ProbeSpec, ConfigError> {
    let n_grid = match raw.get("probe", "n_grid") {
        Some(v) => parse_usize_list("probe.n_grid", v)?,
        None => vec![64, 128, 256, 512, 1024],
    };
    let epsilon = match raw.get("probe", "epsilon") {
        None | Some("knn") => EpsilonSpec::Knn,
        Some(v) => {
            let e: f64 = v
                .parse()
                .map_err(|_| field_err("probe.epsilon", format!("cannot parse '{v}'")))?;
            if e <= 0.0 {
                return Err(field_err("probe.epsilon", "must be positive"));
            }
            EpsilonSpec::Fixed(e)
        }
    };
    let tilde_model = match raw.get("probe", "tilde_model") {
        Some(v) => Some(parse_model("probe.tilde_model", v)?),
        None => None,
    };
    Ok(ProbeSpec {
        n_grid,
        trials: raw.parse_or("probe", "trials", 50usize)?,
        replicates: raw.parse_or("probe", "replicates", 50usize)?,
        epsilon,
        tilde_model,
        mc_samples: raw.parse_or("probe", "mc_samples", 100_000usize)?,
        permutation_samples: raw.parse_or("probe", "permutation_samples", 120usize)?,
        symmetry_n: raw.parse_or("probe", "n", 6usize)?,
    })
}

#[derive(Debug, Clone)]
pub struct PpdCheckSpec {
    pub draws: usize,
    pub mix_levels: Vec<f64>,
}

pub fn parse_ppd_check(raw: &RawConfig) -> Result<PpdCheckSpec, ConfigError> {
    let mix_levels = match raw.get("ppd_check", "mix_levels") {
        Some(v) => parse_f64_list("ppd_check.mix_levels", v)?,
        None => vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75],
    };
    for &m in &mix_levels {
        if !(0.0..=1.0).contains(&m) {
            return Err(field_err("ppd_check.mix_levels", "levels must be in [0, 1]"));
        }
    }
    Ok(PpdCheckSpec { draws: raw.parse_or("ppd_check", "draws", 2000usize)?, mix_levels })
}

/// Fully parsed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub raw: RawConfig,
}

pub fn parse_experiment(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = RawConfig::parse(text)?;
    let kind_text = raw.require("experiment", "kind")?;
    let kind = match kind_text {
        "pretrain" => ExperimentKind::Pretrain,
        "bias-variance" => ExperimentKind::BiasVariance,
        "ppd-check" => ExperimentKind::PpdCheck,
        "probe" => {
            ExperimentKind::Probe(ProbeKind::parse(raw.require("probe", "kind")?)?)
        }
        other => {
            return Err(field_err("experiment.kind", format!("unknown experiment '{other}'")))
        }
    };
    // wall-clock seeding is forbidden: the seed must be in the config
    let seed: u64 = raw.parse_val("experiment", "seed")?;
    let out_dir = PathBuf::from(raw.parse_or("experiment", "out", "runs/out".to_string())?);
    Ok(ExperimentConfig {
        kind,
        seed,
        out_dir,
        workers: raw.parse_or("experiment", "workers", 0usize)?,
        raw,
    })
}
