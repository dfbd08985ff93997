//! Experiment dispatch: builds inputs from the parsed config, runs the
//! requested pipeline inside a bounded worker pool, and writes CSV
//! artifacts plus a manifest.

use crate::config::{
    self, ConfigError, EpsilonSpec, ExperimentConfig, ExperimentKind, PredictorConfig,
    PredictorSpec, ProbeKind,
};
use crate::csv;
use crate::manifest::RunManifest;
use pfnlab::container::{
    self, decode_ensemble, decode_transformer, decode_window, Container, ContainerError,
};
use pfnlab::data::ClassDistribution;
use pfnlab::diagnostics::{
    bias_variance, locality_probe, sensitivity_probe, symmetrize_check, tilt_limit, EpsilonRule,
    FirstLabelPredictor,
};
use pfnlab::ppd::{ppd_optimality_check, PpdPredictor};
use pfnlab::predictors::{
    ConstantPredictor, EnsembleParams, Localized, Predictor, TreeParams,
    UniformMix, WindowSmootherParams,
};
use pfnlab::pretrain::{
    generate_mc_samples, pretrain_ensemble, pretrain_transformer, pretrain_window,
    EnsemblePretrainConfig, PretrainError, TransformerPretrainConfig, WindowPretrainConfig,
};
use pfnlab::priors::ConditionalModel;
use pfnlab::rng::SeedSpec;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("parameter file error: {0}")]
    Container(#[from] ContainerError),
    #[error("pretraining failed: {0}")]
    Pretrain(#[from] PretrainError),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

/// Materializes the configured predictor, loading parameter containers
/// where referenced.
pub fn build_predictor(cfg: &PredictorConfig, raw: &config::RawConfig) -> Result<Box<dyn Predictor>, RunError> {
    let inner: Box<dyn Predictor> = match &cfg.spec {
        PredictorSpec::Window { bandwidth, scaling } => {
            Box::new(WindowSmootherParams { bandwidth: *bandwidth, scaling: *scaling })
        }
        PredictorSpec::WindowFile { path } => Box::new(decode_window(&Container::load(path)?)?),
        PredictorSpec::Ensemble { splits } => Box::new(EnsembleParams::new(
            splits.iter().map(|s| TreeParams::new(s.clone())).collect(),
        )),
        PredictorSpec::EnsembleFile { path } => {
            Box::new(decode_ensemble(&Container::load(path)?)?)
        }
        PredictorSpec::TransformerFile { path } => {
            Box::new(decode_transformer(&Container::load(path)?)?)
        }
        PredictorSpec::Constant { p1 } => Box::new(ConstantPredictor::new(
            ClassDistribution::binary(*p1).expect("validated probability"),
        )),
        PredictorSpec::FirstLabel => Box::new(FirstLabelPredictor),
        PredictorSpec::Ppd => Box::new(PpdPredictor::new(config::parse_prior(raw)?)),
    };
    Ok(if cfg.localize {
        Box::new(Localized::new(BoxedPredictor(inner), cfg.localizer))
    } else {
        inner
    })
}

/// Adapter so a boxed predictor can sit inside wrapper predictors.
pub struct BoxedPredictor(pub Box<dyn Predictor>);

impl Predictor for BoxedPredictor {
    fn predict(&self, x: &[f64], data: &pfnlab::data::Dataset) -> ClassDistribution {
        self.0.predict(x, data)
    }

    fn name(&self) -> String {
        self.0.name()
    }
}

/// Runs the configured experiment and writes its artifacts, returning
/// the manifest (already written to the output directory).
pub fn run_experiment(cfg: &ExperimentConfig, config_bytes: &[u8]) -> Result<RunManifest, RunError> {
    let start = std::time::Instant::now();
    std::fs::create_dir_all(&cfg.out_dir).map_err(io_at(&cfg.out_dir))?;
    let mut manifest = RunManifest::new(config_bytes);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()?;
    let result = pool.install(|| dispatch(cfg, &mut manifest));
    if let Err(e) = result {
        // flag partial artifacts before surfacing the failure
        manifest.partial = true;
        manifest.duration_ms = start.elapsed().as_millis();
        let _ = manifest.write(&cfg.out_dir);
        return Err(e);
    }
    manifest.duration_ms = start.elapsed().as_millis();
    manifest.write(&cfg.out_dir).map_err(io_at(&cfg.out_dir))?;
    Ok(manifest)
}

fn dispatch(cfg: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    match cfg.kind {
        ExperimentKind::Pretrain => run_pretrain(cfg, manifest),
        ExperimentKind::BiasVariance => run_bias_variance(cfg, manifest),
        ExperimentKind::Probe(kind) => run_probe(cfg, kind, manifest),
        ExperimentKind::PpdCheck => run_ppd_check(cfg, manifest),
    }
}

fn record(manifest: &mut RunManifest, dir: &Path, name: &str) -> Result<(), RunError> {
    manifest.record(dir, name).map_err(io_at(dir))
}

fn run_pretrain(cfg: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    let prior = config::parse_prior(&cfg.raw)?;
    let size_prior = config::parse_size_prior(&cfg.raw)?;
    let spec = config::parse_pretrain(&cfg.raw)?;
    let seed = SeedSpec::new(cfg.seed, 0);
    let samples = generate_mc_samples(&prior, &size_prior, spec.m, seed.child(1));
    let holdout = generate_mc_samples(&prior, &size_prior, spec.holdout, seed.child(2));

    let (params_container, log) = match spec.family.as_str() {
        "window" => {
            let wc = WindowPretrainConfig {
                scaling: spec.window_scaling,
                log_bracket: spec.window_bracket,
                scan_points: spec.window_scan_points,
                iterations: spec.window_iterations,
            };
            let (fitted, log) = pretrain_window(&samples, &holdout, &wc)?;
            (container::encode_window(&fitted), log)
        }
        "ensemble" => {
            let ec = EnsemblePretrainConfig {
                members: spec.members,
                splits: spec.splits,
                sweeps: spec.sweeps,
                grid_points: spec.grid_points,
                range: spec.range,
                shrink: spec.shrink,
            };
            let (fitted, log) = pretrain_ensemble(&samples, &holdout, &ec, seed.child(3))?;
            (container::encode_ensemble(&fitted), log)
        }
        _ => {
            let tc = TransformerPretrainConfig {
                heads: spec.heads,
                hidden: spec.hidden,
                epochs: spec.epochs,
                batch_size: spec.batch,
                learning_rate: spec.lr,
            };
            let (fitted, log) =
                pretrain_transformer(&prior, &samples, &holdout, &tc, seed.child(3))?;
            (container::encode_transformer(&fitted), log)
        }
    };

    let params_path = cfg.out_dir.join(&spec.out_name);
    params_container.save(&params_path)?;
    record(manifest, &cfg.out_dir, &spec.out_name)?;
    let log_path = cfg.out_dir.join("training_log.csv");
    csv::training_log_csv(&log_path, &log).map_err(io_at(&log_path))?;
    record(manifest, &cfg.out_dir, "training_log.csv")?;
    Ok(())
}

fn run_bias_variance(cfg: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    let task = config::parse_task(&cfg.raw)?;
    let spec = config::parse_bias_variance(&cfg.raw)?;
    let predictor = build_predictor(&config::parse_predictor(&cfg.raw)?, &cfg.raw)?;
    let report = bias_variance(
        predictor.as_ref(),
        &task.model,
        &task.feature_law,
        &spec.n_grid,
        spec.replicates,
        spec.test_points,
        SeedSpec::new(cfg.seed, 0),
    );
    let path = cfg.out_dir.join("bias_variance.csv");
    csv::bias_variance_csv(&path, &report).map_err(io_at(&path))?;
    record(manifest, &cfg.out_dir, "bias_variance.csv")?;
    Ok(())
}

fn run_probe(
    cfg: &ExperimentConfig,
    kind: ProbeKind,
    manifest: &mut RunManifest,
) -> Result<(), RunError> {
    let task = config::parse_task(&cfg.raw)?;
    let spec = config::parse_probe(&cfg.raw)?;
    let predictor_cfg = config::parse_predictor(&cfg.raw)?;
    let predictor = build_predictor(&predictor_cfg, &cfg.raw)?;
    let seed = SeedSpec::new(cfg.seed, 0);
    match kind {
        ProbeKind::Sensitivity => {
            let est = sensitivity_probe(
                predictor.as_ref(),
                &task.model,
                &task.feature_law,
                &spec.n_grid,
                spec.trials,
                seed,
            );
            let path = cfg.out_dir.join("sensitivity.csv");
            csv::sensitivity_csv(&path, &est).map_err(io_at(&path))?;
            record(manifest, &cfg.out_dir, "sensitivity.csv")?;
            let fit_path = cfg.out_dir.join("sensitivity_fit.csv");
            csv::sensitivity_fit_csv(&fit_path, &est).map_err(io_at(&fit_path))?;
            record(manifest, &cfg.out_dir, "sensitivity_fit.csv")?;
        }
        ProbeKind::Locality => {
            let tilde = spec
                .tilde_model
                .clone()
                .unwrap_or(ConditionalModel::ConstantBernoulli { p1: 0.5 });
            let rule = match spec.epsilon {
                EpsilonSpec::Knn => EpsilonRule::KthNeighborRadius(predictor_cfg.localizer),
                EpsilonSpec::Fixed(e) => EpsilonRule::Fixed(e),
            };
            let report = locality_probe(
                predictor.as_ref(),
                &task.model,
                &tilde,
                &task.feature_law,
                &spec.n_grid,
                rule,
                spec.replicates,
                seed,
            );
            let path = cfg.out_dir.join("locality.csv");
            csv::locality_csv(&path, &report).map_err(io_at(&path))?;
            record(manifest, &cfg.out_dir, "locality.csv")?;
        }
        ProbeKind::Tilt => {
            let params_path = cfg.raw.require("predictor", "params_file")?;
            let params = decode_transformer(&Container::load(Path::new(params_path))?)?;
            let mut test_rng = seed.child(999).rng();
            let x = task.feature_law.sample(&mut test_rng);
            let report = tilt_limit(
                &params,
                &x,
                &task.model,
                &task.feature_law,
                spec.mc_samples,
                &spec.n_grid,
                spec.replicates,
                seed,
            );
            let path = cfg.out_dir.join("tilt.csv");
            csv::tilt_csv(&path, &report).map_err(io_at(&path))?;
            record(manifest, &cfg.out_dir, "tilt.csv")?;
            let heads_path = cfg.out_dir.join("tilt_heads.csv");
            csv::tilt_heads_csv(&heads_path, &report).map_err(io_at(&heads_path))?;
            record(manifest, &cfg.out_dir, "tilt_heads.csv")?;
        }
        ProbeKind::Symmetry => {
            let report = symmetrize_check(
                predictor.as_ref(),
                &task.model,
                &task.feature_law,
                spec.symmetry_n,
                spec.replicates,
                spec.permutation_samples,
                seed,
            );
            let path = cfg.out_dir.join("symmetry.csv");
            csv::symmetry_csv(&path, &report, spec.symmetry_n).map_err(io_at(&path))?;
            record(manifest, &cfg.out_dir, "symmetry.csv")?;
        }
    }
    Ok(())
}

fn run_ppd_check(cfg: &ExperimentConfig, manifest: &mut RunManifest) -> Result<(), RunError> {
    let prior = config::parse_prior(&cfg.raw)?;
    let size_prior = config::parse_size_prior(&cfg.raw)?;
    let spec = config::parse_ppd_check(&cfg.raw)?;
    let uniform = ConstantPredictor::uniform(2);
    let mixes: Vec<UniformMix<PpdPredictor>> = spec
        .mix_levels
        .iter()
        .map(|&eps| UniformMix::new(PpdPredictor::new(prior.clone()), eps))
        .collect();
    let mut challengers: Vec<&dyn Predictor> = vec![&uniform];
    for m in &mixes {
        challengers.push(m);
    }
    let report = ppd_optimality_check(
        &prior,
        &size_prior,
        &challengers,
        spec.draws,
        SeedSpec::new(cfg.seed, 0),
    );
    let path = cfg.out_dir.join("ppd_check.csv");
    csv::ppd_check_csv(&path, &report).map_err(io_at(&path))?;
    record(manifest, &cfg.out_dir, "ppd_check.csv")?;
    Ok(())
}
