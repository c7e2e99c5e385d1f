//! Run configuration: built-in defaults, overridden by an optional JSON
//! config file, overridden by explicit command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use chainwatch_core::error::{Error, Result};
use chainwatch_core::model::{DaeLossScope, ModelConfig, TrainConfig};
use chainwatch_core::threshold::ThresholdSearchConfig;

/// Fully resolved settings shared by the subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub search: ThresholdSearchConfig,
    pub model: ModelConfig,
    /// Train share of the train/test split.
    pub split_ratio: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: TrainConfig::default(),
            search: ThresholdSearchConfig::default(),
            model: ModelConfig::default(),
            split_ratio: 0.8,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.search.validate()?;
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::domain(format!(
                "split ratio must be in (0, 1), got {}",
                self.split_ratio
            )));
        }
        Ok(())
    }
}

/// Optional config-file fields; anything absent falls back to the defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    alpha: Option<f64>,
    learning_rate: Option<f64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    seed: Option<u64>,
    validation_fraction: Option<f64>,
    dae_loss_scope: Option<DaeLossScope>,
    beta: Option<f64>,
    zeta: Option<f64>,
    decay_rate: Option<f64>,
    decay_times: Option<usize>,
    patience: Option<usize>,
    lambda: Option<f64>,
    gamma: Option<f64>,
    encoder_dims: Option<Vec<usize>>,
    classifier_dims: Option<Vec<usize>>,
    split_ratio: Option<f64>,
}

/// Configuration flags accepted by every training-adjacent subcommand.
/// Precedence: flags over config file over defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON config file with the same keys as the flags below.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed driving initialization, shuffling, splits and synthesis.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Weight of the reconstruction loss in the combined objective.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Adam learning rate.
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,

    #[arg(long)]
    pub epochs: Option<usize>,

    #[arg(long)]
    pub batch_size: Option<usize>,

    /// Share of training data carved off for validation.
    #[arg(long)]
    pub validation_fraction: Option<f64>,

    /// Which samples feed the reconstruction loss: normal-only or all.
    #[arg(long, value_parser = parse_scope)]
    pub dae_loss_scope: Option<DaeLossScope>,

    /// Weight of the reconstruction error in the anomaly score.
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Weight of the classifier probability in the anomaly score.
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Percentile of normal reconstruction errors seeding the search.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Initial threshold-search step size.
    #[arg(long)]
    pub zeta: Option<f64>,

    #[arg(long)]
    pub decay_rate: Option<f64>,

    #[arg(long)]
    pub decay_times: Option<usize>,

    /// Consecutive non-improvements tolerated per search pass.
    #[arg(long)]
    pub patience: Option<usize>,

    /// Train share of the train/test split.
    #[arg(long)]
    pub split_ratio: Option<f64>,

    /// Encoder widths, comma separated (last is the bottleneck).
    #[arg(long, value_parser = parse_dims)]
    pub encoder_dims: Option<Dims>,

    /// Classifier hidden widths, comma separated.
    #[arg(long, value_parser = parse_dims)]
    pub classifier_dims: Option<Dims>,
}

/// Comma-separated layer widths.
#[derive(Debug, Clone, PartialEq)]
pub struct Dims(pub Vec<usize>);

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let dims = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("invalid width '{p}'")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err("widths must be positive".to_owned());
    }
    Ok(Dims(dims))
}

fn parse_scope(s: &str) -> std::result::Result<DaeLossScope, String> {
    match s {
        "normal_only" | "normal-only" => Ok(DaeLossScope::NormalOnly),
        "all_samples" | "all-samples" => Ok(DaeLossScope::AllSamples),
        other => Err(format!("unknown scope '{other}', expected normal_only or all_samples")),
    }
}

fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::domain(format!("config file {}: {e}", path.display())))
}

macro_rules! take {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

impl ConfigArgs {
    /// Resolves defaults, file and flags into one validated configuration.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();

        if let Some(path) = &self.config {
            let file = load_config_file(path)?;
            take!(cfg.train.alpha, file.alpha);
            take!(cfg.train.learning_rate, file.learning_rate);
            take!(cfg.train.epochs, file.epochs);
            take!(cfg.train.batch_size, file.batch_size);
            take!(cfg.train.seed, file.seed);
            take!(cfg.train.validation_fraction, file.validation_fraction);
            take!(cfg.train.dae_loss_scope, file.dae_loss_scope);
            take!(cfg.search.beta, file.beta);
            take!(cfg.search.zeta, file.zeta);
            take!(cfg.search.decay_rate, file.decay_rate);
            take!(cfg.search.decay_times, file.decay_times);
            take!(cfg.search.patience, file.patience);
            take!(cfg.model.lambda, file.lambda);
            take!(cfg.model.gamma, file.gamma);
            take!(cfg.model.encoder_dims, file.encoder_dims);
            take!(cfg.model.classifier_dims, file.classifier_dims);
            take!(cfg.split_ratio, file.split_ratio);
            cfg.model.seed = cfg.train.seed;
        }

        take!(cfg.train.alpha, self.alpha);
        take!(cfg.train.learning_rate, self.learning_rate);
        take!(cfg.train.epochs, self.epochs);
        take!(cfg.train.batch_size, self.batch_size);
        take!(cfg.train.seed, self.seed);
        take!(cfg.train.validation_fraction, self.validation_fraction);
        take!(cfg.train.dae_loss_scope, self.dae_loss_scope);
        take!(cfg.search.beta, self.beta);
        take!(cfg.search.zeta, self.zeta);
        take!(cfg.search.decay_rate, self.decay_rate);
        take!(cfg.search.decay_times, self.decay_times);
        take!(cfg.search.patience, self.patience);
        take!(cfg.model.lambda, self.lambda);
        take!(cfg.model.gamma, self.gamma);
        take!(cfg.model.encoder_dims, self.encoder_dims.clone().map(|d| d.0));
        take!(cfg.model.classifier_dims, self.classifier_dims.clone().map(|d| d.0));
        take!(cfg.split_ratio, self.split_ratio);
        cfg.model.seed = cfg.train.seed;

        cfg.validate()?;
        Ok(cfg)
    }
}
