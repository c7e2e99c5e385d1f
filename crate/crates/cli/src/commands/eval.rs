use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use chainwatch_core::data::Label;
use chainwatch_core::error::{Error, Result};
use chainwatch_core::metrics::ScoredSet;
use chainwatch_core::threshold::quantile;

use super::{
    load_dataset_at, load_model_at, print_report, require_calibrated, scale_with_model,
    write_json_pretty, FlatReport,
};
use crate::config::ConfigArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    /// Blended score with the model's λ and γ at its calibrated τ.
    Full,
    /// Autoencoder-only detector: γ = 0, τ recalibrated as the β-quantile of
    /// the normal samples' reconstruction-error scores.
    DaeOnly,
}

/// Evaluate a model on a labeled dataset.
#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Labeled dataset file (raw feature space; the model's scaler is applied).
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    #[arg(long, value_enum, default_value_t = EvalMode::Full)]
    pub mode: EvalMode,

    /// Evaluation report (JSON).
    #[arg(long, value_name = "PATH")]
    pub report_out: Option<PathBuf>,

    /// Per-record verdicts (TSV: id, score, decision, tau), same format as
    /// `detect`.
    #[arg(long, value_name = "PATH")]
    pub verdicts_out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

fn write_verdicts(scored: &ScoredSet, tau: f64, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for (id, &(score, _)) in scored.entries().iter().enumerate() {
        writeln!(w, "{id}\t{score}\t{}\t{tau}", chainwatch_core::model::decide(score, tau))?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let model = load_model_at(&args.model)?;
    let raw = load_dataset_at(&args.data)?;
    let scaled = scale_with_model(&model, &raw)?;

    let (mode_name, scored, tau) = match args.mode {
        EvalMode::Full => {
            let tau = require_calibrated(&model)?;
            let scored = ScoredSet::compute(&model, &scaled, model.lambda(), model.gamma())?;
            ("full", scored, tau)
        }
        EvalMode::DaeOnly => {
            let scored = ScoredSet::compute(&model, &scaled, model.lambda(), 0.0)?;
            let normal_scores: Vec<f64> = scored
                .entries()
                .iter()
                .filter(|(_, l)| *l == Label::Normal)
                .map(|(s, _)| *s)
                .collect();
            if normal_scores.is_empty() {
                return Err(Error::domain(
                    "dae-only recalibration needs normal samples in the dataset",
                ));
            }
            let tau = quantile(&normal_scores, cfg.search.beta)?;
            ("dae-only", scored, tau)
        }
    };

    let report = scored.report_at(tau)?;
    if let Some(path) = &args.report_out {
        write_json_pretty(&FlatReport::new(mode_name, tau, &report), path)?;
    }
    if let Some(path) = &args.verdicts_out {
        write_verdicts(&scored, tau, path)?;
    }
    print_report(mode_name, tau, &report);
    Ok(())
}
