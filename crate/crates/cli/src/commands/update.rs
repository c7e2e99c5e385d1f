use std::path::PathBuf;

use clap::Args;

use chainwatch_core::error::Result;
use chainwatch_core::model::update_mlp;
use chainwatch_core::threshold::search_threshold;

use super::{load_dataset_at, load_model_at, save_model_at, scale_with_model, write_trace_csv};
use crate::config::ConfigArgs;

/// Retrain only the classifier on newly labeled traffic (merged with the
/// retained labeled data), then re-run the threshold search so the written
/// model never carries a stale τ. The autoencoder stays byte-identical.
#[derive(Debug, Args)]
pub struct UpdateArgs {
    /// Model file to update.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Merged labeled dataset: retained training data plus the newly
    /// recorded attack samples. Needs both classes.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Write the updated model here instead of rewriting --model.
    #[arg(long, value_name = "PATH")]
    pub model_out: Option<PathBuf>,

    /// Trace of the re-run threshold search (CSV).
    #[arg(long, value_name = "PATH")]
    pub trace_out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn cmd_update_mlp(args: &UpdateArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let mut model = load_model_at(&args.model)?;
    let raw = load_dataset_at(&args.data)?;
    let scaled = scale_with_model(&model, &raw)?;

    let outcome = update_mlp(&mut model, &scaled, &cfg.train)?;
    let search = search_threshold(&model, &outcome.validation, &cfg.search)?;
    model.set_threshold(search.tau)?;

    let out = args.model_out.as_ref().unwrap_or(&args.model);
    save_model_at(&model, out)?;
    if let Some(path) = &args.trace_out {
        write_trace_csv(&search.trace, path)?;
    }

    let last = outcome.history.epochs.last().unwrap();
    println!(
        "classifier updated over {} epochs (loss {:.6}, validation accuracy {:.4})",
        outcome.history.epochs.len(),
        last.loss_mlp,
        last.val_accuracy,
    );
    println!("recalibrated tau {} ({} evaluations)", search.tau, search.trace.len());
    println!("model written to {}", out.display());
    Ok(())
}
