use std::path::PathBuf;

use clap::Args;

use chainwatch_core::data::{save_records, split, Scaler};
use chainwatch_core::error::Result;
use chainwatch_core::metrics::ScoredSet;
use chainwatch_core::model::{train, DaeMlp};
use chainwatch_core::threshold::search_threshold;

use super::{
    load_dataset_at, print_report, save_model_at, write_history_csv, write_json_pretty, FlatReport,
};
use crate::config::ConfigArgs;

/// Train a model: split, scale, fit both components, calibrate τ on the
/// validation split, and write a deployable model file.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled dataset file.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Where the calibrated model is written.
    #[arg(long, value_name = "PATH")]
    pub model_out: PathBuf,

    /// Per-epoch loss/accuracy table (CSV).
    #[arg(long, value_name = "PATH")]
    pub history_out: Option<PathBuf>,

    /// Validation evaluation report (JSON).
    #[arg(long, value_name = "PATH")]
    pub report_out: Option<PathBuf>,

    /// Where the held-out test split is written, for later `eval` runs.
    #[arg(long, value_name = "PATH")]
    pub test_out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let raw = load_dataset_at(&args.data)?;
    let (train_raw, test_raw) = split(&raw, cfg.split_ratio, cfg.train.seed)?;
    if let Some(path) = &args.test_out {
        save_records(&test_raw, path)?;
    }

    let scaler = Scaler::fit(&train_raw)?;
    let train_scaled = scaler.apply(&train_raw);

    let mut model = DaeMlp::build(&cfg.model)?;
    let outcome = train(&mut model, &train_scaled, &cfg.train)?;
    let search = search_threshold(&model, &outcome.validation, &cfg.search)?;
    model.set_threshold(search.tau)?;
    model.set_scaler(scaler);
    save_model_at(&model, &args.model_out)?;

    if let Some(path) = &args.history_out {
        write_history_csv(&outcome.history, path)?;
    }

    let scored = ScoredSet::compute(&model, &outcome.validation, model.lambda(), model.gamma())?;
    let report = scored.report_at(search.tau)?;
    if let Some(path) = &args.report_out {
        write_json_pretty(&FlatReport::new("validation", search.tau, &report), path)?;
    }

    let last = outcome.history.epochs.last().unwrap();
    println!(
        "trained {} epochs on {} samples (validation {}): loss_total {:.6}, loss_dae {:.6}, loss_mlp {:.6}",
        outcome.history.epochs.len(),
        train_scaled.len() - outcome.validation.len(),
        outcome.validation.len(),
        last.loss_total,
        last.loss_dae,
        last.loss_mlp,
    );
    println!("calibrated tau {} (search evaluations: {})", search.tau, search.trace.len());
    print_report("validation", search.tau, &report);
    println!("model written to {}", args.model_out.display());
    Ok(())
}
