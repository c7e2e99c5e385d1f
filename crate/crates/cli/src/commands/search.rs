use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use chainwatch_core::data::Dataset;
use chainwatch_core::error::{Error, Result};
use chainwatch_core::metrics::ScoredSet;
use chainwatch_core::model::DaeMlp;
use chainwatch_core::threshold::{baseline_threshold, search_threshold, SearchResult, ThresholdStrategy};

use super::{
    load_dataset_at, load_model_at, reconstruction_error_lists, save_model_at, scale_with_model,
    write_json_pretty, write_trace_csv,
};
use crate::config::ConfigArgs;

/// Re-run the threshold search for a trained model and rewrite τ in place.
#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Model file; rewritten with the new τ.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Labeled calibration dataset (use a validation split, not the test set).
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Search trace (CSV: pass,tau,accuracy).
    #[arg(long, value_name = "PATH")]
    pub trace_out: Option<PathBuf>,

    /// Also evaluate the baseline threshold strategies
    /// (μ, 0.8μ, 0.5μ, 0.2μ, quantile, searched) and print the grid.
    #[arg(long)]
    pub compare: bool,

    /// Dataset the comparison grid is evaluated on (defaults to --data).
    #[arg(long, value_name = "PATH", requires = "compare")]
    pub compare_data: Option<PathBuf>,

    /// Comparison grid as JSON.
    #[arg(long, value_name = "PATH", requires = "compare")]
    pub compare_out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

/// One row of the strategy comparison grid.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyRow {
    pub strategy: String,
    pub tau: f64,
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
}

fn grid_row(name: &str, tau: f64, scored: &ScoredSet) -> Result<StrategyRow> {
    let report = scored.report_at(tau)?;
    Ok(StrategyRow {
        strategy: name.to_owned(),
        tau,
        accuracy: report.accuracy,
        precision_macro: report.precision_macro,
        recall_macro: report.recall_macro,
        f1_macro: report.f1_macro,
    })
}

/// Builds the Table-style strategy grid: μ-fraction and quantile thresholds
/// derived from `calibration`, all evaluated on `eval_set`.
pub(crate) fn strategy_grid(
    model: &DaeMlp,
    calibration: &Dataset,
    eval_set: &Dataset,
    beta: f64,
    searched_tau: f64,
) -> Result<Vec<StrategyRow>> {
    let (normal_errors, anomaly_errors) = reconstruction_error_lists(model, calibration)?;
    if anomaly_errors.is_empty() {
        return Err(Error::domain("strategy comparison needs anomaly samples in the calibration data"));
    }
    let scored = ScoredSet::compute(model, eval_set, model.lambda(), model.gamma())?;

    let mut rows = Vec::new();
    for k in [1.0, 0.8, 0.5, 0.2] {
        let tau = baseline_threshold(ThresholdStrategy::MeanFraction(k), &normal_errors, &anomaly_errors)?;
        rows.push(grid_row(&format!("{k}*mu"), tau, &scored)?);
    }
    let tau = baseline_threshold(ThresholdStrategy::Quantile(beta), &normal_errors, &anomaly_errors)?;
    rows.push(grid_row(&format!("quantile({beta})"), tau, &scored)?);
    rows.push(grid_row("searched", searched_tau, &scored)?);
    Ok(rows)
}

pub(crate) fn print_grid(rows: &[StrategyRow]) {
    println!("{:<16} {:>14} {:>10} {:>10} {:>10} {:>10}", "strategy", "tau", "accuracy", "precision", "recall", "f1");
    for r in rows {
        println!(
            "{:<16} {:>14.8} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.strategy, r.tau, r.accuracy, r.precision_macro, r.recall_macro, r.f1_macro
        );
    }
}

pub fn cmd_threshold_search(args: &SearchArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let mut model = load_model_at(&args.model)?;
    let raw = load_dataset_at(&args.data)?;
    let scaled = scale_with_model(&model, &raw)?;

    let result: SearchResult = search_threshold(&model, &scaled, &cfg.search)?;
    model.set_threshold(result.tau)?;
    save_model_at(&model, &args.model)?;

    if let Some(path) = &args.trace_out {
        write_trace_csv(&result.trace, path)?;
    }
    println!(
        "tau {} (tau_init {}, {} evaluations, final step {})",
        result.tau,
        result.tau_init,
        result.trace.len(),
        result.final_step
    );
    if let Some(acc) = result.final_accuracy() {
        println!("calibration accuracy at tau: {acc:.4}");
    }

    if args.compare {
        let eval_scaled = match &args.compare_data {
            Some(path) => scale_with_model(&model, &load_dataset_at(path)?)?,
            None => scaled.clone(),
        };
        let rows = strategy_grid(&model, &scaled, &eval_scaled, cfg.search.beta, result.tau)?;
        print_grid(&rows);
        if let Some(path) = &args.compare_out {
            write_json_pretty(&rows, path)?;
        }
    }
    println!("model rewritten at {}", args.model.display());
    Ok(())
}
