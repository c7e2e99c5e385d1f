//! Subcommand implementations. Each takes its parsed argument struct so the
//! integration tests can drive commands in-process.

mod ablate;
mod detect;
mod eval;
mod gen_data;
mod search;
mod train;
mod update;

pub use ablate::{cmd_ablate, AblateArgs, AblationRow};
pub use detect::{cmd_detect, run_detect, DetectArgs, DetectStats};
pub use eval::{cmd_eval, EvalArgs, EvalMode};
pub use gen_data::{cmd_gen_data, GenDataArgs};
pub use search::{cmd_threshold_search, SearchArgs, StrategyRow};
pub use train::{cmd_train, TrainArgs};
pub use update::{cmd_update_mlp, UpdateArgs};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use chainwatch_core::data::{load_records, Dataset, Label};
use chainwatch_core::error::{Error, Result};
use chainwatch_core::metrics::EvalReport;
use chainwatch_core::model::{load_model, DaeMlp, ThresholdState, TrainHistory};
use chainwatch_core::threshold::TraceEntry;

/// Prefixes I/O errors with the offending path.
fn annotate_io(err: Error, path: &Path) -> Error {
    match err {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

pub(crate) fn load_dataset_at(path: &Path) -> Result<Dataset> {
    load_records(path).map_err(|e| annotate_io(e, path))
}

pub(crate) fn load_model_at(path: &Path) -> Result<DaeMlp> {
    load_model(path).map_err(|e| annotate_io(e, path))
}

pub(crate) fn save_model_at(model: &DaeMlp, path: &Path) -> Result<()> {
    chainwatch_core::model::save_model(model, path).map_err(|e| annotate_io(e, path))
}

/// The model's calibrated threshold, or an actionable error.
pub(crate) fn require_calibrated(model: &DaeMlp) -> Result<f64> {
    match model.threshold_state() {
        ThresholdState::Calibrated { value } => Ok(value),
        ThresholdState::Stale { .. } => Err(Error::domain(
            "model threshold is stale after an update; run `chainwatch threshold-search` first",
        )),
        ThresholdState::Unset => Err(Error::domain(
            "model has no calibrated threshold; run `chainwatch threshold-search` first",
        )),
    }
}

/// Scales a raw dataset through the scaler stored in the model.
pub(crate) fn scale_with_model(model: &DaeMlp, ds: &Dataset) -> Result<Dataset> {
    let scaler = model
        .scaler()
        .ok_or_else(|| Error::domain("model carries no feature scaler; retrain it with `chainwatch train`"))?;
    Ok(scaler.apply(ds))
}

/// Flat key-value form of an evaluation report, for JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct FlatReport {
    pub mode: String,
    pub tau: f64,
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub samples: usize,
}

impl FlatReport {
    pub fn new(mode: &str, tau: f64, report: &EvalReport) -> Self {
        FlatReport {
            mode: mode.to_owned(),
            tau,
            accuracy: report.accuracy,
            precision_macro: report.precision_macro,
            recall_macro: report.recall_macro,
            f1_macro: report.f1_macro,
            tp: report.matrix.tp,
            fp: report.matrix.fp,
            tn: report.matrix.tn,
            fn_: report.matrix.fn_,
            samples: report.matrix.total(),
        }
    }
}

pub(crate) fn write_json_pretty<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::format(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| annotate_io(Error::Io(e), path))?;
    Ok(())
}

pub(crate) fn print_report(label: &str, tau: f64, report: &EvalReport) {
    println!(
        "{label}: accuracy {:.4}  precision(macro) {:.4}  recall(macro) {:.4}  f1(macro) {:.4}  [tau {tau}, n {}]",
        report.accuracy,
        report.precision_macro,
        report.recall_macro,
        report.f1_macro,
        report.matrix.total(),
    );
}

/// History file: `epoch,loss_total,loss_dae,loss_mlp,val_accuracy`.
pub(crate) fn write_history_csv(history: &TrainHistory, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| annotate_io(Error::Io(e), path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "epoch,loss_total,loss_dae,loss_mlp,val_accuracy")?;
    for (i, e) in history.epochs.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            i + 1,
            e.loss_total,
            e.loss_dae,
            e.loss_mlp,
            e.val_accuracy
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Trace file: `pass,tau,accuracy` per probe.
pub(crate) fn write_trace_csv(trace: &[TraceEntry], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| annotate_io(Error::Io(e), path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "pass,tau,accuracy")?;
    for e in trace {
        writeln!(w, "{},{},{}", e.pass, e.tau, e.accuracy)?;
    }
    w.flush()?;
    Ok(())
}

/// Reconstruction errors of a scaled labeled dataset, split by class.
pub(crate) fn reconstruction_error_lists(model: &DaeMlp, scaled: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut normal = Vec::new();
    let mut anomaly = Vec::new();
    for (i, rec) in scaled.records().iter().enumerate() {
        let err = model.reconstruction_error(rec.features())?;
        match rec.label() {
            Some(Label::Normal) => normal.push(err),
            Some(Label::Anomaly) => anomaly.push(err),
            None => {
                return Err(Error::domain(format!(
                    "record {i} is unlabeled; threshold calibration needs labels"
                )))
            }
        }
    }
    Ok((normal, anomaly))
}
