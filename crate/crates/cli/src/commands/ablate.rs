use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use chainwatch_core::data::{hold_out_class, split, Dataset, Label, Scaler, ALL_ATTACK_CLASSES};
use chainwatch_core::error::{Error, Result};
use chainwatch_core::metrics::{EvalReport, ScoredSet};
use chainwatch_core::model::{train, update_mlp, DaeMlp};
use chainwatch_core::threshold::search_threshold;

use super::{load_dataset_at, write_json_pretty};
use crate::config::{ConfigArgs, RunConfig};

/// Leave-one-attack-out study: for every attack class, train a model that
/// has never seen it, measure detection of the held-out class, then update
/// only the classifier with the held-out samples and measure again.
#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Labeled dataset with at least two attack classes.
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,

    /// Ablation table as JSON.
    #[arg(long, value_name = "PATH")]
    pub report_out: Option<PathBuf>,

    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Held-out detection metrics before and after the classifier update.
#[derive(Debug, Clone, Serialize)]
pub struct AblationRow {
    pub class: String,
    pub f1_without: f64,
    pub f1_with: f64,
    pub precision_without: f64,
    pub precision_with: f64,
    pub recall_without: f64,
    pub recall_with: f64,
}

fn held_out_eval(model: &DaeMlp, eval_scaled: &Dataset, tau: f64) -> Result<EvalReport> {
    ScoredSet::compute(model, eval_scaled, model.lambda(), model.gamma())?.report_at(tau)
}

/// Runs the study over every attack class present; exposed for tests.
pub(crate) fn run_ablation(raw: &Dataset, cfg: &RunConfig) -> Result<Vec<AblationRow>> {
    let classes: Vec<_> = ALL_ATTACK_CLASSES
        .into_iter()
        .filter(|&c| raw.records().iter().any(|r| r.attack_class() == Some(c)))
        .collect();
    if classes.len() < 2 {
        return Err(Error::domain(format!(
            "the ablation needs at least two attack classes, found {}",
            classes.len()
        )));
    }

    let (train_raw, test_raw) = split(raw, cfg.split_ratio, cfg.train.seed)?;
    let mut rows = Vec::new();

    for class in classes {
        let (reduced_raw, held_raw) = hold_out_class(&train_raw, class)?;
        let scaler = Scaler::fit(&reduced_raw)?;
        let reduced_scaled = scaler.apply(&reduced_raw);

        // Fresh model per class: the before-update column must come from a
        // model that never saw the held-out attack.
        let mut model = DaeMlp::build(&cfg.model)?;
        let outcome = train(&mut model, &reduced_scaled, &cfg.train)?;
        let search = search_threshold(&model, &outcome.validation, &cfg.search)?;
        model.set_threshold(search.tau)?;
        model.set_scaler(scaler.clone());

        let eval_raw = test_raw.filtered(|r| {
            r.label() == Some(Label::Normal) || r.attack_class() == Some(class)
        });
        let eval_scaled = scaler.apply(&eval_raw);
        let without = held_out_eval(&model, &eval_scaled, search.tau)?;

        let merged_scaled = reduced_scaled.concat(&scaler.apply(&held_raw));
        let update_outcome = update_mlp(&mut model, &merged_scaled, &cfg.train)?;
        let re_search = search_threshold(&model, &update_outcome.validation, &cfg.search)?;
        model.set_threshold(re_search.tau)?;
        let with = held_out_eval(&model, &eval_scaled, re_search.tau)?;

        rows.push(AblationRow {
            class: class.as_str().to_owned(),
            f1_without: without.f1_macro,
            f1_with: with.f1_macro,
            precision_without: without.precision_macro,
            precision_with: with.precision_macro,
            recall_without: without.recall_macro,
            recall_with: with.recall_macro,
        });
    }
    Ok(rows)
}

pub fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let raw = load_dataset_at(&args.data)?;
    let rows = run_ablation(&raw, &cfg)?;

    println!(
        "{:<9} {:>8} {:>8} {:>10} {:>10} {:>10} {:>10}",
        "class", "f1 w/o", "f1 w", "prec w/o", "prec w", "recall w/o", "recall w"
    );
    for r in &rows {
        println!(
            "{:<9} {:>8.4} {:>8.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.class, r.f1_without, r.f1_with, r.precision_without, r.precision_with, r.recall_without, r.recall_with
        );
    }
    if let Some(path) = &args.report_out {
        write_json_pretty(&rows, path)?;
    }
    Ok(())
}
