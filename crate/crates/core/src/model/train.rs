//! Joint training of both components and the classifier-only update path.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DaeMlp;
use crate::data::{split_with_stream, Dataset, FeatureRecord, Label};
use crate::error::{Error, Result};
use crate::nn::{bce_gradient, binary_cross_entropy, mse, mse_gradient, Adam, Gradients};
use crate::rng::{rng_for, Stream};

/// Which samples feed the reconstruction loss.
///
/// The autoencoder learns the normal state, so by default only
/// normal-labeled batch members contribute to it; `AllSamples` is the
/// alternative reading where every sample is reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DaeLossScope {
    #[default]
    NormalOnly,
    AllSamples,
}

/// Optimizer and loop settings for [`train`] and [`update_mlp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Weight of the reconstruction loss in the combined objective.
    pub alpha: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Share of the input carved off as the validation split.
    pub validation_fraction: f64,
    pub dae_loss_scope: DaeLossScope,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.5,
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 256,
            seed: 0,
            validation_fraction: 0.1,
            dae_loss_scope: DaeLossScope::NormalOnly,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::domain(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::domain(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::domain("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::domain("batch size must be at least 1"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::domain(format!(
                "validation fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Losses and validation accuracy of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub loss_dae: f64,
    pub loss_mlp: f64,
    pub loss_total: f64,
    pub val_accuracy: f64,
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

/// What a training run leaves behind besides the updated model: the history
/// and the validation split carved from the input, which the threshold
/// search calibrates on.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: TrainHistory,
    pub validation: Dataset,
}

fn in_dae_scope(rec: &FeatureRecord, scope: DaeLossScope) -> bool {
    match scope {
        DaeLossScope::NormalOnly => rec.label() == Some(Label::Normal),
        DaeLossScope::AllSamples => true,
    }
}

/// Combined batch loss `α · L_DAE + (1 − α) · L_MLP`.
///
/// `L_MLP` is the mean binary cross-entropy over the whole batch; `L_DAE` is
/// the mean reconstruction error over the batch members in scope (zero when
/// the batch has none).
pub fn combined_loss(
    model: &DaeMlp,
    batch: &[FeatureRecord],
    alpha: f64,
    scope: DaeLossScope,
) -> Result<(f64, f64, f64)> {
    if batch.is_empty() {
        return Err(Error::domain("combined loss of an empty batch"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let mut dae_sum = 0.0;
    let mut dae_n = 0usize;
    let mut mlp_sum = 0.0;
    for rec in batch {
        let label = rec
            .label()
            .ok_or_else(|| Error::domain("combined loss needs labeled samples"))?;
        let y = model.classify(rec.features())?;
        mlp_sum += binary_cross_entropy(label.as_u8() as f64, y)?;
        if in_dae_scope(rec, scope) {
            dae_sum += model.reconstruction_error(rec.features())?;
            dae_n += 1;
        }
    }
    let loss_dae = if dae_n == 0 { 0.0 } else { dae_sum / dae_n as f64 };
    let loss_mlp = mlp_sum / batch.len() as f64;
    Ok((alpha * loss_dae + (1.0 - alpha) * loss_mlp, loss_dae, loss_mlp))
}

fn check_training_set(ds: &Dataset, role: &str) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::domain(format!("{role} dataset is empty")));
    }
    for (i, rec) in ds.records().iter().enumerate() {
        if rec.label().is_none() {
            return Err(Error::domain(format!("{role} record {i} is unlabeled")));
        }
        if rec.features().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::domain(format!(
                "{role} record {i} has features outside [0, 1]; scale the dataset first"
            )));
        }
    }
    if !ds.has_both_classes() {
        return Err(Error::domain(format!(
            "{role} dataset needs both normal and anomaly samples"
        )));
    }
    Ok(())
}

/// Classifier-only label accuracy (`y ≥ 0.5` rule) on a labeled set.
pub fn classifier_accuracy(model: &DaeMlp, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::domain("cannot evaluate on an empty dataset"));
    }
    let mut correct = 0usize;
    for rec in ds.records() {
        let label = rec
            .label()
            .ok_or_else(|| Error::domain("accuracy needs labeled samples"))?;
        let y = model.classify(rec.features())?;
        if DaeMlp::classify_label(y) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Trains encoder, decoder and classifier jointly on a scaled, labeled
/// dataset, minimizing the combined loss with seeded mini-batch Adam.
///
/// A validation split (`cfg.validation_fraction`, stratified) is carved off
/// before the epoch loop; the history tracks per-epoch losses on the rest
/// plus classifier accuracy on that split. Any previously calibrated
/// threshold is invalidated.
pub fn train(model: &mut DaeMlp, dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_training_set(dataset, "training")?;
    let (fit, validation) = split_with_stream(
        dataset,
        1.0 - cfg.validation_fraction,
        cfg.seed,
        Stream::ValidationSplit,
    )?;

    let mut enc_adam = Adam::new(model.encoder());
    let mut dec_adam = Adam::new(model.decoder());
    let mut cls_adam = Adam::new(model.classifier());
    let mut enc_grads = Gradients::zeros_like(model.encoder());
    let mut dec_grads = Gradients::zeros_like(model.decoder());
    let mut cls_grads = Gradients::zeros_like(model.classifier());

    let mut rng = rng_for(cfg.seed, Stream::Shuffle);
    let mut indices: Vec<usize> = (0..fit.len()).collect();
    let mut history = TrainHistory::default();

    for _epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut dae_sum = 0.0;
        let mut dae_n = 0usize;
        let mut mlp_sum = 0.0;

        for batch in indices.chunks(cfg.batch_size) {
            let scoped = batch
                .iter()
                .filter(|&&i| in_dae_scope(&fit.records()[i], cfg.dae_loss_scope))
                .count();
            enc_grads.reset();
            dec_grads.reset();
            cls_grads.reset();
            let mlp_coeff = (1.0 - cfg.alpha) / batch.len() as f64;
            let dae_coeff = if scoped > 0 { cfg.alpha / scoped as f64 } else { 0.0 };

            let mut batch_dae = 0.0;
            let mut batch_mlp = 0.0;
            for &i in batch {
                let rec = &fit.records()[i];
                let x = rec.features();
                let label = rec.label().expect("checked above").as_u8() as f64;

                let cls_cache = model.classifier().forward_cached(x)?;
                let y = cls_cache.output()[0];
                batch_mlp += binary_cross_entropy(label, y)?;
                let up = [bce_gradient(label, y)?];
                model
                    .classifier()
                    .backward_accumulate(&cls_cache, &up, mlp_coeff, &mut cls_grads)?;

                if in_dae_scope(rec, cfg.dae_loss_scope) {
                    let enc_cache = model.encoder().forward_cached(x)?;
                    let dec_cache = model.decoder().forward_cached(enc_cache.output())?;
                    let x_hat = dec_cache.output();
                    batch_dae += mse(x, x_hat)?;
                    let up = mse_gradient(x, x_hat)?;
                    let d_latent =
                        model
                            .decoder()
                            .backward_accumulate(&dec_cache, &up, dae_coeff, &mut dec_grads)?;
                    model
                        .encoder()
                        .backward_accumulate(&enc_cache, &d_latent, 1.0, &mut enc_grads)?;
                }
            }

            if !(batch_dae.is_finite() && batch_mlp.is_finite()) {
                return Err(Error::numeric("training loss diverged"));
            }
            dae_sum += batch_dae;
            dae_n += scoped;
            mlp_sum += batch_mlp;

            let (enc, dec, cls) = model.networks_mut();
            enc_adam.step(enc, &enc_grads, cfg.learning_rate)?;
            dec_adam.step(dec, &dec_grads, cfg.learning_rate)?;
            cls_adam.step(cls, &cls_grads, cfg.learning_rate)?;
        }

        let loss_dae = if dae_n == 0 { 0.0 } else { dae_sum / dae_n as f64 };
        let loss_mlp = mlp_sum / fit.len() as f64;
        let stats = EpochStats {
            loss_dae,
            loss_mlp,
            loss_total: cfg.alpha * loss_dae + (1.0 - cfg.alpha) * loss_mlp,
            val_accuracy: classifier_accuracy(model, &validation)?,
        };
        if !(stats.loss_total.is_finite() && stats.loss_total >= 0.0) {
            return Err(Error::numeric("training loss diverged"));
        }
        history.epochs.push(stats);
    }

    model.invalidate_threshold();
    Ok(TrainOutcome { history, validation })
}

/// Retrains only the classifier on a merged labeled dataset, leaving every
/// autoencoder parameter byte-identical. The threshold is marked stale; the
/// caller must re-run the threshold search before deciding anything.
pub fn update_mlp(model: &mut DaeMlp, dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_training_set(dataset, "update")?;
    let (fit, validation) = split_with_stream(
        dataset,
        1.0 - cfg.validation_fraction,
        cfg.seed,
        Stream::ValidationSplit,
    )?;

    let mut cls_adam = Adam::new(model.classifier());
    let mut cls_grads = Gradients::zeros_like(model.classifier());
    let mut rng = rng_for(cfg.seed, Stream::Shuffle);
    let mut indices: Vec<usize> = (0..fit.len()).collect();
    let mut history = TrainHistory::default();

    for _epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut mlp_sum = 0.0;
        for batch in indices.chunks(cfg.batch_size) {
            cls_grads.reset();
            let coeff = 1.0 / batch.len() as f64;
            let mut batch_mlp = 0.0;
            for &i in batch {
                let rec = &fit.records()[i];
                let label = rec.label().expect("checked above").as_u8() as f64;
                let cache = model.classifier().forward_cached(rec.features())?;
                let y = cache.output()[0];
                batch_mlp += binary_cross_entropy(label, y)?;
                let up = [bce_gradient(label, y)?];
                model
                    .classifier()
                    .backward_accumulate(&cache, &up, coeff, &mut cls_grads)?;
            }
            if !batch_mlp.is_finite() {
                return Err(Error::numeric("update loss diverged"));
            }
            mlp_sum += batch_mlp;
            cls_adam.step(model.classifier_mut(), &cls_grads, cfg.learning_rate)?;
        }
        let loss_mlp = mlp_sum / fit.len() as f64;
        history.epochs.push(EpochStats {
            loss_dae: 0.0,
            loss_mlp,
            loss_total: loss_mlp,
            val_accuracy: classifier_accuracy(model, &validation)?,
        });
    }

    model.invalidate_threshold();
    Ok(TrainOutcome { history, validation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, AttackClass, OverlapProfile, Scaler, SyntheticSpec, FEATURE_DIM};
    use crate::model::{ModelConfig, ThresholdState};

    fn constant_record(value: f64, label: Label) -> FeatureRecord {
        FeatureRecord::new([value; FEATURE_DIM], Some(label), None).unwrap()
    }

    fn tiny_scaled_dataset(seed: u64, per_class: usize) -> Dataset {
        let spec = SyntheticSpec {
            seed,
            normal_count: per_class,
            normal_params: None,
            attacks: vec![crate::data::AttackSpec {
                class: AttackClass::DenialOfService,
                count: per_class,
                profile: OverlapProfile::Separable,
                params: None,
            }],
        };
        let raw = generate(&spec).unwrap();
        Scaler::fit(&raw).unwrap().apply(&raw)
    }

    fn quick_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 32,
            validation_fraction: 0.2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn combined_loss_degenerate_weights() {
        let model = DaeMlp::build(&ModelConfig::default()).unwrap();
        let batch = vec![
            constant_record(0.3, Label::Normal),
            constant_record(0.8, Label::Anomaly),
        ];
        let (total, dae, _mlp) = combined_loss(&model, &batch, 1.0, DaeLossScope::NormalOnly).unwrap();
        assert_eq!(total, dae);

        let (total, dae, mlp) = combined_loss(&model, &batch, 0.5, DaeLossScope::NormalOnly).unwrap();
        assert!((total - (dae + mlp) / 2.0).abs() < 1e-12);
        assert!(dae >= 0.0 && mlp >= 0.0);
    }

    #[test]
    fn combined_loss_all_anomaly_batch_has_zero_dae_term() {
        let model = DaeMlp::build(&ModelConfig::default()).unwrap();
        let batch = vec![
            constant_record(0.8, Label::Anomaly),
            constant_record(0.9, Label::Anomaly),
        ];
        let (total, dae, mlp) = combined_loss(&model, &batch, 0.7, DaeLossScope::NormalOnly).unwrap();
        assert_eq!(dae, 0.0);
        assert!((total - 0.3 * mlp).abs() < 1e-15);
    }

    #[test]
    fn combined_loss_rejects_empty_batch() {
        let model = DaeMlp::build(&ModelConfig::default()).unwrap();
        assert!(combined_loss(&model, &[], 0.5, DaeLossScope::NormalOnly).is_err());
    }

    #[test]
    fn train_rejects_single_class_and_unscaled_data() {
        let mut model = DaeMlp::build(&ModelConfig::default()).unwrap();
        let single = Dataset::new(vec![
            constant_record(0.4, Label::Normal),
            constant_record(0.5, Label::Normal),
        ]);
        assert!(train(&mut model, &single, &quick_cfg(1)).is_err());

        let unscaled = Dataset::new(vec![
            FeatureRecord::new([5.0; FEATURE_DIM], Some(Label::Normal), None).unwrap(),
            FeatureRecord::new([6.0; FEATURE_DIM], Some(Label::Normal), None).unwrap(),
            FeatureRecord::new([-2.0; FEATURE_DIM], Some(Label::Anomaly), None).unwrap(),
            FeatureRecord::new([9.0; FEATURE_DIM], Some(Label::Anomaly), None).unwrap(),
        ]);
        let err = train(&mut model, &unscaled, &quick_cfg(1)).unwrap_err();
        assert!(err.to_string().contains("scale"), "{err}");
    }

    #[test]
    fn training_is_bit_deterministic() {
        let data = tiny_scaled_dataset(5, 60);
        let cfg = quick_cfg(3);
        let run = || {
            let mut model = DaeMlp::build(&ModelConfig {
                seed: 11,
                ..ModelConfig::default()
            })
            .unwrap();
            let out = train(&mut model, &data, &cfg).unwrap();
            (model, out.history)
        };
        let (m1, h1) = run();
        let (m2, h2) = run();
        assert_eq!(m1.dae_param_bytes(), m2.dae_param_bytes());
        assert_eq!(m1.classifier_param_bytes(), m2.classifier_param_bytes());
        assert_eq!(h1, h2);
    }

    #[test]
    fn training_reduces_loss_and_invalidates_threshold() {
        let data = tiny_scaled_dataset(6, 80);
        let mut model = DaeMlp::build(&ModelConfig {
            seed: 3,
            ..ModelConfig::default()
        })
        .unwrap();
        model.set_threshold(0.25).unwrap();
        let out = train(&mut model, &data, &quick_cfg(12)).unwrap();
        let first = out.history.epochs.first().unwrap().loss_total;
        let last = out.history.epochs.last().unwrap().loss_total;
        assert!(last <= first, "loss went up: {first} -> {last}");
        assert_eq!(model.threshold_state(), ThresholdState::Stale { value: 0.25 });
        assert!(out
            .history
            .epochs
            .iter()
            .all(|e| e.loss_total.is_finite() && e.loss_total >= 0.0));
    }

    #[test]
    fn update_mlp_freezes_autoencoder_bytes() {
        let data = tiny_scaled_dataset(9, 60);
        let mut model = DaeMlp::build(&ModelConfig {
            seed: 8,
            ..ModelConfig::default()
        })
        .unwrap();
        train(&mut model, &data, &quick_cfg(2)).unwrap();
        model.set_threshold(0.4).unwrap();

        let dae_before = model.dae_param_bytes();
        let cls_before = model.classifier_param_bytes();
        update_mlp(&mut model, &data, &quick_cfg(2)).unwrap();
        assert_eq!(model.dae_param_bytes(), dae_before);
        assert_ne!(model.classifier_param_bytes(), cls_before);
        assert_eq!(model.threshold_state(), ThresholdState::Stale { value: 0.4 });
    }
}
