//! End-to-end library experiments: autoencoder convergence, detection on
//! separable traffic, classifier-only updates, and pipeline determinism.

use chainwatch_core::data::{
    generate, split, AttackClass, AttackSpec, Dataset, FeatureRecord, Label, OverlapProfile, Scaler,
    SyntheticSpec, FEATURE_DIM,
};
use chainwatch_core::model::{train, update_mlp, DaeMlp, ModelConfig, TrainConfig};
use chainwatch_core::threshold::{search_threshold, ThresholdSearchConfig};

fn separable_dataset(seed: u64, per_class: usize) -> Dataset {
    let spec = SyntheticSpec {
        seed,
        normal_count: per_class,
        normal_params: None,
        attacks: vec![AttackSpec {
            class: AttackClass::DenialOfService,
            count: per_class,
            profile: OverlapProfile::Separable,
            params: None,
        }],
    };
    generate(&spec).unwrap()
}

fn quick_cfg(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size: 64,
        seed,
        validation_fraction: 0.15,
        ..TrainConfig::default()
    }
}

#[test]
fn autoencoder_fits_a_constant_dataset() {
    let value = 0.37;
    let mut records = Vec::new();
    for _ in 0..90 {
        records.push(FeatureRecord::new([value; FEATURE_DIM], Some(Label::Normal), None).unwrap());
    }
    for _ in 0..10 {
        records.push(FeatureRecord::new([value; FEATURE_DIM], Some(Label::Anomaly), None).unwrap());
    }
    let ds = Dataset::new(records);

    let mut model = DaeMlp::build(&ModelConfig {
        seed: 4,
        ..ModelConfig::default()
    })
    .unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 32,
        seed: 4,
        ..TrainConfig::default()
    };
    train(&mut model, &ds, &cfg).unwrap();
    let err = model.reconstruction_error(&[value; FEATURE_DIM]).unwrap();
    assert!(err < 1e-3, "reconstruction error {err} after constant fit");
}

#[test]
fn separable_traffic_is_learned_end_to_end() {
    let raw = separable_dataset(31, 500);
    let (raw_train, raw_test) = split(&raw, 0.8, 31).unwrap();
    let scaler = Scaler::fit(&raw_train).unwrap();
    let train_set = scaler.apply(&raw_train);
    let test_set = scaler.apply(&raw_test);

    let mut model = DaeMlp::build(&ModelConfig {
        seed: 31,
        ..ModelConfig::default()
    })
    .unwrap();
    let out = train(&mut model, &train_set, &quick_cfg(20, 31)).unwrap();
    assert!(
        out.history.epochs.last().unwrap().loss_total <= out.history.epochs.first().unwrap().loss_total,
        "loss did not decrease"
    );

    // Classifier alone separates the held-out test set.
    let mut correct = 0;
    for rec in test_set.records() {
        let y = model.classify(rec.features()).unwrap();
        if DaeMlp::classify_label(y) == rec.label().unwrap() {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / test_set.len() as f64;
    assert!(accuracy >= 0.95, "classifier test accuracy {accuracy}");

    // Reconstruction error separates normal from shifted traffic.
    let mut normal_err = (0.0, 0usize);
    let mut anomaly_err = (0.0, 0usize);
    for rec in test_set.records() {
        let e = model.reconstruction_error(rec.features()).unwrap();
        match rec.label().unwrap() {
            Label::Normal => {
                normal_err.0 += e;
                normal_err.1 += 1;
            }
            Label::Anomaly => {
                anomaly_err.0 += e;
                anomaly_err.1 += 1;
            }
        }
    }
    let mean_normal = normal_err.0 / normal_err.1 as f64;
    let mean_anomaly = anomaly_err.0 / anomaly_err.1 as f64;
    assert!(
        mean_normal < mean_anomaly,
        "normal error {mean_normal} not below anomaly error {mean_anomaly}"
    );
}

#[test]
fn search_threshold_calibrates_a_trained_model() {
    let raw = separable_dataset(8, 300);
    let scaler = Scaler::fit(&raw).unwrap();
    let scaled = scaler.apply(&raw);
    let mut model = DaeMlp::build(&ModelConfig {
        seed: 8,
        ..ModelConfig::default()
    })
    .unwrap();
    let out = train(&mut model, &scaled, &quick_cfg(12, 8)).unwrap();

    let result = search_threshold(&model, &out.validation, &ThresholdSearchConfig::default()).unwrap();
    assert!(result.tau.is_finite());
    assert_eq!(result.final_step.to_bits(), (0.001 * 0.5f64.powi(15)).to_bits());
    let acc = result.final_accuracy().unwrap_or_else(|| result.best_entry().accuracy);
    assert!(acc >= 0.95, "search accuracy {acc} on validation");
}

#[test]
fn training_and_search_are_deterministic_end_to_end() {
    let run = || {
        let raw = separable_dataset(12, 250);
        let scaler = Scaler::fit(&raw).unwrap();
        let scaled = scaler.apply(&raw);
        let mut model = DaeMlp::build(&ModelConfig {
            seed: 12,
            ..ModelConfig::default()
        })
        .unwrap();
        let out = train(&mut model, &scaled, &quick_cfg(6, 12)).unwrap();
        let search = search_threshold(&model, &out.validation, &ThresholdSearchConfig::default()).unwrap();
        model.set_threshold(search.tau).unwrap();
        (model, out.history, search.tau)
    };
    let (m1, h1, t1) = run();
    let (m2, h2, t2) = run();
    assert_eq!(t1.to_bits(), t2.to_bits());
    assert_eq!(h1, h2);
    assert_eq!(m1.dae_param_bytes(), m2.dae_param_bytes());
    assert_eq!(m1.classifier_param_bytes(), m2.classifier_param_bytes());
}

#[test]
fn updating_with_the_original_data_keeps_validation_accuracy() {
    let raw = separable_dataset(19, 400);
    let scaler = Scaler::fit(&raw).unwrap();
    let scaled = scaler.apply(&raw);
    let mut model = DaeMlp::build(&ModelConfig {
        seed: 19,
        ..ModelConfig::default()
    })
    .unwrap();
    let cfg = quick_cfg(15, 19);
    let first = train(&mut model, &scaled, &cfg).unwrap();
    let before = first.history.epochs.last().unwrap().val_accuracy;

    let second = update_mlp(&mut model, &scaled, &cfg).unwrap();
    let after = second.history.epochs.last().unwrap().val_accuracy;
    assert!(
        (after - before).abs() <= 0.02,
        "validation accuracy moved from {before} to {after}"
    );
}
