//! Model persistence: one versioned, field-named JSON document per model.
//!
//! Floats are written in the shortest base-10 form that round-trips the
//! 64-bit value, so save → load reproduces every parameter bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DaeMlp, ThresholdState};
use crate::data::{Scaler, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::nn::Network;

/// Format revision this build reads and writes.
pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    feature_dim: usize,
    lambda: f64,
    gamma: f64,
    threshold: ThresholdState,
    scaler: Option<Scaler>,
    encoder: Network,
    decoder: Network,
    classifier: Network,
}

/// Serializes the model (calibrated or not) to `path`.
pub fn save_model(model: &DaeMlp, path: impl AsRef<Path>) -> Result<()> {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        feature_dim: FEATURE_DIM,
        lambda: model.lambda(),
        gamma: model.gamma(),
        threshold: model.threshold_state(),
        scaler: model.scaler().cloned(),
        encoder: model.encoder().clone(),
        decoder: model.decoder().clone(),
        classifier: model.classifier().clone(),
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::format(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Loads and fully validates a model file; a failed load never yields a
/// partial model.
pub fn load_model(path: impl AsRef<Path>) -> Result<DaeMlp> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::format(format!("invalid JSON: {e}")))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::format("missing or non-integer field format_version"))?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value)
        .map_err(|e| Error::format(format!("field {e}")))?;

    if file.feature_dim != FEATURE_DIM {
        return Err(Error::format(format!(
            "feature_dim: expected {FEATURE_DIM}, got {}",
            file.feature_dim
        )));
    }
    file.encoder.validate("encoder")?;
    file.decoder.validate("decoder")?;
    file.classifier.validate("classifier")?;
    if let Some(scaler) = &file.scaler {
        scaler.validate("scaler")?;
    }
    DaeMlp::from_parts(
        file.encoder,
        file.decoder,
        file.classifier,
        file.lambda,
        file.gamma,
        file.threshold,
        file.scaler,
    )
    .map_err(|e| Error::format(format!("invariant violated: {e}")))
}
