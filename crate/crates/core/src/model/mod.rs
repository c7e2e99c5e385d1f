//! The composite detector: a deep autoencoder and a perceptron classifier
//! run in parallel over the same 21-feature sample, and their outputs are
//! blended into one anomaly score `λ · L_re + γ · y` that is cut at a
//! calibrated threshold τ.

mod persist;
mod train;

pub use persist::{load_model, save_model, FORMAT_VERSION};
pub use train::{
    combined_loss, train, update_mlp, DaeLossScope, EpochStats, TrainConfig, TrainHistory, TrainOutcome,
};

use serde::{Deserialize, Serialize};

use crate::data::{Label, Scaler, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::nn::{mse, Activation, Network, Scratch};
use crate::rng::Stream;

/// Calibration state of the decision threshold τ.
///
/// A freshly built or retrained model has no usable τ; a stale τ remembers
/// its old value but must not be used for decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum ThresholdState {
    Unset,
    Calibrated { value: f64 },
    Stale { value: f64 },
}

/// Verdict for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Normal,
    Anomaly,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Normal => "Normal",
            Verdict::Anomaly => "Anomaly",
        })
    }
}

/// High score means anomalous: flag iff `score ≥ tau`, ties on the anomaly
/// side (a detector should fail closed).
#[inline]
pub fn decide(score: f64, tau: f64) -> Verdict {
    if score >= tau {
        Verdict::Anomaly
    } else {
        Verdict::Normal
    }
}

/// The blended anomaly score `λ · L_re + γ · y`.
#[inline]
pub fn combine_score(lambda: f64, gamma: f64, reconstruction_error: f64, probability: f64) -> f64 {
    lambda * reconstruction_error + gamma * probability
}

/// Both component outputs plus the blended score for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParts {
    pub reconstruction_error: f64,
    pub probability: f64,
    pub score: f64,
}

/// Architecture and score weights for [`DaeMlp::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Encoder widths after the 21-feature input; the last entry is the
    /// bottleneck. The decoder mirrors this back to 21.
    pub encoder_dims: Vec<usize>,
    /// Classifier hidden widths; a final sigmoid unit is appended.
    pub classifier_dims: Vec<usize>,
    pub lambda: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            encoder_dims: vec![64, 32, 16],
            classifier_dims: vec![32, 16],
            lambda: 0.5,
            gamma: 0.5,
            seed: 0,
        }
    }
}

/// The parallel autoencoder + classifier model.
#[derive(Debug, Clone, PartialEq)]
pub struct DaeMlp {
    encoder: Network,
    decoder: Network,
    classifier: Network,
    lambda: f64,
    gamma: f64,
    threshold: ThresholdState,
    scaler: Option<Scaler>,
}

impl DaeMlp {
    /// Builds a freshly initialized model. The default configuration is the
    /// 21→64→32→16 encoder, its mirror decoder ending in a sigmoid, and the
    /// 21→32→16→1 classifier — nine dense layers in total.
    pub fn build(config: &ModelConfig) -> Result<Self> {
        if config.encoder_dims.is_empty() {
            return Err(Error::domain("encoder needs at least the bottleneck width"));
        }
        if config.encoder_dims.iter().chain(config.classifier_dims.iter()).any(|&d| d == 0) {
            return Err(Error::domain("layer widths must be positive"));
        }
        check_score_weights(config.lambda, config.gamma)?;

        let mut encoder_dims = vec![FEATURE_DIM];
        encoder_dims.extend_from_slice(&config.encoder_dims);
        let encoder_acts = vec![Activation::Relu; encoder_dims.len() - 1];

        let decoder_dims: Vec<usize> = encoder_dims.iter().rev().copied().collect();
        let mut decoder_acts = vec![Activation::Relu; decoder_dims.len() - 1];
        *decoder_acts.last_mut().unwrap() = Activation::Sigmoid;

        let mut classifier_dims = vec![FEATURE_DIM];
        classifier_dims.extend_from_slice(&config.classifier_dims);
        classifier_dims.push(1);
        let mut classifier_acts = vec![Activation::Relu; classifier_dims.len() - 1];
        *classifier_acts.last_mut().unwrap() = Activation::Sigmoid;

        let model = DaeMlp {
            encoder: Network::init(&encoder_dims, &encoder_acts, config.seed, Stream::EncoderInit)?,
            decoder: Network::init(&decoder_dims, &decoder_acts, config.seed, Stream::DecoderInit)?,
            classifier: Network::init(&classifier_dims, &classifier_acts, config.seed, Stream::ClassifierInit)?,
            lambda: config.lambda,
            gamma: config.gamma,
            threshold: ThresholdState::Unset,
            scaler: None,
        };
        model.check_invariants()?;
        Ok(model)
    }

    /// Assembles a model from existing parts; used by persistence and tests.
    pub fn from_parts(
        encoder: Network,
        decoder: Network,
        classifier: Network,
        lambda: f64,
        gamma: f64,
        threshold: ThresholdState,
        scaler: Option<Scaler>,
    ) -> Result<Self> {
        let model = DaeMlp {
            encoder,
            decoder,
            classifier,
            lambda,
            gamma,
            threshold,
            scaler,
        };
        model.check_invariants()?;
        Ok(model)
    }

    fn check_invariants(&self) -> Result<()> {
        check_score_weights(self.lambda, self.gamma)?;
        if self.encoder.in_dim() != FEATURE_DIM {
            return Err(Error::shape("encoder input", FEATURE_DIM, self.encoder.in_dim()));
        }
        if self.decoder.out_dim() != FEATURE_DIM {
            return Err(Error::shape("decoder output", FEATURE_DIM, self.decoder.out_dim()));
        }
        if self.classifier.in_dim() != FEATURE_DIM {
            return Err(Error::shape("classifier input", FEATURE_DIM, self.classifier.in_dim()));
        }
        if self.encoder.out_dim() != self.decoder.in_dim() {
            return Err(Error::shape(
                "decoder input (bottleneck)",
                self.encoder.out_dim(),
                self.decoder.in_dim(),
            ));
        }
        if self.classifier.out_dim() != 1 {
            return Err(Error::shape("classifier output", 1, self.classifier.out_dim()));
        }
        let last = self.classifier.layers().last().unwrap();
        if last.activation() != Activation::Sigmoid {
            return Err(Error::domain("classifier must end in a sigmoid unit"));
        }
        let last = self.decoder.layers().last().unwrap();
        if last.activation() != Activation::Sigmoid {
            return Err(Error::domain("decoder must end in a sigmoid layer"));
        }
        if let ThresholdState::Calibrated { value } | ThresholdState::Stale { value } = self.threshold {
            if !value.is_finite() {
                return Err(Error::numeric("threshold must be finite"));
            }
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn bottleneck_dim(&self) -> usize {
        self.encoder.out_dim()
    }

    pub fn layer_count(&self) -> usize {
        self.encoder.layers().len() + self.decoder.layers().len() + self.classifier.layers().len()
    }

    pub fn threshold_state(&self) -> ThresholdState {
        self.threshold
    }

    /// The calibrated threshold, if there is a usable one.
    pub fn threshold(&self) -> Option<f64> {
        match self.threshold {
            ThresholdState::Calibrated { value } => Some(value),
            _ => None,
        }
    }

    pub fn set_threshold(&mut self, tau: f64) -> Result<()> {
        if !tau.is_finite() {
            return Err(Error::numeric("threshold must be finite"));
        }
        self.threshold = ThresholdState::Calibrated { value: tau };
        Ok(())
    }

    pub(crate) fn invalidate_threshold(&mut self) {
        self.threshold = match self.threshold {
            ThresholdState::Calibrated { value } | ThresholdState::Stale { value } => {
                ThresholdState::Stale { value }
            }
            ThresholdState::Unset => ThresholdState::Unset,
        };
    }

    pub fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    pub fn set_scaler(&mut self, scaler: Scaler) {
        self.scaler = Some(scaler);
    }

    pub fn encoder(&self) -> &Network {
        &self.encoder
    }

    pub fn decoder(&self) -> &Network {
        &self.decoder
    }

    pub fn classifier(&self) -> &Network {
        &self.classifier
    }

    pub(crate) fn networks_mut(&mut self) -> (&mut Network, &mut Network, &mut Network) {
        (&mut self.encoder, &mut self.decoder, &mut self.classifier)
    }

    pub(crate) fn classifier_mut(&mut self) -> &mut Network {
        &mut self.classifier
    }

    /// Canonical byte image of the autoencoder parameters; the frozen-DAE
    /// contract of [`update_mlp`] is checked against these bytes.
    pub fn dae_param_bytes(&self) -> Vec<u8> {
        let mut bytes = self.encoder.param_bytes();
        bytes.extend(self.decoder.param_bytes());
        bytes
    }

    pub fn classifier_param_bytes(&self) -> Vec<u8> {
        self.classifier.param_bytes()
    }

    /// `decoder(encoder(x))` for a scaled sample; components are in (0, 1).
    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        let latent = self.encoder.forward(x)?;
        self.decoder.forward(&latent)
    }

    /// Mean squared reconstruction error of a scaled sample.
    pub fn reconstruction_error(&self, x: &[f64]) -> Result<f64> {
        mse(x, &self.reconstruct(x)?)
    }

    /// Predicted anomaly probability in (0, 1).
    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        Ok(self.classifier.forward(x)?[0])
    }

    /// The classifier's own label rule: anomaly iff `y ≥ 0.5`.
    pub fn classify_label(probability: f64) -> Label {
        if probability >= 0.5 {
            Label::Anomaly
        } else {
            Label::Normal
        }
    }

    /// Blended anomaly score of a scaled sample under the model's weights.
    pub fn anomaly_score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.score_parts(x)?.score)
    }

    pub fn score_parts(&self, x: &[f64]) -> Result<ScoreParts> {
        let reconstruction_error = self.reconstruction_error(x)?;
        let probability = self.classify(x)?;
        Ok(ScoreParts {
            reconstruction_error,
            probability,
            score: combine_score(self.lambda, self.gamma, reconstruction_error, probability),
        })
    }

    /// Reusable scorer with the model's own weights.
    pub fn scorer(&self) -> Scorer<'_> {
        self.scorer_with(self.lambda, self.gamma)
    }

    /// Reusable scorer with explicit weights (`gamma = 0` gives the
    /// autoencoder-only detector).
    pub fn scorer_with(&self, lambda: f64, gamma: f64) -> Scorer<'_> {
        Scorer {
            scratch: Scratch::for_nets(&[&self.encoder, &self.decoder, &self.classifier]),
            latent: vec![0.0; self.encoder.out_dim()],
            reconstruction: vec![0.0; FEATURE_DIM],
            model: self,
            lambda,
            gamma,
        }
    }
}

fn check_score_weights(lambda: f64, gamma: f64) -> Result<()> {
    if !(lambda.is_finite() && gamma.is_finite()) || lambda < 0.0 || gamma < 0.0 || lambda + gamma <= 0.0 {
        return Err(Error::domain(format!(
            "score weights need λ ≥ 0, γ ≥ 0, λ + γ > 0; got λ={lambda}, γ={gamma}"
        )));
    }
    Ok(())
}

/// Allocation-free scoring pipeline for batch evaluation and streaming
/// detection. One instance is single-threaded; create one per thread.
pub struct Scorer<'m> {
    model: &'m DaeMlp,
    lambda: f64,
    gamma: f64,
    scratch: Scratch,
    latent: Vec<f64>,
    reconstruction: Vec<f64>,
}

impl Scorer<'_> {
    pub fn score(&mut self, x: &[f64; FEATURE_DIM]) -> Result<ScoreParts> {
        let latent_out = self.model.encoder.forward_into(x, &mut self.scratch)?;
        self.latent.copy_from_slice(latent_out);
        let recon_out = self.model.decoder.forward_into(&self.latent, &mut self.scratch)?;
        self.reconstruction.copy_from_slice(recon_out);
        let reconstruction_error = mse(x, &self.reconstruction)?;
        let probability = self.model.classifier.forward_into(x, &mut self.scratch)?[0];
        Ok(ScoreParts {
            reconstruction_error,
            probability,
            score: combine_score(self.lambda, self.gamma, reconstruction_error, probability),
        })
    }
}
