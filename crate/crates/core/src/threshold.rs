//! Threshold calibration: quantile seeding, the decayed upward grid search,
//! and the baseline strategies it is compared against.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::metrics::ScoredSet;
use crate::model::DaeMlp;

/// Settings of the decayed grid search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdSearchConfig {
    /// Percentile of normal reconstruction errors seeding the search.
    pub beta: f64,
    /// Initial step size ζ.
    pub zeta: f64,
    /// Step decay per pass.
    pub decay_rate: f64,
    /// Number of decay passes.
    pub decay_times: usize,
    /// Consecutive non-improvements tolerated inside one pass.
    pub patience: usize,
}

impl Default for ThresholdSearchConfig {
    fn default() -> Self {
        ThresholdSearchConfig {
            beta: 0.9,
            zeta: 0.001,
            decay_rate: 0.5,
            decay_times: 15,
            patience: 10,
        }
    }
}

impl ThresholdSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::domain(format!("beta must be in (0, 1), got {}", self.beta)));
        }
        if !(self.zeta.is_finite() && self.zeta > 0.0) {
            return Err(Error::domain(format!("zeta must be positive, got {}", self.zeta)));
        }
        if !(self.decay_rate > 0.0 && self.decay_rate < 1.0) {
            return Err(Error::domain(format!(
                "decay rate must be in (0, 1), got {}",
                self.decay_rate
            )));
        }
        if self.decay_times == 0 {
            return Err(Error::domain("decay times must be at least 1"));
        }
        if self.patience == 0 {
            return Err(Error::domain("patience must be at least 1"));
        }
        Ok(())
    }
}

/// How a threshold is chosen in the strategy comparison grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdStrategy {
    /// `k · μ` where μ is the mean of the pooled normal + anomaly
    /// reconstruction errors; the reference grid uses k in {1.0, 0.8, 0.5, 0.2}.
    MeanFraction(f64),
    /// Quantile of the normal reconstruction errors.
    Quantile(f64),
    /// The decayed grid search; handled by [`search_threshold`].
    Searched,
}

/// One accuracy probe of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Decay pass (1-based).
    pub pass: usize,
    pub tau: f64,
    pub accuracy: f64,
}

/// Outcome of the grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// The threshold the search settles on (the backtracked value after the
    /// last pass, faithful to the search procedure).
    pub tau: f64,
    pub tau_init: f64,
    /// Step size after all decay passes: `zeta · decay_rate^decay_times`.
    pub final_step: f64,
    pub trace: Vec<TraceEntry>,
}

impl SearchResult {
    /// The best probe seen; an alternative pick to the backtracked `tau`.
    pub fn best_entry(&self) -> &TraceEntry {
        let mut best = &self.trace[0];
        for e in &self.trace[1..] {
            if e.accuracy > best.accuracy {
                best = e;
            }
        }
        best
    }

    /// Accuracy recorded at the returned `tau`, if it was probed.
    pub fn final_accuracy(&self) -> Option<f64> {
        self.trace
            .iter()
            .rev()
            .find(|e| e.tau == self.tau)
            .map(|e| e.accuracy)
    }
}

/// Linear-interpolation sample quantile (Hyndman–Fan type 7):
/// `h = (n − 1) β`, interpolating between the two bracketing order
/// statistics.
pub fn quantile(values: &[f64], beta: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("quantile of an empty list"));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain(format!("quantile percentile must be in [0, 1], got {beta}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("quantile input contains a non-finite value"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * beta;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
    } else {
        Ok(sorted[sorted.len() - 1])
    }
}

/// Reconstruction errors of a normal-labeled dataset under the model.
fn normal_reconstruction_errors(model: &DaeMlp, normal_samples: &Dataset) -> Result<Vec<f64>> {
    if normal_samples.is_empty() {
        return Err(Error::domain("no normal samples to calibrate on"));
    }
    let mut errors = Vec::with_capacity(normal_samples.len());
    for (i, rec) in normal_samples.records().iter().enumerate() {
        if rec.label() != Some(Label::Normal) {
            return Err(Error::domain(format!(
                "record {i} is not normal-labeled; the initial threshold is defined on normal samples only"
            )));
        }
        errors.push(model.reconstruction_error(rec.features())?);
    }
    Ok(errors)
}

/// τ_init: the β-quantile of the reconstruction errors of normal samples.
pub fn initial_threshold(model: &DaeMlp, normal_samples: &Dataset, beta: f64) -> Result<f64> {
    quantile(&normal_reconstruction_errors(model, normal_samples)?, beta)
}

/// The decayed upward grid search over a pre-scored evaluation set.
///
/// For each of `decay_times` passes the threshold walks up in ζ steps,
/// re-evaluating accuracy; after `patience` consecutive non-improvements the
/// pass rewinds `patience · ζ`, halves ζ by `decay_rate`, and the next pass
/// continues. Only upward moves from `tau_init` are explored.
pub fn search_over_scores(scored: &ScoredSet, tau_init: f64, cfg: &ThresholdSearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if !scored.has_both_classes() {
        return Err(Error::domain("threshold search needs both classes in the evaluation set"));
    }
    if !tau_init.is_finite() {
        return Err(Error::numeric("initial threshold must be finite"));
    }

    let mut tau = tau_init;
    let mut zeta = cfg.zeta;
    let mut best_accuracy = f64::NEG_INFINITY;
    let mut run_of_worse = 0usize;
    let mut trace = Vec::new();

    for pass in 1..=cfg.decay_times {
        loop {
            let accuracy = scored.accuracy_at(tau);
            trace.push(TraceEntry { pass, tau, accuracy });
            tau += zeta;
            if accuracy > best_accuracy {
                best_accuracy = accuracy;
                run_of_worse = 0;
            } else {
                run_of_worse += 1;
            }
            if run_of_worse == cfg.patience {
                tau -= cfg.patience as f64 * zeta;
                zeta *= cfg.decay_rate;
                run_of_worse = 0;
                break;
            }
        }
    }

    Ok(SearchResult {
        tau,
        tau_init,
        final_step: zeta,
        trace,
    })
}

/// Runs the search for a trained model on a labeled evaluation set, scoring
/// every sample once with the model's own λ and γ.
pub fn search_threshold(model: &DaeMlp, eval_set: &Dataset, cfg: &ThresholdSearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let scored = ScoredSet::compute(model, eval_set, model.lambda(), model.gamma())?;
    if !scored.has_both_classes() {
        return Err(Error::domain("threshold search needs both classes in the evaluation set"));
    }
    let normals = eval_set.filtered(|r| r.label() == Some(Label::Normal));
    let tau_init = initial_threshold(model, &normals, cfg.beta)?;
    search_over_scores(&scored, tau_init, cfg)
}

/// A baseline threshold from reconstruction-error statistics.
pub fn baseline_threshold(
    strategy: ThresholdStrategy,
    normal_errors: &[f64],
    anomaly_errors: &[f64],
) -> Result<f64> {
    match strategy {
        ThresholdStrategy::MeanFraction(k) => {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::domain(format!("mean fraction must be positive, got {k}")));
            }
            if normal_errors.is_empty() || anomaly_errors.is_empty() {
                return Err(Error::domain(
                    "mean-fraction thresholds need both normal and anomaly reconstruction errors",
                ));
            }
            let n = (normal_errors.len() + anomaly_errors.len()) as f64;
            let sum: f64 = normal_errors.iter().chain(anomaly_errors.iter()).sum();
            Ok(k * sum / n)
        }
        ThresholdStrategy::Quantile(beta) => {
            if normal_errors.is_empty() {
                return Err(Error::domain("quantile threshold needs normal reconstruction errors"));
            }
            quantile(normal_errors, beta)
        }
        ThresholdStrategy::Searched => Err(Error::domain(
            "the searched strategy is produced by search_threshold, not baseline_threshold",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn scored_from(normal: &[f64], anomaly: &[f64]) -> ScoredSet {
        let mut entries: Vec<(f64, Label)> = normal.iter().map(|&s| (s, Label::Normal)).collect();
        entries.extend(anomaly.iter().map(|&s| (s, Label::Anomaly)));
        ScoredSet::from_entries(entries)
    }

    #[test]
    fn quantile_of_constant_list_is_the_constant() {
        let values = vec![3.25; 17];
        for beta in [0.0, 0.3, 0.9, 1.0] {
            assert_eq!(quantile(&values, beta).unwrap(), 3.25);
        }
    }

    #[test]
    fn quantile_type7_interpolation() {
        let values: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        // h = 9 * 0.9 = 8.1 between the 9th and 10th order statistic.
        assert!((quantile(&values, 0.9).unwrap() - 9.1).abs() < 1e-12);
    }

    #[test]
    fn quantile_endpoints_are_min_and_max() {
        let values = vec![5.0, -2.0, 7.5, 0.0];
        assert_eq!(quantile(&values, 0.0).unwrap(), -2.0);
        assert_eq!(quantile(&values, 1.0).unwrap(), 7.5);
    }

    #[test]
    fn quantile_is_order_invariant() {
        let a = vec![0.9, 0.1, 0.4, 0.7, 0.2, 0.5];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(quantile(&a, 0.63).unwrap(), quantile(&b, 0.63).unwrap());
    }

    #[test]
    fn quantile_rejects_empty_and_bad_beta() {
        assert!(quantile(&[], 0.5).is_err());
        assert!(quantile(&[1.0], 1.5).is_err());
        assert!(quantile(&[f64::NAN], 0.5).is_err());
    }

    #[test]
    fn search_finds_the_separating_band() {
        let scored = scored_from(&linspace(0.0, 0.4, 200), &linspace(0.6, 1.0, 200));
        let cfg = ThresholdSearchConfig::default();
        let result = search_over_scores(&scored, 0.2, &cfg).unwrap();
        assert!(
            result.tau > 0.4 && result.tau <= 0.6,
            "tau {} outside the separating band",
            result.tau
        );
        assert_eq!(scored.accuracy_at(result.tau), 1.0);
    }

    #[test]
    fn isolated_optimum_keeps_tau_near_init() {
        let scored = scored_from(&linspace(0.0, 0.2, 50), &linspace(0.8, 1.0, 50));
        let cfg = ThresholdSearchConfig::default();
        let result = search_over_scores(&scored, 0.5, &cfg).unwrap();
        assert!((result.tau - 0.5).abs() <= cfg.patience as f64 * cfg.zeta);
        // One improvement at the first probe, then pure patience: the trace
        // length is exactly 1 + decay_times * patience.
        assert_eq!(result.trace.len(), 1 + cfg.decay_times * cfg.patience);
    }

    #[test]
    fn trace_best_accuracy_is_non_decreasing() {
        let scored = scored_from(&linspace(0.05, 0.5, 120), &linspace(0.3, 0.9, 90));
        let result = search_over_scores(&scored, 0.2, &ThresholdSearchConfig::default()).unwrap();
        let mut best = f64::NEG_INFINITY;
        for e in &result.trace {
            best = best.max(e.accuracy);
        }
        let mut running = f64::NEG_INFINITY;
        for e in &result.trace {
            running = running.max(e.accuracy);
            assert!(running <= best + 1e-15);
        }
        assert_eq!(result.best_entry().accuracy, best);
    }

    #[test]
    fn final_step_is_exactly_the_decayed_zeta() {
        let scored = scored_from(&[0.1, 0.2], &[0.8, 0.9]);
        let cfg = ThresholdSearchConfig::default();
        let result = search_over_scores(&scored, 0.3, &cfg).unwrap();
        let expected = 0.001 * 0.5f64.powi(15);
        assert_eq!(result.final_step.to_bits(), expected.to_bits());
    }

    #[test]
    fn search_rejects_single_class_sets() {
        let scored = ScoredSet::from_entries(vec![(0.1, Label::Normal), (0.2, Label::Normal)]);
        assert!(search_over_scores(&scored, 0.1, &ThresholdSearchConfig::default()).is_err());
    }

    #[test]
    fn mean_fraction_baselines() {
        assert_eq!(
            baseline_threshold(ThresholdStrategy::MeanFraction(1.0), &[0.3, 0.3], &[0.3]).unwrap(),
            0.3
        );
        let tau = baseline_threshold(ThresholdStrategy::MeanFraction(0.5), &[0.2], &[0.6]).unwrap();
        assert!((tau - 0.2).abs() < 1e-15);
        assert!(baseline_threshold(ThresholdStrategy::MeanFraction(0.5), &[], &[0.6]).is_err());
        assert!(baseline_threshold(ThresholdStrategy::Searched, &[0.1], &[0.6]).is_err());
    }

    #[test]
    fn quantile_baseline_matches_quantile() {
        let errors = vec![0.05, 0.01, 0.03, 0.2, 0.07];
        assert_eq!(
            baseline_threshold(ThresholdStrategy::Quantile(0.9), &errors, &[]).unwrap(),
            quantile(&errors, 0.9).unwrap()
        );
    }
}
