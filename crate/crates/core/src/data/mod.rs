//! Dataset layer: the 21-feature record schema, CSV ingestion, min-max
//! scaling, deterministic stratified splits, class hold-out, and the seeded
//! synthetic traffic generator.

mod io;
mod synth;

pub use io::{load_records, parse_feature_fields, save_records, write_records};
pub use synth::{generate, AttackSpec, ClassParams, MixtureComponent, OverlapProfile, SyntheticSpec};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, Stream};

/// Every traffic sample carries exactly this many features.
pub const FEATURE_DIM: usize = 21;

/// Binary state of a sample. Anomaly is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Normal,
    Anomaly,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Normal => 0,
            Label::Anomaly => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Normal),
            1 => Ok(Label::Anomaly),
            other => Err(Error::domain(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

/// The five attack families carried in the `attack_class` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackClass {
    /// Brute-force password guessing against node accounts ("BP").
    #[serde(rename = "BP")]
    BruteForcePassword,
    /// Packet-flood denial of service ("DoS").
    #[serde(rename = "DoS")]
    DenialOfService,
    /// Contract calls forced over the block gas limit ("DoS_gas").
    #[serde(rename = "DoS_gas")]
    GasLimitDos,
    /// Overflow/underflow exploitation of contract checks ("OaU").
    #[serde(rename = "OaU")]
    OverflowUnderflow,
    /// Flooding of meaningless transactions ("FoT").
    #[serde(rename = "FoT")]
    TransactionFlood,
}

pub const ALL_ATTACK_CLASSES: [AttackClass; 5] = [
    AttackClass::BruteForcePassword,
    AttackClass::DenialOfService,
    AttackClass::GasLimitDos,
    AttackClass::OverflowUnderflow,
    AttackClass::TransactionFlood,
];

impl AttackClass {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackClass::BruteForcePassword => "BP",
            AttackClass::DenialOfService => "DoS",
            AttackClass::GasLimitDos => "DoS_gas",
            AttackClass::OverflowUnderflow => "OaU",
            AttackClass::TransactionFlood => "FoT",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ALL_ATTACK_CLASSES
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown attack_class '{s}'")))
    }
}

impl std::fmt::Display for AttackClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One traffic sample: 21 features plus optional supervision.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    features: [f64; FEATURE_DIM],
    label: Option<Label>,
    attack_class: Option<AttackClass>,
}

impl FeatureRecord {
    pub fn new(
        features: [f64; FEATURE_DIM],
        label: Option<Label>,
        attack_class: Option<AttackClass>,
    ) -> Result<Self> {
        if let Some(bad) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("feature f{:02} is not finite", bad + 1)));
        }
        if attack_class.is_some() && label != Some(Label::Anomaly) {
            return Err(Error::domain("attack_class requires label 1"));
        }
        Ok(Self {
            features,
            label,
            attack_class,
        })
    }

    pub fn features(&self) -> &[f64; FEATURE_DIM] {
        &self.features
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }

    pub fn attack_class(&self) -> Option<AttackClass> {
        self.attack_class
    }
}

/// Per-feature min/max pairs fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl Scaler {
    /// Fits per-feature bounds. Fit on the training split only.
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::domain("cannot fit a scaler on an empty dataset"));
        }
        let mut mins = vec![f64::INFINITY; FEATURE_DIM];
        let mut maxs = vec![f64::NEG_INFINITY; FEATURE_DIM];
        for rec in train.records() {
            for (i, &v) in rec.features.iter().enumerate() {
                mins[i] = mins[i].min(v);
                maxs[i] = maxs[i].max(v);
            }
        }
        Ok(Scaler { mins, maxs })
    }

    /// Maps one raw value of feature `i` into `[0, 1]`, clamping out-of-range
    /// values; a constant training column maps everything to 0.5.
    #[inline]
    pub fn scale_value(&self, i: usize, v: f64) -> f64 {
        let (lo, hi) = (self.mins[i], self.maxs[i]);
        if hi > lo {
            ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }

    pub fn scale_features(&self, raw: &[f64; FEATURE_DIM]) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        for (i, (&v, o)) in raw.iter().zip(out.iter_mut()).enumerate() {
            *o = self.scale_value(i, v);
        }
        out
    }

    /// Inverse map for values produced by `scale_value` on in-range inputs.
    pub fn descale_value(&self, i: usize, v: f64) -> f64 {
        let (lo, hi) = (self.mins[i], self.maxs[i]);
        if hi > lo {
            lo + v * (hi - lo)
        } else {
            lo
        }
    }

    /// Scales every record; the result remembers this scaler.
    pub fn apply(&self, ds: &Dataset) -> Dataset {
        let records = ds
            .records()
            .iter()
            .map(|r| FeatureRecord {
                features: self.scale_features(&r.features),
                label: r.label,
                attack_class: r.attack_class,
            })
            .collect();
        Dataset {
            records,
            scaler: Some(self.clone()),
        }
    }

    pub(crate) fn validate(&self, context: &str) -> Result<()> {
        if self.mins.len() != FEATURE_DIM || self.maxs.len() != FEATURE_DIM {
            return Err(Error::format(format!(
                "{context}: scaler must carry {FEATURE_DIM} min/max pairs, got {}/{}",
                self.mins.len(),
                self.maxs.len()
            )));
        }
        for i in 0..FEATURE_DIM {
            if !self.mins[i].is_finite() || !self.maxs[i].is_finite() {
                return Err(Error::format(format!("{context}: scaler bound f{:02} is not finite", i + 1)));
            }
            if self.mins[i] > self.maxs[i] {
                return Err(Error::format(format!("{context}: scaler min exceeds max at f{:02}", i + 1)));
            }
        }
        Ok(())
    }
}

/// An ordered collection of records, optionally min-max scaled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    records: Vec<FeatureRecord>,
    scaler: Option<Scaler>,
}

impl Dataset {
    pub fn new(records: Vec<FeatureRecord>) -> Self {
        Dataset {
            records,
            scaler: None,
        }
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    /// Records passing the predicate, same order, same scaler.
    pub fn filtered(&self, keep: impl Fn(&FeatureRecord) -> bool) -> Dataset {
        Dataset {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            scaler: self.scaler.clone(),
        }
    }

    /// Appends `other`; the scaler survives only if both sides agree.
    pub fn concat(&self, other: &Dataset) -> Dataset {
        let mut records = self.records.clone();
        records.extend(other.records.iter().cloned());
        Dataset {
            records,
            scaler: if self.scaler == other.scaler {
                self.scaler.clone()
            } else {
                None
            },
        }
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == Some(label)).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count_label(Label::Normal) > 0 && self.count_label(Label::Anomaly) > 0
    }

    /// Class histogram in canonical order: normal, unlabeled, then attacks.
    pub fn class_counts(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        let normal = self.count_label(Label::Normal);
        if normal > 0 {
            out.push(("normal".to_owned(), normal));
        }
        let unlabeled = self.records.iter().filter(|r| r.label.is_none()).count();
        if unlabeled > 0 {
            out.push(("unlabeled".to_owned(), unlabeled));
        }
        for class in ALL_ATTACK_CLASSES {
            let n = self.records.iter().filter(|r| r.attack_class == Some(class)).count();
            if n > 0 {
                out.push((class.as_str().to_owned(), n));
            }
        }
        let bare_anomaly = self
            .records
            .iter()
            .filter(|r| r.label == Some(Label::Anomaly) && r.attack_class.is_none())
            .count();
        if bare_anomaly > 0 {
            out.push(("anomaly (unattributed)".to_owned(), bare_anomaly));
        }
        out
    }
}

/// Seeded, stratified train/test split.
///
/// Strata are `(label, attack_class)` groups; each is shuffled and cut so the
/// train share is within one sample of `ratio` while both sides stay
/// non-empty. Record order within each side follows the input.
pub fn split(ds: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    split_with_stream(ds, ratio, seed, Stream::TrainTestSplit)
}

pub(crate) fn split_with_stream(
    ds: &Dataset,
    ratio: f64,
    seed: u64,
    stream: Stream,
) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::domain(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    if ds.is_empty() {
        return Err(Error::domain("cannot split an empty dataset"));
    }

    let mut strata: BTreeMap<(Option<Label>, Option<AttackClass>), Vec<usize>> = BTreeMap::new();
    for (i, rec) in ds.records.iter().enumerate() {
        strata.entry((rec.label, rec.attack_class)).or_default().push(i);
    }

    let mut rng = rng_for(seed, stream);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (key, mut idx) in strata {
        if idx.len() < 2 {
            return Err(Error::domain(format!(
                "stratum {key:?} has {} sample(s); need at least 2 to stratify",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let want = (ratio * idx.len() as f64).round() as usize;
        let n_train = want.clamp(1, idx.len() - 1);
        train_idx.extend_from_slice(&idx[..n_train]);
        test_idx.extend_from_slice(&idx[n_train..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |idx: &[usize]| Dataset {
        records: idx.iter().map(|&i| ds.records[i].clone()).collect(),
        scaler: ds.scaler.clone(),
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

/// Removes every record of `class`; returns `(reduced, held)`.
pub fn hold_out_class(ds: &Dataset, class: AttackClass) -> Result<(Dataset, Dataset)> {
    let held = ds.filtered(|r| r.attack_class == Some(class));
    if held.is_empty() {
        return Err(Error::domain(format!("attack class {class} is not present in the dataset")));
    }
    let reduced = ds.filtered(|r| r.attack_class != Some(class));
    Ok((reduced, held))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(v: f64, label: Option<Label>, class: Option<AttackClass>) -> FeatureRecord {
        FeatureRecord::new([v; FEATURE_DIM], label, class).unwrap()
    }

    fn rec_with(feature0: f64, rest: f64, label: Option<Label>) -> FeatureRecord {
        let mut f = [rest; FEATURE_DIM];
        f[0] = feature0;
        FeatureRecord::new(f, label, None).unwrap()
    }

    #[test]
    fn record_rejects_non_finite_and_inconsistent_class() {
        let mut f = [0.0; FEATURE_DIM];
        f[6] = f64::NAN;
        assert!(FeatureRecord::new(f, None, None).is_err());
        assert!(FeatureRecord::new(
            [0.0; FEATURE_DIM],
            Some(Label::Normal),
            Some(AttackClass::DenialOfService)
        )
        .is_err());
        assert!(FeatureRecord::new([0.0; FEATURE_DIM], None, Some(AttackClass::DenialOfService)).is_err());
    }

    #[test]
    fn scaler_midpoint_and_clamping() {
        let train = Dataset::new(vec![rec_with(2.0, 0.0, None), rec_with(4.0, 1.0, None)]);
        let scaler = Scaler::fit(&train).unwrap();
        assert_eq!(scaler.scale_value(0, 3.0), 0.5);
        assert_eq!(scaler.scale_value(0, 1.0), 0.0);
        assert_eq!(scaler.scale_value(0, 9.0), 1.0);
    }

    #[test]
    fn constant_column_scales_to_half() {
        let train = Dataset::new(vec![rec(7.0, None, None), rec(7.0, None, None)]);
        let scaler = Scaler::fit(&train).unwrap();
        let scaled = scaler.apply(&train);
        assert!(scaled.records()[0].features().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn scale_then_descale_reproduces_train_rows() {
        let train = Dataset::new(vec![
            rec_with(2.0, -3.5, None),
            rec_with(4.0, 10.25, None),
            rec_with(3.3, 1.0, None),
        ]);
        let scaler = Scaler::fit(&train).unwrap();
        for r in train.records() {
            let scaled = scaler.scale_features(r.features());
            for i in 0..FEATURE_DIM {
                let back = scaler.descale_value(i, scaled[i]);
                assert!((back - r.features()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn split_is_seeded_stratified_partition() {
        let mut records = Vec::new();
        for i in 0..600 {
            records.push(rec_with(i as f64, 0.0, Some(Label::Normal)));
        }
        for i in 0..400 {
            records.push(
                FeatureRecord::new(
                    [i as f64; FEATURE_DIM],
                    Some(Label::Anomaly),
                    Some(AttackClass::DenialOfService),
                )
                .unwrap(),
            );
        }
        let ds = Dataset::new(records);
        let (train, test) = split(&ds, 0.8, 13).unwrap();
        assert_eq!(train.len(), 800);
        assert_eq!(test.len(), 200);
        assert_eq!(train.count_label(Label::Normal), 480);
        assert_eq!(test.count_label(Label::Normal), 120);

        let (train2, test2) = split(&ds, 0.8, 13).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);

        let (train3, _) = split(&ds, 0.8, 14).unwrap();
        assert_ne!(train, train3);
    }

    #[test]
    fn split_proportions_within_one_sample_per_stratum() {
        let mut records = Vec::new();
        for _ in 0..7 {
            records.push(rec(0.0, Some(Label::Normal), None));
        }
        for _ in 0..5 {
            records.push(rec(1.0, Some(Label::Anomaly), Some(AttackClass::BruteForcePassword)));
        }
        let ds = Dataset::new(records);
        let (train, _) = split(&ds, 0.8, 7).unwrap();
        let normal_train = train.count_label(Label::Normal) as f64;
        assert!((normal_train - 0.8 * 7.0).abs() <= 1.0);
        let bp_train = train.len() as f64 - normal_train;
        assert!((bp_train - 0.8 * 5.0).abs() <= 1.0);
    }

    #[test]
    fn split_rejects_tiny_stratum_and_bad_ratio() {
        let ds = Dataset::new(vec![
            rec(0.0, Some(Label::Normal), None),
            rec(0.0, Some(Label::Normal), None),
            rec(1.0, Some(Label::Anomaly), None),
        ]);
        assert!(split(&ds, 0.8, 1).is_err());
        let ok = Dataset::new(vec![
            rec(0.0, Some(Label::Normal), None),
            rec(0.0, Some(Label::Normal), None),
        ]);
        assert!(split(&ok, 1.0, 1).is_err());
        assert!(split(&ok, 0.5, 1).is_ok());
    }

    #[test]
    fn hold_out_conserves_counts() {
        let mut records = Vec::new();
        for _ in 0..100 {
            records.push(rec(1.0, Some(Label::Anomaly), Some(AttackClass::BruteForcePassword)));
        }
        for _ in 0..40 {
            records.push(rec(0.0, Some(Label::Normal), None));
        }
        let ds = Dataset::new(records);
        let (reduced, held) = hold_out_class(&ds, AttackClass::BruteForcePassword).unwrap();
        assert_eq!(held.len(), 100);
        assert_eq!(reduced.len(), 40);
        assert_eq!(reduced.len() + held.len(), ds.len());
        assert!(hold_out_class(&ds, AttackClass::TransactionFlood).is_err());
    }

    #[test]
    fn holding_out_every_class_empties_the_anomaly_side() {
        let mut records = vec![rec(0.0, Some(Label::Normal), None)];
        for class in ALL_ATTACK_CLASSES {
            records.push(rec(1.0, Some(Label::Anomaly), Some(class)));
        }
        let mut ds = Dataset::new(records);
        for class in ALL_ATTACK_CLASSES {
            let (reduced, _) = hold_out_class(&ds, class).unwrap();
            ds = reduced;
        }
        assert_eq!(ds.count_label(Label::Anomaly), 0);
        assert_eq!(ds.len(), 1);
    }
}
