//! Property tests for the arithmetic contracts: quantile vs an independent
//! oracle, macro-metric symmetry, scaler round-trips, split partitioning,
//! decision orientation and score monotonicity.

use proptest::prelude::*;

use chainwatch_core::data::{split, Dataset, FeatureRecord, Label, Scaler, FEATURE_DIM};
use chainwatch_core::metrics::{confusion, report};
use chainwatch_core::model::{combine_score, decide, Verdict};
use chainwatch_core::threshold::quantile;

/// Independent sort-and-interpolate quantile: same definition, different
/// arrangement of the arithmetic.
fn quantile_oracle(values: &[f64], beta: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = beta * (v.len() as f64 - 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    v[lo] * (1.0 - frac) + v[hi] * frac
}

proptest! {
    #[test]
    fn quantile_matches_independent_oracle(
        values in prop::collection::vec(-100.0f64..100.0, 1..200),
        beta in 0.0f64..=1.0,
    ) {
        let got = quantile(&values, beta).unwrap();
        let expected = quantile_oracle(&values, beta);
        prop_assert!((got - expected).abs() <= 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn quantile_is_permutation_invariant(
        mut values in prop::collection::vec(-100.0f64..100.0, 2..50),
        beta in 0.0f64..=1.0,
        rotate in 0usize..50,
    ) {
        let before = quantile(&values, beta).unwrap();
        let k = rotate % values.len();
        values.rotate_left(k);
        let after = quantile(&values, beta).unwrap();
        prop_assert_eq!(before.to_bits(), after.to_bits());
    }

    #[test]
    fn macro_metrics_are_symmetric_under_label_swap(
        pairs in prop::collection::vec((0u8..2, 0u8..2), 1..200),
    ) {
        let y_true: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let y_pred: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let swapped_true: Vec<u8> = y_true.iter().map(|v| 1 - v).collect();
        let swapped_pred: Vec<u8> = y_pred.iter().map(|v| 1 - v).collect();

        let a = report(confusion(&y_true, &y_pred).unwrap()).unwrap();
        let b = report(confusion(&swapped_true, &swapped_pred).unwrap()).unwrap();
        prop_assert!((a.accuracy - b.accuracy).abs() < 1e-15);
        prop_assert!((a.precision_macro - b.precision_macro).abs() < 1e-15);
        prop_assert!((a.recall_macro - b.recall_macro).abs() < 1e-15);
        prop_assert!((a.f1_macro - b.f1_macro).abs() < 1e-15);
    }

    #[test]
    fn report_matches_per_class_brute_force(
        pairs in prop::collection::vec((0u8..2, 0u8..2), 1..200),
    ) {
        let y_true: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let y_pred: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let r = report(confusion(&y_true, &y_pred).unwrap()).unwrap();

        // Brute force, counting from the raw vectors per class.
        let count = |t: u8, p: u8| {
            y_true
                .iter()
                .zip(y_pred.iter())
                .filter(|(&a, &b)| a == t && b == p)
                .count() as f64
        };
        let prec = |class: u8| {
            let predicted: f64 = count(0, class) + count(1, class);
            if predicted == 0.0 { 0.0 } else { count(class, class) / predicted }
        };
        let rec = |class: u8| {
            let actual: f64 = count(class, 0) + count(class, 1);
            if actual == 0.0 { 0.0 } else { count(class, class) / actual }
        };
        let f1 = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };

        let accuracy = (count(0, 0) + count(1, 1)) / y_true.len() as f64;
        prop_assert!((r.accuracy - accuracy).abs() < 1e-12);
        prop_assert!((r.precision_macro - (prec(0) + prec(1)) / 2.0).abs() < 1e-12);
        prop_assert!((r.recall_macro - (rec(0) + rec(1)) / 2.0).abs() < 1e-12);
        let f1_macro = (f1(prec(0), rec(0)) + f1(prec(1), rec(1))) / 2.0;
        prop_assert!((r.f1_macro - f1_macro).abs() < 1e-12);
    }

    #[test]
    fn scaling_then_descaling_reproduces_train_rows(
        rows in prop::collection::vec(prop::array::uniform21(-100.0f64..100.0), 2..40),
    ) {
        let records: Vec<FeatureRecord> = rows
            .iter()
            .map(|f| FeatureRecord::new(*f, None, None).unwrap())
            .collect();
        let ds = Dataset::new(records);
        let scaler = Scaler::fit(&ds).unwrap();
        let scaled = scaler.apply(&ds);
        for (orig, sc) in ds.records().iter().zip(scaled.records().iter()) {
            for i in 0..FEATURE_DIM {
                prop_assert!(sc.features()[i] >= 0.0 && sc.features()[i] <= 1.0);
                let back = scaler.descale_value(i, sc.features()[i]);
                prop_assert!((back - orig.features()[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn split_is_a_deterministic_partition(
        n_normal in 2usize..60,
        n_anomaly in 2usize..60,
        ratio in 0.1f64..0.9,
        seed in 0u64..1000,
    ) {
        let mut records = Vec::new();
        for i in 0..n_normal {
            records.push(FeatureRecord::new([i as f64; FEATURE_DIM], Some(Label::Normal), None).unwrap());
        }
        for i in 0..n_anomaly {
            records.push(FeatureRecord::new([-(i as f64); FEATURE_DIM], Some(Label::Anomaly), None).unwrap());
        }
        let ds = Dataset::new(records);
        let (train, test) = split(&ds, ratio, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), ds.len());
        prop_assert!(train.len() >= 2 && test.len() >= 2);
        let normal_train = train.count_label(Label::Normal);
        prop_assert!((normal_train as f64 - ratio * n_normal as f64).abs() <= 1.0);
        let (train2, test2) = split(&ds, ratio, seed).unwrap();
        prop_assert_eq!(train, train2);
        prop_assert_eq!(test, test2);
    }

    #[test]
    fn decide_partitions_the_line_at_tau(score in -1e9f64..1e9, tau in -1e9f64..1e9) {
        let verdict = decide(score, tau);
        prop_assert_eq!(verdict == Verdict::Anomaly, score >= tau);
        prop_assert_eq!(verdict == Verdict::Normal, score < tau);
    }

    #[test]
    fn score_is_strictly_monotone_in_each_component(
        l_re in 0.0f64..10.0,
        delta in 0.001f64..10.0,
        y in 0.0f64..1.0,
        lambda in 0.01f64..10.0,
        gamma in 0.01f64..10.0,
    ) {
        prop_assert!(combine_score(lambda, gamma, l_re + delta, y) > combine_score(lambda, gamma, l_re, y));
        let dy = (delta / 20.0).min(1.0 - y).max(1e-4);
        prop_assert!(combine_score(lambda, gamma, l_re, y + dy) > combine_score(lambda, gamma, l_re, y));
    }
}
