use petbench::metrics::{confusion, macro_prf, per_class_prf, score};
use petbench::response_mapper::LabelValue;
use proptest::prelude::*;

/// Precision, recall and F1 for `class`, counted from scratch over the scored pairs.
fn brute(gold: &[u8], pred: &[Option<u8>], class: u8) -> (f64, f64, f64) {
    let pairs: Vec<(u8, u8)> = gold.iter().zip(pred).filter_map(|(&g, p)| p.map(|p| (g, p))).collect();
    let predicted = pairs.iter().filter(|(_, p)| *p == class).count();
    let actual = pairs.iter().filter(|(g, _)| *g == class).count();
    let hit = pairs.iter().filter(|(g, p)| *g == class && *p == class).count();
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let p = div(hit, predicted);
    let r = div(hit, actual);
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

fn to_labels(pred: &[Option<u8>]) -> Vec<LabelValue> {
    pred.iter()
        .map(|p| p.map_or(LabelValue::Unmapped, LabelValue::from_binary))
        .collect()
}

fn pairs() -> impl Strategy<Value = (Vec<u8>, Vec<Option<u8>>)> {
    (0usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..2, n),
            prop::collection::vec(prop::option::weighted(0.9, 0u8..2), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_brute_force((gold, pred) in pairs()) {
        let c = confusion(&gold, &to_labels(&pred)).unwrap();
        let pc = per_class_prf(&c);
        let m = macro_prf(&pc);
        let b0 = brute(&gold, &pred, 0);
        let b1 = brute(&gold, &pred, 1);
        for (got, want) in [
            (pc.class0.precision, b0.0), (pc.class0.recall, b0.1), (pc.class0.f1, b0.2),
            (pc.class1.precision, b1.0), (pc.class1.recall, b1.1), (pc.class1.f1, b1.2),
            (m.precision, (b0.0 + b1.0) / 2.0), (m.recall, (b0.1 + b1.1) / 2.0), (m.f1, (b0.2 + b1.2) / 2.0),
        ] {
            prop_assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        prop_assert_eq!(c.excluded, pred.iter().filter(|p| p.is_none()).count());
    }
}

#[test]
fn all_one_class_predictions() {
    let gold = [1, 1, 0, 1, 0, 0, 1];
    let r = score(&gold, &[LabelValue::One; 7]).unwrap();
    assert_eq!(r.per_class.class0.precision, 0.0);
    assert_eq!(r.per_class.class1.recall, 1.0);
    assert_eq!(r.macro_avg.recall, 0.5);
    // both classes present in gold but only one predicted: class-1 precision is the positive rate
    assert_eq!(r.macro_avg.precision, (4.0 / 7.0) / 2.0);
}
