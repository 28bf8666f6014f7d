use mimo_detect::hwmodel::{build_shiftadd_plan, quantize, FixedPointFormat};
use mimo_detect::DetectError;
use proptest::prelude::*;

fn format() -> impl Strategy<Value = FixedPointFormat> {
    (1u32..=16, 0u32..=16).prop_map(|(i, f)| FixedPointFormat::new(i, f).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn quantize_is_idempotent(x in -1e5f64..1e5, fmt in format()) {
        let q = quantize(x, fmt);
        prop_assert_eq!(quantize(q, fmt), q);
    }

    #[test]
    fn quantize_is_monotone(a in -1e5f64..1e5, b in -1e5f64..1e5, fmt in format()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize(lo, fmt) <= quantize(hi, fmt));
    }

    #[test]
    fn quantize_error_is_bounded(x in -1e5f64..1e5, fmt in format()) {
        let q = quantize(x, fmt);
        prop_assert!(q.abs() <= fmt.max_value());
        if x.abs() <= fmt.max_value() {
            prop_assert!((q - x).abs() <= fmt.step() / 2.0);
        } else {
            prop_assert_eq!(q, fmt.max_value().copysign(x));
        }
        prop_assert_eq!((q / fmt.step()).fract(), 0.0);
    }

    #[test]
    fn format_round_trips_through_text(fmt in format()) {
        prop_assert_eq!(fmt.to_string().parse::<FixedPointFormat>().unwrap(), fmt);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plans_evaluate_exactly(
        targets in prop::collection::vec((0u64..512).prop_map(|t| 2 * t + 1), 1..6),
        inputs in prop::collection::vec(any::<i32>(), 8),
    ) {
        let plan = build_shiftadd_plan(&targets).unwrap();
        for &v in &inputs {
            let values = plan.evaluate(i64::from(v));
            for &t in targets.iter().filter(|&&t| t != 1) {
                let got = values.iter().find(|(c, _)| *c == t).map(|(_, x)| *x);
                prop_assert_eq!(got, Some(i128::from(t) * i128::from(v)), "target {}", t);
            }
        }
    }
}

#[test]
fn ties_round_away_from_zero() {
    let fmt = FixedPointFormat::new(4, 1).unwrap();
    assert_eq!(quantize(0.25, fmt), 0.5);
    assert_eq!(quantize(-0.25, fmt), -0.5);
    assert_eq!(quantize(100.0, fmt), 7.5);
    assert_eq!(quantize(-100.0, fmt), -7.5);
}

#[test]
fn invalid_inputs() {
    assert!(matches!(build_shiftadd_plan(&[4]), Err(DetectError::InvalidTarget(4))));
    assert!(matches!(build_shiftadd_plan(&[0]), Err(DetectError::InvalidTarget(0))));
    assert!("9".parse::<FixedPointFormat>().is_err());
    assert!(FixedPointFormat::new(0, 4).is_err());
}
