use proptest::prelude::*;
use std::f64::consts::LN_10;

use relinfo::{binomial_loglik, lod_fixed, lod_mle_vs_null, mle, BinomialData, LogBase};

fn data() -> impl Strategy<Value = BinomialData> {
    (1u64..2000).prop_flat_map(|m| (0..=m).prop_map(move |x| BinomialData::new(x, m).unwrap()))
}

fn prob() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

proptest! {
    #[test]
    fn identical_parameters_give_zero(d in data(), p in prob()) {
        prop_assert_eq!(lod_fixed(d, p, p).unwrap().value, 0.0);
    }

    #[test]
    fn antisymmetric(d in data(), p1 in prob(), p2 in prob()) {
        let a = lod_fixed(d, p1, p2).unwrap().value;
        let b = lod_fixed(d, p2, p1).unwrap().value;
        prop_assert!((a + b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn fixed_lod_is_a_loglik_difference(d in data(), p1 in prob(), p2 in prob()) {
        let direct = lod_fixed(d, p1, p2).unwrap().value;
        let diff = binomial_loglik(d, p1, LogBase::Natural).unwrap()
            - binomial_loglik(d, p2, LogBase::Natural).unwrap();
        prop_assert!((direct - diff).abs() <= 1e-9 * diff.abs().max(1.0));
    }

    #[test]
    fn mle_vs_null_nonnegative(d in data(), p0 in prob()) {
        let v = lod_mle_vs_null(d, p0).unwrap().value;
        prop_assert!(v >= 0.0);
        if mle(d) == p0 {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn mle_is_optimal_on_a_grid(d in data()) {
        let hat = mle(d);
        prop_assume!(hat > 0.0 && hat < 1.0);
        for i in 1..100 {
            let q = i as f64 / 100.0;
            let v = lod_fixed(d, hat, q).unwrap().value;
            prop_assert!(v >= -1e-9, "lod({hat}, {q}) = {v}");
        }
    }

    #[test]
    fn additive_over_concatenation(a in data(), b in data(), p1 in prob(), p2 in prob()) {
        let joint = lod_fixed(a.concat(&b), p1, p2).unwrap().value;
        let split = lod_fixed(a, p1, p2).unwrap().value + lod_fixed(b, p1, p2).unwrap().value;
        prop_assert!((joint - split).abs() <= 1e-12 * joint.abs().max(1.0));
    }

    #[test]
    fn base_ten_rescales_by_ln10(d in data(), p1 in prob(), p2 in prob()) {
        let e = lod_fixed(d, p1, p2).unwrap();
        let t = e.in_base(LogBase::Ten);
        prop_assert!((t.value * LN_10 - e.value).abs() <= 1e-12 * e.value.abs().max(1.0));
        let ll_e = binomial_loglik(d, p1, LogBase::Natural).unwrap();
        let ll_t = binomial_loglik(d, p1, LogBase::Ten).unwrap();
        prop_assert!((ll_t * LN_10 - ll_e).abs() <= 1e-12 * ll_e.abs().max(1.0));
    }
}

#[test]
fn mle_vs_null_zero_only_at_null() {
    let d = BinomialData::new(30, 60).unwrap();
    assert_eq!(lod_mle_vs_null(d, 0.5).unwrap().value, 0.0);
    assert!(lod_mle_vs_null(d, 0.49).unwrap().value > 0.0);
}
