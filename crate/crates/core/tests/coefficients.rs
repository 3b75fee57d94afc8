use nudd_core::coefficients::{
    coefficient, fourier_profile, lemma_checks, naive_order, oracle_coefficient, outer_decomposition, predict_order,
    predict_overall, suppression_orders, vanishing_order, ErrorWord, FourierTarget, Harmonic, Lemma4Status,
};
use nudd_core::{ErrorVector, MpReal, NuddSpec, Precision};
use proptest::prelude::*;

fn p() -> Precision {
    Precision::new(40).unwrap()
}

fn spec(n: &[u32]) -> NuddSpec {
    NuddSpec::new(n).unwrap()
}

fn ev(s: &str) -> ErrorVector {
    s.parse().unwrap()
}

fn word(s: &str) -> ErrorWord {
    s.parse().unwrap()
}

#[test]
fn vanishing_examples() {
    assert!(coefficient(&spec(&[1]), &word("1"), p()).unwrap().abs() <= p().tolerance(8));
    assert!(coefficient(&spec(&[1, 1]), &word("11"), p()).unwrap().abs() <= p().tolerance(8));
}

#[test]
fn repeated_single_layer_word_factorizes() {
    // Nesting one function n times gives (∫f)^n / n!, and ∫f = 0 for N ≥ 1.
    let f = coefficient(&spec(&[2]), &word("1 1 1"), p()).unwrap();
    assert!(f.abs() <= p().tolerance(8), "{f}");
}

#[test]
fn nonvanishing_single_layer_word() {
    // F = −∫ g², g the running integral of the modulation: 1/192 + 1/96 + 1/192.
    let s = spec(&[2]);
    let w = word("1 0 1");
    let f = coefficient(&s, &w, p()).unwrap();
    assert!((&f + &MpReal::ratio(1, 48, p())).abs() <= p().tolerance(8), "{f}");
    let e16 = (&oracle_coefficient(&s, &w, p(), 16).unwrap() - &f).abs();
    let e32 = (&oracle_coefficient(&s, &w, p(), 32).unwrap() - &f).abs();
    assert!(e32 < e16 && e16 < MpReal::pow10(-3, p()));
}

#[test]
fn oracle_approaches_zero_on_vanishing_words() {
    let s = spec(&[2]);
    let w = word("1 1 1");
    let a = oracle_coefficient(&s, &w, p(), 8).unwrap().abs();
    let b = oracle_coefficient(&s, &w, p(), 16).unwrap().abs();
    let ratio = a.to_f64() / b.to_f64();
    assert!((ratio - 4.0).abs() < 0.5, "h² convergence, ratio {ratio}");
}

#[test]
fn vanishing_order_examples() {
    let v = vanishing_order(&spec(&[3]), ev("1"), 5, p()).unwrap();
    assert_eq!((v.order, v.saturated), (3, false));
    let v = vanishing_order(&spec(&[1, 1]), ev("11"), 3, p()).unwrap();
    assert!(v.order >= 2);
    for r in ["10", "01", "11"] {
        let v = vanishing_order(&spec(&[2, 2]), ev(r), 4, p()).unwrap();
        assert_eq!(v.order, 2, "r = {r}");
    }
}

#[test]
fn decomposition_examples() {
    let d = outer_decomposition(&spec(&[1, 1]), &word("11"), p()).unwrap();
    assert!(d.direct.abs() <= p().tolerance(8) && d.abs_diff() <= p().tolerance(15));
    for (s, w) in [(spec(&[2, 3]), "10 11 01"), (spec(&[2, 3]), "01 01 10"), (spec(&[1, 2, 1]), "101 011")] {
        let d = outer_decomposition(&s, &word(w), p()).unwrap();
        assert!(d.abs_diff() <= p().tolerance(15), "{s} {w}");
    }
}

fn populated(s: &NuddSpec, t: FourierTarget) -> Vec<Harmonic> {
    let rep = fourier_profile(s, t, 20, p()).unwrap();
    assert!(rep.passes(1e-10), "{t:?}: {}", rep.max_forbidden_relative);
    rep.populated.iter().map(|t| t.harmonic).collect()
}

#[test]
fn fourier_examples() {
    let h = populated(&spec(&[2]), FourierTarget::Layer(0));
    assert_eq!(h, [Harmonic::Sin(3), Harmonic::Sin(9), Harmonic::Sin(15)]);
    let h = populated(&spec(&[2, 3]), FourierTarget::Layer(0));
    assert!(!h.is_empty() && h.iter().all(|h| matches!(h, Harmonic::Cos(m) if m % 8 == 0)), "{h:?}");
    let h = populated(&spec(&[3, 3]), FourierTarget::Layer(0));
    assert!(!h.is_empty() && h.iter().all(|h| matches!(h, Harmonic::Sin(m) if m % 8 == 0)), "{h:?}");
}

#[test]
fn suppression_order_examples() {
    assert_eq!(suppression_orders(&spec(&[1, 3, 5, 7])), [1, 2, 2, 2]);
    assert_eq!(suppression_orders(&spec(&[2, 4, 1, 6])), [2, 4, 1, 2]);
    assert_eq!(suppression_orders(&spec(&[2, 4, 6, 8])), [2, 4, 6, 8]);
}

#[test]
fn predictor_examples() {
    assert_eq!(predict_order(&spec(&[2, 4, 6, 8]), ev("1000")).unwrap(), 2);
    assert_eq!(predict_order(&spec(&[2, 4, 6, 3]), ev("0101")).unwrap(), 5);
    assert_eq!(predict_order(&spec(&[7, 5, 3, 1]), ev("1111")).unwrap(), 10);
    assert_eq!(predict_order(&spec(&[2, 4, 1, 6]), ev("0001")).unwrap(), 2);
    assert_eq!(predict_order(&spec(&[3, 1, 4]), ev("000")).unwrap(), 0);
    assert!(predict_order(&spec(&[3, 1, 4]), ev("00")).is_err());

    assert_eq!(predict_overall(&spec(&[2, 4, 1, 6])), 1);
    assert_eq!(predict_overall(&spec(&[2, 4, 6, 8])), 2);
    assert_eq!(predict_overall(&spec(&[7, 5, 3, 1])), 1);

    assert_eq!(naive_order(&spec(&[2, 4, 6, 3]), ev("0011")).unwrap(), 6);
    assert_eq!(naive_order(&spec(&[7, 5, 3, 1]), ev("1111")).unwrap(), 7);
    assert_eq!(naive_order(&spec(&[7, 5, 3, 1]), ev("0000")).unwrap(), 0);
}

#[test]
fn lemma_examples() {
    let rep = lemma_checks(&spec(&[2, 4, 6, 3]), 1000, 3).unwrap();
    assert_eq!(rep.subadditivity_violations, 0);
    let rep = lemma_checks(&spec(&[1, 3, 5, 7]), 100, 4).unwrap();
    assert_eq!(rep.odd_parity_minimum, Lemma4Status::Checked { minimum: 1, expected: 1 });
    let rep = lemma_checks(&spec(&[2, 4, 6, 1]), 100, 5).unwrap();
    assert_eq!(rep.odd_parity_minimum, Lemma4Status::Skipped);
    assert!(rep.holds());
    assert!(lemma_checks(&spec(&[3]), 10, 6).is_err());
}

fn small_spec() -> impl Strategy<Value = NuddSpec> {
    prop::collection::vec(1..=3u32, 1..=3).prop_map(|o| spec(&o))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decomposition_identity_holds(s in small_spec(), bits in prop::collection::vec(0..8u32, 1..=3)) {
        let ell = s.ell();
        let w = ErrorWord::new(bits.iter().map(|b| ErrorVector::new(b & ((1 << ell) - 1), ell)).collect()).unwrap();
        let d = outer_decomposition(&s, &w, p()).unwrap();
        prop_assert!(d.abs_diff() <= p().tolerance(15));
    }

    #[test]
    fn coefficients_are_bounded_by_inverse_factorial(s in small_spec(), bits in prop::collection::vec(0..8u32, 1..=4)) {
        let ell = s.ell();
        let n = bits.len();
        let w = ErrorWord::new(bits.iter().map(|b| ErrorVector::new(b & ((1 << ell) - 1), ell)).collect()).unwrap();
        let f = coefficient(&s, &w, p()).unwrap();
        let mut bound = MpReal::one(p());
        for k in 2..=n as i64 {
            bound = bound.div_i64(k);
        }
        prop_assert!(f.abs() <= &bound + &p().tolerance(8));
    }

    #[test]
    fn predictor_is_a_lower_bound_on_two_layers(n1 in 1..=3u32, n2 in 1..=3u32, r in 1..4u32) {
        let s = spec(&[n1, n2]);
        let r = ErrorVector::new(r, 2);
        let want = predict_order(&s, r).unwrap();
        let v = vanishing_order(&s, r, want as usize + 1, p()).unwrap();
        prop_assert!(v.order >= want);
    }
}
