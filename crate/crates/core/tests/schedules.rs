use proptest::prelude::*;
use recur_core::schedule::{make_schedule, Case};
use recur_core::Ext;

fn ext() -> impl Strategy<Value = Ext> {
    prop_oneof![
        1 => Just(Ext::Inf),
        1 => Just(Ext::Finite(0.0)),
        4 => (0.01f64..20.0).prop_map(Ext::Finite),
    ]
}

fn check(a: Ext, b: Ext, terms: usize) -> Result<(), TestCaseError> {
    let s = make_schedule(a, b, terms).unwrap();
    prop_assert!(s.len() >= terms);
    // gamma can underflow f64, so positivity is checked on the log scale
    for p in 0..s.len() {
        prop_assert!(s.log_ell[p].is_finite() && s.log_gamma[p].is_finite());
        prop_assert!(s.log_ell[p] > 0.0 || p == 0);
    }
    // log ell itself loses the step once ell is huge; the gap keeps it
    for p in 1..s.len() {
        prop_assert!(s.log_gap(p).is_finite(), "ell not increasing at {}", p);
    }
    if s.case != Case::IV {
        prop_assert!(s.e_violations().is_empty(), "case {:?} breaks (e) at {:?}", s.case, &s.e_violations()[..1]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn case_selection_is_total(a in ext(), b in ext()) {
        match Case::of(a, b) {
            Ok(_) => prop_assert!(a <= b),
            Err(_) => prop_assert!(a > b),
        }
    }

    #[test]
    fn schedules_are_increasing_and_respect_e(a in ext(), b in ext()) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        check(a, b, 200)?;
    }
}

#[test]
fn long_schedules_stay_finite() {
    for (a, b) in [
        (Ext::Finite(0.6), Ext::Finite(1.0)),
        (Ext::Finite(0.0), Ext::Finite(3.0)),
        (Ext::Finite(1.0), Ext::Inf),
        (Ext::Finite(0.0), Ext::Inf),
        (Ext::Inf, Ext::Inf),
    ] {
        check(a, b, 1000).unwrap();
    }
}

#[test]
fn zero_zero_breaks_e() {
    // a = b = 0 forces gamma_p ell_p to stay bounded, so (e) cannot hold
    let s = make_schedule(Ext::Finite(0.0), Ext::Finite(0.0), 200).unwrap();
    assert_eq!(s.case, Case::IV);
    assert!(!s.e_violations().is_empty());
}
