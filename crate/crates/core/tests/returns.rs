use proptest::prelude::*;
use recur_core::recurrence::{first_return, trace, ReturnTime};
use recur_core::word::{metric_distance, Distance};
use recur_core::Word;

fn naive(x: &[u8], n: usize) -> Option<usize> {
    (1..x.len()).find(|&k| k + n <= x.len() && (0..n).all(|i| x[i + k] == x[i]))
}

fn prefix() -> impl Strategy<Value = Word> {
    (2u16..=3).prop_flat_map(|m| prop::collection::vec(0..m as u8, 1..300).prop_map(move |s| Word::new(m, s).unwrap()))
}

proptest! {
    #[test]
    fn return_time_is_least_shift(x in prefix(), n in 1usize..10) {
        let s = x.symbols();
        let got = first_return(&x, n).unwrap().value();
        prop_assert_eq!(got, if n < s.len() { naive(s, n) } else { None });
        if let Some(tau) = got {
            prop_assert_eq!(&s[tau..tau + n], &s[..n]);
            prop_assert!((1..tau).all(|k| k + n > s.len() || s[k..k + n] != s[..n]));
        }
    }

    #[test]
    fn return_lands_in_the_ball(x in prefix(), n in 1usize..10) {
        if let ReturnTime::Determined(tau) = first_return(&x, n).unwrap() {
            let shifted = Word::new(x.alphabet_size(), x.symbols()[tau..].to_vec()).unwrap();
            match metric_distance(&x, &shifted).unwrap() {
                Distance::Exact { index, value } => {
                    prop_assert!(index > n);
                    prop_assert!(value <= (-((n + 1) as f64)).exp());
                }
                Distance::Indistinguishable => {}
            }
        }
    }

    #[test]
    fn trace_agrees_and_is_monotone(x in prefix(), n_max in 1usize..16) {
        let tr = trace(&x, n_max).unwrap();
        let mut last = 0;
        for e in &tr.entries {
            prop_assert_eq!(e.tau.value(), first_return(&x, e.n).unwrap().value());
            if let Some(t) = e.tau.value() {
                prop_assert!(t >= last);
                last = t;
            }
        }
    }
}

#[test]
fn periodic_word_returns_at_its_period() {
    let x = Word::parse(2, &"011".repeat(40)).unwrap();
    for n in 1..50 {
        assert_eq!(first_return(&x, n).unwrap(), ReturnTime::Determined(3));
    }
}
