use proptest::prelude::*;
use recur_core::word::{metric_distance, subword_occurrences, Distance};
use recur_core::Word;

fn word(m: u16, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..m as u8, 0..=max).prop_map(move |s| Word::new(m, s).unwrap())
}

fn brute_occurrences(v: &[u8], w: &[u8]) -> Vec<usize> {
    if v.len() > w.len() {
        return vec![];
    }
    (0..=w.len() - v.len()).filter(|&i| &w[i..i + v.len()] == v).map(|i| i + 1).collect()
}

proptest! {
    #[test]
    fn concat_monoid(a in word(3, 10), b in word(3, 10), c in word(3, 10)) {
        let ab_c = a.concat(&b).unwrap().concat(&c).unwrap();
        let a_bc = a.concat(&b.concat(&c).unwrap()).unwrap();
        prop_assert_eq!(&ab_c, &a_bc);
        prop_assert_eq!(ab_c.len(), a.len() + b.len() + c.len());
        prop_assert_eq!(&Word::empty(3).concat(&a).unwrap(), &a);
        prop_assert_eq!(&a.concat(&Word::empty(3)).unwrap(), &a);
    }

    #[test]
    fn prefix_suffix_split(w in word(2, 20), cut in 1usize..20) {
        prop_assume!(cut < w.len());
        let joined = w.prefix(cut).unwrap().concat(&w.suffix(w.len() - cut).unwrap()).unwrap();
        prop_assert_eq!(joined, w);
    }

    #[test]
    fn occurrences_match_scan(v in word(2, 4), w in word(2, 12)) {
        prop_assume!(!v.is_empty());
        prop_assert_eq!(subword_occurrences(&v, &w).unwrap(), brute_occurrences(v.symbols(), w.symbols()));
    }

    #[test]
    fn metric_properties(x in word(2, 16), y in word(2, 16)) {
        let d = metric_distance(&x, &y).unwrap();
        prop_assert_eq!(d, metric_distance(&y, &x).unwrap());
        let agree = x.symbols().iter().zip(y.symbols()).take_while(|(a, b)| a == b).count();
        match d {
            Distance::Exact { index, value } => {
                prop_assert_eq!(index, agree + 1);
                prop_assert!((value - (-(index as f64)).exp()).abs() < 1e-15);
            }
            Distance::Indistinguishable => prop_assert_eq!(agree, x.len().min(y.len())),
        }
    }
}

#[test]
fn equal_prefixes_are_indistinguishable() {
    let x = Word::parse(2, "0110").unwrap();
    assert_eq!(metric_distance(&x, &x).unwrap(), Distance::Indistinguishable);
}
