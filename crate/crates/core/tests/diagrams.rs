use std::collections::HashSet;

use proptest::prelude::*;
use recur_core::diagram::{connect, count_paths, irreducible_component, suffix_part_count};
use recur_core::{AlphaBeta, GapSet, MarkovDiagram, SubshiftModel, Word};

fn golden() -> SubshiftModel {
    SubshiftModel::sft(2, vec![Word::parse(2, "11").unwrap()]).unwrap()
}

fn ab(a: &str, b: &str) -> SubshiftModel {
    SubshiftModel::interval(AlphaBeta::parse(a, b).unwrap())
}

fn models() -> Vec<SubshiftModel> {
    vec![
        golden(),
        ab("0", "phi"),
        ab("0.5", "2.5"),
        ab("0.3", "2"),
        SubshiftModel::sgap(GapSet::finite([1, 2, 5])).unwrap(),
    ]
}

#[test]
fn levels_are_nested() {
    for model in models() {
        for n in 1..=8 {
            let small = MarkovDiagram::build(&model, n - 1).unwrap();
            let big = MarkovDiagram::build(&model, n).unwrap();
            let reps: HashSet<_> = big.vertices().iter().map(|v| (v.symbol, v.state.clone())).collect();
            for v in small.vertices() {
                assert!(reps.contains(&(v.symbol, v.state.clone())));
                let same = big.lookup(v.symbol, &v.state).unwrap();
                assert!(big.vertices()[same].level <= v.level);
            }
            assert!(big.level_size(n - 1) <= big.level_size(n));
        }
    }
}

#[test]
fn component_is_successor_closed() {
    for model in models() {
        let d = MarkovDiagram::build(&model, 8).unwrap();
        let dec = irreducible_component(&d).unwrap();
        assert!(dec.core.iter().all(|&v| dec.contains(v)));
        for &v in &dec.component {
            for s in d.successors(v).unwrap() {
                if let Some(id) = s.id {
                    assert!(dec.contains(id), "successor {id} of {v} left C");
                }
            }
        }
    }
}

#[test]
fn path_counts_match_language() {
    for model in [golden(), ab("0", "phi")] {
        let d = MarkovDiagram::build(&model, 12).unwrap();
        let dec = irreducible_component(&d).unwrap();
        let direct = model.count_language(12).unwrap();
        for n in 1..=12 {
            assert_eq!(count_paths(&d, &dec, n).unwrap(), direct[n], "n = {n}");
        }
    }
}

#[test]
fn suffix_entropy_non_increasing_in_depth() {
    for model in [ab("0.2", "2.2"), ab("0.1", "1.7"), ab("0.5", "2.5")] {
        let mut prev = u128::MAX;
        for n in [2, 4, 6] {
            let d = MarkovDiagram::build(&model, n).unwrap();
            let dec = irreducible_component(&d).unwrap();
            let c = suffix_part_count(&d, &dec, 12).unwrap();
            assert!(c <= prev, "N = {n}: {c} > {prev}");
            prev = c;
        }
    }
}

fn golden_word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..2, 1..=max)
        .prop_map(|mut s| {
            for i in 1..s.len() {
                if s[i] == 1 && s[i - 1] == 1 {
                    s[i] = 0;
                }
            }
            Word::new(2, s).unwrap()
        })
}

proptest! {
    #[test]
    fn connectors_are_admissible_minimal_and_stable(u in golden_word(8), v in golden_word(8)) {
        let model = golden();
        let w = connect(&model, &u, &v, 2).unwrap();
        prop_assert!(model.admits(&u.concat(&w).unwrap().concat(&v).unwrap()));
        prop_assert_eq!(&w, &connect(&model, &u, &v, 2).unwrap());
        // nothing shorter works
        if !w.is_empty() {
            prop_assert!(!model.admits(&u.concat(&v).unwrap()));
        }
        prop_assert!(w.len() <= 1);
    }
}
