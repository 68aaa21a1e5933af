use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recur_core::diagram::connect;
use recur_core::interval::{ExactInterval, Transitivity};
use recur_core::moran::build_for_model;
use recur_core::{AlphaBeta, SubshiftModel, Word};

fn fixtures() -> Vec<AlphaBeta> {
    [("0", "2"), ("0.5", "2.5"), ("0.3", "2"), ("0", "phi"), ("0.2", "3")]
        .iter()
        .map(|(a, b)| AlphaBeta::parse(a, b).unwrap())
        .collect()
}

fn diam(iv: &ExactInterval) -> f64 {
    iv.len().to_f64()
}

proptest! {
    #[test]
    fn digits_round_trip(which in 0usize..5, x in 0.0f64..1.0, n in 1usize..24) {
        let map = &fixtures()[which];
        let tr = map.digits(x, n).unwrap();
        prop_assume!(tr.unreliable_from.is_none());
        let err = (map.reconstruct(&tr.digits).unwrap() - x).abs();
        prop_assert!(err <= map.beta_f64().powi(-(n as i32)) + 1e-9, "err {} at n {}", err, n);
    }

    #[test]
    fn cylinders_nest_and_shrink(which in 0usize..5, raw in prop::collection::vec(0u8..3, 1..10)) {
        let map = &fixtures()[which];
        let m = map.branches();
        let w = Word::new(m, raw.iter().map(|s| s % m as u8).collect()).unwrap();
        let Some(cyl) = map.cylinder_interval(&w).unwrap() else {
            // an empty cylinder stays empty under extension
            let ext = w.concat(&Word::new(m, vec![0]).unwrap()).unwrap();
            prop_assert!(map.cylinder_interval(&ext).unwrap().is_none());
            return Ok(());
        };
        prop_assert!(diam(&cyl) <= map.beta_f64().powi(-(w.len() as i32)) * (1.0 + 1e-12));
        for a in 0..m as u8 {
            let ext = w.concat(&Word::new(m, vec![a]).unwrap()).unwrap();
            if let Some(inner) = map.cylinder_interval(&ext).unwrap() {
                prop_assert!(cyl.lo <= inner.lo && inner.hi <= cyl.hi);
            }
        }
    }
}

#[test]
fn cylinders_match_grid_samples() {
    const RES: usize = 100_000;
    for map in fixtures() {
        let m = map.branches();
        let len = if m == 2 { 8 } else { 6 };
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        for i in 0..RES {
            let x = (i as f64 + 0.5) / RES as f64;
            let tr = map.digits(x, len).unwrap();
            if tr.unreliable_from.is_none() {
                let d = tr.digits.symbols();
                for l in 1..=len {
                    seen.insert(d[..l].to_vec());
                }
            }
        }
        let mut words = vec![vec![]];
        for _ in 0..len {
            words = words.into_iter().flat_map(|p: Vec<u8>| (0..m as u8).map(move |s| [p.clone(), vec![s]].concat())).collect();
            for w in &words {
                let cyl = map.cylinder_interval(&Word::new(m, w.clone()).unwrap()).unwrap();
                let sampled = seen.contains(w);
                if sampled {
                    assert!(cyl.is_some(), "{w:?} sampled but empty for beta {}", map.beta_f64());
                }
                // cylinders wider than two grid cells always contain a sample
                if cyl.as_ref().is_some_and(|c| diam(c) > 2.0 / RES as f64) {
                    assert!(sampled, "{w:?} non-empty but never sampled");
                }
            }
        }
    }
}

// Concatenations of q blocks from Q_k satisfy diam >= K exp(-(log beta + 2 eps) k q),
// K the least 1-cylinder. Only gap-free fixtures: with connectors of length t the
// slack 2 eps k only absorbs t log beta once k is in the hundreds.
#[test]
fn gamma_word_diameters_bounded_below() {
    for (alpha, beta) in [("0", "2"), ("0", "3")] {
        let map = AlphaBeta::parse(alpha, beta).unwrap();
        let model = SubshiftModel::interval(map.clone());
        let cfg = build_for_model(&model, 6, 4, 10_000_000).unwrap();
        assert_eq!(cfg.t, 0);
        let k_min = (0..map.branches() as u8).map(|j| diam(&map.branch_interval(j))).fold(f64::INFINITY, f64::min);
        let rate = map.beta_f64().ln() + 2.0 * cfg.epsilon;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut word = cfg.q_k[rng.random_range(0..cfg.q_k.len())].clone();
            for q in 2..=5 {
                let next = &cfg.q_k[rng.random_range(0..cfg.q_k.len())];
                let w = connect(&model, &word, next, cfg.t).unwrap();
                word = word.concat(&w).unwrap().concat(next).unwrap();
                let d = diam(&map.cylinder_interval(&word).unwrap().unwrap());
                let bound = k_min * (-rate * (cfg.k * q) as f64).exp();
                assert!(d >= bound, "beta {beta}, q = {q}: diam {d:e} below {bound:e}");
            }
        }
    }
}

#[test]
fn transitive_results_carry_certificates() {
    for map in fixtures() {
        if let Transitivity::Transitive { certificates } = map.check_transitive() {
            assert!(!certificates.is_empty());
            for c in &certificates {
                assert!(c.iterations <= 10_000);
                assert!(c.final_interval.0 < c.final_interval.1);
                if let Some(j) = c.full_branch {
                    let b = map.branch_interval(j as u8);
                    let (lo, hi) = b.to_f64();
                    assert!(c.final_interval.0 <= lo + 1e-12 && hi <= c.final_interval.1 + 1e-12);
                }
            }
        }
    }
}
