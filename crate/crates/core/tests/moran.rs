use proptest::prelude::*;
use recur_core::moran::{build_for_model, construct_point, delta_stats, seed_prefix, verify_point, SeedConfig};
use recur_core::word::subword_occurrences;
use recur_core::{Ext, MoranPoint, Schedule, SubshiftModel, Word};

fn schedule(ell: &[f64], returns: &[f64]) -> Schedule {
    let gamma: Vec<f64> = returns.iter().zip(ell).map(|(r, l)| r.ln() / l).collect();
    Schedule::custom(Ext::Finite(0.5), Ext::Finite(1.0), ell, &gamma).unwrap()
}

fn full5() -> SeedConfig {
    build_for_model(&SubshiftModel::full(2).unwrap(), 5, 4, 1_000_000).unwrap()
}

fn golden12() -> SeedConfig {
    let g = SubshiftModel::sft(2, vec![Word::parse(2, "11").unwrap()]).unwrap();
    build_for_model(&g, 12, 4, 1_000_000).unwrap()
}

fn toy() -> Schedule {
    schedule(&[6.0, 12.0, 18.0, 24.0, 30.0], &[40.0, 90.0, 200.0, 400.0, 800.0])
}

fn golden_schedule() -> Schedule {
    schedule(&[20.0, 40.0, 60.0, 80.0], &[400.0, 900.0, 2000.0, 4000.0])
}

fn check_insertions(cfg: &SeedConfig, pt: &MoranPoint) -> Result<(), TestCaseError> {
    prop_assert!(cfg.model.admits(&pt.prefix));
    let y = pt.prefix.symbols();
    let mut last_m = 0;
    for e in &pt.events {
        prop_assert!(e.m_p > last_m, "M_p not increasing at p = {}", e.p);
        last_m = e.m_p;
        let excess = e.theta_len as f64 - e.ell;
        prop_assert!(excess > -1e-9 && excess < (cfg.k + cfg.t) as f64);
        prop_assert!(cfg.q_index(&y[e.theta_len - cfg.k..e.theta_len]).is_some(), "theta^{} does not end in Q_k", e.p);
        // the copied theta sits right after y_{M_p} w^{p,1}
        let at = e.tau();
        prop_assert_eq!(&y[at..at + e.theta_len], &y[..e.theta_len]);
    }
    Ok(())
}

#[test]
fn golden_point_verifies() {
    let cfg = golden12();
    assert_eq!(cfg.t, 1);
    let pt = construct_point(&cfg, &golden_schedule(), 4000, 1).unwrap();
    assert!(!pt.events.is_empty());
    check_insertions(&cfg, &pt).unwrap();
    verify_point(&pt).unwrap();
}

#[test]
fn tree_branches_by_q_k() {
    let cfg = full5();
    let st = delta_stats(&cfg, &schedule(&[6.0, 12.0, 18.0, 24.0, 30.0], &[12.0, 400.0, 800.0, 1600.0, 3200.0]), 3, 0)
        .unwrap();
    assert_eq!((st.branching_min, st.branching_max), (12, 12));
    assert_eq!(st.level_sizes, vec![1, 12, 144, 1728]);
    // sampled mode agrees on branching
    let g = delta_stats(&golden12(), &golden_schedule(), 3, 40).unwrap();
    assert!(!g.materialized && g.branching_ok);
    assert_eq!(g.branching_min, g.branching);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seed_prefixes_hold_one_marker(seed in any::<u64>()) {
        for cfg in [full5(), golden12()] {
            let x = seed_prefix(&cfg, seed, 3000).unwrap();
            prop_assert!(cfg.model.admits(&x));
            prop_assert_eq!(subword_occurrences(&cfg.v_star, &x).unwrap(), vec![1]);
        }
    }

    #[test]
    fn toy_points_are_valid_and_reproducible(seed in 0u64..1000) {
        let cfg = full5();
        let pt = construct_point(&cfg, &toy(), 900, seed).unwrap();
        check_insertions(&cfg, &pt)?;
        let rep = verify_point(&pt);
        prop_assert!(rep.is_ok(), "{:?}", rep.err());
        let again = construct_point(&cfg, &toy(), 900, seed).unwrap();
        prop_assert_eq!(&again.prefix, &pt.prefix);
        prop_assert_eq!(again.ledger_text(), pt.ledger_text());
        let back = MoranPoint::from_ledger(&pt.ledger_text(), pt.prefix.clone()).unwrap();
        prop_assert_eq!(back.events, pt.events);
    }
}
