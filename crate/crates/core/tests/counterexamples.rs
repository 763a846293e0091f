//! Instances on which a natural conjecture about transitions fails.

use transit_core::degree::{exchange_counterexample, saturation_degree_ordered};
use transit_core::structured::congestion::{
    parallel_links, verify_merge_lemma, verify_pota_bound, CongestionGame,
};
use transit_core::transition::m_transition_set;
use transit_core::{Rational, Scalar, SolutionSet, TransitionSet};

fn q(n: i64, d: i64) -> Rational {
    Rational::from_frac(n, d)
}

#[test]
fn merge_can_cost_more_than_its_constituents() {
    // c(x) = x on three links, four players
    let costs = vec![(1..=4).map(|k| q(k, 1)).collect::<Vec<_>>(); 3];
    let strategies = vec![(0..3).map(|j| vec![j]).collect::<Vec<_>>(); 4];
    let cg = CongestionGame::new(3, costs, strategies).unwrap();
    assert!(cg.is_subadditive());
    assert!(!cg.total_cost_subadditive());
    let rep = verify_merge_lemma(&cg, &[vec![0, 0, 1, 2], vec![1, 2, 0, 0]]).unwrap();
    assert_eq!(rep.constituent_total, q(12, 1));
    assert_eq!(rep.worst_cost, q(16, 1));
    assert!(!rep.holds());
}

#[test]
fn parallel_links_follow_the_load_balance_formula() {
    for n in 3..=5usize {
        let cg = parallel_links::<Rational>(n);
        for m in 1..=n {
            let rep = verify_pota_bound(&cg, m).unwrap();
            let (k, r) = ((n / m) as i64, (n % m) as i64);
            assert_eq!(
                rep.m_pota,
                q(k * (m * m) as i64 + r * r, n as i64),
                "n = {n}, m = {m}"
            );
            assert_eq!(rep.poa, q(1, 1));
            assert!(rep.bound_holds);
        }
    }
    let off = verify_pota_bound(&parallel_links::<Rational>(4), 2).unwrap();
    assert_eq!(off.m_pota, q(2, 1));
    assert!(!off.parallel_links.unwrap().matches_closed_form);
}

#[test]
fn greedy_saturation_depends_on_order() {
    let members = vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 1], vec![2, 2]];
    let d = SolutionSet::new(vec![3, 3], members, "chain").unwrap();
    let a = saturation_degree_ordered(&d, &[0, 2, 4, 1, 3]).unwrap();
    let b = saturation_degree_ordered(&d, &[0, 1, 3, 4, 2]).unwrap();
    assert_eq!((a.m, b.m), (3, 4));
    assert!(a.independent && b.independent);
    assert!(exchange_counterexample(&d).unwrap().is_some());

    // the least m with T(D, m) = T(D) is the largest exact degree
    let t = TransitionSet::of(&d).unwrap().len().unwrap();
    assert_eq!(m_transition_set(&d, 2).unwrap().len(), t);
    assert!(m_transition_set(&d, 1).unwrap().len() < t);
}
