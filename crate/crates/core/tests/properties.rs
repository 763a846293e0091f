//! Randomised properties, each checked against a naive oracle written
//! independently of the library's search code.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use transit_core::coordination::{
    self, check_stable_transition_exact, check_stable_transition_fast, construct_st_not_ne,
    equilibrium_floor, is_equilibrium, threshold_violations, transition_floor, CoordinationGraph,
    FastVariant, MaskGraph, Topology,
};
use transit_core::efficiency::{check_bound_observations, is_constant_sum, optimum, price_report};
use transit_core::routing::analysis::{equilibrium_flow, is_equilibrium as wardrop, optimal_flow};
use transit_core::routing::cost::CostFn;
use transit_core::routing::network::{Commodity, Edge, RoutingInstance};
use transit_core::structured::congestion::{random_subadditive, verify_merge_lemma};
use transit_core::structured::potential::is_exact_potential;
use transit_core::transition::{
    m_transition_set, stable_transition_set, transition_degree, DegreeMode, StableVariant,
    TransitionSet,
};
use transit_core::{Convention, Game, Profile, Rational, Scalar, SolutionSet};

fn r(v: i64) -> Rational {
    Rational::from_int(v)
}

fn all_profiles(shape: &[usize]) -> Vec<Profile> {
    let mut out = vec![vec![]];
    for &k in shape {
        out = out
            .into_iter()
            .flat_map(|p| (0..k).map(move |s| [p.clone(), vec![s]].concat()))
            .collect();
    }
    out
}

fn naive_eps_ne(game: &Game, eps: &Rational) -> Vec<Profile> {
    let shape = game.shape().to_vec();
    all_profiles(&shape)
        .into_iter()
        .filter(|p| {
            (0..shape.len()).all(|i| {
                (0..shape[i]).all(|a| {
                    let mut q = p.clone();
                    q[i] = a;
                    let (now, alt) = (*game.payoff(p, i), *game.payoff(&q, i));
                    match game.convention() {
                        Convention::Utility => alt <= now + *eps,
                        Convention::Cost => alt >= now - *eps,
                    }
                })
            })
        })
        .collect()
}

fn naive_in_transitions(d: &[Profile], s: &[usize]) -> bool {
    (0..s.len()).all(|i| d.iter().any(|x| x[i] == s[i]))
}

/// Smallest number of members of `d` whose coordinates cover `s`.
fn naive_degree(d: &[Profile], s: &[usize]) -> Option<usize> {
    let k = d.len();
    (0u32..1 << k)
        .filter(|mask| {
            let chosen: Vec<&Profile> = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| &d[i])
                .collect();
            (0..s.len()).all(|i| chosen.iter().any(|x| x[i] == s[i]))
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

fn flat_index(shape: &[usize], s: &[usize]) -> usize {
    s.iter().zip(shape).fold(0, |acc, (x, k)| acc * k + x)
}

/// Game whose payoff row for a profile is read from `table` in row-major order.
fn game_from_table(shape: &[usize], table: &[Rational]) -> Game {
    let n = shape.len();
    Game::from_fn(Convention::Utility, shape, |s| {
        let k = flat_index(shape, s);
        table[k * n..(k + 1) * n].to_vec()
    })
    .unwrap()
}

fn sorted(mut v: Vec<Profile>) -> Vec<Profile> {
    v.sort();
    v.dedup();
    v
}

prop_compose! {
    fn small_game()(shape in prop::collection::vec(1usize..=3, 2..=3))
        (payoffs in prop::collection::vec(0i64..=6, shape.iter().product::<usize>() * shape.len()), shape in Just(shape))
        -> Game
    {
        let table: Vec<Rational> = payoffs.into_iter().map(r).collect();
        game_from_table(&shape, &table)
    }
}

prop_compose! {
    fn game_with_set()(game in small_game())
        (picks in prop::collection::vec(0..game.num_profiles(), 1..=5), game in Just(game))
        -> (Game, SolutionSet)
    {
        let members = sorted(picks.into_iter().map(|k| game.profile_at(k)).collect());
        let d = SolutionSet::for_game(&game, members, "random").unwrap();
        (game, d)
    }
}

fn random_instance_graph(seed: u64, n: usize, p: f64) -> CoordinationGraph {
    coordination::random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, p)
}

fn random_colouring(seed: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| 1 + ((seed >> (i % 64)) & 1) as u8).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn pure_ne_is_mutual_best_response(game in small_game()) {
        let ne = game.pure_ne().unwrap();
        prop_assert_eq!(ne.members().to_vec(), sorted(naive_eps_ne(&game, &r(0))));
        for p in all_profiles(game.shape()) {
            let all_br = (0..game.num_players()).all(|i| game.is_best_response(i, &p));
            prop_assert_eq!(ne.contains(&p), all_br);
        }
    }

    #[test]
    fn eps_equilibria_grow_with_eps(game in small_game(), a in 0i64..4, b in 0i64..4) {
        let (lo, hi) = (r(a.min(b)), r(a.max(b)));
        let small = game.enumerate_pure_ne(&lo).unwrap();
        let large = game.enumerate_pure_ne(&hi).unwrap();
        prop_assert!(small.members().iter().all(|p| large.contains(p)));
        prop_assert_eq!(large.members().to_vec(), sorted(naive_eps_ne(&game, &hi)));
    }

    #[test]
    fn transition_set_is_the_product_of_projections((game, d) in game_with_set()) {
        let t = TransitionSet::of(&d).unwrap();
        let mut count = 0;
        for p in all_profiles(game.shape()) {
            let naive = naive_in_transitions(d.members(), &p);
            prop_assert_eq!(t.contains(&p), naive);
            count += naive as usize;
        }
        prop_assert_eq!(t.len().unwrap(), count);
    }

    #[test]
    fn degrees_agree_with_subset_search((_game, d) in game_with_set()) {
        let n = d.num_players() as f64;
        for s in TransitionSet::of(&d).unwrap().iter() {
            let exact = transition_degree(&d, &s, DegreeMode::Exact).unwrap();
            let greedy = transition_degree(&d, &s, DegreeMode::Greedy).unwrap();
            prop_assert_eq!(Some(exact.degree), naive_degree(d.members(), &s));
            prop_assert!(greedy.degree >= exact.degree);
            prop_assert!(greedy.degree as f64 <= (1.0 + n.ln()) * exact.degree as f64 + 1e-12);
        }
    }

    #[test]
    fn m_transitions_form_a_chain((game, d) in game_with_set()) {
        let n = game.num_players();
        prop_assert_eq!(m_transition_set(&d, 1).unwrap(), d.members().to_vec());
        let mut prev = m_transition_set(&d, 1).unwrap();
        for m in 2..=n {
            let next = m_transition_set(&d, m).unwrap();
            prop_assert!(prev.iter().all(|p| next.contains(p)));
            prev = next;
        }
        let full = sorted(TransitionSet::of(&d).unwrap().to_vec().unwrap());
        prop_assert_eq!(sorted(prev), full);
    }

    #[test]
    fn equilibria_sit_between_stable_and_all_transitions(game in small_game()) {
        let ne = game.pure_ne().unwrap();
        prop_assume!(!ne.is_empty());
        let t = TransitionSet::of(&ne).unwrap();
        for variant in [StableVariant::Strict, StableVariant::Weak] {
            let st = stable_transition_set(&game, &ne, variant).unwrap();
            prop_assert!(ne.members().iter().all(|p| st.contains(p)));
            prop_assert!(st.iter().all(|p| t.contains(p)));
        }
        let strict = stable_transition_set(&game, &ne, StableVariant::Strict).unwrap();
        let weak = stable_transition_set(&game, &ne, StableVariant::Weak).unwrap();
        prop_assert!(strict.iter().all(|p| weak.contains(p)));
    }

    #[test]
    fn prices_are_ordered_and_match_direct_extremes(game in small_game()) {
        let ne = game.pure_ne().unwrap();
        let (opt, _) = optimum(&game);
        prop_assume!(!ne.is_empty() && opt.is_positive());
        let rep = price_report(&game, &ne, StableVariant::Strict).unwrap();
        let sws: Vec<Rational> = ne.members().iter().map(|p| game.sw(p)).collect();
        let worst = sws.iter().min().unwrap() / opt;
        let best = sws.iter().max().unwrap() / opt;
        prop_assert_eq!(rep.poa.value, worst);
        prop_assert_eq!(rep.pos.value, best);
        let t = TransitionSet::of(&ne).unwrap();
        let tw: Vec<Rational> = t.iter().map(|p| game.sw(&p) / opt).collect();
        prop_assert_eq!(rep.pota.value, *tw.iter().min().unwrap());
        prop_assert_eq!(rep.pots.value, *tw.iter().max().unwrap());
        prop_assert!(rep.pota.value <= rep.posta.value && rep.posta.value <= rep.poa.value);
        prop_assert!(rep.pos.value <= rep.pots.value);
        for m in 1..game.num_players() {
            prop_assert!(rep.m_pota(m + 1) <= rep.m_pota(m));
            prop_assert!(rep.m_pots(m + 1) >= rep.m_pots(m));
        }
        prop_assert_eq!(rep.m_pota(game.num_players()), &rep.pota.value);
    }

    #[test]
    fn welfare_bounds_hold(game in small_game()) {
        let ne = game.pure_ne().unwrap();
        prop_assume!(!ne.is_empty() && optimum(&game).0.is_positive());
        let rep = check_bound_observations(&game, &ne).unwrap();
        let failed: Vec<_> = rep.rows.iter().filter(|row| !row.ok()).map(|row| row.name.clone()).collect();
        prop_assert!(failed.is_empty(), "{:?}", failed);
    }

    #[test]
    fn constant_sum_games_have_unit_prices(
        shape in prop::collection::vec(1usize..=3, 2..=3),
        seed in any::<u64>(),
        total in 1i64..10,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let size: usize = shape.iter().product();
        let mut table = Vec::new();
        for _ in 0..size {
            let row: Vec<Rational> = (1..shape.len()).map(|_| r(rng.gen_range(-5..=5))).collect();
            let rest = r(total) - row.iter().copied().fold(r(0), |a, b| a + b);
            table.extend(row);
            table.push(rest);
        }
        let game = game_from_table(&shape, &table);
        prop_assert!(is_constant_sum(&game));
        let ne = game.pure_ne().unwrap();
        prop_assume!(!ne.is_empty());
        let rep = price_report(&game, &ne, StableVariant::Strict).unwrap();
        for v in rep.measures().values() {
            prop_assert_eq!(*v, r(1));
        }
    }

    #[test]
    fn potential_plus_dummy_terms_passes_the_cycle_test(
        shape in prop::collection::vec(2usize..=3, 2..=3),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = shape.len();
        let size: usize = shape.iter().product();
        let phi: Vec<i64> = (0..size).map(|_| rng.gen_range(-4..=4)).collect();
        // g_i depends only on the others' strategies
        let dummy: Vec<Vec<i64>> = (0..n).map(|_| (0..size).map(|_| rng.gen_range(-4..=4)).collect()).collect();
        let index = |s: &[usize]| flat_index(&shape, s);
        let game = Game::from_fn(Convention::Utility, &shape, |s| {
            (0..n)
                .map(|i| {
                    let mut others = s.to_vec();
                    others[i] = 0;
                    r(phi[index(s)] + dummy[i][index(&others)])
                })
                .collect()
        })
        .unwrap();
        prop_assert!(is_exact_potential(&game));
        // a single unilateral bonus breaks the potential
        let bumped = Game::from_fn(Convention::Utility, &shape, |s| {
            let mut row = game.payoffs(s).to_vec();
            if s.iter().all(|&x| x == 0) {
                row[0] += r(1);
            }
            row
        })
        .unwrap();
        prop_assert!(!is_exact_potential(&bumped));
    }

    #[test]
    fn merges_respect_total_cost_subadditivity(seed in any::<u64>(), n in 2usize..=4, res in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cg = random_subadditive(&mut rng, n, res, 6);
        let game = cg.to_game(Convention::Cost).unwrap();
        let ne = game.pure_ne().unwrap();
        prop_assume!(!ne.is_empty());
        let rep = verify_merge_lemma(&cg, ne.members()).unwrap();
        if cg.total_cost_subadditive() {
            prop_assert!(rep.holds(), "{:?}", rep.violations);
        }
    }

    #[test]
    fn routing_equilibria_equalise_used_paths(slopes in prop::collection::vec((1u32..=8, 0u32..=4), 2..=4), rate in 1u32..=4) {
        let edges: Vec<Edge> = slopes
            .iter()
            .map(|&(a, b)| Edge { from: "s".into(), to: "t".into(), cost: CostFn::Poly(vec![b as f64, a as f64]) })
            .collect();
        let inst = RoutingInstance {
            nodes: vec!["s".into(), "t".into()],
            commodities: vec![Commodity {
                source: "s".into(),
                sink: "t".into(),
                rate: rate as f64,
                paths: (0..edges.len()).map(|e| vec![e]).collect(),
            }],
            edges,
        };
        let eq = equilibrium_flow(&inst, 1e-10).unwrap();
        let opt = optimal_flow(&inst, 1e-10).unwrap();
        prop_assert!(inst.is_feasible(&eq));
        prop_assert!(wardrop(&inst, &eq, 1e-6));
        prop_assert!((inst.cost(&eq) - inst.cost_by_paths(&eq)).abs() < 1e-9);
        prop_assert!(inst.cost(&opt) <= inst.cost(&eq) + 1e-7);
        // affine latencies never lose more than a third
        prop_assert!(inst.cost(&eq) <= 4.0 / 3.0 * inst.cost(&opt) + 1e-6);
    }

    #[test]
    fn coordination_checks_agree(seed in any::<u64>(), n in 2usize..=9, p in 0.2f64..0.8, cols in any::<u64>()) {
        let g = random_instance_graph(seed, n, p);
        let col = random_colouring(cols, n);
        let exact = check_stable_transition_exact(&g, &col, StableVariant::Strict).unwrap();
        let fast = check_stable_transition_fast(&g, &col, FastVariant::OppositeColour).unwrap();
        prop_assert_eq!(exact, fast);
        let ne = is_equilibrium(&g, &col).unwrap();
        if ne {
            prop_assert!((0..n).all(|i| g.same(&col, i) as i64 >= equilibrium_floor(g.degree(i))));
        }
        if exact {
            prop_assert!(threshold_violations(&g, &col, StableVariant::Strict).unwrap().is_empty());
            prop_assert!((0..n).all(|i| g.same(&col, i) as i64 >= transition_floor(g.degree(i))));
        }
        let mg = MaskGraph::new(&g).unwrap();
        let eval = mg.evaluate(coordination::efficiency::mask_of(&col), StableVariant::Strict);
        prop_assert_eq!(eval.equilibrium, ne);
        prop_assert_eq!(eval.stable, exact);
        prop_assert_eq!(eval.welfare, g.welfare(&col));
    }

    #[test]
    fn coordination_game_matches_its_graph(seed in any::<u64>(), n in 2usize..=6, cols in any::<u64>()) {
        let g = random_instance_graph(seed, n, 0.5);
        let game = g.to_game().unwrap();
        let col = random_colouring(cols, n);
        let p = g.profile_of(&col).unwrap();
        prop_assert_eq!(game.sw(&p), r(g.welfare(&col) as i64));
        let ne = game.pure_ne().unwrap();
        prop_assert_eq!(ne.contains(&p), is_equilibrium(&g, &col).unwrap());
    }

    #[test]
    fn forest_constructions_are_stable_non_equilibria(seed in any::<u64>(), n in 2usize..=12, attach in 0.3f64..1.0) {
        let g = coordination::random_forest(&mut ChaCha8Rng::seed_from_u64(seed), n, attach);
        match construct_st_not_ne(&g, Topology::Forest).unwrap() {
            Some(col) => {
                prop_assert!(check_stable_transition_exact(&g, &col, StableVariant::Strict).unwrap());
                prop_assert!(!is_equilibrium(&g, &col).unwrap());
            }
            None => prop_assert_eq!(g.num_edges(), 0),
        }
    }

    #[test]
    fn minimal_covering_m_is_the_largest_degree((_game, d) in game_with_set()) {
        let t = sorted(TransitionSet::of(&d).unwrap().to_vec().unwrap());
        let m = t.iter().map(|s| naive_degree(d.members(), s).unwrap()).max().unwrap();
        prop_assert_eq!(sorted(m_transition_set(&d, m).unwrap()), t.clone());
        if m >= 2 {
            prop_assert!(m_transition_set(&d, m - 1).unwrap().len() < t.len());
        }
    }
}
