//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use transit_core::coordination::{
    self, check_stable_transition_exact, construct_st_not_ne, efficiency_bounds, is_equilibrium,
    MaskGraph, Topology,
};
use transit_core::degree::{saturation_degree, saturation_degree_ordered};
use transit_core::efficiency::price_report;
use transit_core::routing::{self, analysis::analyze, solver::DEFAULT_TOLERANCE};
use transit_core::structured::congestion::{
    parallel_links, random_subadditive, verify_merge_lemma, verify_pota_bound,
};
use transit_core::structured::decomposition::{
    verify_decomposition_bounds, AlphaMode, DecompositionCertificate,
};
use transit_core::structured::polymatrix::{generate_passing, verify_posta_bound, GeneratorParams};
use transit_core::transition::{m_transition_set, transition_degree};
use transit_core::{
    Convention, DegreeMode, Game, Profile, Rational, Scalar, SolutionSet, StableVariant,
    TransitionSet,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i64, d: i64) -> Rational {
    Rational::from_frac(n, d)
}

fn r(n: i64) -> Rational {
    Rational::from_int(n)
}

fn ensure(failures: &[String], ok: String) -> Outcome {
    if failures.is_empty() {
        Ok(ok)
    } else {
        let shown: Vec<&str> = failures.iter().take(6).map(String::as_str).collect();
        let more = failures.len().saturating_sub(shown.len());
        let tail = if more > 0 {
            format!("; and {more} more")
        } else {
            String::new()
        };
        Err(format!("{}{tail}", shown.join("; ")))
    }
}

fn utility_prices(game: &Game) -> transit_core::efficiency::PriceReport<Rational> {
    let ne = game.pure_ne().unwrap();
    price_report(game, &ne, StableVariant::Strict).unwrap()
}

fn criterion_1() -> Outcome {
    let a = r(1);
    let game = Game::from_fn(Convention::Utility, &[2, 2], |s| {
        if s[0] == s[1] {
            if s[0] == 0 {
                vec![a, a]
            } else {
                vec![r(1), r(1)]
            }
        } else {
            vec![r(0), r(0)]
        }
    })
    .unwrap();
    let p = utility_prices(&game);
    let got = [
        ("poa", p.poa.value, r(1)),
        ("pos", p.pos.value, r(1)),
        ("pota", p.pota.value, r(0)),
        ("posta", p.posta.value, r(0)),
    ];
    let failures: Vec<String> = got
        .iter()
        .filter(|(_, v, w)| v != w)
        .map(|(k, v, w)| format!("{k} = {v}, expected {w}"))
        .collect();
    ensure(&failures, "poa = pos = 1, pota = posta = 0".into())
}

fn criterion_2() -> Outcome {
    let (a, b) = (r(30), r(1));
    let game = Game::from_fn(Convention::Utility, &[2, 2, 2], |s| {
        if s.iter().all(|&x| x == 0) {
            vec![a, r(0), r(0)]
        } else {
            vec![b; 3]
        }
    })
    .unwrap();
    let p = utility_prices(&game);
    let mut failures = Vec::new();
    if p.pos.value != q(1, 10) {
        failures.push(format!("pos = {}, expected 1/10", p.pos.value));
    }
    if p.pots.value != r(1) {
        failures.push(format!("pots = {}, expected 1", p.pots.value));
    }
    ensure(&failures, "pos = 1/10, pots = 1".into())
}

fn criterion_3() -> Outcome {
    let (a, b, c) = (r(4), r(3), r(2));
    let game = Game::from_fn(Convention::Utility, &[2, 2], |s| match (s[0], s[1]) {
        (0, 0) => vec![a, a],
        (0, 1) => vec![a / c, b / c],
        (1, 0) => vec![b / c, a / c],
        _ => vec![b, b],
    })
    .unwrap();
    let p = utility_prices(&game);
    let scaled = p.poa.value / c;
    let mut failures = Vec::new();
    if p.pota.value != q(7, 16) {
        failures.push(format!("pota = {}, expected 7/16", p.pota.value));
    }
    if scaled != q(3, 8) || scaled > p.pota.value {
        failures.push(format!("poa/c = {scaled}, expected 3/8 <= pota"));
    }
    ensure(
        &failures,
        format!("pota = {}, poa/c = {scaled}", p.pota.value),
    )
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    for n in 3..=5usize {
        let cg = parallel_links::<Rational>(n);
        for m in 1..=n {
            let rep = verify_pota_bound(&cg, m).unwrap();
            let closed = q((m * m + n - m) as i64, n as i64);
            if rep.m_pota != closed {
                failures.push(format!(
                    "n = {n}, m = {m}: m-pota = {}, (m^2 + n - m)/n = {closed}",
                    rep.m_pota
                ));
            }
            if rep.poa != r(1) {
                failures.push(format!("n = {n}: poa = {}", rep.poa));
            }
            if !rep.bound_holds {
                failures.push(format!("n = {n}, m = {m}: m-pota exceeds m * poa"));
            }
            if m == n && rep.tight != Some(true) {
                failures.push(format!("n = {n}: no equality at m = n"));
            }
        }
    }
    ensure(
        &failures,
        "closed form, poa = 1 and m-pota <= m poa for n = 3, 4, 5".into(),
    )
}

fn random_profile<R: Rng>(rng: &mut R, shape: &[usize]) -> Profile {
    shape.iter().map(|&k| rng.gen_range(0..k)).collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let (mut checked, mut merges, mut bad) = (0, 0, 0);
    while checked < 500 {
        let n = rng.gen_range(2..=4);
        let res = rng.gen_range(1..=4);
        let cg = random_subadditive(&mut rng, n, res, 6);
        let game = cg.to_game(Convention::Cost).unwrap();
        let shape = game.shape().to_vec();
        let count = rng.gen_range(2..=3);
        let profiles: Vec<Profile> = (0..count)
            .map(|_| random_profile(&mut rng, &shape))
            .collect();
        let ne = game.pure_ne().unwrap();
        checked += 1;
        let before = failures.len();
        for (what, set) in [
            ("profiles", profiles),
            ("equilibria", ne.members().to_vec()),
        ] {
            if set.is_empty() {
                continue;
            }
            let rep = verify_merge_lemma(&cg, &set).unwrap();
            merges += rep.merges;
            if let Some(v) = rep.violations.first() {
                failures.push(format!(
                    "instance {checked} ({what} {set:?}): merge {:?} costs {} > {}",
                    v.merge, v.merge_cost, v.constituent_total
                ));
            }
        }
        bad += (failures.len() > before) as usize;
    }
    let note = format!("{bad} violating instances out of {checked}");
    if !failures.is_empty() {
        failures.insert(0, note);
    }
    ensure(
        &failures,
        format!("{checked} instances, {merges} merges, zero violations"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    let (mut instances, mut checks, mut multi) = (0, 0, 0);
    let mut attempts = 0;
    while instances < 200 {
        attempts += 1;
        if attempts > 20_000 {
            failures.push(format!(
                "generator produced only {instances} passing instances"
            ));
            break;
        }
        let params = GeneratorParams {
            players: rng.gen_range(3..=4),
            strategies: rng.gen_range(2..=3),
            vmax: 4,
            constant_prob: 0.5,
        };
        let Some((pg, d)) = generate_passing(&mut rng, &params, 100) else {
            continue;
        };
        instances += 1;
        multi += (d.len() >= 2) as usize;
        for m in 1..=3 {
            let rep = verify_posta_bound(&pg, &d, m).unwrap();
            checks += 1;
            if !rep.holds {
                failures.push(format!(
                    "instance {instances}, m = {m}: m-posta {} < poa/m {}",
                    rep.m_posta, rep.bound
                ));
            }
        }
    }
    ensure(
        &failures,
        format!("{instances} instances ({multi} with two or more solutions), {checks} checks"),
    )
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    for n in [2usize, 3, 5] {
        let rep = analyze(
            &routing::even_links(n).unwrap(),
            DEFAULT_TOLERANCE,
            None,
            &[],
        )
        .unwrap();
        let share = 1.0 / n as f64;
        if rep.equilibrium.paths[0]
            .iter()
            .any(|x| (x - share).abs() > 1e-8)
        {
            failures.push(format!("n = {n}: flows {:?}", rep.equilibrium.paths[0]));
        }
        if (rep.equilibrium_cost - share).abs() > 1e-8 {
            failures.push(format!(
                "n = {n}: equilibrium cost {}",
                rep.equilibrium_cost
            ));
        }
        if (rep.pota - n as f64).abs() > 1e-6 {
            failures.push(format!("n = {n}: pota {}", rep.pota));
        }
        if (rep.pots - 1.0).abs() > 1e-6 {
            failures.push(format!("n = {n}: pots {}", rep.pots));
        }
    }
    ensure(
        &failures,
        "flows and cost 1/n, pota = n, pots = 1 for n = 2, 3, 5".into(),
    )
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut gaps = Vec::new();
    for delta in [0.1, 0.01] {
        let rep = analyze(
            &routing::shared_steep_link(4, 2, delta).unwrap(),
            DEFAULT_TOLERANCE,
            None,
            &[],
        )
        .unwrap();
        let ratio = rep.pota / rep.poa;
        let s = rep.stretch.max_stretch;
        if ratio.is_nan() || ratio > s * (1.0 + 1e-9) {
            failures.push(format!("delta = {delta}: pota/poa = {ratio} exceeds {s}"));
        }
        gaps.push((delta, 1.0 - ratio / s));
    }
    if gaps[1].1 > gaps[0].1 + 1e-12 {
        failures.push(format!("gap grows as delta shrinks: {gaps:?}"));
    }
    let shown: Vec<String> = gaps
        .iter()
        .map(|(d, g)| format!("delta {d}: gap {g:.6}"))
        .collect();
    ensure(&failures, shown.join(", "))
}

fn criterion_9() -> Outcome {
    let rep = analyze(&routing::common_intercept(), DEFAULT_TOLERANCE, None, &[]).unwrap();
    if (rep.pots - 1.0).abs() <= 1e-6 {
        Ok(format!("pots = {:.9}", rep.pots))
    } else {
        Err(format!("pots = {}", rep.pots))
    }
}

#[derive(Default)]
struct GraphTally {
    graphs: u64,
    posta: u64,
    poa: u64,
    thresholds: u64,
    example: Option<String>,
}

impl GraphTally {
    fn merge(mut self, o: Self) -> Self {
        self.graphs += o.graphs;
        self.posta += o.posta;
        self.poa += o.poa;
        self.thresholds += o.thresholds;
        self.example = self.example.or(o.example);
        self
    }
}

fn criterion_10() -> Outcome {
    let mut tally = GraphTally::default();
    for n in 2..=7usize {
        let pairs = n * (n - 1) / 2;
        let t = (1u64..1 << pairs)
            .into_par_iter()
            .fold(GraphTally::default, |mut t, mask| {
                let g = coordination::graph::from_edge_mask(n, mask);
                let b = efficiency_bounds(&g, StableVariant::Strict).unwrap();
                t.graphs += 1;
                t.posta += !b.posta_holds as u64;
                t.poa += !b.poa_holds as u64;
                t.thresholds += (b.sweep.threshold_violations > 0) as u64;
                if !b.holds() && t.example.is_none() {
                    t.example = Some(format!("n = {n}, edges {:?}", g.edges()));
                }
                t
            })
            .reduce(GraphTally::default, GraphTally::merge);
        tally = tally.merge(t);
    }
    let mut failures = Vec::new();
    if tally.posta + tally.poa + tally.thresholds > 0 {
        failures.push(format!(
            "{} posta, {} poa and {} threshold failures, first at {}",
            tally.posta,
            tally.poa,
            tally.thresholds,
            tally.example.clone().unwrap_or_default()
        ));
    }
    let c4 = efficiency_bounds(&coordination::cycle(4).unwrap(), StableVariant::Strict).unwrap();
    let worst = c4.sweep.worst_stable.map(|w| w.0);
    if c4.posta != c4.posta_bound || worst != Some(0) {
        failures.push(format!(
            "C4: posta {} against bound {}, worst welfare {worst:?}",
            c4.posta, c4.posta_bound
        ));
    }
    if c4.poa != q(1, 2) {
        failures.push(format!("C4: poa {}", c4.poa));
    }
    ensure(
        &failures,
        format!(
            "{} graphs on 2..=7 nodes; C4 posta = 0 = bound, poa = 1/2",
            tally.graphs
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut failures = Vec::new();
    let mut verify = |label: String, g: &coordination::CoordinationGraph, topology: Topology| {
        match construct_st_not_ne(g, topology) {
            Ok(Some(col)) => {
                let st = check_stable_transition_exact(g, &col, StableVariant::Strict).unwrap();
                let ne = is_equilibrium(g, &col).unwrap();
                if !st || ne {
                    failures.push(format!("{label}: {col:?} stable {st}, equilibrium {ne}"));
                }
            }
            Ok(None) => failures.push(format!("{label}: no construction")),
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    };
    for n in 4..=8 {
        verify(
            format!("C{n}"),
            &coordination::cycle(n).unwrap(),
            Topology::Cycle,
        );
    }
    for n in [4, 6] {
        verify(format!("K{n}"), &coordination::clique(n), Topology::Clique);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut forests = 0;
    while forests < 50 {
        let n = rng.gen_range(2..=14);
        let g = coordination::random_forest(&mut rng, n, 0.8);
        if g.num_edges() == 0 {
            continue;
        }
        forests += 1;
        verify(
            format!("forest {forests} ({n} nodes)"),
            &g,
            Topology::Forest,
        );
    }
    for n in [3, 5] {
        let mg = MaskGraph::new(&coordination::clique(n)).unwrap();
        let s = coordination::sweep(&mg, StableVariant::Strict);
        if s.stable_not_equilibrium != 0 {
            failures.push(format!(
                "K{n}: {} stable non-equilibria",
                s.stable_not_equilibrium
            ));
        }
    }
    ensure(
        &failures,
        "C4..C8, K4, K6 and 50 forests verified; K3, K5 have none".into(),
    )
}

/// Smallest number of members covering every coordinate of `s`.
fn subset_degree(d: &[Profile], s: &[usize]) -> usize {
    let k = d.len();
    (1u32..1 << k)
        .filter(|mask| (0..s.len()).all(|i| (0..k).any(|j| mask >> j & 1 == 1 && d[j][i] == s[i])))
        .map(|mask| mask.count_ones() as usize)
        .min()
        .expect("s is a transition")
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut failures = Vec::new();
    let (mut degree_bad, mut greedy_bad, mut order_bad, mut cover_bad, mut strict_bad) =
        (0, 0, 0, 0, 0);
    for inst in 1..=300 {
        let n = rng.gen_range(2..=5);
        let shape: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=4)).collect();
        let size = rng.gen_range(2..=7);
        let mut members: Vec<Profile> = (0..size)
            .map(|_| random_profile(&mut rng, &shape))
            .collect();
        members.sort();
        members.dedup();
        let d = SolutionSet::new(shape.clone(), members, "random").unwrap();
        let t_set = TransitionSet::of(&d).unwrap();
        let p = t_set.projections();
        let t: Profile = p
            .iter()
            .map(|opts| opts[rng.gen_range(0..opts.len())])
            .collect();

        let exact = transition_degree(&d, &t, DegreeMode::Exact).unwrap().degree;
        let greedy = transition_degree(&d, &t, DegreeMode::Greedy)
            .unwrap()
            .degree;
        let naive = subset_degree(d.members(), &t);
        if exact != naive {
            degree_bad += 1;
            failures.push(format!(
                "instance {inst}: exact degree {exact}, subset search {naive}"
            ));
        }
        if greedy as f64 > (1.0 + (n as f64).ln()) * exact as f64 + 1e-12 {
            greedy_bad += 1;
            failures.push(format!(
                "instance {inst}: greedy {greedy} against exact {exact}"
            ));
        }

        let sat = saturation_degree(&d).unwrap();
        let mut order: Vec<usize> = (0..d.len()).collect();
        let mut seen = vec![sat.m];
        for _ in 0..10 {
            order.shuffle(&mut rng);
            seen.push(saturation_degree_ordered(&d, &order).unwrap().m);
        }
        if seen.iter().any(|&m| m != sat.m) {
            order_bad += 1;
            seen.sort_unstable();
            seen.dedup();
            failures.push(format!(
                "instance {inst}: saturation m varies over orders {seen:?} for D = {:?}",
                d.members()
            ));
        }

        let full = t_set.len().unwrap();
        let m = sat.m;
        if m_transition_set(&d, m).unwrap().len() != full {
            cover_bad += 1;
            failures.push(format!("instance {inst}: T(D, {m}) != T(D)"));
        }
        if m >= 2 && m_transition_set(&d, m - 1).unwrap().len() >= full {
            strict_bad += 1;
            failures.push(format!(
                "instance {inst}: T(D, {}) already equals T(D) though m = {m}",
                m - 1
            ));
        }
    }
    if !failures.is_empty() {
        failures.insert(
            0,
            format!(
                "degree {degree_bad}, greedy {greedy_bad}, order {order_bad}, T(D,m) {cover_bad}, strictness {strict_bad} failing instances of 300"
            ),
        );
    }
    ensure(
        &failures,
        "300 instances: degrees, greedy ratio, saturation order and m-cover".into(),
    )
}

fn criterion_13() -> Outcome {
    let phi = [["3", "2.9"], ["1", "2"]];
    let z = [["-1", "1"], ["1", "-1"]];
    let p = |s: &str| Rational::parse(s).unwrap();
    let potential = Game::from_fn(Convention::Utility, &[2, 2], |s| {
        vec![p(phi[s[0]][s[1]]); 2]
    })
    .unwrap();
    let perturbed = Game::from_fn(Convention::Utility, &[2, 2], |s| {
        let d = p(z[s[0]][s[1]]) * p("0.1");
        vec![p(phi[s[0]][s[1]]) + d, p(phi[s[0]][s[1]]) - d]
    })
    .unwrap();
    let mut failures = Vec::new();
    let mut alphas = Vec::new();
    for m in 1..=2 {
        let cert = DecompositionCertificate {
            game: perturbed.clone(),
            potential: potential.clone(),
            congestion: None,
        };
        let rep = verify_decomposition_bounds(&cert, m, AlphaMode::Search).unwrap();
        if rep.epsilon != p("0.1") {
            failures.push(format!("perturbation magnitude {}", rep.epsilon));
        }
        if !(rep.poa.holds && rep.m_pota.holds) {
            failures.push(format!(
                "m = {m}: ratio {} / {} below alpha",
                rep.poa.ratio, rep.m_pota.ratio
            ));
        }
        alphas.push(rep.poa.alpha);

        let ident = DecompositionCertificate {
            game: potential.clone(),
            potential: potential.clone(),
            congestion: None,
        };
        let rep = verify_decomposition_bounds(&ident, m, AlphaMode::Search).unwrap();
        for c in [&rep.poa, &rep.m_pota] {
            if c.alpha != r(1) || c.ratio != c.alpha {
                failures.push(format!(
                    "identity, m = {m}: alpha {}, ratio {}",
                    c.alpha, c.ratio
                ));
            }
        }
    }
    ensure(
        &failures,
        format!(
            "perturbed alpha = {}, identity alpha = 1 with equality",
            alphas[0]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("symmetric coordination game prices", criterion_1),
        ("three-player stability prices", criterion_2),
        ("scaled coordination game transition price", criterion_3),
        ("parallel links m-pota", criterion_4),
        (
            "merge cost on random subadditive congestion games",
            criterion_5,
        ),
        (
            "m-posta against poa/m on symmetric regular polymatrix games",
            criterion_6,
        ),
        ("parallel linear links routing", criterion_7),
        ("stretch bound and its gap", criterion_8),
        ("common-intercept links keep pots at 1", criterion_9),
        (
            "coordination welfare bounds over all graphs up to 7 nodes",
            criterion_10,
        ),
        ("stable non-equilibrium constructions", criterion_11),
        ("degrees, greedy cover and saturation", criterion_12),
        ("potential plus constant-sum decomposition", criterion_13),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail} ({secs:.1}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {detail} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("{} of 13 criteria passed", 13 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
