use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};
use transit_core::coordination::{
    self, check_stable_transition_exact, check_stable_transition_fast, construct_st_not_ne,
    detect_topology, efficiency_bounds, threshold_violations, CoordinationGraph, FastVariant,
    Topology,
};
use transit_core::degree::{exchange_counterexample, reduce_to_cover, saturation_degree};
use transit_core::efficiency::{
    check_bound_observations, default_lambda_grid, extensive_smoothness, price_report,
    two_player_condition,
};
use transit_core::routing::analyze;
use transit_core::structured::congestion::{verify_merge_lemma, verify_pota_bound};
use transit_core::structured::polymatrix::{check_symmetry_regularity, verify_posta_bound};
use transit_core::transition::{transition_degree, transition_degrees};
use transit_core::{
    fixtures, io, DegreeMode, Error, Game, Rational, Result, Scalar, SolutionSet, StableVariant,
};

use crate::{Outcome, SolutionArgs};

fn ok(report: Value) -> Result<Outcome> {
    Ok(Outcome {
        report,
        failures: Vec::new(),
    })
}

fn solution_set<V: Scalar>(game: &Game<V>, sol: &SolutionArgs) -> Result<SolutionSet> {
    if let Some(path) = &sol.solutions {
        return io::solutions_from_value(&io::read_json(path)?, game.shape());
    }
    if let Some(eps) = &sol.eps {
        let eps = V::parse(eps).ok_or_else(|| Error::Parse(format!("bad epsilon '{eps}'")))?;
        return game.enumerate_pure_ne(&eps);
    }
    game.pure_ne()
}

fn describe(d: &SolutionSet) -> Value {
    json!({ "label": d.label(), "size": d.len(), "members": d.members() })
}

fn prices_with<V: Scalar>(
    input: &Path,
    sol: &SolutionArgs,
    m: Option<usize>,
    stable: StableVariant,
) -> Result<Outcome> {
    let game: Game<V> = io::any_game_from_value(&io::read_json(input)?)?;
    let d = solution_set(&game, sol)?;
    let rep = price_report(&game, &d, stable)?;
    let mut report = json!({ "solutions": describe(&d), "prices": rep.to_json() });
    if let Some(m) = m {
        if m == 0 || m > game.num_players() {
            return Err(Error::BadParams(format!(
                "--m must lie in 1..={}",
                game.num_players()
            )));
        }
        report["m"] = json!({
            "m": m,
            "m_pota": rep.m_pota(m).to_json(),
            "m_pots": rep.m_pots(m).to_json(),
            "m_posta": rep.m_posta(m).to_json(),
        });
    }
    ok(report)
}

pub fn prices(
    input: &Path,
    sol: &SolutionArgs,
    m: Option<usize>,
    stable: StableVariant,
    float: bool,
) -> Result<Outcome> {
    if float {
        prices_with::<f64>(input, sol, m, stable)
    } else {
        prices_with::<Rational>(input, sol, m, stable)
    }
}

fn bounds_with<V: Scalar>(input: &Path, sol: &SolutionArgs) -> Result<Outcome> {
    let game: Game<V> = io::any_game_from_value(&io::read_json(input)?)?;
    let d = solution_set(&game, sol)?;
    let rep = check_bound_observations(&game, &d)?;
    let failures = rep
        .rows
        .iter()
        .filter(|r| !r.ok())
        .map(|r| {
            format!(
                "{}: {} (lhs {:?}, rhs {:?})",
                r.name, r.inequality, r.lhs, r.rhs
            )
        })
        .collect();
    let smoothness = extensive_smoothness(&game, &default_lambda_grid::<V>())
        .ok()
        .map(|s| s.to_json());
    let two_player = two_player_condition(&game).ok().map(|t| t.to_json());
    let mut report = rep.to_json();
    report["solutions"] = describe(&d);
    report["smoothness"] = json!(smoothness);
    report["two_player"] = json!(two_player);
    Ok(Outcome { report, failures })
}

pub fn bounds(input: &Path, sol: &SolutionArgs, float: bool) -> Result<Outcome> {
    if float {
        bounds_with::<f64>(input, sol)
    } else {
        bounds_with::<Rational>(input, sol)
    }
}

fn parse_profile<V: Scalar>(game: &Game<V>, text: &str) -> Result<Vec<usize>> {
    let profile = if text.contains(',') {
        text.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad strategy '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let k: usize = text
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad profile '{text}'")))?;
        if k >= game.num_profiles() {
            return Err(Error::InvalidProfile(format!(
                "index {k} exceeds {} profiles",
                game.num_profiles()
            )));
        }
        game.profile_at(k)
    };
    game.check_profile(&profile)?;
    Ok(profile)
}

fn degree_with<V: Scalar>(
    game: &Path,
    solutions: &Path,
    profile: Option<&str>,
    saturate: bool,
    greedy: bool,
) -> Result<Outcome> {
    let game: Game<V> = io::any_game_from_value(&io::read_json(game)?)?;
    let d = io::solutions_from_value(&io::read_json(solutions)?, game.shape())?;
    d.ensure_nonempty()?;
    let mode = if greedy {
        DegreeMode::Greedy
    } else {
        DegreeMode::Exact
    };
    if let Some(text) = profile {
        let p = parse_profile(&game, text)?;
        let w = transition_degree(&d, &p, mode)?;
        let cover = reduce_to_cover(&d, &p)?;
        return ok(json!({
            "mode": if greedy { "greedy" } else { "exact" },
            "profile": w.profile,
            "degree": w.degree,
            "witnesses": w.witnesses,
            "exact": w.exact,
            "cover": { "universe": cover.universe(), "sets": cover.num_sets() },
        }));
    }
    let degrees = transition_degrees(&d)?;
    let minimum_m = degrees.iter().map(|(_, k)| *k).max().unwrap_or(0);
    let mut histogram = BTreeMap::new();
    for (_, k) in &degrees {
        *histogram.entry(k.to_string()).or_insert(0usize) += 1;
    }
    let mut report = json!({
        "solutions": describe(&d),
        "transitions": degrees.len(),
        "degree_histogram": histogram,
        "minimum_m": minimum_m,
    });
    let mut failures = Vec::new();
    if saturate {
        let sat = saturation_degree(&d)?;
        let exchange = if d.len() <= 16 {
            exchange_counterexample(&d)?
        } else {
            None
        };
        if sat.m != minimum_m {
            failures.push(format!(
                "saturation degree {} differs from the least m with T(D,m) = T(D), which is {minimum_m}",
                sat.m
            ));
        }
        if let Some((small, large)) = &exchange {
            failures.push(format!(
                "maximal independent sets of different sizes: {small:?} and {large:?}"
            ));
        }
        report["saturation"] = json!({
            "m": sat.m,
            "basis": sat.basis,
            "independent": sat.independent,
            "matches_minimum_m": sat.m == minimum_m,
            "exchange_counterexample": exchange.map(|(a, b)| json!({ "smaller": a, "larger": b })),
        });
    }
    Ok(Outcome { report, failures })
}

pub fn degree(
    game: &Path,
    solutions: &Path,
    profile: Option<&str>,
    saturate: bool,
    greedy: bool,
    float: bool,
) -> Result<Outcome> {
    if float {
        degree_with::<f64>(game, solutions, profile, saturate, greedy)
    } else {
        degree_with::<Rational>(game, solutions, profile, saturate, greedy)
    }
}

pub fn routing(input: &Path, tol: f64, m: Option<usize>) -> Result<Outcome> {
    let inst = io::routing_from_value(&io::read_json(input)?)?;
    let rep = analyze(&inst, tol, m, &[])?;
    let mut failures = Vec::new();
    if !rep.stretch_holds {
        failures.push(format!(
            "pota {} exceeds poa {} times the maximum stretch {}",
            rep.pota, rep.poa, rep.stretch.max_stretch
        ));
    }
    Ok(Outcome {
        report: rep.to_json(),
        failures,
    })
}

fn load_graph(input: &Path) -> Result<CoordinationGraph> {
    CoordinationGraph::load(input)
}

pub fn graph_check(input: &Path, colouring: &str, fast: FastVariant) -> Result<Outcome> {
    let g = load_graph(input)?;
    let text = if Path::new(colouring).is_file() {
        std::fs::read_to_string(colouring)?
    } else {
        colouring.to_string()
    };
    let col = coordination::parse_colouring(&text)?;
    g.check_colouring(&col)?;
    let strict = check_stable_transition_exact(&g, &col, StableVariant::Strict)?;
    let weak = check_stable_transition_exact(&g, &col, StableVariant::Weak)?;
    let fast_answer = match check_stable_transition_fast(&g, &col, fast) {
        Ok(b) => Some(b),
        Err(Error::NotTwoColour) => None,
        Err(e) => return Err(e),
    };
    let equilibrium = coordination::is_equilibrium(&g, &col)?;
    let broken = threshold_violations(&g, &col, StableVariant::Strict)?;
    let mut failures = Vec::new();
    if fast_answer == Some(false) && strict {
        failures.push("fast check rejected an exact stable transition".to_string());
    }
    if !broken.is_empty() {
        failures.push(format!("threshold floors broken at nodes {broken:?}"));
    }
    Ok(Outcome {
        report: json!({
            "colouring": col,
            "welfare": g.welfare(&col),
            "equilibrium": equilibrium,
            "stable_strict": strict,
            "stable_weak": weak,
            "fast": fast_answer,
            "fast_variant": fast.to_string(),
            "stable_not_equilibrium": strict && !equilibrium,
            "threshold_violations": broken,
        }),
        failures,
    })
}

fn construction(g: &CoordinationGraph, topology: Option<Topology>) -> Result<Outcome> {
    let Some(topology) = topology.or_else(|| detect_topology(g)) else {
        return ok(
            json!({ "topology": null, "colouring": null, "reason": "graph is not a cycle, clique or forest" }),
        );
    };
    let Some(col) = construct_st_not_ne(g, topology)? else {
        return ok(
            json!({ "topology": topology.to_string(), "colouring": null, "reason": "this topology admits no such colouring" }),
        );
    };
    let stable = check_stable_transition_exact(g, &col, StableVariant::Strict)?;
    let equilibrium = coordination::is_equilibrium(g, &col)?;
    let mut failures = Vec::new();
    if !stable || equilibrium {
        failures.push(format!(
            "constructed colouring {col:?} is not a stable transition outside the equilibria"
        ));
    }
    Ok(Outcome {
        report: json!({
            "topology": topology.to_string(),
            "colouring": col,
            "welfare": g.welfare(&col),
            "stable": stable,
            "equilibrium": equilibrium,
            "verified": stable && !equilibrium,
        }),
        failures,
    })
}

pub fn graph_construct(input: &Path, topology: Option<Topology>) -> Result<Outcome> {
    construction(&load_graph(input)?, topology)
}

fn bounds_outcome(g: &CoordinationGraph, stable: StableVariant) -> Result<Outcome> {
    let b = efficiency_bounds(g, stable)?;
    let mut failures = Vec::new();
    if !b.posta_holds {
        failures.push(format!(
            "posta {} is below 1/2 - |N|/(2|E|) = {}",
            b.posta, b.posta_bound
        ));
    }
    if !b.poa_holds {
        failures.push(format!("poa {} is below 1/2", b.poa));
    }
    if !b.max_is_all_edges {
        failures.push(format!(
            "maximum welfare {} differs from 2|E| = {}",
            b.sweep.max_welfare,
            2 * b.edges
        ));
    }
    if b.sweep.threshold_violations > 0 {
        failures.push(format!(
            "{} colourings break the threshold floors",
            b.sweep.threshold_violations
        ));
    }
    Ok(Outcome {
        report: b.to_json(),
        failures,
    })
}

pub fn graph_bounds(input: &Path, stable: StableVariant) -> Result<Outcome> {
    bounds_outcome(&load_graph(input)?, stable)
}

fn merge(outcomes: Vec<(&str, Outcome)>) -> Outcome {
    let mut report = serde_json::Map::new();
    let mut failures = Vec::new();
    for (key, o) in outcomes {
        report.insert(key.to_string(), o.report);
        failures.extend(o.failures.into_iter().map(|f| format!("{key}: {f}")));
    }
    Outcome {
        report: Value::Object(report),
        failures,
    }
}

fn ms(m: Option<usize>, n: usize) -> Result<Vec<usize>> {
    match m {
        Some(m) if m == 0 || m > n => Err(Error::BadParams(format!("--m must lie in 1..={n}"))),
        Some(m) => Ok(vec![m]),
        None => Ok((1..=n).collect()),
    }
}

fn polymatrix_theorem<V: Scalar>(
    value: &Value,
    sol: &SolutionArgs,
    m: Option<usize>,
) -> Result<Outcome> {
    let pg = io::polymatrix_from_value::<V>(value)?;
    let game = pg.to_game()?;
    let d = solution_set(&game, sol)?;
    d.ensure_nonempty()?;
    let hypotheses = check_symmetry_regularity(&pg, &d)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for m in ms(m, pg.num_players())? {
        let r = verify_posta_bound(&pg, &d, m)?;
        if !r.holds {
            failures.push(format!(
                "m = {m}: m-posta {} is below poa/m = {}",
                r.m_posta, r.bound
            ));
        }
        rows.push(r.to_json());
    }
    Ok(Outcome {
        report: json!({ "solutions": describe(&d), "hypotheses": hypotheses, "rows": rows }),
        failures,
    })
}

fn congestion_theorem<V: Scalar>(value: &Value, m: Option<usize>) -> Result<Outcome> {
    let cg = io::congestion_from_value::<V>(value)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for m in ms(m, cg.num_players())? {
        let r = verify_pota_bound(&cg, m)?;
        if !r.bound_holds {
            failures.push(format!("m = {m}: m-pota {} exceeds m * poa", r.m_pota));
        }
        if r.tight == Some(false) {
            failures.push(format!(
                "m = n = {m}: m-pota {} differs from n * poa",
                r.m_pota
            ));
        }
        if let Some(p) = &r.parallel_links {
            if !p.matches_closed_form {
                failures.push(format!(
                    "m = {m}: m-pota {} differs from the closed form (m^2 + n - m)/n = {}",
                    r.m_pota, p.closed_form
                ));
            }
        }
        rows.push(r.to_json());
    }
    let game = cg.to_game(transit_core::Convention::Cost)?;
    let ne = game.pure_ne()?;
    let merges = verify_merge_lemma(&cg, ne.members())?;
    if merges.subadditive && !merges.holds() {
        failures.push(format!(
            "{} merges of equilibria cost more than their constituents combined",
            merges.violations.len()
        ));
    }
    Ok(Outcome {
        report: json!({ "rows": rows, "merge": merges.to_json() }),
        failures,
    })
}

pub fn theorem(
    number: u8,
    input: &Path,
    sol: &SolutionArgs,
    m: Option<usize>,
    stable: StableVariant,
    tol: f64,
    float: bool,
) -> Result<Outcome> {
    match number {
        1 => {
            let v = io::read_json(input)?;
            if float {
                polymatrix_theorem::<f64>(&v, sol, m)
            } else {
                polymatrix_theorem::<Rational>(&v, sol, m)
            }
        }
        2 => {
            let v = io::read_json(input)?;
            if float {
                congestion_theorem::<f64>(&v, m)
            } else {
                congestion_theorem::<Rational>(&v, m)
            }
        }
        3 => routing(input, tol, m),
        4 => bounds_outcome(&load_graph(input)?, stable),
        5 => {
            let g = load_graph(input)?;
            let built = construction(&g, None)?;
            let exhaustive = match efficiency_bounds(&g, stable) {
                Ok(b) => json!({
                    "stable_not_equilibrium": b.sweep.stable_not_equilibrium,
                    "example": b.to_json()["stable_not_equilibrium_example"],
                }),
                Err(e @ (Error::TooLarge { .. } | Error::UndefinedPrice { .. })) => {
                    json!({ "skipped": e.to_string() })
                }
                Err(e) => return Err(e),
            };
            let mut out = merge(vec![("construction", built)]);
            out.report["exhaustive"] = exhaustive;
            Ok(out)
        }
        _ => Err(Error::BadParams(format!("no result numbered {number}"))),
    }
}

pub fn oracle(target: &str) -> Result<Outcome> {
    match fixtures::find(target) {
        Some(f) => {
            let exp = fixtures::expected(f)?;
            let failures = fixtures::check_anchors(f, &exp["oracle"])
                .into_iter()
                .filter(|c| !c.ok)
                .map(|c| format!("{}: expected {}, found {:?}", c.path, c.expected, c.found))
                .collect();
            Ok(Outcome {
                report: exp,
                failures,
            })
        }
        None => ok(fixtures::oracle(&io::read_json(Path::new(target))?)?),
    }
}

pub fn fixtures(export: Option<&Path>, check: Option<&Path>) -> Result<Outcome> {
    if let Some(dir) = export {
        let written = fixtures::export(dir)?;
        return ok(
            json!({ "written": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() }),
        );
    }
    if let Some(dir) = check {
        let mut failures = Vec::new();
        for f in fixtures::all() {
            let pairs = [
                (fixtures::input_path(dir, f), io::render_input(&(f.build)())),
                (
                    fixtures::expected_path(dir, f),
                    io::render_json(&fixtures::expected(f)?),
                ),
            ];
            for (path, want) in pairs {
                match std::fs::read_to_string(&path) {
                    Ok(have) if have == want => {}
                    Ok(_) => failures.push(format!("{} is stale", path.display())),
                    Err(_) => failures.push(format!("{} is missing", path.display())),
                }
            }
        }
        return Ok(Outcome {
            report: json!({ "checked": fixtures::all().len(), "stale": failures.len() }),
            failures,
        });
    }
    ok(Value::Array(
        fixtures::all()
            .iter()
            .map(|f| json!({ "name": f.name, "description": f.description, "source": f.source }))
            .collect(),
    ))
}
