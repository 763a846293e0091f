//! Named fixture corpus. Every fixture carries expected values that are
//! checked against the exhaustive oracle, and the committed files under
//! `fixtures/` are regenerated from here.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::coordination::{
    self, construct_st_not_ne, detect_topology, efficiency_bounds, CoordinationGraph,
};
use crate::efficiency::price_report;
use crate::error::{Error, Result};
use crate::game::{Convention, Game};
use crate::io::{self, InputKind};
use crate::routing::{self, analyze};
use crate::scalar::{Rational, Scalar};
use crate::structured::congestion::{parallel_links, verify_pota_bound};
use crate::transition::StableVariant;

pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    /// Where the expected values come from.
    pub source: &'static str,
    pub build: fn() -> Value,
    /// Dotted oracle paths and their expected values: rationals, decimals,
    /// `true`, `false` or `null`.
    pub expect: &'static [(&'static str, &'static str)],
}

const fn all_have_expectations(list: &[Fixture]) -> bool {
    let mut k = 0;
    while k < list.len() {
        if list[k].expect.is_empty() {
            return false;
        }
        k += 1;
    }
    true
}

const _: () = assert!(
    all_have_expectations(FIXTURES),
    "every fixture needs expected values"
);

fn r(n: i64) -> Rational {
    Rational::from_int(n)
}

fn two_by_two(cells: [[(Rational, Rational); 2]; 2]) -> Value {
    let g = Game::from_fn(Convention::Utility, &[2, 2], |s| {
        let (a, b) = cells[s[0]][s[1]];
        vec![a, b]
    })
    .expect("2x2 game");
    io::game_to_value(&g)
}

fn unit_diagonal() -> Value {
    let (a, z) = (r(1), r(0));
    two_by_two([[(a, a), (z, z)], [(z, z), (a, a)]])
}

fn small_diagonal() -> Value {
    let (e, a, z) = (Rational::new(1, 10), r(1), r(0));
    two_by_two([[(e, e), (z, z)], [(z, z), (a, a)]])
}

fn scaled_coordination() -> Value {
    let (a, b, c) = (r(4), r(3), r(2));
    two_by_two([[(a, a), (a / c, b / c)], [(b / c, a / c), (b, b)]])
}

fn lone_jackpot() -> Value {
    let (a, b) = (r(30), r(1));
    let g = Game::from_fn(Convention::Utility, &[2, 2, 2], |s| {
        if s == [0, 0, 0] {
            vec![a, r(0), r(0)]
        } else {
            vec![b, b, b]
        }
    })
    .expect("three-player game");
    io::game_to_value(&g)
}

fn matching_strategy() -> Value {
    let alpha = [r(2), r(3)];
    let g = Game::from_fn(Convention::Utility, &[2, 2], |s| {
        (0..2)
            .map(|i| {
                let k = s.iter().filter(|&&x| x == s[i]).count();
                (0..k).fold(r(1), |acc, _| acc * alpha[i])
            })
            .collect()
    })
    .expect("matching game");
    io::game_to_value(&g)
}

fn links(n: usize) -> Value {
    serde_json::to_value(parallel_links::<Rational>(n).to_file(Some(Convention::Cost)))
        .expect("congestion file")
}

fn route(inst: routing::RoutingInstance) -> Value {
    serde_json::to_value(inst).expect("routing file")
}

const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "unit-diagonal",
        description: "2x2 coordination game with payoff 1 on the diagonal and 0 elsewhere",
        source: "both equilibria are optimal while every mixed pick earns nothing",
        build: unit_diagonal,
        expect: &[("prices.poa.value", "1"), ("prices.pos.value", "1"), ("prices.pota.value", "0"), ("prices.posta.value", "0")],
    },
    Fixture {
        name: "small-diagonal",
        description: "identical-utility 2x2 game with diagonal payoffs 1/10 and 1",
        source: "equilibria are the two diagonal cells; their ratio is the price of anarchy",
        build: small_diagonal,
        expect: &[("prices.poa.value", "1/10"), ("prices.pos.value", "1"), ("prices.pota.value", "0"), ("prices.posta.value", "0")],
    },
    Fixture {
        name: "scaled-coordination",
        description: "2x2 coordination game with a=4, b=3, c=2",
        source: "pota equals (a+b)/(2ca) and pots equals pos",
        build: scaled_coordination,
        expect: &[("prices.poa.value", "3/4"), ("prices.pos.value", "1"), ("prices.pota.value", "7/16"), ("prices.pots.value", "1")],
    },
    Fixture {
        name: "lone-jackpot",
        description: "three binary players; (0,0,0) pays (30,0,0) and every other profile pays 1 each",
        source: "pos equals 3b/a while every strategy appears in some equilibrium",
        build: lone_jackpot,
        expect: &[("prices.pos.value", "1/10"), ("prices.pots.value", "1")],
    },
    Fixture {
        name: "matching-strategy",
        description: "two players with alpha = (2, 3); utility is alpha_i to the number of players sharing i's strategy",
        source: "equilibria are the optimal agreeing profiles; the 2-transition splits the players",
        build: matching_strategy,
        expect: &[("prices.poa.value", "1"), ("prices.pos.value", "1"), ("prices.m_pota.1.value", "5/13")],
    },
    Fixture {
        name: "parallel-links-3",
        description: "3 players on 3 identical links with c(k) = k",
        source: "every n-transition can stack all players on one link",
        build: || links(3),
        expect: &[("prices.poa.value", "1"), ("prices.m_pota.2.value", "3"), ("pota_bound.2.tight_at_m_equals_n", "true")],
    },
    Fixture {
        name: "parallel-links-4",
        description: "4 players on 4 identical links with c(k) = k",
        source: "every n-transition can stack all players on one link",
        build: || links(4),
        expect: &[("prices.poa.value", "1"), ("prices.m_pota.3.value", "4"), ("pota_bound.3.tight_at_m_equals_n", "true")],
    },
    Fixture {
        name: "even-links-3",
        description: "unit demand over 3 parallel links with c(x) = x",
        source: "the even split is the unique equilibrium and optimum; a transition may load one link",
        build: || route(routing::even_links(3).expect("even_links")),
        expect: &[("equilibrium.cost", "1/3"), ("poa", "1"), ("pota", "3"), ("pots", "1")],
    },
    Fixture {
        name: "shared-steep-link",
        description: "two unit commodities, 4 linear links each, slopes spread by 1.1, steepest link shared",
        source: "pota/poa stays below the maximum stretch",
        build: || route(routing::shared_steep_link(4, 2, 0.1).expect("shared-steep-link")),
        expect: &[("stretch.holds", "true"), ("stretch.degenerate", "false")],
    },
    Fixture {
        name: "pigou-pair",
        description: "demand 2 over links x^2 and x^3",
        source: "both links cost 1 at the split (1, 1)",
        build: || route(routing::pigou()),
        expect: &[("equilibrium.path_flows.0.0", "1"), ("equilibrium.path_flows.0.1", "1")],
    },
    Fixture {
        name: "common-intercept",
        description: "unit demand over links 1+x and 1+2x",
        source: "strictly increasing edge-disjoint links with a common intercept keep pots at 1",
        build: || route(routing::common_intercept()),
        expect: &[("pots", "1")],
    },
    Fixture {
        name: "cycle4",
        description: "coordination game on the 4-cycle",
        source: "alternating colours reach welfare |E|-|N| = 0; colouring 1,1,2,2 is an equilibrium with half the optimum",
        build: || coordination::cycle(4).expect("cycle").to_json(),
        expect: &[("bounds.posta", "0"), ("bounds.poa", "1/2"), ("construction.verified", "true")],
    },
    Fixture {
        name: "clique4",
        description: "coordination game on K4",
        source: "even cliques have stable transitions that are not equilibria",
        build: || coordination::clique(4).to_json(),
        expect: &[("construction.verified", "true")],
    },
    Fixture {
        name: "clique5",
        description: "coordination game on K5",
        source: "odd cliques have no stable transitions beyond equilibria",
        build: || coordination::clique(5).to_json(),
        expect: &[("bounds.stable_not_equilibrium", "0"), ("construction", "null")],
    },
    Fixture {
        name: "star3",
        description: "coordination game on a star with 3 leaves",
        source: "centre and one leaf on colour 1, two leaves on colour 2",
        build: || coordination::star(3).to_json(),
        expect: &[("construction.colouring", "[1,1,2,2]"), ("construction.verified", "true")],
    },
    Fixture {
        name: "forest",
        description: "path on 5 nodes, a separate edge and an isolated node",
        source: "forests with an edge have stable transitions that are not equilibria",
        build: || CoordinationGraph::new(8, &[(0, 1), (1, 2), (2, 3), (3, 4), (5, 6)]).expect("forest").to_json(),
        expect: &[("construction.verified", "true")],
    },
];

pub fn all() -> &'static [Fixture] {
    FIXTURES
}

pub fn find(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

fn game_oracle(game: &Game<Rational>) -> Result<Value> {
    let ne = game.pure_ne()?;
    let prices = price_report(game, &ne, StableVariant::Strict)?;
    Ok(json!({ "equilibria": ne.members(), "prices": prices.to_json() }))
}

/// Exhaustive analysis of any supported input.
pub fn oracle(input: &Value) -> Result<Value> {
    let kind = io::detect_kind(input)?;
    let mut out = match kind {
        InputKind::Game | InputKind::Polymatrix => game_oracle(&io::any_game_from_value(input)?)?,
        InputKind::Congestion => {
            let cg = io::congestion_from_value::<Rational>(input)?;
            let mut v = game_oracle(&io::any_game_from_value(input)?)?;
            let rows = (1..=cg.num_players())
                .map(|m| verify_pota_bound(&cg, m).map(|t| t.to_json()))
                .collect::<Result<Vec<_>>>()?;
            v["pota_bound"] = Value::Array(rows);
            v
        }
        InputKind::Routing => analyze(
            &io::routing_from_value(input)?,
            routing::solver::DEFAULT_TOLERANCE,
            None,
            &[],
        )?
        .to_json(),
        InputKind::Graph => {
            let g = io::graph_from_value(input)?;
            let bounds = efficiency_bounds(&g, StableVariant::Strict)?;
            let topology = detect_topology(&g);
            let construction = match topology {
                Some(t) => construct_st_not_ne(&g, t)?.map(|col| -> Result<Value> {
                    let stable = coordination::check_stable_transition_exact(&g, &col, StableVariant::Strict)?;
                    let equilibrium = coordination::is_equilibrium(&g, &col)?;
                    Ok(json!({ "colouring": col, "stable": stable, "equilibrium": equilibrium, "verified": stable && !equilibrium }))
                }),
                None => None,
            }
            .transpose()?;
            json!({ "bounds": bounds.to_json(), "topology": topology.map(|t| t.to_string()), "construction": construction })
        }
    };
    out["kind"] = json!(kind.to_string());
    Ok(out)
}

/// Expected-values document: the anchored expectations plus the oracle.
pub fn expected(f: &Fixture) -> Result<Value> {
    let anchored: serde_json::Map<String, Value> = f
        .expect
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    Ok(json!({
        "fixture": f.name,
        "description": f.description,
        "source": f.source,
        "anchored": anchored,
        "oracle": oracle(&(f.build)())?,
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnchorCheck {
    pub path: String,
    pub expected: String,
    pub found: Option<Value>,
    pub ok: bool,
}

fn leaf_matches(found: &Value, expected: &str) -> bool {
    let close = |x: f64| Rational::parse(expected).is_some_and(|e| (e.to_f64() - x).abs() <= 1e-6);
    match found {
        Value::Object(o) if o.contains_key("decimal") => match (
            o.get("exact").and_then(Value::as_str),
            Rational::parse(expected),
        ) {
            (Some(ex), Some(e)) => Rational::parse(ex) == Some(e),
            _ => o["decimal"]
                .as_str()
                .and_then(|d| d.parse::<f64>().ok())
                .is_some_and(close),
        },
        Value::Number(n) => n.as_f64().is_some_and(close),
        Value::String(s) => s.parse::<f64>().ok().is_some_and(close),
        other => io::parse_json(expected).is_ok_and(|e| &e == other),
    }
}

pub fn check_anchors(f: &Fixture, oracle: &Value) -> Vec<AnchorCheck> {
    f.expect
        .iter()
        .map(|(path, want)| {
            let found = io::lookup(oracle, path).cloned();
            let ok = match &found {
                Some(v) => leaf_matches(v, want),
                None => *want == "null",
            };
            AnchorCheck {
                path: path.to_string(),
                expected: want.to_string(),
                found,
                ok,
            }
        })
        .collect()
}

pub fn input_path(dir: &Path, f: &Fixture) -> PathBuf {
    dir.join(format!("{}.json", f.name))
}

pub fn expected_path(dir: &Path, f: &Fixture) -> PathBuf {
    dir.join(format!("{}.expected.json", f.name))
}

/// Writes `<name>.json` and `<name>.expected.json` for every fixture,
/// refusing if an expectation fails against the oracle.
pub fn export(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in FIXTURES {
        let exp = expected(f)?;
        let failed: Vec<String> = check_anchors(f, &exp["oracle"])
            .into_iter()
            .filter(|c| !c.ok)
            .map(|c| c.path)
            .collect();
        if !failed.is_empty() {
            return Err(Error::PreconditionFailed(format!(
                "fixture {} disagrees with the oracle at {failed:?}",
                f.name
            )));
        }
        let (a, b) = (input_path(dir, f), expected_path(dir, f));
        std::fs::write(&a, io::render_input(&(f.build)()))?;
        std::fs::write(&b, io::render_json(&exp))?;
        written.extend([a, b]);
    }
    Ok(written)
}
