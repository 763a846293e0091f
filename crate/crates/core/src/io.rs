//! File formats and report rendering.

use std::fmt;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::coordination::CoordinationGraph;
use crate::error::{Error, Result};
use crate::game::{Convention, Game, Profile, ProfileIter, SolutionSet};
use crate::routing::RoutingInstance;
use crate::scalar::{from_json_value, Scalar, DECIMALS};
use crate::structured::congestion::{CongestionFile, CongestionGame};
use crate::structured::polymatrix::{PolymatrixFile, PolymatrixGame};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Game,
    Congestion,
    Polymatrix,
    Routing,
    Graph,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Game => "game",
            InputKind::Congestion => "congestion",
            InputKind::Polymatrix => "polymatrix",
            InputKind::Routing => "routing",
            InputKind::Graph => "graph",
        })
    }
}

/// Guesses the format from the top-level keys.
pub fn detect_kind(value: &Value) -> Result<InputKind> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
    let has = |k: &str| obj.contains_key(k);
    if has("payoffs") {
        Ok(InputKind::Game)
    } else if has("resources") {
        Ok(InputKind::Congestion)
    } else if has("matrices") {
        Ok(InputKind::Polymatrix)
    } else if has("commodities") {
        Ok(InputKind::Routing)
    } else if has("edges") && has("nodes") && obj["nodes"].is_u64() {
        Ok(InputKind::Graph)
    } else {
        Err(Error::Parse(
            "unrecognised input: expected a game, congestion, polymatrix, routing or graph file"
                .into(),
        ))
    }
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Pretty JSON for input files, numbers untouched.
pub fn render_input(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("values serialize");
    out.push('\n');
    out
}

fn scalar_value<V: Scalar>(v: &V) -> Value {
    match v.exact_text() {
        Some(t) if !t.contains('/') => t
            .parse::<i64>()
            .map(Value::from)
            .unwrap_or(Value::String(t)),
        Some(t) => Value::String(t),
        None => json!(v.to_f64()),
    }
}

fn string_list(value: Option<&Value>, what: &str) -> Result<Option<Vec<String>>> {
    match value {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|_| Error::Parse(format!("'{what}' must be a list of names"))),
    }
}

/// Reads `{"convention", "players", "strategies", "payoffs"}`; the payoff
/// tensor nests one level per player and ends in a payoff vector.
pub fn game_from_value<V: Scalar>(value: &Value) -> Result<Game<V>> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("game must be a JSON object".into()))?;
    let convention = match obj.get("convention") {
        None => Convention::Utility,
        Some(c) => serde_json::from_value(c.clone())
            .map_err(|_| Error::Parse("convention must be \"max\" or \"min\"".into()))?,
    };
    let payoffs = obj
        .get("payoffs")
        .ok_or_else(|| Error::Parse("game has no 'payoffs'".into()))?;
    let players = string_list(obj.get("players"), "players")?;
    let strategies: Option<Vec<Vec<String>>> = match obj.get("strategies") {
        None => None,
        Some(v) => Some(
            serde_json::from_value(v.clone())
                .map_err(|_| Error::Parse("'strategies' must be lists of names".into()))?,
        ),
    };
    // infer the shape by following first elements
    let mut shape = Vec::new();
    let mut at = payoffs;
    loop {
        let arr = at
            .as_array()
            .ok_or_else(|| Error::Parse("payoff tensor must be nested arrays".into()))?;
        if arr.first().is_none_or(|x| !x.is_array()) {
            break;
        }
        shape.push(arr.len());
        at = &arr[0];
    }
    let n = shape.len();
    if let Some(s) = &strategies {
        let declared: Vec<usize> = s.iter().map(Vec::len).collect();
        if declared != shape {
            return Err(Error::Parse(format!(
                "strategies declare shape {declared:?} but payoffs have shape {shape:?}"
            )));
        }
    }
    if let Some(p) = &players {
        if p.len() != n {
            return Err(Error::Parse(format!(
                "{} player names for {n} players",
                p.len()
            )));
        }
    }
    let mut flat = Vec::new();
    for profile in ProfileIter::new(shape.clone()) {
        let mut cell = payoffs;
        for (depth, &k) in profile.iter().enumerate() {
            cell = cell
                .as_array()
                .filter(|a| a.len() == shape[depth])
                .map(|a| &a[k])
                .ok_or_else(|| {
                    Error::Parse(format!(
                        "ragged payoff tensor at depth {depth} near profile {profile:?}"
                    ))
                })?;
        }
        let row = cell.as_array().filter(|r| r.len() == n).ok_or_else(|| {
            Error::Parse(format!(
                "profile {profile:?} needs a payoff vector of length {n}"
            ))
        })?;
        for v in row {
            flat.push(
                from_json_value::<V>(v)
                    .ok_or_else(|| Error::Parse(format!("bad payoff {v} at {profile:?}")))?,
            );
        }
    }
    let players = players.unwrap_or_else(|| (1..=n).map(|i| i.to_string()).collect());
    let strategies = strategies.unwrap_or_else(|| {
        shape
            .iter()
            .map(|&k| (0..k).map(|s| s.to_string()).collect())
            .collect()
    });
    Game::new(convention, players, strategies, flat)
}

pub fn game_to_value<V: Scalar>(game: &Game<V>) -> Value {
    fn nest<V: Scalar>(game: &Game<V>, prefix: &mut Vec<usize>) -> Value {
        if prefix.len() == game.num_players() {
            return Value::Array(game.payoffs(prefix).iter().map(scalar_value).collect());
        }
        let k = game.num_strategies(prefix.len());
        Value::Array(
            (0..k)
                .map(|s| {
                    prefix.push(s);
                    let v = nest(game, prefix);
                    prefix.pop();
                    v
                })
                .collect(),
        )
    }
    json!({
        "convention": game.convention().name(),
        "players": game.players(),
        "strategies": game.strategies(),
        "payoffs": nest(game, &mut Vec::new()),
    })
}

/// Any finite-game input as a dense game; congestion games are cost games.
pub fn any_game_from_value<V: Scalar>(value: &Value) -> Result<Game<V>> {
    match detect_kind(value)? {
        InputKind::Game => game_from_value(value),
        InputKind::Congestion => {
            let file: CongestionFile = serde_json::from_value(value.clone())?;
            CongestionGame::<V>::from_file(&file)?
                .to_game(file.convention.unwrap_or(Convention::Cost))
        }
        InputKind::Polymatrix => polymatrix_from_value::<V>(value)?.to_game(),
        other => Err(Error::BadParams(format!(
            "a {other} file is not a finite game"
        ))),
    }
}

pub fn congestion_from_value<V: Scalar>(value: &Value) -> Result<CongestionGame<V>> {
    let file: CongestionFile = serde_json::from_value(value.clone())?;
    CongestionGame::from_file(&file)
}

pub fn polymatrix_from_value<V: Scalar>(value: &Value) -> Result<PolymatrixGame<V>> {
    let file: PolymatrixFile = serde_json::from_value(value.clone())?;
    PolymatrixGame::from_file(&file)
}

pub fn routing_from_value(value: &Value) -> Result<RoutingInstance> {
    let inst: RoutingInstance = serde_json::from_value(value.clone())?;
    inst.validate()?;
    Ok(inst)
}

pub fn graph_from_value(value: &Value) -> Result<CoordinationGraph> {
    CoordinationGraph::from_json(&value.to_string())
}

/// `{"label", "members"}` or a bare list of profiles.
pub fn solutions_from_value(value: &Value, shape: &[usize]) -> Result<SolutionSet> {
    let (label, members) = match value {
        Value::Array(_) => ("user".to_string(), value),
        Value::Object(obj) => (
            obj.get("label")
                .and_then(Value::as_str)
                .unwrap_or("user")
                .to_string(),
            obj.get("members")
                .ok_or_else(|| Error::Parse("solution set has no 'members'".into()))?,
        ),
        _ => {
            return Err(Error::Parse(
                "solution set must be an object or a list".into(),
            ))
        }
    };
    let members: Vec<Profile> = serde_json::from_value(members.clone())
        .map_err(|_| Error::Parse("members must be lists of strategy indices".into()))?;
    SolutionSet::new(shape.to_vec(), members, label)
}

pub fn solutions_to_value(d: &SolutionSet) -> Value {
    json!({ "label": d.label(), "members": d.members() })
}

/// Replaces non-integral floats by fixed-precision decimal strings so that
/// reports are byte-identical across runs.
pub fn canonicalize(value: &Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            Value::String(format!("{:.*}", DECIMALS, x))
        }
        Value::Array(a) => Value::Array(a.iter().map(canonicalize).collect()),
        Value::Object(o) => Value::Object(
            o.iter()
                .map(|(k, v)| (k.clone(), canonicalize(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other.clone(),
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render_json(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(&canonicalize(value)).expect("values serialize");
    out.push('\n');
    out
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<[String; 3]>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(o) if o.contains_key("decimal") && o.len() <= 2 => {
            let exact = o
                .get("exact")
                .and_then(Value::as_str)
                .unwrap_or("")
                .to_string();
            let decimal = o["decimal"].as_str().unwrap_or("").to_string();
            rows.push([prefix.to_string(), exact, decimal]);
        }
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(k, v)| flatten(&key(&k.to_string()), v, rows)),
        Value::Number(n) => {
            let text = match n.as_f64() {
                Some(x) if n.is_f64() => format!("{:.*}", DECIMALS, x),
                _ => n.to_string(),
            };
            rows.push([
                prefix.to_string(),
                if n.is_f64() {
                    String::new()
                } else {
                    n.to_string()
                },
                text,
            ]);
        }
        Value::Bool(b) => rows.push([prefix.to_string(), b.to_string(), String::new()]),
        Value::String(s) if s.parse::<f64>().is_ok() => {
            rows.push([prefix.to_string(), String::new(), s.clone()])
        }
        _ => {}
    }
}

/// Flat `key,exact,decimal` rows of every numeric or boolean leaf.
pub fn render_csv(value: &Value) -> Result<String> {
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "exact", "decimal"])
        .map_err(|e| Error::Parse(e.to_string()))?;
    for r in &rows {
        w.write_record(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Follows a dotted path; numeric segments index arrays.
pub fn lookup<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(value, |v, seg| match v {
        Value::Array(a) => seg.parse::<usize>().ok().and_then(|k| a.get(k)),
        Value::Object(o) => o.get(seg),
        _ => None,
    })
}
