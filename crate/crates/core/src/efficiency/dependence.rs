//! Tightest coordination-dependence and variation constants.

use serde_json::{json, Value};

use super::{transition_rows, Row};
use crate::error::Result;
use crate::game::{Convention, Game, SolutionSet};
use crate::scalar::Scalar;
use crate::transition::StableVariant;

/// A tightest constant, or the reason none exists.
#[derive(Clone, Debug, PartialEq)]
pub enum Constant<V> {
    Value(V),
    Undefined(String),
}

impl<V: Scalar> Constant<V> {
    pub fn value(&self) -> Option<&V> {
        match self {
            Constant::Value(v) => Some(v),
            Constant::Undefined(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Constant::Value(v) => v.to_json(),
            Constant::Undefined(reason) => json!({ "undefined": reason }),
        }
    }

    /// Larger of two constants; undefined wins.
    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (Constant::Value(a), Constant::Value(b)) => Constant::Value(a.max_val(b)),
            (u @ Constant::Undefined(_), _) | (_, u @ Constant::Undefined(_)) => u,
        }
    }

    pub fn product(items: impl IntoIterator<Item = Self>) -> Self {
        items
            .into_iter()
            .fold(Constant::Value(V::one()), |acc, c| match (acc, c) {
                (Constant::Value(a), Constant::Value(b)) => Constant::Value(a * b),
                (u @ Constant::Undefined(_), _) | (_, u @ Constant::Undefined(_)) => u,
            })
    }
}

/// `num / den` as a constraint constant: a zero denominator with a
/// nonpositive numerator imposes nothing (treated as 1); otherwise a
/// nonpositive denominator leaves the constant undefined.
pub fn ratio_constant<V: Scalar>(num: &V, den: &V, what: &str) -> Constant<V> {
    if den.is_positive() {
        Constant::Value(num.clone() / den.clone())
    } else if den.is_zero_tol() && !num.is_positive() {
        Constant::Value(V::one())
    } else {
        Constant::Undefined(format!("{what}: denominator {den} is not positive"))
    }
}

fn at_least_one<V: Scalar>(c: Constant<V>) -> Constant<V> {
    match c {
        Constant::Value(v) => Constant::Value(v.max_val(V::one())),
        u => u,
    }
}

/// Constants for one player, reading payoffs as utilities.
#[derive(Clone, Debug, PartialEq)]
pub struct PlayerDependence<V> {
    /// Smallest alpha with min over T(D) of u_i >= min over D of u_i / alpha.
    pub alpha_lower: Constant<V>,
    /// Smallest alpha with max over T(D) of u_i <= alpha * max over D of u_i.
    pub alpha_upper: Constant<V>,
    /// Smallest beta with sw(s) >= sw(t) implying u_i(s) >= u_i(t) / beta on D.
    pub beta: Constant<V>,
    /// Entry `m - 1`: lower constant between T(D, m) and T(D, m + 1).
    pub degree_lower: Vec<Constant<V>>,
    pub degree_upper: Vec<Constant<V>>,
}

/// Welfare-level constants, oriented by the game's convention so that every
/// value is at least one: `worse` relates the worst social value over T(D)
/// to the worst over D, `better` the best ones.
#[derive(Clone, Debug, PartialEq)]
pub struct WelfareDependence<V> {
    pub worse: Constant<V>,
    pub better: Constant<V>,
    /// Entry `m - 1`: step from T(D, m) to T(D, m + 1).
    pub degree_worse: Vec<Constant<V>>,
    pub degree_better: Vec<Constant<V>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinationDependence<V> {
    pub convention: Convention,
    pub players: Vec<PlayerDependence<V>>,
    pub welfare: WelfareDependence<V>,
}

impl<V: Scalar> CoordinationDependence<V> {
    pub fn alpha_lower(&self) -> Constant<V> {
        fold_max(self.players.iter().map(|p| p.alpha_lower.clone()))
    }
    pub fn alpha_upper(&self) -> Constant<V> {
        fold_max(self.players.iter().map(|p| p.alpha_upper.clone()))
    }
    pub fn beta(&self) -> Constant<V> {
        fold_max(self.players.iter().map(|p| p.beta.clone()))
    }
    /// Largest per-player lower constant at step `m -> m + 1`.
    pub fn degree_lower(&self, m: usize) -> Constant<V> {
        fold_max(self.players.iter().map(|p| p.degree_lower[m - 1].clone()))
    }
    pub fn degree_upper(&self, m: usize) -> Constant<V> {
        fold_max(self.players.iter().map(|p| p.degree_upper[m - 1].clone()))
    }

    pub fn to_json(&self) -> Value {
        let list = |v: &[Constant<V>]| Value::Array(v.iter().map(Constant::to_json).collect());
        json!({
            "convention": self.convention.name(),
            "players": self.players.iter().enumerate().map(|(i, p)| json!({
                "player": i,
                "alpha_lower": p.alpha_lower.to_json(),
                "alpha_upper": p.alpha_upper.to_json(),
                "beta": p.beta.to_json(),
                "degree_lower": list(&p.degree_lower),
                "degree_upper": list(&p.degree_upper),
            })).collect::<Vec<_>>(),
            "welfare": {
                "worse": self.welfare.worse.to_json(),
                "better": self.welfare.better.to_json(),
                "degree_worse": list(&self.welfare.degree_worse),
                "degree_better": list(&self.welfare.degree_better),
            },
        })
    }
}

fn fold_max<V: Scalar>(items: impl Iterator<Item = Constant<V>>) -> Constant<V> {
    items.fold(Constant::Value(V::one()), Constant::max)
}

fn min_of<'a, V: Scalar>(values: impl Iterator<Item = &'a V>) -> Option<V> {
    values.fold(None, |acc: Option<V>, v| {
        Some(acc.map_or(v.clone(), |a| a.min_val(v.clone())))
    })
}

fn max_of<'a, V: Scalar>(values: impl Iterator<Item = &'a V>) -> Option<V> {
    values.fold(None, |acc: Option<V>, v| {
        Some(acc.map_or(v.clone(), |a| a.max_val(v.clone())))
    })
}

/// Exhaustive search for the tightest constants.
pub fn coordination_dependence<V: Scalar>(
    game: &Game<V>,
    d: &SolutionSet,
) -> Result<CoordinationDependence<V>> {
    let rows = transition_rows(game, d, StableVariant::Strict)?;
    let n = game.num_players();
    let utility = |r: &Row<V>, i: usize| game.payoff(&r.profile, i).clone();
    let level = |m: usize| rows.iter().filter(move |r| r.degree <= m);

    let mut players = Vec::with_capacity(n);
    for i in 0..n {
        let u_d: Vec<V> = level(1).map(|r| utility(r, i)).collect();
        let u_t: Vec<V> = rows.iter().map(|r| utility(r, i)).collect();
        let min_d = min_of(u_d.iter()).expect("D nonempty");
        let max_d = max_of(u_d.iter()).expect("D nonempty");
        let min_t = min_of(u_t.iter()).expect("D nonempty");
        let max_t = max_of(u_t.iter()).expect("D nonempty");
        let alpha_lower = at_least_one(ratio_constant(&min_d, &min_t, "minimum utility over T(D)"));
        let alpha_upper = at_least_one(ratio_constant(&max_t, &max_d, "maximum utility over D"));

        let members: Vec<&Row<V>> = level(1).collect();
        let mut beta = Constant::Value(V::one());
        for s in &members {
            for t in &members {
                if s.value.ge_tol(&t.value) {
                    let c = ratio_constant(
                        &utility(t, i),
                        &utility(s, i),
                        "utility of the better solution",
                    );
                    beta = beta.max(c);
                }
            }
        }

        let mut degree_lower = Vec::new();
        let mut degree_upper = Vec::new();
        for m in 1..n {
            let lo: Vec<V> = level(m).map(|r| utility(r, i)).collect();
            let hi: Vec<V> = level(m + 1).map(|r| utility(r, i)).collect();
            let min_lo = min_of(lo.iter()).expect("nonempty");
            let min_hi = min_of(hi.iter()).expect("nonempty");
            let max_lo = max_of(lo.iter()).expect("nonempty");
            let max_hi = max_of(hi.iter()).expect("nonempty");
            degree_lower.push(at_least_one(ratio_constant(
                &min_lo,
                &min_hi,
                "minimum utility one degree up",
            )));
            degree_upper.push(at_least_one(ratio_constant(
                &max_hi,
                &max_lo,
                "maximum utility one degree down",
            )));
        }
        players.push(PlayerDependence {
            alpha_lower,
            alpha_upper,
            beta,
            degree_lower,
            degree_upper,
        });
    }

    let conv = game.convention();
    let oriented = |inner: &[&Row<V>], outer: &[&Row<V>], worse_side: bool| -> Constant<V> {
        let sw_in: Vec<V> = inner.iter().map(|r| r.value.clone()).collect();
        let sw_out: Vec<V> = outer.iter().map(|r| r.value.clone()).collect();
        // Utility: worse = min_in / min_out, better = max_out / max_in.
        // Cost: worse = max_out / max_in, better = min_in / min_out.
        let c = match (conv, worse_side) {
            (Convention::Utility, true) | (Convention::Cost, false) => ratio_constant(
                &min_of(sw_in.iter()).expect("nonempty"),
                &min_of(sw_out.iter()).expect("nonempty"),
                "minimum social value over the larger set",
            ),
            _ => ratio_constant(
                &max_of(sw_out.iter()).expect("nonempty"),
                &max_of(sw_in.iter()).expect("nonempty"),
                "maximum social value over the smaller set",
            ),
        };
        at_least_one(c)
    };
    let d_rows: Vec<&Row<V>> = level(1).collect();
    let all_rows: Vec<&Row<V>> = rows.iter().collect();
    let mut degree_worse = Vec::new();
    let mut degree_better = Vec::new();
    for m in 1..n {
        let lo: Vec<&Row<V>> = level(m).collect();
        let hi: Vec<&Row<V>> = level(m + 1).collect();
        degree_worse.push(oriented(&lo, &hi, true));
        degree_better.push(oriented(&lo, &hi, false));
    }
    let welfare = WelfareDependence {
        worse: oriented(&d_rows, &all_rows, true),
        better: oriented(&d_rows, &all_rows, false),
        degree_worse,
        degree_better,
    };
    Ok(CoordinationDependence {
        convention: conv,
        players,
        welfare,
    })
}
