//! Prices of anarchy and stability over solutions, transitions, m-transitions
//! and stable transitions.

mod bounds;
mod dependence;
mod smoothness;

pub use bounds::{check_bound_observations, BoundReport, BoundRow};
pub use dependence::{
    coordination_dependence, ratio_constant, Constant, CoordinationDependence, PlayerDependence,
};
pub use smoothness::{
    default_lambda_grid, extensive_smoothness, two_player_condition, two_player_pots_condition,
    SmoothnessReport, TwoPlayerReport,
};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{Convention, Game, Profile, SolutionSet, Welfare};
use crate::scalar::Scalar;
use crate::transition::{
    stability_condition, transition_degree, DegreeMode, StableVariant, TransitionSet,
};

/// One transition with everything the price computations need.
#[derive(Clone, Debug)]
pub(crate) struct Row<V> {
    pub profile: Profile,
    pub value: V,
    pub degree: usize,
    pub stable: bool,
}

/// Rows for every transition of D, lexicographic.
pub(crate) fn transition_rows<V: Scalar>(
    game: &Game<V>,
    d: &SolutionSet,
    variant: StableVariant,
) -> Result<Vec<Row<V>>> {
    if d.shape() != game.shape() {
        return Err(Error::BadParams(
            "solution set does not belong to the game".into(),
        ));
    }
    let profiles = TransitionSet::of(d)?.to_vec()?;
    profiles
        .into_par_iter()
        .map(|p| {
            let degree = if d.contains(&p) {
                1
            } else {
                transition_degree(d, &p, DegreeMode::Exact)?.degree
            };
            let stable = d.contains(&p) || stability_condition(game, &p, variant);
            Ok(Row {
                value: game.sw(&p),
                profile: p,
                degree,
                stable,
            })
        })
        .collect()
}

/// Worst row under the game's convention (lowest welfare or highest cost);
/// ties keep the lexicographically first profile.
pub(crate) fn worst<'a, V: Scalar>(
    conv: Convention,
    rows: impl Iterator<Item = &'a Row<V>>,
) -> Option<&'a Row<V>> {
    rows.fold(None, |acc: Option<&Row<V>>, r| match acc {
        Some(a) if !conv.better(&a.value, &r.value) => Some(a),
        _ => Some(r),
    })
}

pub(crate) fn best<'a, V: Scalar>(
    conv: Convention,
    rows: impl Iterator<Item = &'a Row<V>>,
) -> Option<&'a Row<V>> {
    rows.fold(None, |acc: Option<&Row<V>>, r| match acc {
        Some(a) if !conv.better(&r.value, &a.value) => Some(a),
        _ => Some(r),
    })
}

/// Optimal social value over all profiles and a lexicographically first
/// optimiser.
pub fn optimum<V: Scalar>(game: &Game<V>) -> (V, Profile) {
    let conv = game.convention();
    let (index, value) = (0..game.num_profiles())
        .into_par_iter()
        .map(|k| (k, game.sw_at(k)))
        .reduce_with(|a, b| {
            if conv.better(&b.1, &a.1) || (b.1.eq_tol(&a.1) && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("games have at least one profile");
    (value, game.profile_at(index))
}

/// All optimal profiles.
pub fn optimal_profiles<V: Scalar>(game: &Game<V>) -> Vec<Profile> {
    let (opt, _) = optimum(game);
    (0..game.num_profiles())
        .into_par_iter()
        .filter(|&k| game.sw_at(k).eq_tol(&opt))
        .map(|k| game.profile_at(k))
        .collect()
}

fn positive_optimum<V: Scalar>(game: &Game<V>) -> Result<(V, Profile)> {
    let (opt, at) = optimum(game);
    if !opt.is_positive() {
        let what = match game.convention() {
            Convention::Utility => "maximum social welfare",
            Convention::Cost => "minimum social cost",
        };
        return Err(Error::UndefinedPrice {
            measure: "all prices".into(),
            reason: format!("{what} is {opt}, not strictly positive"),
        });
    }
    Ok((opt, at))
}

/// A price together with the profile attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct Price<V> {
    pub value: V,
    pub witness: Profile,
}

impl<V: Scalar> Price<V> {
    fn to_json(&self) -> Value {
        json!({ "value": self.value.to_json(), "witness": self.witness })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceReport<V> {
    pub convention: Convention,
    pub variant: StableVariant,
    pub optimum: Welfare<V>,
    pub optimum_profile: Profile,
    pub poa: Price<V>,
    pub pos: Price<V>,
    pub pota: Price<V>,
    pub pots: Price<V>,
    pub posta: Price<V>,
    pub posts: Price<V>,
    /// Entry `m - 1` holds the price over T(D, m), for m = 1..=n.
    pub m_pota: Vec<Price<V>>,
    pub m_pots: Vec<Price<V>>,
    /// Worst stable m-transition, entry `m - 1`.
    pub m_posta: Vec<Price<V>>,
    pub solutions: usize,
    pub transitions: usize,
    pub stable_transitions: usize,
}

impl<V: Scalar> PriceReport<V> {
    pub fn m_pota(&self, m: usize) -> &V {
        &self.m_pota[m.clamp(1, self.m_pota.len()) - 1].value
    }
    pub fn m_pots(&self, m: usize) -> &V {
        &self.m_pots[m.clamp(1, self.m_pots.len()) - 1].value
    }
    pub fn m_posta(&self, m: usize) -> &V {
        &self.m_posta[m.clamp(1, self.m_posta.len()) - 1].value
    }

    pub fn to_json(&self) -> Value {
        let list = |v: &[Price<V>]| -> Value {
            Value::Array(
                v.iter()
                    .enumerate()
                    .map(|(k, p)| json!({ "m": k + 1, "value": p.value.to_json(), "witness": p.witness }))
                    .collect(),
            )
        };
        json!({
            "convention": self.convention.name(),
            "stable_variant": self.variant.to_string(),
            "optimum": { "value": self.optimum.value.to_json(), "witness": self.optimum_profile },
            "poa": self.poa.to_json(),
            "pos": self.pos.to_json(),
            "pota": self.pota.to_json(),
            "pots": self.pots.to_json(),
            "posta": self.posta.to_json(),
            "posts": self.posts.to_json(),
            "m_pota": list(&self.m_pota),
            "m_pots": list(&self.m_pots),
            "m_posta": list(&self.m_posta),
            "counts": {
                "solutions": self.solutions,
                "transitions": self.transitions,
                "stable_transitions": self.stable_transitions,
            },
        })
    }

    /// Flat `(measure, value)` pairs.
    pub fn measures(&self) -> BTreeMap<String, V> {
        let mut out = BTreeMap::new();
        out.insert("poa".to_string(), self.poa.value.clone());
        out.insert("pos".to_string(), self.pos.value.clone());
        out.insert("pota".to_string(), self.pota.value.clone());
        out.insert("pots".to_string(), self.pots.value.clone());
        out.insert("posta".to_string(), self.posta.value.clone());
        out.insert("posts".to_string(), self.posts.value.clone());
        for (k, p) in self.m_pota.iter().enumerate() {
            out.insert(format!("m_pota[{}]", k + 1), p.value.clone());
        }
        for (k, p) in self.m_pots.iter().enumerate() {
            out.insert(format!("m_pots[{}]", k + 1), p.value.clone());
        }
        for (k, p) in self.m_posta.iter().enumerate() {
            out.insert(format!("m_posta[{}]", k + 1), p.value.clone());
        }
        out
    }
}

/// Computes every price by exhaustive extremisation.
pub fn price_report<V: Scalar>(
    game: &Game<V>,
    d: &SolutionSet,
    variant: StableVariant,
) -> Result<PriceReport<V>> {
    d.ensure_nonempty()?;
    let (opt, opt_at) = positive_optimum(game)?;
    let rows = transition_rows(game, d, variant)?;
    let conv = game.convention();
    let price = |row: Option<&Row<V>>| -> Price<V> {
        let row = row.expect("D is nonempty so every filtered set contains D");
        Price {
            value: row.value.clone() / opt.clone(),
            witness: row.profile.clone(),
        }
    };
    let in_d = |r: &&Row<V>| d.contains(&r.profile);
    let n = game.num_players();
    let m_pota = (1..=n)
        .map(|m| price(worst(conv, rows.iter().filter(|r| r.degree <= m))))
        .collect();
    let m_pots = (1..=n)
        .map(|m| price(best(conv, rows.iter().filter(|r| r.degree <= m))))
        .collect();
    let m_posta = (1..=n)
        .map(|m| {
            price(worst(
                conv,
                rows.iter().filter(|r| r.degree <= m && r.stable),
            ))
        })
        .collect();
    Ok(PriceReport {
        convention: conv,
        variant,
        optimum: Welfare {
            value: opt.clone(),
            convention: conv,
        },
        optimum_profile: opt_at,
        poa: price(worst(conv, rows.iter().filter(in_d))),
        pos: price(best(conv, rows.iter().filter(in_d))),
        pota: price(worst(conv, rows.iter())),
        pots: price(best(conv, rows.iter())),
        posta: price(worst(conv, rows.iter().filter(|r| r.stable))),
        posts: price(best(conv, rows.iter().filter(|r| r.stable))),
        m_pota,
        m_pots,
        m_posta,
        solutions: d.len(),
        transitions: rows.len(),
        stable_transitions: rows.iter().filter(|r| r.stable).count(),
    })
}

/// Whether every player's best-response set is the same against every
/// opponent profile.
pub fn best_responses_independent<V: Scalar>(game: &Game<V>) -> bool {
    (0..game.num_players()).all(|i| {
        let first = game.best_responses(i, &vec![0; game.num_players()]);
        game.profiles().all(|p| game.best_responses(i, &p) == first)
    })
}

/// Whether all profiles share one social value.
pub fn is_constant_sum<V: Scalar>(game: &Game<V>) -> bool {
    let first = game.sw_at(0);
    (1..game.num_profiles()).all(|k| game.sw_at(k).eq_tol(&first))
}
