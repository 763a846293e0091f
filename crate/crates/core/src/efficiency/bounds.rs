//! Condition-based bounds on transition prices, instantiated with the
//! tightest constants and checked against the exhaustively computed prices.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{coordination_dependence, price_report, Constant, CoordinationDependence, PriceReport};
use crate::error::Result;
use crate::game::{Convention, Game, SolutionSet};
use crate::scalar::Scalar;
use crate::transition::StableVariant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    AtLeast,
    AtMost,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow<V> {
    pub name: String,
    pub anchor: String,
    pub constants: BTreeMap<String, Constant<V>>,
    pub inequality: String,
    pub lhs: Option<V>,
    pub rhs: Option<V>,
    pub holds: Option<bool>,
    /// Nonnegative exactly when the bound holds.
    pub slack: Option<V>,
    pub skipped: Option<String>,
}

impl<V: Scalar> BoundRow<V> {
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "anchor": self.anchor,
            "hypothesis_constants": self.constants.iter().map(|(k, c)| (k.clone(), c.to_json())).collect::<serde_json::Map<_, _>>(),
            "asserted_inequality": self.inequality,
            "lhs": self.lhs.as_ref().map(Scalar::to_json),
            "rhs": self.rhs.as_ref().map(Scalar::to_json),
            "holds": self.holds,
            "slack": self.slack.as_ref().map(Scalar::to_json),
            "skipped": self.skipped,
        })
    }

    /// True unless the row was evaluated and failed.
    pub fn ok(&self) -> bool {
        self.holds != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport<V> {
    pub prices: PriceReport<V>,
    pub dependence: CoordinationDependence<V>,
    pub rows: Vec<BoundRow<V>>,
}

impl<V: Scalar> BoundReport<V> {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(BoundRow::ok)
    }

    pub fn row(&self, name: &str) -> Option<&BoundRow<V>> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "prices": self.prices.to_json(),
            "dependence": self.dependence.to_json(),
            "bounds": self.rows.iter().map(BoundRow::to_json).collect::<Vec<_>>(),
            "all_hold": self.all_hold(),
        })
    }
}

struct Builder<V> {
    rows: Vec<BoundRow<V>>,
}

impl<V: Scalar> Builder<V> {
    fn compare(
        &mut self,
        name: String,
        anchor: &str,
        inequality: String,
        lhs: V,
        rhs: V,
        dir: Direction,
    ) {
        self.push(
            name,
            anchor,
            BTreeMap::new(),
            inequality,
            Constant::Value(V::one()),
            lhs,
            rhs,
            dir,
            false,
        );
    }

    /// Pushes `lhs (>= | <=) rhs * scale` or `lhs >= rhs / scale`.
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        name: String,
        anchor: &str,
        constants: BTreeMap<String, Constant<V>>,
        inequality: String,
        scale: Constant<V>,
        lhs: V,
        base: V,
        dir: Direction,
        divide: bool,
    ) {
        let scale = match scale {
            Constant::Value(v) => v,
            Constant::Undefined(reason) => {
                self.rows.push(BoundRow {
                    name,
                    anchor: anchor.into(),
                    constants,
                    inequality,
                    lhs: Some(lhs),
                    rhs: None,
                    holds: None,
                    slack: None,
                    skipped: Some(reason),
                });
                return;
            }
        };
        let rhs = if divide { base / scale } else { base * scale };
        let (holds, slack) = match dir {
            Direction::AtLeast => (lhs.ge_tol(&rhs), lhs.clone() - rhs.clone()),
            Direction::AtMost => (lhs.le_tol(&rhs), rhs.clone() - lhs.clone()),
        };
        self.rows.push(BoundRow {
            name,
            anchor: anchor.into(),
            constants,
            inequality,
            lhs: Some(lhs),
            rhs: Some(rhs),
            holds: Some(holds),
            slack: Some(slack),
            skipped: None,
        });
    }

    fn skip(&mut self, name: &str, anchor: &str, inequality: &str, reason: &str) {
        self.rows.push(BoundRow {
            name: name.into(),
            anchor: anchor.into(),
            constants: BTreeMap::new(),
            inequality: inequality.into(),
            lhs: None,
            rhs: None,
            holds: None,
            slack: None,
            skipped: Some(reason.into()),
        });
    }
}

const NESTING: &str = "transition sets contain the solutions";
const WELFARE: &str = "welfare dependence on coordination";
const WELFARE_DEGREE: &str = "welfare dependence per transition degree";
const PLAYER: &str = "player dependence on coordination with variation";
const PLAYER_DEGREE: &str = "player dependence per transition degree with variation";

fn constants<V: Scalar>(items: &[(&str, &Constant<V>)]) -> BTreeMap<String, Constant<V>> {
    items
        .iter()
        .map(|(k, c)| (k.to_string(), (*c).clone()))
        .collect()
}

/// Instantiates every bound with the tightest constants and checks it.
pub fn check_bound_observations<V: Scalar>(
    game: &Game<V>,
    d: &SolutionSet,
) -> Result<BoundReport<V>> {
    let prices = price_report(game, d, StableVariant::Strict)?;
    let dep = coordination_dependence(game, d)?;
    let n = game.num_players();
    let mut b = Builder { rows: Vec::new() };
    let poa = prices.poa.value.clone();
    let pos = prices.pos.value.clone();
    let pota = prices.pota.value.clone();
    let pots = prices.pots.value.clone();
    let utility = game.convention() == Convention::Utility;
    use Direction::{AtLeast, AtMost};

    if utility {
        b.compare(
            "pota_le_poa".into(),
            NESTING,
            "pota <= poa".into(),
            pota.clone(),
            poa.clone(),
            AtMost,
        );
        b.compare(
            "pots_ge_pos".into(),
            NESTING,
            "pots >= pos".into(),
            pots.clone(),
            pos.clone(),
            AtLeast,
        );
    } else {
        b.compare(
            "pota_ge_poa".into(),
            NESTING,
            "pota >= poa".into(),
            pota.clone(),
            poa.clone(),
            AtLeast,
        );
        b.compare(
            "pots_le_pos".into(),
            NESTING,
            "pots <= pos".into(),
            pots.clone(),
            pos.clone(),
            AtMost,
        );
    }

    let w = &dep.welfare;
    let (dir_worse, div_worse, ineq_worse) = if utility {
        (AtLeast, true, "pota >= poa / alpha")
    } else {
        (AtMost, false, "pota <= alpha * poa")
    };
    let (dir_better, div_better, ineq_better) = if utility {
        (AtMost, false, "pots <= alpha * pos")
    } else {
        (AtLeast, true, "pots >= pos / alpha")
    };
    b.push(
        "welfare_anarchy".into(),
        WELFARE,
        constants(&[("alpha", &w.worse)]),
        ineq_worse.into(),
        w.worse.clone(),
        pota.clone(),
        poa.clone(),
        dir_worse,
        div_worse,
    );
    b.push(
        "welfare_stability".into(),
        WELFARE,
        constants(&[("alpha", &w.better)]),
        ineq_better.into(),
        w.better.clone(),
        pots.clone(),
        pos.clone(),
        dir_better,
        div_better,
    );

    for m in 2..=n {
        let worse = Constant::product(w.degree_worse[..m - 1].iter().cloned());
        let better = Constant::product(w.degree_better[..m - 1].iter().cloned());
        let ineq_w = if utility {
            format!("{m}-pota >= poa / prod(alpha_1..alpha_{})", m - 1)
        } else {
            format!("{m}-pota <= prod(alpha_1..alpha_{}) * poa", m - 1)
        };
        let ineq_b = if utility {
            format!("{m}-pots <= prod(alpha_1..alpha_{}) * pos", m - 1)
        } else {
            format!("{m}-pots >= pos / prod(alpha_1..alpha_{})", m - 1)
        };
        b.push(
            format!("welfare_degree_anarchy[{m}]"),
            WELFARE_DEGREE,
            constants(&[("product_alpha", &worse)]),
            ineq_w,
            worse.clone(),
            prices.m_pota(m).clone(),
            poa.clone(),
            dir_worse,
            div_worse,
        );
        b.push(
            format!("welfare_degree_stability[{m}]"),
            WELFARE_DEGREE,
            constants(&[("product_alpha", &better)]),
            ineq_b,
            better.clone(),
            prices.m_pots(m).clone(),
            pos.clone(),
            dir_better,
            div_better,
        );
    }

    if !utility {
        let reason = "per-player constants are defined for utility maximisation";
        b.skip(
            "player_anarchy",
            PLAYER,
            "pota >= poa / (alpha * beta)",
            reason,
        );
        b.skip(
            "player_stability",
            PLAYER,
            "pots <= alpha * beta * pos",
            reason,
        );
        return Ok(BoundReport {
            prices,
            dependence: dep,
            rows: b.rows,
        });
    }

    let beta = dep.beta();
    let alpha_lower = dep.alpha_lower();
    let alpha_upper = dep.alpha_upper();
    let lower = Constant::product([alpha_lower.clone(), beta.clone()]);
    let upper = Constant::product([alpha_upper.clone(), beta.clone()]);
    b.push(
        "player_anarchy".into(),
        PLAYER,
        constants(&[("alpha", &alpha_lower), ("beta", &beta)]),
        "pota >= poa / (alpha * beta)".into(),
        lower,
        pota.clone(),
        poa.clone(),
        AtLeast,
        true,
    );
    b.push(
        "player_stability".into(),
        PLAYER,
        constants(&[("alpha", &alpha_upper), ("beta", &beta)]),
        "pots <= alpha * beta * pos".into(),
        upper,
        pots.clone(),
        pos.clone(),
        AtMost,
        false,
    );
    for m in 2..=n {
        let lower_steps: Vec<Constant<V>> = (1..m).map(|k| dep.degree_lower(k)).collect();
        let upper_steps: Vec<Constant<V>> = (1..m).map(|k| dep.degree_upper(k)).collect();
        let prod_lower = Constant::product(lower_steps.iter().cloned());
        let prod_upper = Constant::product(upper_steps.iter().cloned());
        b.push(
            format!("player_degree_anarchy[{m}]"),
            PLAYER_DEGREE,
            constants(&[("product_alpha", &prod_lower), ("beta", &beta)]),
            format!("{m}-pota >= poa / (prod(alpha_1..alpha_{}) * beta)", m - 1),
            Constant::product([prod_lower.clone(), beta.clone()]),
            prices.m_pota(m).clone(),
            poa.clone(),
            AtLeast,
            true,
        );
        b.push(
            format!("player_degree_stability[{m}]"),
            PLAYER_DEGREE,
            constants(&[("product_alpha", &prod_upper), ("beta", &beta)]),
            format!("{m}-pots <= prod(alpha_1..alpha_{}) * beta * pos", m - 1),
            Constant::product([prod_upper.clone(), beta.clone()]),
            prices.m_pots(m).clone(),
            pos.clone(),
            AtMost,
            false,
        );
    }
    Ok(BoundReport {
        prices,
        dependence: dep,
        rows: b.rows,
    })
}
