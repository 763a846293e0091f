//! Extensive smoothness and the two-player condition for pots = pos.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{optimal_profiles, price_report, Price};
use crate::error::{Error, Result};
use crate::game::{Convention, Game, Profile, SolutionSet};
use crate::scalar::Scalar;
use crate::transition::{StableVariant, TransitionSet};

/// 64 points `2 * 2^(-(63 - k) / 8)`, k = 0..64: geometric in (0, 2] with
/// 1 and 2 on the grid.
pub fn default_lambda_grid<V: Scalar>() -> Vec<V> {
    (0..64)
        .map(|k| {
            let exponent = -(63 - k) as f64 / 8.0;
            if (63 - k) % 8 == 0 {
                V::from_int(2) / V::from_int(1i64 << ((63 - k) / 8))
            } else {
                V::from_f64(2.0 * exponent.exp2())
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport<V> {
    pub alpha: V,
    pub beta: V,
    pub best_lambda: V,
    pub mu: V,
    /// alpha * beta * lambda / (1 + alpha * beta * mu)
    pub bound: V,
    pub pota: V,
    pub holds: bool,
}

impl<V: Scalar> SmoothnessReport<V> {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha.to_json(),
            "beta": self.beta.to_json(),
            "lambda": self.best_lambda.to_json(),
            "mu": self.mu.to_json(),
            "certified_bound": self.bound.to_json(),
            "pota": self.pota.to_json(),
            "holds": self.holds,
        })
    }
}

fn replaced(profile: &[usize], i: usize, s: usize) -> Profile {
    let mut p = profile.to_vec();
    p[i] = s;
    p
}

/// Tightest alpha with u_i(s) >= alpha u_i(d) whenever s is a transition and
/// d an equilibrium sharing s_i.
fn tightest_alpha<V: Scalar>(game: &Game<V>, ne: &SolutionSet, trans: &[Profile]) -> V {
    trans
        .par_iter()
        .map(|s| {
            let mut best = V::one();
            for d in ne.members() {
                for i in 0..game.num_players() {
                    let den = game.payoff(d, i);
                    if s[i] == d[i] && den.is_positive() {
                        best = best.min_val(game.payoff(s, i).clone() / den.clone());
                    }
                }
            }
            best
        })
        .reduce(V::one, V::min_val)
}

/// Tightest beta with u_i(s*_i, t_-i) >= beta u_i(s*_i, v_-i) over all
/// optima s* and transitions t, v.
fn tightest_beta<V: Scalar>(game: &Game<V>, optima: &[Profile], trans: &[Profile]) -> V {
    let n = game.num_players();
    optima
        .par_iter()
        .map(|opt| {
            let mut best = V::one();
            for i in 0..n {
                let values: Vec<V> = trans
                    .iter()
                    .map(|t| game.payoff(&replaced(t, i, opt[i]), i).clone())
                    .collect();
                let lo = values
                    .iter()
                    .cloned()
                    .reduce(V::min_val)
                    .expect("transitions are nonempty");
                let hi = values
                    .into_iter()
                    .reduce(V::max_val)
                    .expect("transitions are nonempty");
                if hi.is_positive() {
                    best = best.min_val(lo / hi);
                }
            }
            best
        })
        .reduce(V::one, V::min_val)
}

/// Smallest mu >= 0 satisfying the smoothness inequality at `lambda`, or
/// None when no mu works.
fn minimal_mu<V: Scalar>(
    game: &Game<V>,
    optima: &[Profile],
    trans: &[Profile],
    opt_value: &V,
    lambda: &V,
) -> Option<V> {
    let n = game.num_players();
    let target = lambda.clone() * opt_value.clone();
    optima
        .par_iter()
        .map(|opt| {
            let mut mu = V::zero();
            for t in trans {
                let mixed = crate::scalar::sum(
                    (0..n).map(|i| game.payoff(&replaced(t, i, opt[i]), i).clone()),
                );
                let need = target.clone() - mixed;
                let sw = game.sw(t);
                if sw.is_positive() {
                    mu = mu.max_val(need / sw);
                } else if need.is_positive() {
                    return None;
                }
            }
            Some(mu)
        })
        .try_reduce(V::zero, |a, b| Some(a.max_val(b)))
}

/// Certifies the largest lower bound on pota that the smoothness
/// conditions give on `grid`, using the pure equilibria as solutions.
pub fn extensive_smoothness<V: Scalar>(game: &Game<V>, grid: &[V]) -> Result<SmoothnessReport<V>> {
    if game.convention() != Convention::Utility {
        return Err(Error::PreconditionFailed(
            "extensive smoothness is stated for utility maximisation".into(),
        ));
    }
    if game.payoff_table().iter().any(Scalar::is_negative) {
        return Err(Error::PreconditionFailed(
            "extensive smoothness needs nonnegative utilities".into(),
        ));
    }
    let ne = game.pure_ne()?;
    ne.ensure_nonempty()?;
    let prices = price_report(game, &ne, StableVariant::Strict)?;
    let trans = TransitionSet::of(&ne)?.to_vec()?;
    let optima = optimal_profiles(game);
    let alpha = tightest_alpha(game, &ne, &trans);
    let beta = tightest_beta(game, &optima, &trans);
    let ab = alpha.clone() * beta.clone();
    let opt = prices.optimum.value.clone();

    let mut best: Option<(V, V, V)> = None;
    for lambda in grid {
        if !lambda.is_positive() {
            continue;
        }
        let Some(mu) = minimal_mu(game, &optima, &trans, &opt, lambda) else {
            continue;
        };
        let bound = ab.clone() * lambda.clone() / (V::one() + ab.clone() * mu.clone());
        if best.as_ref().is_none_or(|(b, _, _)| bound.gt_tol(b)) {
            best = Some((bound, lambda.clone(), mu));
        }
    }
    let (bound, best_lambda, mu) =
        best.ok_or_else(|| Error::Infeasible("no grid point admits a nonnegative mu".into()))?;
    let Price { value: pota, .. } = prices.pota;
    Ok(SmoothnessReport {
        holds: bound.le_tol(&pota),
        alpha,
        beta,
        best_lambda,
        mu,
        bound,
        pota,
    })
}

/// Whether weakly improving deviations of both players always leave one of
/// the two deviations weakly better for society.
pub fn two_player_pots_condition<V: Scalar>(game: &Game<V>) -> Result<bool> {
    if game.num_players() != 2 {
        return Err(Error::WrongArity {
            expected: 2,
            found: game.num_players(),
        });
    }
    let conv = game.convention();
    // "weakly better or equal" under the convention
    let at_least = |a: &V, b: &V| !conv.better(b, a);
    let (k1, k2) = (game.num_strategies(0), game.num_strategies(1));
    Ok(game.profiles().all(|p| {
        let (x, y) = (p[0], p[1]);
        let u1 = game.payoff(&p, 0);
        let u2 = game.payoff(&p, 1);
        let sw = game.sw(&p);
        // Some x' the first player weakly prefers that society strictly dislikes.
        let bad_x = (0..k1).any(|x2| {
            at_least(game.payoff(&[x2, y], 0), u1) && conv.better(&sw, &game.sw(&[x2, y]))
        });
        let bad_y = (0..k2).any(|y2| {
            at_least(game.payoff(&[x, y2], 1), u2) && conv.better(&sw, &game.sw(&[x, y2]))
        });
        !(bad_x && bad_y)
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPlayerReport<V> {
    pub condition: bool,
    pub pos: Option<V>,
    pub pots: Option<V>,
    /// Checked only when the condition holds and prices are defined.
    pub pots_equals_pos: Option<bool>,
}

impl<V: Scalar> TwoPlayerReport<V> {
    pub fn to_json(&self) -> Value {
        json!({
            "condition": self.condition,
            "pos": self.pos.as_ref().map(Scalar::to_json),
            "pots": self.pots.as_ref().map(Scalar::to_json),
            "pots_equals_pos": self.pots_equals_pos,
        })
    }
}

pub fn two_player_condition<V: Scalar>(game: &Game<V>) -> Result<TwoPlayerReport<V>> {
    let condition = two_player_pots_condition(game)?;
    let ne = game.pure_ne()?;
    let prices = if ne.is_empty() {
        None
    } else {
        price_report(game, &ne, StableVariant::Strict).ok()
    };
    let (pos, pots) = match &prices {
        Some(p) => (Some(p.pos.value.clone()), Some(p.pots.value.clone())),
        None => (None, None),
    };
    let pots_equals_pos = match (&pos, &pots) {
        (Some(a), Some(b)) if condition => Some(a.eq_tol(b)),
        _ => None,
    };
    Ok(TwoPlayerReport {
        condition,
        pos,
        pots,
        pots_equals_pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn grid_hits_one_and_two() {
        let grid = default_lambda_grid::<Rational>();
        assert_eq!(grid.len(), 64);
        assert_eq!(grid[63], r(2));
        assert_eq!(grid[55], r(1));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(grid[0] > r(0));
    }

    #[test]
    fn constant_game_certifies_one() {
        let g = Game::from_fn(Convention::Utility, &[2, 2], |_| vec![r(1), r(1)]).unwrap();
        let rep = extensive_smoothness(&g, &default_lambda_grid()).unwrap();
        assert_eq!(rep.alpha, r(1));
        assert_eq!(rep.beta, r(1));
        assert_eq!(rep.bound, r(1));
        assert!(rep.holds);
    }

    #[test]
    fn scaled_coordination_bound_is_sound() {
        let (a, b, c) = (r(4), r(3), r(2));
        let g = Game::from_fn(Convention::Utility, &[2, 2], |s| match (s[0], s[1]) {
            (0, 0) => vec![a, a],
            (0, 1) => vec![a / c, b / c],
            (1, 0) => vec![b / c, a / c],
            _ => vec![b, b],
        })
        .unwrap();
        let rep = extensive_smoothness(&g, &default_lambda_grid()).unwrap();
        assert!(rep.holds);
        assert!(rep.bound <= Rational::from_frac(7, 16));
    }

    #[test]
    fn two_player_needs_two_players() {
        let g = Game::from_fn(Convention::Utility, &[1, 1, 1], |_| vec![r(1); 3]).unwrap();
        assert!(matches!(
            two_player_pots_condition(&g),
            Err(Error::WrongArity { .. })
        ));
    }

    #[test]
    fn identical_utility_meets_condition() {
        let table = [[5, 1, 0], [2, 4, 3], [0, 6, 1]];
        let g = Game::from_fn(Convention::Utility, &[3, 3], |s| {
            vec![r(table[s[0]][s[1]]); 2]
        })
        .unwrap();
        let rep = two_player_condition(&g).unwrap();
        assert!(rep.condition);
        assert_eq!(rep.pots_equals_pos, Some(true));
    }
}
