//! Exact potential detection by the four-cycle test.

use rayon::prelude::*;
use serde::Serialize;

use crate::game::{Game, Profile};
use crate::scalar::Scalar;

/// A closed unilateral-deviation cycle `s -> (a, s_-i) -> (a, b, s_-ij) ->
/// (s_i, b, s_-ij) -> s` whose payoff changes do not cancel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FourCycle {
    pub profile: Profile,
    pub players: (usize, usize),
    pub alternatives: (usize, usize),
}

fn with(profile: &[usize], changes: &[(usize, usize)]) -> Profile {
    let mut p = profile.to_vec();
    for &(i, s) in changes {
        p[i] = s;
    }
    p
}

/// First cycle (in profile order) violating the exact-potential condition.
pub fn four_cycle_violation<V: Scalar>(game: &Game<V>) -> Option<FourCycle> {
    let n = game.num_players();
    (0..game.num_profiles())
        .into_par_iter()
        .find_map_first(|k| {
            let s = game.profile_at(k);
            for i in 0..n {
                for j in i + 1..n {
                    // each unordered cycle is visited once from its smallest corner
                    for a in s[i] + 1..game.num_strategies(i) {
                        for b in s[j] + 1..game.num_strategies(j) {
                            let p1 = with(&s, &[(i, a)]);
                            let p2 = with(&s, &[(i, a), (j, b)]);
                            let p3 = with(&s, &[(j, b)]);
                            let total = game.payoff(&p1, i).clone() - game.payoff(&s, i).clone()
                                + game.payoff(&p2, j).clone()
                                - game.payoff(&p1, j).clone()
                                + game.payoff(&p3, i).clone()
                                - game.payoff(&p2, i).clone()
                                + game.payoff(&s, j).clone()
                                - game.payoff(&p3, j).clone();
                            if !total.is_zero_tol() {
                                return Some(FourCycle {
                                    profile: s,
                                    players: (i, j),
                                    alternatives: (a, b),
                                });
                            }
                        }
                    }
                }
            }
            None
        })
}

pub fn is_exact_potential<V: Scalar>(game: &Game<V>) -> bool {
    four_cycle_violation(game).is_none()
}

/// Potential values indexed like the payoff table, normalised to zero at
/// the all-zeros profile, or None when the game has no exact potential.
pub fn exact_potential<V: Scalar>(game: &Game<V>) -> Option<Vec<V>> {
    if !is_exact_potential(game) {
        return None;
    }
    let n = game.num_players();
    Some(
        (0..game.num_profiles())
            .into_par_iter()
            .map(|k| {
                let s = game.profile_at(k);
                let mut prev = vec![0; n];
                let mut phi = V::zero();
                for i in 0..n {
                    let mut next = prev.clone();
                    next[i] = s[i];
                    phi = phi + game.payoff(&next, i).clone() - game.payoff(&prev, i).clone();
                    prev = next;
                }
                phi
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Convention;
    use crate::scalar::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn identical_interest_is_potential() {
        let g = Game::from_fn(Convention::Utility, &[2, 3], |s| {
            vec![r((s[0] * 3 + s[1]) as i64); 2]
        })
        .unwrap();
        let phi = exact_potential(&g).unwrap();
        // unilateral changes in payoff equal changes in potential
        for p in g.profiles() {
            for i in 0..2 {
                for a in 0..g.num_strategies(i) {
                    let q = with(&p, &[(i, a)]);
                    assert_eq!(
                        g.payoff(&q, i) - g.payoff(&p, i),
                        phi[g.index_of(&q)] - phi[g.index_of(&p)]
                    );
                }
            }
        }
    }

    #[test]
    fn matching_pennies_is_not() {
        let g = Game::from_fn(Convention::Utility, &[2, 2], |s| {
            let v = if s[0] == s[1] { 1 } else { -1 };
            vec![r(v), r(-v)]
        })
        .unwrap();
        let cycle = four_cycle_violation(&g).unwrap();
        assert_eq!(cycle.profile, vec![0, 0]);
        assert!(exact_potential(&g).is_none());
    }
}
