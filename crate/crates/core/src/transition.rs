//! Transition sets T(D), m-transitions T(D,m), stable transitions ST(D) and
//! merges.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::reduce_to_cover;
use crate::error::{Error, Result};
use crate::game::{check_profile_shape, check_size, Game, Profile, ProfileIter, SolutionSet};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StableVariant {
    /// The helper must itself not be best-responding.
    #[default]
    Strict,
    /// The helper only needs a best response different from its strategy.
    Weak,
}

impl FromStr for StableVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(StableVariant::Strict),
            "weak" => Ok(StableVariant::Weak),
            other => Err(Error::BadParams(format!(
                "unknown stability variant '{other}'"
            ))),
        }
    }
}

impl fmt::Display for StableVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StableVariant::Strict => "strict",
            StableVariant::Weak => "weak",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DegreeMode {
    #[default]
    Exact,
    Greedy,
}

/// T(D): the product of the per-player projections of D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSet {
    shape: Vec<usize>,
    projections: Vec<Vec<usize>>,
}

impl TransitionSet {
    pub fn of(d: &SolutionSet) -> Result<Self> {
        d.ensure_nonempty()?;
        let n = d.num_players();
        let mut projections = vec![Vec::new(); n];
        for (i, proj) in projections.iter_mut().enumerate() {
            let mut values: Vec<usize> = d.members().iter().map(|m| m[i]).collect();
            values.sort_unstable();
            values.dedup();
            *proj = values;
        }
        Ok(TransitionSet {
            shape: d.shape().to_vec(),
            projections,
        })
    }

    pub fn projections(&self) -> &[Vec<usize>] {
        &self.projections
    }

    pub fn contains(&self, profile: &[usize]) -> bool {
        profile.len() == self.projections.len()
            && profile
                .iter()
                .zip(&self.projections)
                .all(|(s, p)| p.binary_search(s).is_ok())
    }

    /// Number of transitions, or `TooLarge` beyond the profile cap.
    pub fn len(&self) -> Result<usize> {
        check_size(&self.projections.iter().map(Vec::len).collect::<Vec<_>>())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transitions in lexicographic order.
    pub fn iter(&self) -> ProfileIter {
        ProfileIter::over(self.projections.clone())
    }

    /// Materialises T(D) below the profile cap.
    pub fn to_vec(&self) -> Result<Vec<Profile>> {
        self.len()?;
        Ok(self.iter().collect())
    }

    /// T(D) as a solution set over the same game.
    pub fn as_solution_set(&self, label: &str) -> Result<SolutionSet> {
        SolutionSet::new(self.shape.clone(), self.to_vec()?, label)
    }
}

pub fn is_transition(d: &SolutionSet, s: &[usize]) -> Result<bool> {
    check_profile_shape(d.shape(), s)?;
    Ok(TransitionSet::of(d)?.contains(s))
}

/// Minimum (or greedy) number of solutions that cover every coordinate of a
/// transition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeWitness {
    pub profile: Profile,
    pub degree: usize,
    /// Member indices into D.
    pub witnesses: Vec<usize>,
    /// True when the degree is proven minimal.
    pub exact: bool,
}

pub fn transition_degree(d: &SolutionSet, s: &[usize], mode: DegreeMode) -> Result<DegreeWitness> {
    let inst = reduce_to_cover(d, s)?;
    let solution = match mode {
        DegreeMode::Exact => inst.exact()?,
        DegreeMode::Greedy => inst.greedy()?,
    };
    let mut witnesses: Vec<usize> = solution.chosen.iter().map(|&k| inst.source(k)).collect();
    witnesses.sort_unstable();
    Ok(DegreeWitness {
        profile: s.to_vec(),
        degree: witnesses.len(),
        witnesses,
        exact: solution.exact,
    })
}

/// Exact degree of every transition, in lexicographic order.
pub fn transition_degrees(d: &SolutionSet) -> Result<Vec<(Profile, usize)>> {
    let profiles = TransitionSet::of(d)?.to_vec()?;
    profiles
        .into_par_iter()
        .map(|p| {
            let w = transition_degree(d, &p, DegreeMode::Exact)?;
            Ok((p, w.degree))
        })
        .collect()
}

/// Lazily filters T(D) down to profiles of degree at most `m`.
pub fn m_transitions(d: &SolutionSet, m: usize) -> Result<Box<dyn Iterator<Item = Profile> + '_>> {
    if m == 0 {
        return Err(Error::BadParams("m must be at least 1".into()));
    }
    let t = TransitionSet::of(d)?;
    if m >= d.num_players() {
        return Ok(Box::new(t.iter()));
    }
    Ok(Box::new(t.iter().filter(move |p| {
        transition_degree(d, p, DegreeMode::Exact)
            .map(|w| w.degree <= m)
            .unwrap_or(false)
    })))
}

pub fn m_transition_set(d: &SolutionSet, m: usize) -> Result<Vec<Profile>> {
    if m == 0 {
        return Err(Error::BadParams("m must be at least 1".into()));
    }
    Ok(transition_degrees(d)?
        .into_iter()
        .filter(|(_, k)| *k <= m)
        .map(|(p, _)| p)
        .collect())
}

/// The stability condition alone: every player who is not best-responding
/// has a helper `j != i` whose switch to one of its best responses makes
/// `s_i` a best response.
pub fn stability_condition<V: Scalar>(game: &Game<V>, s: &[usize], variant: StableVariant) -> bool {
    let n = game.num_players();
    let best: Vec<Vec<usize>> = (0..n).map(|i| game.best_responses(i, s)).collect();
    let responding: Vec<bool> = (0..n).map(|i| best[i].contains(&s[i])).collect();
    let mut moved = s.to_vec();
    (0..n).filter(|&i| !responding[i]).all(|i| {
        (0..n).filter(|&j| j != i).any(|j| {
            if variant == StableVariant::Strict && responding[j] {
                return false;
            }
            best[j].iter().filter(|&&b| b != s[j]).any(|&b| {
                moved[j] = b;
                let ok = game.is_best_response(i, &moved);
                moved[j] = s[j];
                ok
            })
        })
    })
}

pub fn is_stable_transition<V: Scalar>(
    game: &Game<V>,
    d: &SolutionSet,
    s: &[usize],
    variant: StableVariant,
) -> Result<bool> {
    game.check_profile(s)?;
    Ok(is_transition(d, s)? && stability_condition(game, s, variant))
}

/// ST(D) in lexicographic order.
pub fn stable_transition_set<V: Scalar>(
    game: &Game<V>,
    d: &SolutionSet,
    variant: StableVariant,
) -> Result<Vec<Profile>> {
    if d.shape() != game.shape() {
        return Err(Error::BadParams(
            "solution set does not belong to the game".into(),
        ));
    }
    let profiles = TransitionSet::of(d)?.to_vec()?;
    Ok(profiles
        .into_par_iter()
        .filter(|p| stability_condition(game, p, variant))
        .collect())
}

/// Transition set of an arbitrary nonempty list of profiles.
pub fn merge_set(shape: &[usize], profiles: &[Profile]) -> Result<Vec<Profile>> {
    let mut unique: Vec<Profile> = profiles.to_vec();
    unique.sort();
    unique.dedup();
    let d = SolutionSet::new(shape.to_vec(), unique, "merge")?;
    TransitionSet::of(&d)?.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Convention;
    use crate::scalar::Rational;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn unit_diagonal() -> Game {
        Game::from_fn(Convention::Utility, &[2, 2], |s| match (s[0], s[1]) {
            (0, 0) | (1, 1) => vec![r(1), r(1)],
            _ => vec![r(0), r(0)],
        })
        .unwrap()
    }

    #[test]
    fn off_diagonal_is_transition_of_degree_two() {
        let g = unit_diagonal();
        let ne = g.pure_ne().unwrap();
        assert!(is_transition(&ne, &[0, 1]).unwrap());
        let w = transition_degree(&ne, &[0, 1], DegreeMode::Exact).unwrap();
        assert_eq!(w.degree, 2);
        let w = transition_degree(&ne, &[1, 1], DegreeMode::Exact).unwrap();
        assert_eq!((w.degree, w.witnesses), (1, vec![1]));
        assert_eq!(m_transition_set(&ne, 1).unwrap(), ne.members().to_vec());
        assert_eq!(m_transition_set(&ne, 2).unwrap().len(), 4);
        assert_eq!(merge_set(&[2, 2], ne.members()).unwrap().len(), 4);
    }

    #[test]
    fn empty_solution_set_rejected() {
        let d = SolutionSet::new(vec![2, 2], vec![], "empty").unwrap();
        assert!(matches!(
            is_transition(&d, &[0, 0]),
            Err(Error::EmptySolutionSet)
        ));
        assert!(matches!(
            m_transition_set(&d, 1),
            Err(Error::EmptySolutionSet)
        ));
    }

    #[test]
    fn not_a_transition() {
        let d = SolutionSet::new(vec![2, 2], vec![vec![0, 0]], "user").unwrap();
        assert!(matches!(
            transition_degree(&d, &[1, 0], DegreeMode::Exact),
            Err(Error::NotATransition(_))
        ));
    }

    #[test]
    fn off_diagonal_is_stable() {
        let g = unit_diagonal();
        let ne = g.pure_ne().unwrap();
        assert_eq!(
            stable_transition_set(&g, &ne, StableVariant::Strict)
                .unwrap()
                .len(),
            4
        );
    }

    #[test]
    fn merge_of_neighbours() {
        let merged = merge_set(&[2, 2], &[vec![0, 0], vec![0, 1]]).unwrap();
        assert_eq!(merged, vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(merge_set(&[3], &[vec![2]]).unwrap(), vec![vec![2]]);
    }
}
