//! Finite strategic-form games stored as dense payoff tensors.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// One strategy index per player.
pub type Profile = Vec<usize>;

pub const DEFAULT_PROFILE_CAP: usize = 10_000_000;

/// Enumeration cap, overridable through `TRANSIT_PROFILE_CAP`.
pub fn profile_cap() -> usize {
    std::env::var("TRANSIT_PROFILE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_PROFILE_CAP)
}

/// Checks that a product of strategy counts fits under the cap.
pub fn check_size(shape: &[usize]) -> Result<usize> {
    let cap = profile_cap();
    let mut count: u128 = 1;
    for &k in shape {
        count = count.saturating_mul(k as u128);
    }
    if count > cap as u128 {
        return Err(Error::TooLarge { count, cap });
    }
    Ok(count as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// Players maximise utility; welfare is the sum of utilities.
    #[serde(rename = "max")]
    Utility,
    /// Players minimise cost; welfare is the social cost.
    #[serde(rename = "min")]
    Cost,
}

impl Convention {
    /// True when `a` is strictly preferred to `b`.
    pub fn better<V: Scalar>(self, a: &V, b: &V) -> bool {
        match self {
            Convention::Utility => a.gt_tol(b),
            Convention::Cost => a.lt_tol(b),
        }
    }

    /// Gain from switching from `current` to `alternative` (positive when the
    /// switch helps).
    pub fn gain<V: Scalar>(self, current: &V, alternative: &V) -> V {
        match self {
            Convention::Utility => alternative.clone() - current.clone(),
            Convention::Cost => current.clone() - alternative.clone(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Utility => "max",
            Convention::Cost => "min",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Social welfare (or social cost) of a profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Welfare<V> {
    pub value: V,
    pub convention: Convention,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game<V = Rational> {
    convention: Convention,
    players: Vec<String>,
    strategies: Vec<Vec<String>>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    payoffs: Vec<V>,
}

impl<V: Scalar> Game<V> {
    /// `payoffs` is laid out profile-major (lexicographic, first player most
    /// significant), then by player.
    pub fn new(
        convention: Convention,
        players: Vec<String>,
        strategies: Vec<Vec<String>>,
        payoffs: Vec<V>,
    ) -> Result<Self> {
        let n = players.len();
        if n == 0 {
            return Err(Error::InvalidGame(
                "a game needs at least one player".into(),
            ));
        }
        if strategies.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} players but {} strategy lists",
                n,
                strategies.len()
            )));
        }
        if let Some(i) = strategies.iter().position(|s| s.is_empty()) {
            return Err(Error::InvalidGame(format!("player {i} has no strategies")));
        }
        let shape: Vec<usize> = strategies.iter().map(Vec::len).collect();
        let count = check_size(&shape)?;
        if payoffs.len() != count * n {
            return Err(Error::InvalidGame(format!(
                "expected {} payoff entries, found {}",
                count * n,
                payoffs.len()
            )));
        }
        let mut strides = vec![1; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        Ok(Game {
            convention,
            players,
            strategies,
            shape,
            strides,
            payoffs,
        })
    }

    /// Builds a game from a payoff function with default names.
    pub fn from_fn<F>(convention: Convention, shape: &[usize], payoff: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Vec<V>,
    {
        let n = shape.len();
        let count = check_size(shape)?;
        let mut payoffs = Vec::with_capacity(count * n);
        for profile in ProfileIter::new(shape.to_vec()) {
            let row = payoff(&profile);
            if row.len() != n {
                return Err(Error::InvalidGame(format!(
                    "payoff function returned {} values for {} players",
                    row.len(),
                    n
                )));
            }
            payoffs.extend(row);
        }
        let players = (1..=n).map(|i| i.to_string()).collect();
        let strategies = shape
            .iter()
            .map(|&k| (0..k).map(|s| s.to_string()).collect())
            .collect();
        Game::new(convention, players, strategies, payoffs)
    }

    pub fn with_names(
        mut self,
        players: Vec<String>,
        strategies: Vec<Vec<String>>,
    ) -> Result<Self> {
        if players.len() != self.num_players()
            || strategies.iter().map(Vec::len).collect::<Vec<_>>() != self.shape
        {
            return Err(Error::InvalidGame(
                "names do not match the game's shape".into(),
            ));
        }
        self.players = players;
        self.strategies = strategies;
        Ok(self)
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }
    pub fn num_players(&self) -> usize {
        self.shape.len()
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn num_strategies(&self, player: usize) -> usize {
        self.shape[player]
    }
    pub fn num_profiles(&self) -> usize {
        self.payoffs.len() / self.shape.len()
    }
    pub fn players(&self) -> &[String] {
        &self.players
    }
    pub fn strategies(&self) -> &[Vec<String>] {
        &self.strategies
    }

    pub fn check_profile(&self, profile: &[usize]) -> Result<()> {
        check_profile_shape(&self.shape, profile)
    }

    pub fn index_of(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(s, w)| s * w).sum()
    }

    pub fn profile_at(&self, mut index: usize) -> Profile {
        let mut profile = vec![0; self.shape.len()];
        for (i, &w) in self.strides.iter().enumerate() {
            profile[i] = index / w;
            index %= w;
        }
        profile
    }

    /// All profiles in lexicographic order.
    pub fn profiles(&self) -> ProfileIter {
        ProfileIter::new(self.shape.clone())
    }

    pub fn payoffs_at(&self, index: usize) -> &[V] {
        let n = self.shape.len();
        &self.payoffs[index * n..(index + 1) * n]
    }

    pub fn payoffs(&self, profile: &[usize]) -> &[V] {
        self.payoffs_at(self.index_of(profile))
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> &V {
        &self.payoffs(profile)[player]
    }

    /// Raw payoff buffer, profile-major.
    pub fn payoff_table(&self) -> &[V] {
        &self.payoffs
    }

    /// Sum of payoffs: social welfare under the utility convention and
    /// social cost under the cost convention.
    pub fn sw(&self, profile: &[usize]) -> V {
        self.sw_at(self.index_of(profile))
    }

    pub fn sw_at(&self, index: usize) -> V {
        crate::scalar::sum(self.payoffs_at(index).iter().cloned())
    }

    pub fn social_value(&self, profile: &[usize]) -> Welfare<V> {
        Welfare {
            value: self.sw(profile),
            convention: self.convention,
        }
    }

    /// Payoff of `player` after switching to `strategy`, others fixed.
    fn deviation_payoff(&self, index: usize, current: usize, player: usize, strategy: usize) -> &V {
        let w = self.strides[player];
        let target = index - current * w + strategy * w;
        &self.payoffs[target * self.shape.len() + player]
    }

    /// Best responses of `player` to the other coordinates of `profile`
    /// (the player's own coordinate is ignored). Ties are all included.
    pub fn best_responses(&self, player: usize, profile: &[usize]) -> Vec<usize> {
        let index = self.index_of(profile);
        self.best_responses_at(player, index, profile[player])
    }

    fn best_responses_at(&self, player: usize, index: usize, current: usize) -> Vec<usize> {
        let mut best: Vec<usize> = vec![0];
        let mut best_value = self.deviation_payoff(index, current, player, 0).clone();
        for s in 1..self.shape[player] {
            let value = self.deviation_payoff(index, current, player, s);
            if self.convention.better(value, &best_value) {
                best_value = value.clone();
                best.clear();
                best.push(s);
            } else if value.eq_tol(&best_value) {
                best.push(s);
            }
        }
        best
    }

    pub fn is_best_response(&self, player: usize, profile: &[usize]) -> bool {
        self.best_responses(player, profile)
            .contains(&profile[player])
    }

    /// Largest gain `player` can obtain by a unilateral deviation (never
    /// negative).
    pub fn deviation_gain(&self, player: usize, profile: &[usize]) -> V {
        self.deviation_gain_at(player, self.index_of(profile), profile[player])
    }

    fn deviation_gain_at(&self, player: usize, index: usize, current: usize) -> V {
        let own = self.deviation_payoff(index, current, player, current);
        let mut gain = V::zero();
        for s in 0..self.shape[player] {
            let g = self
                .convention
                .gain(own, self.deviation_payoff(index, current, player, s));
            if g.gt_tol(&gain) {
                gain = g;
            }
        }
        gain
    }

    pub fn is_eps_ne(&self, profile: &[usize], eps: &V) -> bool {
        let index = self.index_of(profile);
        self.is_eps_ne_at(index, profile, eps)
    }

    fn is_eps_ne_at(&self, index: usize, profile: &[usize], eps: &V) -> bool {
        (0..self.shape.len()).all(|i| self.deviation_gain_at(i, index, profile[i]).le_tol(eps))
    }

    /// Profiles where no player gains more than `eps` by deviating, in
    /// lexicographic order. The result may be empty.
    pub fn enumerate_pure_ne(&self, eps: &V) -> Result<SolutionSet> {
        if eps.is_negative() {
            return Err(Error::BadParams("epsilon must be nonnegative".into()));
        }
        let members: Vec<Profile> = (0..self.num_profiles())
            .into_par_iter()
            .filter_map(|index| {
                let profile = self.profile_at(index);
                self.is_eps_ne_at(index, &profile, eps).then_some(profile)
            })
            .collect();
        let mut label = if eps.is_zero_tol() {
            "pure-NE".to_string()
        } else {
            format!("eps-NE({eps})")
        };
        if members.is_empty() {
            label.push_str(" (empty)");
        }
        SolutionSet::new(self.shape.clone(), members, label)
    }

    /// Exact pure Nash equilibria.
    pub fn pure_ne(&self) -> Result<SolutionSet> {
        self.enumerate_pure_ne(&V::zero())
    }

    /// Converts payoffs to another numeric backend.
    pub fn map_payoffs<W: Scalar>(&self, f: impl Fn(&V) -> W) -> Game<W> {
        Game {
            convention: self.convention,
            players: self.players.clone(),
            strategies: self.strategies.clone(),
            shape: self.shape.clone(),
            strides: self.strides.clone(),
            payoffs: self.payoffs.iter().map(f).collect(),
        }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }
}

pub(crate) fn check_profile_shape(shape: &[usize], profile: &[usize]) -> Result<()> {
    if profile.len() != shape.len() {
        return Err(Error::InvalidProfile(format!(
            "profile {:?} has {} entries, game has {} players",
            profile,
            profile.len(),
            shape.len()
        )));
    }
    if let Some(i) = (0..shape.len()).find(|&i| profile[i] >= shape[i]) {
        return Err(Error::InvalidProfile(format!(
            "profile {profile:?}: strategy {} out of range for player {i}",
            profile[i]
        )));
    }
    Ok(())
}

/// Odometer over a product of index ranges, last coordinate fastest.
#[derive(Clone, Debug)]
pub struct ProfileIter {
    ranges: Vec<Vec<usize>>,
    cursor: Option<Vec<usize>>,
}

impl ProfileIter {
    pub fn new(shape: Vec<usize>) -> Self {
        Self::over(shape.into_iter().map(|k| (0..k).collect()).collect())
    }

    /// Product of explicit (sorted) value lists.
    pub fn over(ranges: Vec<Vec<usize>>) -> Self {
        let cursor = if ranges.iter().any(Vec::is_empty) {
            None
        } else {
            Some(vec![0; ranges.len()])
        };
        ProfileIter { ranges, cursor }
    }
}

impl Iterator for ProfileIter {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        let cursor = self.cursor.as_mut()?;
        let item: Profile = cursor
            .iter()
            .enumerate()
            .map(|(i, &c)| self.ranges[i][c])
            .collect();
        let mut i = cursor.len();
        loop {
            if i == 0 {
                self.cursor = None;
                break;
            }
            i -= 1;
            cursor[i] += 1;
            if cursor[i] < self.ranges[i].len() {
                break;
            }
            cursor[i] = 0;
        }
        Some(item)
    }
}

/// A designated set of profiles such as the pure Nash equilibria.
///
/// Construction allows an empty member list so that an empty equilibrium set
/// can be reported; every transition operation rejects it.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSet {
    shape: Vec<usize>,
    members: Vec<Profile>,
    label: String,
    index: HashMap<Profile, usize>,
}

impl SolutionSet {
    pub fn new(shape: Vec<usize>, members: Vec<Profile>, label: impl Into<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(members.len());
        for (k, m) in members.iter().enumerate() {
            check_profile_shape(&shape, m)?;
            if index.insert(m.clone(), k).is_some() {
                return Err(Error::DuplicateProfile(m.clone()));
            }
        }
        Ok(SolutionSet {
            shape,
            members,
            label: label.into(),
            index,
        })
    }

    pub fn for_game<V: Scalar>(
        game: &Game<V>,
        members: Vec<Profile>,
        label: impl Into<String>,
    ) -> Result<Self> {
        SolutionSet::new(game.shape().to_vec(), members, label)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn num_players(&self) -> usize {
        self.shape.len()
    }
    pub fn members(&self) -> &[Profile] {
        &self.members
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn contains(&self, profile: &[usize]) -> bool {
        self.index.contains_key(profile)
    }
    pub fn position(&self, profile: &[usize]) -> Option<usize> {
        self.index.get(profile).copied()
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.members.is_empty() {
            Err(Error::EmptySolutionSet)
        } else {
            Ok(())
        }
    }

    /// Same members in a different order.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let members = order.iter().map(|&k| self.members[k].clone()).collect();
        SolutionSet::new(self.shape.clone(), members, self.label.clone())
    }

    /// Keeps the listed member indices.
    pub fn subset(&self, keep: &[usize], label: impl Into<String>) -> Result<Self> {
        let members = keep.iter().map(|&k| self.members[k].clone()).collect();
        SolutionSet::new(self.shape.clone(), members, label)
    }
}
