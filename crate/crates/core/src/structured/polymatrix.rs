//! Polymatrix games: utilities are sums of pairwise matrix entries.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::efficiency::price_report;
use crate::error::{Error, Result};
use crate::game::{Convention, Game, Profile, SolutionSet};
use crate::scalar::{from_json_value, Scalar};
use crate::transition::{StableVariant, TransitionSet};

#[derive(Clone, Debug, PartialEq)]
pub struct PolymatrixGame<V> {
    shape: Vec<usize>,
    /// `(i, j)` maps to U_ij over S_i x S_j; absent pairs are zero.
    matrices: BTreeMap<(usize, usize), Vec<Vec<V>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolymatrixFile {
    pub strategies: Vec<usize>,
    /// Keyed `"i,j"`.
    pub matrices: BTreeMap<String, Vec<Vec<Value>>>,
}

impl<V: Scalar> PolymatrixGame<V> {
    pub fn new(shape: Vec<usize>, matrices: BTreeMap<(usize, usize), Vec<Vec<V>>>) -> Result<Self> {
        let n = shape.len();
        if n < 2 || shape.contains(&0) {
            return Err(Error::InvalidGame(
                "polymatrix games need two or more players with strategies".into(),
            ));
        }
        for (&(i, j), m) in &matrices {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidGame(format!("no matrix for pair ({i}, {j})")));
            }
            if m.len() != shape[i] || m.iter().any(|row| row.len() != shape[j]) {
                return Err(Error::InvalidGame(format!(
                    "matrix ({i}, {j}) must be {} x {}",
                    shape[i], shape[j]
                )));
            }
        }
        Ok(PolymatrixGame { shape, matrices })
    }

    pub fn from_file(file: &PolymatrixFile) -> Result<Self> {
        let mut matrices = BTreeMap::new();
        for (key, rows) in &file.matrices {
            let (i, j) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| Error::Parse(format!("matrix key {key:?} is not \"i,j\"")))?;
            let m = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| {
                            from_json_value(v)
                                .ok_or_else(|| Error::Parse(format!("bad matrix entry {v}")))
                        })
                        .collect::<Result<Vec<V>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            matrices.insert((i, j), m);
        }
        Self::new(file.strategies.clone(), matrices)
    }

    pub fn to_file(&self) -> PolymatrixFile {
        let text = |v: &V| match v.exact_text() {
            Some(t) => Value::String(t),
            None => json!(v.to_f64()),
        };
        PolymatrixFile {
            strategies: self.shape.clone(),
            matrices: self
                .matrices
                .iter()
                .map(|(&(i, j), m)| {
                    (
                        format!("{i},{j}"),
                        m.iter().map(|row| row.iter().map(text).collect()).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn num_players(&self) -> usize {
        self.shape.len()
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn entry(&self, i: usize, j: usize, x: usize, y: usize) -> V {
        self.matrices
            .get(&(i, j))
            .map_or_else(V::zero, |m| m[x][y].clone())
    }

    fn matrix_max(&self, i: usize, j: usize) -> V {
        match self.matrices.get(&(i, j)) {
            Some(m) => m
                .iter()
                .flatten()
                .cloned()
                .reduce(V::max_val)
                .unwrap_or_else(V::zero),
            None => V::zero(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.matrices
            .values()
            .flatten()
            .flatten()
            .all(|v| !v.is_negative())
    }

    pub fn utility(&self, i: usize, s: &[usize]) -> V {
        crate::scalar::sum(
            (0..self.num_players())
                .filter(|&j| j != i)
                .map(|j| self.entry(i, j, s[i], s[j])),
        )
    }

    pub fn to_game(&self) -> Result<Game<V>> {
        Game::from_fn(Convention::Utility, &self.shape, |s| {
            (0..s.len()).map(|i| self.utility(i, s)).collect()
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// U_ij differs from U_ik.
    UnequalMatrices { player: usize, j: usize, k: usize },
    /// sw(better) >= sw(worse) while u_i(better) < u_i(worse).
    Monotonicity {
        player: usize,
        better: Profile,
        worse: Profile,
    },
    /// The contribution of players off solution s to player i falls short
    /// of twice the largest entry of U_ij.
    Regularity {
        transition: Profile,
        solution: Profile,
        player: usize,
        other: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub equal_matrices: bool,
    pub monotone: bool,
    pub symmetric: bool,
    pub regular: bool,
    pub witnesses: Vec<Witness>,
}

fn check_equal_matrices<V: Scalar>(pg: &PolymatrixGame<V>) -> Option<Witness> {
    let n = pg.num_players();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let first = others[0];
        for &k in &others[1..] {
            if pg.shape[first] != pg.shape[k] {
                return Some(Witness::UnequalMatrices {
                    player: i,
                    j: first,
                    k,
                });
            }
            let differs = (0..pg.shape[i]).any(|x| {
                (0..pg.shape[k]).any(|y| !pg.entry(i, first, x, y).eq_tol(&pg.entry(i, k, x, y)))
            });
            if differs {
                return Some(Witness::UnequalMatrices {
                    player: i,
                    j: first,
                    k,
                });
            }
        }
    }
    None
}

/// Every player's utility must order profiles the way social welfare does.
fn check_monotone<V: Scalar>(game: &Game<V>) -> Option<Witness> {
    let mut order: Vec<usize> = (0..game.num_profiles()).collect();
    let sw: Vec<V> = order.iter().map(|&k| game.sw_at(k)).collect();
    order.sort_by(|&a, &b| sw[a].compare(&sw[b]).then(a.cmp(&b)));
    for i in 0..game.num_players() {
        // within a welfare class utilities must agree; across classes they
        // must not decrease
        let mut prev_hi: Option<usize> = None;
        let mut start = 0;
        while start < order.len() {
            let mut end = start + 1;
            while end < order.len() && sw[order[end]].eq_tol(&sw[order[start]]) {
                end += 1;
            }
            let class = &order[start..end];
            let u = |k: usize| game.payoffs_at(k)[i].clone();
            let lo = *class.iter().min_by(|&&a, &&b| u(a).compare(&u(b))).unwrap();
            let hi = *class.iter().max_by(|&&a, &&b| u(a).compare(&u(b))).unwrap();
            if u(lo).lt_tol(&u(hi)) {
                return Some(Witness::Monotonicity {
                    player: i,
                    better: game.profile_at(lo),
                    worse: game.profile_at(hi),
                });
            }
            if let Some(prev_hi) = prev_hi {
                if u(lo).lt_tol(&u(prev_hi)) {
                    return Some(Witness::Monotonicity {
                        player: i,
                        better: game.profile_at(lo),
                        worse: game.profile_at(prev_hi),
                    });
                }
            }
            prev_hi = Some(hi);
            start = end;
        }
    }
    None
}

fn check_regular<V: Scalar>(pg: &PolymatrixGame<V>, d: &SolutionSet) -> Result<Option<Witness>> {
    let n = pg.num_players();
    let threshold: Vec<Vec<V>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        V::zero()
                    } else {
                        V::from_int(2) * pg.matrix_max(i, j)
                    }
                })
                .collect()
        })
        .collect();
    for t in TransitionSet::of(d)?.iter() {
        for s in d.members() {
            for i in (0..n).filter(|&i| t[i] != s[i]) {
                let off = crate::scalar::sum(
                    (0..n)
                        .filter(|&k| k != i && t[k] != s[k])
                        .map(|k| pg.entry(i, k, s[i], t[k])),
                );
                if let Some(j) = (0..n).find(|&j| j != i && off.lt_tol(&threshold[i][j])) {
                    return Ok(Some(Witness::Regularity {
                        transition: t.clone(),
                        solution: s.clone(),
                        player: i,
                        other: j,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Symmetry (equal matrices per player and welfare-monotone utilities) and
/// regularity with respect to the solutions `d`.
pub fn check_symmetry_regularity<V: Scalar>(
    pg: &PolymatrixGame<V>,
    d: &SolutionSet,
) -> Result<SymmetryReport> {
    let game = pg.to_game()?;
    let mut witnesses = Vec::new();
    let equal = check_equal_matrices(pg);
    let monotone = check_monotone(&game);
    let regular = check_regular(pg, d)?;
    let report = SymmetryReport {
        equal_matrices: equal.is_none(),
        monotone: monotone.is_none(),
        symmetric: equal.is_none() && monotone.is_none(),
        regular: regular.is_none(),
        witnesses: Vec::new(),
    };
    witnesses.extend(equal);
    witnesses.extend(monotone);
    witnesses.extend(regular);
    Ok(SymmetryReport {
        witnesses,
        ..report
    })
}

pub fn is_symmetric_set(d: &SolutionSet) -> bool {
    d.members()
        .iter()
        .all(|s| s.windows(2).all(|w| w[0] == w[1]))
}

/// Pure equilibria where every player picks the same strategy index.
pub fn symmetric_equilibria<V: Scalar>(game: &Game<V>) -> Result<SolutionSet> {
    let ne = game.pure_ne()?;
    let keep: Vec<Profile> = ne
        .members()
        .iter()
        .filter(|s| s.windows(2).all(|w| w[0] == w[1]))
        .cloned()
        .collect();
    SolutionSet::new(game.shape().to_vec(), keep, "symmetric pure-NE")
}

#[derive(Clone, Debug, PartialEq)]
pub struct PostaBoundReport<V> {
    pub m: usize,
    pub poa: V,
    pub m_posta: V,
    pub bound: V,
    pub holds: bool,
}

impl<V: Scalar> PostaBoundReport<V> {
    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "poa": self.poa.to_json(),
            "m_posta": self.m_posta.to_json(),
            "poa_over_m": self.bound.to_json(),
            "holds": self.holds,
        })
    }
}

/// Checks m-posta >= poa / m after gating on every hypothesis.
pub fn verify_posta_bound<V: Scalar>(
    pg: &PolymatrixGame<V>,
    d: &SolutionSet,
    m: usize,
) -> Result<PostaBoundReport<V>> {
    let n = pg.num_players();
    if m == 0 || m > n {
        return Err(Error::BadParams(format!("m must lie in 1..={n}")));
    }
    let mut failed = Vec::new();
    if !pg.is_nonnegative() {
        failed.push("nonnegative".to_string());
    }
    if !is_symmetric_set(d) {
        failed.push("symmetric solution set".to_string());
    }
    let check = check_symmetry_regularity(pg, d)?;
    if !check.equal_matrices {
        failed.push("equal matrices per player".to_string());
    }
    if !check.monotone {
        failed.push("welfare-monotone utilities".to_string());
    }
    if !check.regular {
        failed.push("regular".to_string());
    }
    if !failed.is_empty() {
        return Err(Error::PreconditionFailed(format!(
            "hypotheses violated: {}",
            failed.join(", ")
        )));
    }
    let game = pg.to_game()?;
    let prices = price_report(&game, d, StableVariant::Strict)?;
    let poa = prices.poa.value.clone();
    let m_posta = prices.m_posta(m).clone();
    let bound = poa.clone() / V::from_int(m as i64);
    Ok(PostaBoundReport {
        m,
        holds: m_posta.ge_tol(&bound),
        poa,
        m_posta,
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorParams {
    pub players: usize,
    pub strategies: usize,
    /// Entries are drawn from 0..=vmax.
    pub vmax: i64,
    /// Chance that a player's matrix is constant.
    pub constant_prob: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            players: 3,
            strategies: 2,
            vmax: 4,
            constant_prob: 0.3,
        }
    }
}

/// One candidate: U_ij = M_i for every j, so the equal-matrices part holds
/// by construction.
pub fn random_candidate<R: Rng>(
    rng: &mut R,
    params: &GeneratorParams,
) -> PolymatrixGame<crate::Rational> {
    let (n, k) = (params.players, params.strategies);
    let mut matrices = BTreeMap::new();
    for i in 0..n {
        let m: Vec<Vec<crate::Rational>> = if rng.gen_bool(params.constant_prob) {
            let c = crate::Rational::from_int(rng.gen_range(0..=params.vmax));
            vec![vec![c; k]; k]
        } else {
            (0..k)
                .map(|_| {
                    (0..k)
                        .map(|_| crate::Rational::from_int(rng.gen_range(0..=params.vmax)))
                        .collect()
                })
                .collect()
        };
        for j in (0..n).filter(|&j| j != i) {
            matrices.insert((i, j), m.clone());
        }
    }
    PolymatrixGame::new(vec![k; n], matrices).expect("generated shapes agree")
}

/// Rejection sampling for an instance that passes every hypothesis with
/// its symmetric pure equilibria as solutions and a positive optimum.
pub fn generate_passing<R: Rng>(
    rng: &mut R,
    params: &GeneratorParams,
    max_attempts: usize,
) -> Option<(PolymatrixGame<crate::Rational>, SolutionSet)> {
    for _ in 0..max_attempts {
        let pg = random_candidate(rng, params);
        let game = pg.to_game().ok()?;
        let d = symmetric_equilibria(&game).ok()?;
        if d.is_empty() || !crate::efficiency::optimum(&game).0.is_positive() {
            continue;
        }
        match check_symmetry_regularity(&pg, &d) {
            Ok(rep) if rep.symmetric && rep.regular => return Some((pg, d)),
            _ => continue,
        }
    }
    None
}
