//! Atomic congestion games with tabulated per-resource costs.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::potential::four_cycle_violation;
use crate::efficiency::price_report;
use crate::error::{Error, Result};
use crate::game::{Convention, Game, Profile, SolutionSet};
use crate::scalar::{from_json_value, Scalar};
use crate::transition::{merge_set, StableVariant};

#[derive(Clone, Debug, PartialEq)]
pub struct CongestionGame<V> {
    resources: usize,
    /// `costs[j][k - 1]` is the cost of resource j under load k.
    costs: Vec<Vec<V>>,
    /// Per player, the resource subsets it may choose.
    strategies: Vec<Vec<Vec<usize>>>,
}

/// On-disk layout; costs may be numbers or numeric strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CongestionFile {
    pub resources: usize,
    pub costs: Vec<Vec<Value>>,
    pub strategies: Vec<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
}

impl<V: Scalar> CongestionGame<V> {
    pub fn new(
        resources: usize,
        costs: Vec<Vec<V>>,
        strategies: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        let n = strategies.len();
        if n == 0 {
            return Err(Error::InvalidGame(
                "congestion game needs at least one player".into(),
            ));
        }
        if costs.len() != resources {
            return Err(Error::InvalidGame(format!(
                "{} cost tables for {resources} resources",
                costs.len()
            )));
        }
        for (j, table) in costs.iter().enumerate() {
            if table.len() < n {
                return Err(Error::InvalidGame(format!(
                    "cost of resource {j} must be tabulated for loads 1..{n}"
                )));
            }
            if table.iter().any(Scalar::is_negative) {
                return Err(Error::InvalidGame(format!(
                    "resource {j} has a negative cost"
                )));
            }
        }
        for (i, options) in strategies.iter().enumerate() {
            if options.is_empty() {
                return Err(Error::InvalidGame(format!("player {i} has no strategies")));
            }
            for set in options {
                let mut sorted = set.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if set.is_empty()
                    || sorted.len() != set.len()
                    || sorted.iter().any(|&j| j >= resources)
                {
                    return Err(Error::InvalidGame(format!(
                        "player {i} strategy {set:?} is not a nonempty subset of the resources"
                    )));
                }
            }
        }
        Ok(CongestionGame {
            resources,
            costs,
            strategies,
        })
    }

    pub fn from_file(file: &CongestionFile) -> Result<Self> {
        let costs = file
            .costs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        from_json_value(v)
                            .ok_or_else(|| Error::Parse(format!("bad cost value {v}")))
                    })
                    .collect::<Result<Vec<V>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.resources, costs, file.strategies.clone())
    }

    pub fn to_file(&self, convention: Option<Convention>) -> CongestionFile {
        let value = |v: &V| match v.exact_text() {
            Some(t) if !t.contains('/') => serde_json::from_str(&t).unwrap_or(Value::String(t)),
            Some(t) => Value::String(t),
            None => json!(v.to_f64()),
        };
        CongestionFile {
            resources: self.resources,
            costs: self
                .costs
                .iter()
                .map(|row| row.iter().map(value).collect())
                .collect(),
            strategies: self.strategies.clone(),
            convention,
        }
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }
    pub fn num_resources(&self) -> usize {
        self.resources
    }
    pub fn costs(&self) -> &[Vec<V>] {
        &self.costs
    }
    pub fn strategies(&self) -> &[Vec<Vec<usize>>] {
        &self.strategies
    }

    /// Cost of resource `j` at load `k >= 1`.
    pub fn cost(&self, j: usize, k: usize) -> &V {
        &self.costs[j][k - 1]
    }

    pub fn loads(&self, profile: &[usize]) -> Vec<usize> {
        let mut loads = vec![0; self.resources];
        for (i, &s) in profile.iter().enumerate() {
            for &j in &self.strategies[i][s] {
                loads[j] += 1;
            }
        }
        loads
    }

    /// Dense game; payoffs are the summed resource costs, read as costs or
    /// utilities according to `convention`.
    pub fn to_game(&self, convention: Convention) -> Result<Game<V>> {
        let shape: Vec<usize> = self.strategies.iter().map(Vec::len).collect();
        Game::from_fn(convention, &shape, |s| {
            let loads = self.loads(s);
            (0..s.len())
                .map(|i| {
                    crate::scalar::sum(
                        self.strategies[i][s[i]]
                            .iter()
                            .map(|&j| self.cost(j, loads[j]).clone()),
                    )
                })
                .collect()
        })
    }

    fn tables(&self) -> impl Iterator<Item = &[V]> {
        self.costs.iter().map(|t| &t[..self.num_players()])
    }

    pub fn is_subadditive(&self) -> bool {
        self.tables().all(|t| subadditive(t))
    }

    pub fn is_superadditive(&self) -> bool {
        self.tables().all(|t| {
            let neg: Vec<V> = t.iter().map(|v| -v.clone()).collect();
            subadditive(&neg)
        })
    }

    /// Whether every load-weighted cost k * c_j(k) is nondecreasing and
    /// subadditive, which is what bounds a merge's social cost by the sum
    /// of its constituents' costs.
    pub fn total_cost_subadditive(&self) -> bool {
        self.tables().all(|t| {
            let total: Vec<V> = t
                .iter()
                .enumerate()
                .map(|(k, c)| V::from_int(k as i64 + 1) * c.clone())
                .collect();
            total.windows(2).all(|w| w[0].le_tol(&w[1])) && subadditive(&total)
        })
    }

    /// Whether this is the n-player n-link instance with unit-slope costs.
    pub fn is_parallel_links(&self) -> bool {
        let n = self.num_players();
        self.resources == n
            && self
                .strategies
                .iter()
                .all(|opts| opts.len() == n && opts.iter().enumerate().all(|(j, s)| s == &[j]))
            && self.tables().all(|t| {
                t.iter()
                    .enumerate()
                    .all(|(k, c)| c.eq_tol(&V::from_int(k as i64 + 1)))
            })
    }
}

/// `table[k - 1] = f(k)`; checks f(x + y) <= f(x) + f(y) for x + y within
/// the table.
fn subadditive<V: Scalar>(table: &[V]) -> bool {
    let n = table.len();
    (1..=n).all(|x| {
        (1..=n - x).all(|y| table[x + y - 1].le_tol(&(table[x - 1].clone() + table[y - 1].clone())))
    })
}

/// n players, n parallel links, c(k) = k.
pub fn parallel_links<V: Scalar>(n: usize) -> CongestionGame<V> {
    let costs = (0..n)
        .map(|_| (1..=n).map(|k| V::from_int(k as i64)).collect())
        .collect();
    let strategies = (0..n).map(|_| (0..n).map(|j| vec![j]).collect()).collect();
    CongestionGame::new(n, costs, strategies).expect("parallel links are well formed")
}

/// Random subadditive cost tables by rejection: nonnegative integers up to
/// `vmax`.
pub fn random_subadditive<R: Rng>(
    rng: &mut R,
    players: usize,
    resources: usize,
    vmax: i64,
) -> CongestionGame<crate::Rational> {
    let costs = (0..resources)
        .map(|_| loop {
            let table: Vec<crate::Rational> = (0..players)
                .map(|_| crate::Rational::from_int(rng.gen_range(0..=vmax)))
                .collect();
            if subadditive(&table) {
                break table;
            }
        })
        .collect();
    let strategies = (0..players)
        .map(|_| {
            let count = rng.gen_range(1..=3);
            let mut options: Vec<Vec<usize>> = Vec::new();
            while options.len() < count {
                let size = rng.gen_range(1..=resources);
                let mut set = sample(rng, resources, size).into_vec();
                set.sort_unstable();
                if !options.contains(&set) {
                    options.push(set);
                }
                if options.len() == (1 << resources) - 1 {
                    break;
                }
            }
            options
        })
        .collect();
    CongestionGame::new(resources, costs, strategies).expect("generated game is well formed")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeViolation<V> {
    pub merge: Profile,
    pub merge_cost: V,
    pub constituent_total: V,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeReport<V> {
    pub merges: usize,
    pub constituent_total: V,
    pub worst_merge: Profile,
    pub worst_cost: V,
    pub violations: Vec<MergeViolation<V>>,
    pub subadditive: bool,
    pub total_cost_subadditive: bool,
}

impl<V: Scalar> MergeReport<V> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "merges": self.merges,
            "constituent_total": self.constituent_total.to_json(),
            "worst_merge": self.worst_merge,
            "worst_cost": self.worst_cost.to_json(),
            "holds": self.holds(),
            "violations": self.violations.iter().map(|v| json!({
                "merge": v.merge,
                "merge_cost": v.merge_cost.to_json(),
                "constituent_total": v.constituent_total.to_json(),
            })).collect::<Vec<_>>(),
            "subadditive": self.subadditive,
            "total_cost_subadditive": self.total_cost_subadditive,
        })
    }
}

/// Compares the social cost of every merge of `profiles` with the summed
/// social cost of the profiles.
pub fn verify_merge_lemma<V: Scalar>(
    cg: &CongestionGame<V>,
    profiles: &[Profile],
) -> Result<MergeReport<V>> {
    let game = cg.to_game(Convention::Cost)?;
    for p in profiles {
        game.check_profile(p)?;
    }
    let merges = merge_set(game.shape(), profiles)?;
    let mut distinct = profiles.to_vec();
    distinct.sort();
    distinct.dedup();
    let total = crate::scalar::sum(distinct.iter().map(|p| game.sw(p)));
    let mut worst: Option<(Profile, V)> = None;
    let mut violations = Vec::new();
    for t in &merges {
        let cost = game.sw(t);
        if cost.gt_tol(&total) {
            violations.push(MergeViolation {
                merge: t.clone(),
                merge_cost: cost.clone(),
                constituent_total: total.clone(),
            });
        }
        if worst.as_ref().is_none_or(|(_, w)| cost.gt_tol(w)) {
            worst = Some((t.clone(), cost));
        }
    }
    let (worst_merge, worst_cost) = worst.ok_or(Error::EmptySolutionSet)?;
    Ok(MergeReport {
        merges: merges.len(),
        constituent_total: total,
        worst_merge,
        worst_cost,
        violations,
        subadditive: cg.is_subadditive(),
        total_cost_subadditive: cg.total_cost_subadditive(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelLinkCheck<V> {
    /// (m^2 + n - m) / n
    pub closed_form: V,
    /// Largest cost with at most m players per link: (q m^2 + r^2) / n where
    /// n = q m + r.
    pub load_bound: V,
    pub matches_closed_form: bool,
    pub matches_load_bound: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotaBoundReport<V> {
    pub m: usize,
    pub poa: V,
    pub m_pota: V,
    pub witness: Profile,
    /// m-pota <= m * poa
    pub bound_holds: bool,
    /// Equality m-pota = m * poa, reported when m = n.
    pub tight: Option<bool>,
    pub parallel_links: Option<ParallelLinkCheck<V>>,
}

impl<V: Scalar> PotaBoundReport<V> {
    pub fn holds(&self) -> bool {
        self.bound_holds
            && self.tight != Some(false)
            && self
                .parallel_links
                .as_ref()
                .is_none_or(|p| p.matches_closed_form)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "poa": self.poa.to_json(),
            "m_pota": self.m_pota.to_json(),
            "witness": self.witness,
            "bound_holds": self.bound_holds,
            "tight_at_m_equals_n": self.tight,
            "parallel_links": self.parallel_links.as_ref().map(|p| json!({
                "closed_form": p.closed_form.to_json(),
                "load_bound": p.load_bound.to_json(),
                "matches_closed_form": p.matches_closed_form,
                "matches_load_bound": p.matches_load_bound,
            })),
            "holds": self.holds(),
        })
    }
}

/// Checks m-pota <= m * poa over the pure equilibria of the cost game and,
/// on parallel links, compares m-pota with the closed form.
pub fn verify_pota_bound<V: Scalar>(
    cg: &CongestionGame<V>,
    m: usize,
) -> Result<PotaBoundReport<V>> {
    let n = cg.num_players();
    if m == 0 || m > n {
        return Err(Error::BadParams(format!("m must lie in 1..={n}")));
    }
    if !cg.is_subadditive() {
        return Err(Error::PreconditionFailed(
            "cost functions are not subadditive".into(),
        ));
    }
    let game = cg.to_game(Convention::Cost)?;
    let ne = game.pure_ne()?;
    ne.ensure_nonempty()?;
    let prices = price_report(&game, &ne, StableVariant::Strict)?;
    let poa = prices.poa.value.clone();
    let m_pota = prices.m_pota(m).clone();
    let scaled = V::from_int(m as i64) * poa.clone();
    let parallel_links = cg.is_parallel_links().then(|| {
        let (q, r) = (n / m, n % m);
        let nn = V::from_int(n as i64);
        let closed_form = V::from_int((m * m + n - m) as i64) / nn.clone();
        let load_bound = V::from_int((q * m * m + r * r) as i64) / nn;
        ParallelLinkCheck {
            matches_closed_form: m_pota.eq_tol(&closed_form),
            matches_load_bound: m_pota.eq_tol(&load_bound),
            closed_form,
            load_bound,
        }
    });
    Ok(PotaBoundReport {
        m,
        bound_holds: m_pota.le_tol(&scaled),
        tight: (m == n).then(|| m_pota.eq_tol(&scaled)),
        witness: prices.m_pota[m - 1].witness.clone(),
        poa,
        m_pota,
        parallel_links,
    })
}

/// The four-cycle test on the induced game.
pub fn is_potential_game<V: Scalar>(cg: &CongestionGame<V>) -> Result<bool> {
    Ok(four_cycle_violation(&cg.to_game(Convention::Cost)?).is_none())
}

/// Solutions as a set on the induced game.
pub fn solution_set<V: Scalar>(
    cg: &CongestionGame<V>,
    profiles: Vec<Profile>,
    label: &str,
) -> Result<SolutionSet> {
    let shape: Vec<usize> = cg.strategies().iter().map(Vec::len).collect();
    SolutionSet::new(shape, profiles, label)
}
