//! Transition degree as set cover, and the greedy saturation procedure.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::game::{check_profile_shape, Profile, SolutionSet};

/// Node budget of the exact solver before it falls back to the best cover
/// found so far.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

/// Set-cover instance over a universe `0..universe`.
#[derive(Clone, Debug)]
pub struct CoverInstance {
    universe: usize,
    sets: Vec<FixedBitSet>,
    sources: Vec<usize>,
}

/// A cover given as indices into the instance's sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSolution {
    pub chosen: Vec<usize>,
    /// False when the exact search ran out of nodes.
    pub exact: bool,
    pub nodes: usize,
}

impl CoverSolution {
    pub fn size(&self) -> usize {
        self.chosen.len()
    }
}

impl CoverInstance {
    /// `sets[k]` lists the elements covered by set `k`; empty sets are
    /// dropped but source indices are preserved.
    pub fn new(universe: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut masks = Vec::new();
        let mut sources = Vec::new();
        for (k, set) in sets.iter().enumerate() {
            let mut mask = FixedBitSet::with_capacity(universe);
            for &e in set {
                if e >= universe {
                    return Err(Error::BadParams(format!(
                        "element {e} outside universe of size {universe}"
                    )));
                }
                mask.insert(e);
            }
            if mask.count_ones(..) > 0 {
                masks.push(mask);
                sources.push(k);
            }
        }
        Ok(CoverInstance {
            universe,
            sets: masks,
            sources,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }
    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }
    /// Original index (before empty sets were dropped) of set `k`.
    pub fn source(&self, k: usize) -> usize {
        self.sources[k]
    }
    pub fn set(&self, k: usize) -> Vec<usize> {
        self.sets[k].ones().collect()
    }

    pub fn is_feasible(&self) -> bool {
        let mut all = FixedBitSet::with_capacity(self.universe);
        for s in &self.sets {
            all.union_with(s);
        }
        all.count_ones(..) == self.universe
    }

    pub fn covers(&self, chosen: &[usize]) -> bool {
        let mut all = FixedBitSet::with_capacity(self.universe);
        for &k in chosen {
            all.union_with(&self.sets[k]);
        }
        all.count_ones(..) == self.universe
    }

    /// Largest-new-coverage-first greedy, ties broken by lowest index.
    pub fn greedy(&self) -> Result<CoverSolution> {
        let mut uncovered = FixedBitSet::with_capacity(self.universe);
        uncovered.insert_range(..);
        let mut chosen = Vec::new();
        while uncovered.count_ones(..) > 0 {
            let mut best: Option<(usize, usize)> = None;
            for (k, set) in self.sets.iter().enumerate() {
                let gain = set.intersection(&uncovered).count();
                if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                    best = Some((k, gain));
                }
            }
            let (k, _) =
                best.ok_or_else(|| Error::Infeasible("some element is in no set".into()))?;
            uncovered.difference_with(&self.sets[k]);
            chosen.push(k);
        }
        Ok(CoverSolution {
            chosen,
            exact: false,
            nodes: 0,
        })
    }

    /// Minimum cover by branch and bound.
    pub fn exact(&self) -> Result<CoverSolution> {
        self.exact_with_cap(DEFAULT_NODE_CAP)
    }

    pub fn exact_with_cap(&self, node_cap: usize) -> Result<CoverSolution> {
        let greedy = self.greedy()?;
        let max_size = self
            .sets
            .iter()
            .map(|s| s.count_ones(..))
            .max()
            .unwrap_or(0);
        let mut containing: Vec<Vec<usize>> = vec![Vec::new(); self.universe];
        for (k, set) in self.sets.iter().enumerate() {
            for e in set.ones() {
                containing[e].push(k);
            }
        }
        let mut search = Search {
            inst: self,
            containing: &containing,
            max_size,
            best: greedy.chosen.clone(),
            nodes: 0,
            cap: node_cap,
            aborted: false,
        };
        let mut uncovered = FixedBitSet::with_capacity(self.universe);
        uncovered.insert_range(..);
        let mut chosen = Vec::new();
        search.dfs(&uncovered, &mut chosen);
        let mut best = search.best;
        best.sort_unstable();
        Ok(CoverSolution {
            chosen: best,
            exact: !search.aborted,
            nodes: search.nodes,
        })
    }
}

struct Search<'a> {
    inst: &'a CoverInstance,
    containing: &'a [Vec<usize>],
    max_size: usize,
    best: Vec<usize>,
    nodes: usize,
    cap: usize,
    aborted: bool,
}

impl Search<'_> {
    fn dfs(&mut self, uncovered: &FixedBitSet, chosen: &mut Vec<usize>) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            self.aborted = true;
            return;
        }
        let left = uncovered.count_ones(..);
        if left == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let lower = chosen.len() + left.div_ceil(self.max_size);
        if lower >= self.best.len() {
            return;
        }
        // Branch on the uncovered element with the fewest covering sets.
        let element = uncovered
            .ones()
            .min_by_key(|&e| (self.containing[e].len(), e))
            .expect("nonempty");
        let mut options: Vec<(usize, usize)> = self.containing[element]
            .iter()
            .map(|&k| (k, self.inst.sets[k].intersection(uncovered).count()))
            .collect();
        options.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (k, _) in options {
            let mut next = uncovered.clone();
            next.difference_with(&self.inst.sets[k]);
            chosen.push(k);
            self.dfs(&next, chosen);
            chosen.pop();
        }
    }
}

/// True when every coordinate of `profile` appears in some listed profile at
/// the same position.
pub fn in_transition_of(members: &[&Profile], profile: &[usize]) -> bool {
    (0..profile.len()).all(|i| members.iter().any(|d| d[i] == profile[i]))
}

/// Set-cover instance whose optimum is the transition degree of `target`:
/// elements are players, and member `d` covers `{i : d_i = target_i}`.
pub fn reduce_to_cover(d: &SolutionSet, target: &[usize]) -> Result<CoverInstance> {
    d.ensure_nonempty()?;
    check_profile_shape(d.shape(), target)?;
    let sets: Vec<Vec<usize>> = d
        .members()
        .iter()
        .map(|m| (0..target.len()).filter(|&i| m[i] == target[i]).collect())
        .collect();
    let inst = CoverInstance::new(target.len(), &sets)?;
    if !inst.is_feasible() {
        return Err(Error::NotATransition(target.to_vec()));
    }
    Ok(inst)
}

/// Encodes a set-cover instance as a transition-degree question: one binary
/// player per element, one solution per set (strategy 1 on its elements) and
/// the all-ones target. Duplicate sets are merged.
pub fn cover_as_transition(universe: usize, sets: &[Vec<usize>]) -> Result<(SolutionSet, Profile)> {
    let mut members: Vec<Profile> = Vec::new();
    for set in sets {
        let mut p = vec![0; universe];
        for &e in set {
            if e >= universe {
                return Err(Error::BadParams(format!(
                    "element {e} outside universe of size {universe}"
                )));
            }
            p[e] = 1;
        }
        if !members.contains(&p) {
            members.push(p);
        }
    }
    let d = SolutionSet::new(vec![2; universe], members, "cover")?;
    Ok((d, vec![1; universe]))
}

/// Result of the greedy saturation procedure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Saturation {
    /// Size of the grown set.
    pub m: usize,
    /// Member indices of the grown set, in insertion order.
    pub basis: Vec<usize>,
    /// Whether no member of the grown set is a transition of the others.
    pub independent: bool,
}

/// Adds solutions in member order, skipping those that are already
/// transitions of the set grown so far.
pub fn saturation_degree(d: &SolutionSet) -> Result<Saturation> {
    let order: Vec<usize> = (0..d.len()).collect();
    saturation_degree_ordered(d, &order)
}

pub fn saturation_degree_ordered(d: &SolutionSet, order: &[usize]) -> Result<Saturation> {
    d.ensure_nonempty()?;
    let members = d.members();
    let mut basis: Vec<usize> = Vec::new();
    for &k in order {
        let current: Vec<&Profile> = basis.iter().map(|&b| &members[b]).collect();
        if !in_transition_of(&current, &members[k]) {
            basis.push(k);
        }
    }
    let independent = is_independent(members, &basis);
    Ok(Saturation {
        m: basis.len(),
        basis,
        independent,
    })
}

/// No member of the subset is a transition of the remaining ones.
pub fn is_independent(members: &[Profile], subset: &[usize]) -> bool {
    subset.iter().all(|&x| {
        let rest: Vec<&Profile> = subset
            .iter()
            .filter(|&&y| y != x)
            .map(|&y| &members[y])
            .collect();
        !in_transition_of(&rest, &members[x])
    })
}

/// Two maximal independent subsets of different sizes, if any exist.
/// Exhaustive over subsets, so only for small solution sets.
pub fn exchange_counterexample(d: &SolutionSet) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
    let k = d.len();
    if k > 16 {
        return Err(Error::BadParams(
            "exhaustive independence check limited to 16 solutions".into(),
        ));
    }
    let members = d.members();
    let subset_of = |mask: u32| -> Vec<usize> { (0..k).filter(|&i| mask >> i & 1 == 1).collect() };
    let independent: Vec<bool> = (0..1u32 << k)
        .map(|mask| is_independent(members, &subset_of(mask)))
        .collect();
    let mut smallest: Option<u32> = None;
    let mut largest: Option<u32> = None;
    for mask in 0..1u32 << k {
        if !independent[mask as usize] {
            continue;
        }
        let maximal = (0..k).all(|i| mask >> i & 1 == 1 || !independent[(mask | 1 << i) as usize]);
        if !maximal {
            continue;
        }
        if smallest.is_none_or(|s| mask.count_ones() < s.count_ones()) {
            smallest = Some(mask);
        }
        if largest.is_none_or(|l| mask.count_ones() > l.count_ones()) {
            largest = Some(mask);
        }
    }
    Ok(match (smallest, largest) {
        (Some(a), Some(b)) if a.count_ones() != b.count_ones() => {
            Some((subset_of(a), subset_of(b)))
        }
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_set_and_singletons() {
        let one = CoverInstance::new(3, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(one.greedy().unwrap().size(), 1);
        assert_eq!(one.exact().unwrap().size(), 1);
        let singles = CoverInstance::new(4, &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        assert_eq!(singles.greedy().unwrap().size(), 4);
        assert_eq!(singles.exact().unwrap().size(), 4);
    }

    #[test]
    fn infeasible_instance() {
        let inst = CoverInstance::new(3, &[vec![0], vec![1]]).unwrap();
        assert!(matches!(inst.greedy(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn greedy_gap_family() {
        // Two halves plus geometrically shrinking blocks straddling both.
        let universe = 14;
        let top: Vec<usize> = (0..7).collect();
        let bottom: Vec<usize> = (7..14).collect();
        let blocks = vec![
            vec![0, 1, 2, 3, 7, 8, 9, 10],
            vec![4, 5, 11, 12],
            vec![6, 13],
        ];
        let mut sets = vec![top, bottom];
        sets.extend(blocks);
        let inst = CoverInstance::new(universe, &sets).unwrap();
        let greedy = inst.greedy().unwrap();
        let exact = inst.exact().unwrap();
        assert!(exact.exact);
        assert_eq!(exact.size(), 2);
        assert_eq!(greedy.size(), 3);
        assert!(greedy.size() as f64 <= (1.0 + (universe as f64).ln()) * exact.size() as f64);
    }

    #[test]
    fn empty_sets_are_dropped() {
        let inst = CoverInstance::new(2, &[vec![], vec![0, 1]]).unwrap();
        assert_eq!(inst.num_sets(), 1);
        assert_eq!(inst.source(0), 1);
    }

    #[test]
    fn path_counterexample_to_equal_bases() {
        // Two players; solutions form the path a-b-c-d-e-f in the bipartite
        // graph of (row, column) values.
        let members = vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 1], vec![2, 2]];
        let d = SolutionSet::new(vec![3, 3], members, "path").unwrap();
        let found = exchange_counterexample(&d).unwrap();
        let (small, large) = found.expect("maximal independent sets of different sizes");
        assert!(small.len() < large.len());
        let a = saturation_degree_ordered(&d, &[0, 2, 4, 1, 3]).unwrap();
        let b = saturation_degree_ordered(&d, &[0, 1, 3, 4, 2]).unwrap();
        assert_ne!(a.m, b.m);
    }
}
