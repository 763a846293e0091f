//! Exhaustive welfare bounds over all two-colourings, one bit per node.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::graph::{from_edge_mask, Colouring, CoordinationGraph};
use super::stability::transition_floor;
use crate::error::{Error, Result};
use crate::game::check_size;
use crate::scalar::{Rational, Scalar};
use crate::transition::StableVariant;

/// Adjacency bitmasks; colour 2 is a set bit.
#[derive(Clone, Debug)]
pub struct MaskGraph {
    adj: Vec<u64>,
    deg: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaskEval {
    pub welfare: usize,
    pub equilibrium: bool,
    pub stable: bool,
    /// Some node of a stable transition sits below floor((deg-1)/2), or
    /// some node of an equilibrium below ceil(deg/2).
    pub threshold_broken: bool,
}

impl MaskGraph {
    pub fn new(g: &CoordinationGraph) -> Result<Self> {
        g.require_two_colour()?;
        let n = g.num_nodes();
        if n >= 64 {
            return Err(Error::TooLarge {
                count: 1u128 << n.min(127),
                cap: crate::game::profile_cap(),
            });
        }
        check_size(&vec![2; n])?;
        let adj = (0..n)
            .map(|i| g.neighbours(i).iter().fold(0u64, |m, &j| m | 1 << j))
            .collect();
        let deg = (0..n).map(|i| g.degree(i) as u32).collect();
        Ok(MaskGraph { adj, deg })
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn evaluate(&self, c: u64, variant: StableVariant) -> MaskEval {
        let n = self.adj.len();
        let mut same = [0u32; 64];
        let mut nonbr = 0u64;
        let mut tied = 0u64;
        let mut welfare = 0;
        for i in 0..n {
            let opp = if c >> i & 1 == 1 { !c } else { c };
            let s = self.deg[i] - (self.adj[i] & opp).count_ones();
            same[i] = s;
            welfare += s as usize;
            if 2 * s < self.deg[i] {
                nonbr |= 1 << i;
            } else if 2 * s == self.deg[i] {
                tied |= 1 << i;
            }
        }
        let helpers = match variant {
            StableVariant::Strict => nonbr,
            StableVariant::Weak => nonbr | tied,
        };
        let mut stable = true;
        let mut floor_ok = true;
        for i in 0..n {
            if (same[i] as i64) < transition_floor(self.deg[i] as usize) {
                floor_ok = false;
            }
            if nonbr >> i & 1 == 1 {
                let opp = if c >> i & 1 == 1 { !c } else { c };
                if 2 * same[i] + 2 < self.deg[i] || self.adj[i] & opp & helpers == 0 {
                    stable = false;
                }
            }
        }
        let equilibrium = nonbr == 0;
        MaskEval {
            welfare,
            equilibrium,
            stable,
            threshold_broken: stable && !floor_ok,
        }
    }
}

pub fn colouring_of(n: usize, c: u64) -> Colouring {
    (0..n)
        .map(|i| if c >> i & 1 == 1 { 2 } else { 1 })
        .collect()
}

pub fn mask_of(col: &[u8]) -> u64 {
    col.iter()
        .enumerate()
        .fold(0, |m, (i, &k)| if k == 2 { m | 1 << i } else { m })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sweep {
    pub colourings: u64,
    pub equilibria: u64,
    pub stable: u64,
    pub stable_not_equilibrium: u64,
    pub max_welfare: usize,
    /// (welfare, mask) minima, ties to the smaller mask.
    pub worst_equilibrium: Option<(usize, u64)>,
    pub worst_stable: Option<(usize, u64)>,
    pub first_stable_not_equilibrium: Option<u64>,
    pub threshold_violations: u64,
}

fn min_pair(a: Option<(usize, u64)>, b: Option<(usize, u64)>) -> Option<(usize, u64)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Sweep {
    fn add(mut self, c: u64, e: MaskEval) -> Self {
        self.colourings += 1;
        self.max_welfare = self.max_welfare.max(e.welfare);
        if e.equilibrium {
            self.equilibria += 1;
            self.worst_equilibrium = min_pair(self.worst_equilibrium, Some((e.welfare, c)));
        }
        if e.stable {
            self.stable += 1;
            self.worst_stable = min_pair(self.worst_stable, Some((e.welfare, c)));
            if !e.equilibrium {
                self.stable_not_equilibrium += 1;
                self.first_stable_not_equilibrium =
                    Some(self.first_stable_not_equilibrium.map_or(c, |f| f.min(c)));
            }
        }
        if e.threshold_broken {
            self.threshold_violations += 1;
        }
        self
    }

    fn merge(self, o: Self) -> Self {
        Sweep {
            colourings: self.colourings + o.colourings,
            equilibria: self.equilibria + o.equilibria,
            stable: self.stable + o.stable,
            stable_not_equilibrium: self.stable_not_equilibrium + o.stable_not_equilibrium,
            max_welfare: self.max_welfare.max(o.max_welfare),
            worst_equilibrium: min_pair(self.worst_equilibrium, o.worst_equilibrium),
            worst_stable: min_pair(self.worst_stable, o.worst_stable),
            first_stable_not_equilibrium: match (
                self.first_stable_not_equilibrium,
                o.first_stable_not_equilibrium,
            ) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            threshold_violations: self.threshold_violations + o.threshold_violations,
        }
    }
}

/// Classifies every colouring. Since T(NE) is everything with two colours,
/// the stable ones are exactly ST(NE).
pub fn sweep(mg: &MaskGraph, variant: StableVariant) -> Sweep {
    let total = 1u64 << mg.num_nodes();
    if total <= 1 << 12 {
        return (0..total).fold(Sweep::default(), |s, c| s.add(c, mg.evaluate(c, variant)));
    }
    (0..total)
        .into_par_iter()
        .fold(Sweep::default, |s, c| s.add(c, mg.evaluate(c, variant)))
        .reduce(Sweep::default, Sweep::merge)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinationBounds {
    pub nodes: usize,
    pub edges: usize,
    pub variant: StableVariant,
    pub sweep: Sweep,
    pub posta: Rational,
    pub poa: Rational,
    /// 1/2 - |N| / (2|E|).
    pub posta_bound: Rational,
    pub poa_bound: Rational,
    pub posta_holds: bool,
    pub poa_holds: bool,
    /// The maximum welfare is 2|E|, reached by monochromatic colourings.
    pub max_is_all_edges: bool,
}

impl CoordinationBounds {
    pub fn holds(&self) -> bool {
        self.posta_holds
            && self.poa_holds
            && self.max_is_all_edges
            && self.sweep.threshold_violations == 0
    }

    pub fn to_json(&self) -> Value {
        let n = self.nodes;
        let witness = |w: Option<(usize, u64)>| {
            w.map(|(sw, c)| json!({ "welfare": sw, "colouring": colouring_of(n, c) }))
        };
        json!({
            "nodes": self.nodes,
            "edges": self.edges,
            "variant": self.variant.to_string(),
            "max_welfare": self.sweep.max_welfare,
            "equilibria": self.sweep.equilibria,
            "stable_transitions": self.sweep.stable,
            "stable_not_equilibrium": self.sweep.stable_not_equilibrium,
            "stable_not_equilibrium_example": self.sweep.first_stable_not_equilibrium.map(|c| colouring_of(n, c)),
            "worst_equilibrium": witness(self.sweep.worst_equilibrium),
            "worst_stable_transition": witness(self.sweep.worst_stable),
            "threshold_violations": self.sweep.threshold_violations,
            "posta": self.posta.to_json(),
            "poa": self.poa.to_json(),
            "posta_lower_bound": self.posta_bound.to_json(),
            "poa_lower_bound": self.poa_bound.to_json(),
            "posta_bound_holds": self.posta_holds,
            "poa_bound_holds": self.poa_holds,
            "max_welfare_is_twice_edges": self.max_is_all_edges,
            "holds": self.holds(),
        })
    }
}

/// Exhaustive posta and poa against their lower bounds.
pub fn efficiency_bounds(
    g: &CoordinationGraph,
    variant: StableVariant,
) -> Result<CoordinationBounds> {
    let mg = MaskGraph::new(g)?;
    let (n, m) = (g.num_nodes(), g.num_edges());
    if m == 0 {
        return Err(Error::UndefinedPrice {
            measure: "posta".into(),
            reason: "an edgeless graph has optimum welfare 0".into(),
        });
    }
    let sweep = sweep(&mg, variant);
    let max = Rational::from_integer(sweep.max_welfare as i128);
    // monochromatic colourings are equilibria, so both sets are nonempty
    let worst_st = sweep.worst_stable.expect("equilibria are stable").0;
    let worst_ne = sweep
        .worst_equilibrium
        .expect("monochromatic colourings are equilibria")
        .0;
    let posta = Rational::from_integer(worst_st as i128) / max;
    let poa = Rational::from_integer(worst_ne as i128) / max;
    let posta_bound = Rational::new(1, 2) - Rational::new(n as i128, 2 * m as i128);
    let poa_bound = Rational::new(1, 2);
    Ok(CoordinationBounds {
        nodes: n,
        edges: m,
        variant,
        posta_holds: posta >= posta_bound,
        poa_holds: poa >= poa_bound,
        max_is_all_edges: sweep.max_welfare == 2 * m,
        sweep,
        posta,
        poa,
        posta_bound,
        poa_bound,
    })
}

/// Graphs on n nodes with more edges than nodes whose worst stable
/// transition has welfare exactly |E| - |N|, as edge masks in increasing
/// order, at most `limit` of them.
pub fn search_tight_posta(n: usize, limit: usize) -> Result<Vec<u64>> {
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs > 24 {
        return Err(Error::BadParams(
            "tightness search is limited to 7 nodes".into(),
        ));
    }
    let mut found: Vec<u64> = (0..1u64 << pairs)
        .into_par_iter()
        .filter(|&mask| {
            let g = from_edge_mask(n, mask);
            if g.num_edges() <= n {
                return false;
            }
            let mg = MaskGraph::new(&g).expect("small graph");
            let s = sweep(&mg, StableVariant::Strict);
            s.worst_stable.map(|w| w.0) == Some(g.num_edges() - n)
        })
        .collect();
    found.sort_unstable();
    found.truncate(limit);
    Ok(found)
}
