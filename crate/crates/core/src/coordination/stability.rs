//! Stable-transition tests computed on the graph.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::graph::CoordinationGraph;
use crate::error::{Error, Result};
use crate::game::{check_size, ProfileIter};
use crate::transition::StableVariant;

/// floor((deg - 1) / 2), so -1 for isolated nodes.
pub fn transition_floor(deg: usize) -> i64 {
    (deg as i64 - 1).div_euclid(2)
}

/// ceil(deg / 2).
pub fn equilibrium_floor(deg: usize) -> i64 {
    deg.div_ceil(2) as i64
}

/// Number of neighbours per colour, indexed by colour.
fn counts(g: &CoordinationGraph, col: &[u8], i: usize) -> [usize; 3] {
    let mut c = [0; 3];
    for &j in g.neighbours(i) {
        c[col[j] as usize] += 1;
    }
    c
}

/// Colours in node i's set that maximise coordination.
pub fn best_colours(g: &CoordinationGraph, col: &[u8], i: usize) -> Vec<u8> {
    let c = counts(g, col, i);
    let top = g
        .colour_set(i)
        .iter()
        .map(|&k| c[k as usize])
        .max()
        .unwrap_or(0);
    g.colour_set(i)
        .iter()
        .copied()
        .filter(|&k| c[k as usize] == top)
        .collect()
}

pub fn is_best_responding(g: &CoordinationGraph, col: &[u8], i: usize) -> bool {
    best_colours(g, col, i).contains(&col[i])
}

pub fn is_equilibrium(g: &CoordinationGraph, col: &[u8]) -> Result<bool> {
    g.check_colouring(col)?;
    Ok((0..g.num_nodes()).all(|i| is_best_responding(g, col, i)))
}

/// Whether every node's colour is used by some equilibrium; always true
/// with full colour sets since monochromatic colourings are equilibria.
pub fn in_equilibrium_transitions(g: &CoordinationGraph, col: &[u8]) -> Result<bool> {
    g.check_colouring(col)?;
    if g.is_two_colour() {
        return Ok(true);
    }
    let n = g.num_nodes();
    let shape: Vec<usize> = (0..n).map(|i| g.colour_set(i).len()).collect();
    check_size(&shape)?;
    let mut used = vec![[false; 3]; n];
    for p in ProfileIter::new(shape) {
        let c: Vec<u8> = p
            .iter()
            .enumerate()
            .map(|(i, &k)| g.colour_set(i)[k])
            .collect();
        if (0..n).all(|i| is_best_responding(g, &c, i)) {
            for i in 0..n {
                used[i][c[i] as usize] = true;
            }
        }
    }
    Ok((0..n).all(|i| used[i][col[i] as usize]))
}

/// The stability condition on the graph: each node that is not
/// best-responding has a neighbour whose move to one of its best colours
/// makes the node's colour a best response.
pub fn stability_holds(g: &CoordinationGraph, col: &[u8], variant: StableVariant) -> bool {
    let n = g.num_nodes();
    let best: Vec<Vec<u8>> = (0..n).map(|i| best_colours(g, col, i)).collect();
    let responding: Vec<bool> = (0..n).map(|i| best[i].contains(&col[i])).collect();
    let mut moved = col.to_vec();
    (0..n).filter(|&i| !responding[i]).all(|i| {
        g.neighbours(i).iter().any(|&j| {
            if variant == StableVariant::Strict && responding[j] {
                return false;
            }
            best[j].iter().filter(|&&b| b != col[j]).any(|&b| {
                moved[j] = b;
                let ok = is_best_responding(g, &moved, i);
                moved[j] = col[j];
                ok
            })
        })
    })
}

/// Membership in ST(NE), decided without building the payoff tensor.
pub fn check_stable_transition_exact(
    g: &CoordinationGraph,
    col: &[u8],
    variant: StableVariant,
) -> Result<bool> {
    Ok(in_equilibrium_transitions(g, col)? && stability_holds(g, col, variant))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FastVariant {
    /// The helper neighbour must have the opposite colour.
    #[default]
    OppositeColour,
    /// Any neighbour below its equilibrium floor may help.
    Literal,
}

impl FromStr for FastVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "opposite-colour" | "opposite" => Ok(FastVariant::OppositeColour),
            "literal" => Ok(FastVariant::Literal),
            other => Err(Error::BadParams(format!(
                "unknown fast-check variant '{other}'"
            ))),
        }
    }
}

impl fmt::Display for FastVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FastVariant::OppositeColour => "opposite-colour",
            FastVariant::Literal => "literal",
        })
    }
}

/// Threshold test: reject a node below floor((deg-1)/2) same-coloured
/// neighbours; a node exactly at it needs a neighbour that is itself below
/// ceil(deg/2).
pub fn check_stable_transition_fast(
    g: &CoordinationGraph,
    col: &[u8],
    variant: FastVariant,
) -> Result<bool> {
    g.require_two_colour()?;
    g.check_colouring(col)?;
    let n = g.num_nodes();
    let same: Vec<i64> = (0..n).map(|i| g.same(col, i) as i64).collect();
    let below_ne = |j: usize| same[j] < equilibrium_floor(g.degree(j));
    for i in 0..n {
        let floor = transition_floor(g.degree(i));
        if same[i] < floor {
            return Ok(false);
        }
        if same[i] == floor {
            let helped = g
                .neighbours(i)
                .iter()
                .any(|&j| below_ne(j) && (variant == FastVariant::Literal || col[j] != col[i]));
            if !helped {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Nodes breaking either floor of the threshold observation: stable
/// transitions below floor((deg-1)/2), equilibria below ceil(deg/2).
pub fn threshold_violations(
    g: &CoordinationGraph,
    col: &[u8],
    variant: StableVariant,
) -> Result<Vec<usize>> {
    let st = check_stable_transition_exact(g, col, variant)?;
    let ne = is_equilibrium(g, col)?;
    Ok((0..g.num_nodes())
        .filter(|&i| {
            let same = g.same(col, i) as i64;
            (st && same < transition_floor(g.degree(i)))
                || (ne && same < equilibrium_floor(g.degree(i)))
        })
        .collect())
}
