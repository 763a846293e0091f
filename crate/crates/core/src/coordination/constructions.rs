//! Explicit stable transitions that are not equilibria.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::graph::{Colouring, CoordinationGraph};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Cycle,
    Clique,
    Forest,
}

impl FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(Topology::Cycle),
            "clique" => Ok(Topology::Clique),
            "forest" | "tree" => Ok(Topology::Forest),
            other => Err(Error::BadParams(format!("unknown topology '{other}'"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Cycle => "cycle",
            Topology::Clique => "clique",
            Topology::Forest => "forest",
        })
    }
}

/// First matching topology, checked as cycle, clique, forest.
pub fn detect_topology(g: &CoordinationGraph) -> Option<Topology> {
    if g.is_cycle() {
        Some(Topology::Cycle)
    } else if g.is_clique() && g.num_nodes() > 2 {
        Some(Topology::Clique)
    } else if g.is_forest() {
        Some(Topology::Forest)
    } else {
        None
    }
}

/// A colouring in ST(NE) \ NE for the given topology, or None when the
/// topology admits none (short cycles, odd cliques, edgeless forests).
pub fn construct_st_not_ne(g: &CoordinationGraph, topology: Topology) -> Result<Option<Colouring>> {
    g.require_two_colour()?;
    match topology {
        Topology::Cycle => {
            if !g.is_cycle() {
                return Err(Error::TopologyMismatch(
                    "graph is not a single cycle".into(),
                ));
            }
            Ok(cycle_colouring(g))
        }
        Topology::Clique => {
            if !g.is_clique() {
                return Err(Error::TopologyMismatch("graph is not complete".into()));
            }
            let n = g.num_nodes();
            if n % 2 == 1 {
                return Ok(None);
            }
            Ok(Some(
                (0..n).map(|i| if i < n / 2 { 1 } else { 2 }).collect(),
            ))
        }
        Topology::Forest => {
            if !g.is_forest() {
                return Err(Error::TopologyMismatch("graph has a cycle".into()));
            }
            Ok(forest_colouring(g))
        }
    }
}

fn cycle_colouring(g: &CoordinationGraph) -> Option<Colouring> {
    let n = g.num_nodes();
    if n < 4 {
        return None;
    }
    let mut col = vec![0; n];
    let (mut prev, mut at) = (usize::MAX, 0);
    for k in 0..n {
        col[at] = if k % 2 == 0 { 1 } else { 2 };
        let next = g
            .neighbours(at)
            .iter()
            .copied()
            .find(|&v| v != prev)
            .unwrap();
        prev = at;
        at = next;
    }
    Some(col)
}

/// Roots the first nontrivial tree at a maximum-degree node and colours
/// everything 1, then plants one unstable gadget. On a star, the root keeps
/// floor((d-1)/2) leaves of its colour and the rest flip. Otherwise the
/// deepest internal node p flips together with floor(k/2) of its k leaf
/// children; p and its remaining children then each rely on the other.
fn forest_colouring(g: &CoordinationGraph) -> Option<Colouring> {
    let n = g.num_nodes();
    let tree = g.components().into_iter().find(|c| c.len() > 1)?;
    let root = *tree
        .iter()
        .max_by(|a, b| g.degree(**a).cmp(&g.degree(**b)).then(b.cmp(a)))?;
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    parent[root] = root;
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbours(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                depth[v] = depth[u] + 1;
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    let children = |u: usize| -> Vec<usize> {
        g.neighbours(u)
            .iter()
            .copied()
            .filter(|&v| parent[v] == u && v != root)
            .collect()
    };
    let mut col = vec![1u8; n];
    let height = order.iter().map(|&u| depth[u]).max().unwrap_or(0);
    if height == 1 {
        let keep = (g.degree(root) - 1) / 2;
        for &leaf in children(root).iter().skip(keep) {
            col[leaf] = 2;
        }
        return Some(col);
    }
    let p = order
        .iter()
        .copied()
        .filter(|&u| u != root && !children(u).is_empty())
        .max_by(|&a, &b| depth[a].cmp(&depth[b]).then(b.cmp(&a)))?;
    let kids = children(p);
    col[p] = 2;
    for &leaf in kids.iter().take(kids.len() / 2) {
        col[leaf] = 2;
    }
    Some(col)
}
