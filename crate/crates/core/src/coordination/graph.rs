//! Undirected simple graphs with per-node colour sets drawn from {1, 2}.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Convention, Game};
use crate::scalar::Rational;

/// Colour per node, each 1 or 2.
pub type Colouring = Vec<u8>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinationGraph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    colours: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    colours: Option<Vec<Vec<u8>>>,
}

impl CoordinationGraph {
    /// Graph on nodes 0..n where every node may pick 1 or 2.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGame(format!(
                    "edge ({u}, {v}) leaves the node range 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGame(format!("self-loop at node {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::InvalidGame(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            adj[u].push(v);
            adj[v].push(u);
            list.push(key);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(CoordinationGraph {
            adj,
            edges: list,
            colours: vec![vec![1, 2]; n],
        })
    }

    pub fn with_colour_sets(mut self, colours: Vec<Vec<u8>>) -> Result<Self> {
        if colours.len() != self.adj.len() {
            return Err(Error::InvalidGame(format!(
                "{} colour sets for {} nodes",
                colours.len(),
                self.adj.len()
            )));
        }
        for (i, set) in colours.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidGame(format!("node {i} has no colours")));
            }
            if set.iter().any(|c| !matches!(c, 1 | 2)) {
                return Err(Error::InvalidGame(format!(
                    "node {i}: colours must be 1 or 2"
                )));
            }
            if set.len() == 2 && set[0] == set[1] {
                return Err(Error::InvalidGame(format!("node {i} lists a colour twice")));
            }
        }
        self.colours = colours;
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn colour_set(&self, i: usize) -> &[u8] {
        &self.colours[i]
    }

    pub fn is_two_colour(&self) -> bool {
        self.colours.iter().all(|s| s.len() == 2)
    }

    pub fn require_two_colour(&self) -> Result<()> {
        if self.is_two_colour() {
            Ok(())
        } else {
            Err(Error::NotTwoColour)
        }
    }

    pub fn check_colouring(&self, col: &[u8]) -> Result<()> {
        if col.len() != self.num_nodes() {
            return Err(Error::InvalidProfile(format!(
                "colouring has {} entries for {} nodes",
                col.len(),
                self.num_nodes()
            )));
        }
        for (i, c) in col.iter().enumerate() {
            if !self.colours[i].contains(c) {
                return Err(Error::InvalidProfile(format!(
                    "node {i} cannot take colour {c}"
                )));
            }
        }
        Ok(())
    }

    /// Neighbours of `i` sharing its colour.
    pub fn same(&self, col: &[u8], i: usize) -> usize {
        self.adj[i].iter().filter(|&&j| col[j] == col[i]).count()
    }

    pub fn welfare(&self, col: &[u8]) -> usize {
        (0..self.num_nodes()).map(|i| self.same(col, i)).sum()
    }

    /// The dense game; strategy k of node i is `colour_set(i)[k]`.
    pub fn to_game(&self) -> Result<Game<Rational>> {
        let shape: Vec<usize> = self.colours.iter().map(Vec::len).collect();
        let game = Game::from_fn(Convention::Utility, &shape, |p| {
            let col: Colouring = p
                .iter()
                .enumerate()
                .map(|(i, &k)| self.colours[i][k])
                .collect();
            (0..col.len())
                .map(|i| Rational::from_integer(self.same(&col, i) as i128))
                .collect()
        })?;
        let strategies = self
            .colours
            .iter()
            .map(|s| s.iter().map(|c| c.to_string()).collect())
            .collect();
        let players = (0..self.num_nodes()).map(|i| i.to_string()).collect();
        game.with_names(players, strategies)
    }

    /// Game profile of a colouring.
    pub fn profile_of(&self, col: &[u8]) -> Result<Vec<usize>> {
        self.check_colouring(col)?;
        Ok(col
            .iter()
            .enumerate()
            .map(|(i, c)| self.colours[i].iter().position(|x| x == c).unwrap())
            .collect())
    }

    /// Connected components, each sorted, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_nodes();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut k = 0;
            while k < comp.len() {
                for &v in &self.adj[comp[k]] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_forest(&self) -> bool {
        self.num_edges() + self.components().len() == self.num_nodes()
    }

    pub fn is_clique(&self) -> bool {
        let n = self.num_nodes();
        n > 0 && self.num_edges() == n * (n - 1) / 2
    }

    /// A single cycle through every node.
    pub fn is_cycle(&self) -> bool {
        self.num_nodes() >= 3
            && self.adj.iter().all(|a| a.len() == 2)
            && self.components().len() == 1
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || {
                Error::Parse(format!(
                    "line {}: expected 'u v' or 'nodes N', got '{line}'",
                    k + 1
                ))
            };
            match parts.as_slice() {
                ["nodes", n] => declared = Some(n.parse::<usize>().map_err(|_| bad())?),
                [u, v] => {
                    edges.push((u.parse().map_err(|_| bad())?, v.parse().map_err(|_| bad())?))
                }
                _ => return Err(bad()),
            }
        }
        let n = declared.unwrap_or_else(|| {
            edges
                .iter()
                .map(|&(u, v): &(usize, usize)| u.max(v) + 1)
                .max()
                .unwrap_or(0)
        });
        CoordinationGraph::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("nodes {}\n", self.num_nodes());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = CoordinationGraph::new(file.nodes, &edges)?;
        match file.colours {
            Some(c) => g.with_colour_sets(c),
            None => Ok(g),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = GraphFile {
            nodes: self.num_nodes(),
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            colours: (!self.is_two_colour()).then(|| self.colours.clone()),
        };
        serde_json::to_value(file).expect("graph serializes")
    }

    /// JSON when the text starts with `{`, an edge list otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::parse_edge_list(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Reads `1 2 1 2`, `1,2,1,2` or a JSON array.
pub fn parse_colouring(text: &str) -> Result<Colouring> {
    let text = text.trim();
    if text.starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u8>()
                .map_err(|_| Error::Parse(format!("bad colour '{t}'")))
        })
        .collect()
}

pub fn cycle(n: usize) -> Result<CoordinationGraph> {
    if n < 3 {
        return Err(Error::BadParams("a cycle needs at least 3 nodes".into()));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    CoordinationGraph::new(n, &edges)
}

pub fn clique(n: usize) -> CoordinationGraph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    CoordinationGraph::new(n, &edges).expect("clique is simple")
}

/// Centre 0 with `leaves` leaves.
pub fn star(leaves: usize) -> CoordinationGraph {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    CoordinationGraph::new(leaves + 1, &edges).expect("star is simple")
}

pub fn path(n: usize) -> CoordinationGraph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    CoordinationGraph::new(n, &edges).expect("path is simple")
}

/// The graph whose edges are the set bits of `mask` over the pairs (u, v),
/// u < v, in lexicographic order.
pub fn from_edge_mask(n: usize, mask: u64) -> CoordinationGraph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, e)| e)
        .collect();
    CoordinationGraph::new(n, &edges).expect("mask graph is simple")
}

/// Erdős–Rényi graph with edge probability `p`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> CoordinationGraph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    CoordinationGraph::new(n, &edges).expect("random graph is simple")
}

/// Each node v > 0 attaches to a uniformly chosen earlier node with
/// probability `attach`, otherwise it starts a new tree.
pub fn random_forest<R: Rng>(rng: &mut R, n: usize, attach: f64) -> CoordinationGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        if rng.gen_bool(attach) {
            edges.push((rng.gen_range(0..v), v));
        }
    }
    CoordinationGraph::new(n, &edges).expect("forest is simple")
}
