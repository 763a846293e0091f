use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::cost::CostFn;
use crate::error::{Error, Result};

/// Absolute per-commodity tolerance on flow conservation.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub cost: CostFn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub source: String,
    pub sink: String,
    pub rate: f64,
    /// Each path is a list of edge indices from source to sink.
    pub paths: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutingInstance {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub commodities: Vec<Commodity>,
}

impl RoutingInstance {
    pub fn validate(&self) -> Result<()> {
        let known: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (n.as_str(), k))
            .collect();
        if known.len() != self.nodes.len() {
            return Err(Error::InvalidGame("node names must be distinct".into()));
        }
        for (k, e) in self.edges.iter().enumerate() {
            if !known.contains_key(e.from.as_str()) || !known.contains_key(e.to.as_str()) {
                return Err(Error::InvalidGame(format!(
                    "edge {k} references an unknown node"
                )));
            }
            e.cost
                .validate()
                .map_err(|err| Error::InvalidGame(format!("edge {k}: {err}")))?;
        }
        if self.commodities.is_empty() {
            return Err(Error::InvalidGame(
                "routing instance needs a commodity".into(),
            ));
        }
        for (i, c) in self.commodities.iter().enumerate() {
            if !(c.rate > 0.0 && c.rate.is_finite()) {
                return Err(Error::InvalidGame(format!(
                    "commodity {i} needs a positive rate"
                )));
            }
            if c.paths.is_empty() {
                return Err(Error::InvalidGame(format!("commodity {i} has no paths")));
            }
            for (p, path) in c.paths.iter().enumerate() {
                let mut at = c.source.as_str();
                for &e in path {
                    let edge = self.edges.get(e).ok_or_else(|| {
                        Error::InvalidGame(format!("commodity {i} path {p} uses unknown edge {e}"))
                    })?;
                    if edge.from != at {
                        return Err(Error::InvalidGame(format!(
                            "commodity {i} path {p} is not connected at edge {e}"
                        )));
                    }
                    at = &edge.to;
                }
                if path.is_empty() || at != c.sink {
                    return Err(Error::InvalidGame(format!(
                        "commodity {i} path {p} does not end at the sink"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn total_rate(&self) -> f64 {
        self.commodities.iter().map(|c| c.rate).sum()
    }

    pub fn edge_flows(&self, flow: &Flow) -> Vec<f64> {
        let mut fe = vec![0.0; self.edges.len()];
        for (c, paths) in self.commodities.iter().zip(&flow.paths) {
            for (path, f) in c.paths.iter().zip(paths) {
                for &e in path {
                    fe[e] += f;
                }
            }
        }
        fe
    }

    /// Path latencies at the given edge flows.
    pub fn path_costs(&self, edge_flows: &[f64]) -> Vec<Vec<f64>> {
        self.path_values(edge_flows, |e, x| self.edges[e].cost.eval(x))
    }

    pub(crate) fn path_values(
        &self,
        edge_flows: &[f64],
        per_edge: impl Fn(usize, f64) -> f64,
    ) -> Vec<Vec<f64>> {
        let values: Vec<f64> = edge_flows
            .iter()
            .enumerate()
            .map(|(e, &x)| per_edge(e, x))
            .collect();
        self.commodities
            .iter()
            .map(|c| {
                c.paths
                    .iter()
                    .map(|p| p.iter().map(|&e| values[e]).sum())
                    .collect()
            })
            .collect()
    }

    /// Total latency summed over edges.
    pub fn cost(&self, flow: &Flow) -> f64 {
        let fe = self.edge_flows(flow);
        fe.iter()
            .enumerate()
            .map(|(e, &x)| self.edges[e].cost.eval(x) * x)
            .sum()
    }

    /// Total latency summed over paths; agrees with `cost`.
    pub fn cost_by_paths(&self, flow: &Flow) -> f64 {
        let costs = self.path_costs(&self.edge_flows(flow));
        costs
            .iter()
            .zip(&flow.paths)
            .flat_map(|(c, f)| c.iter().zip(f).map(|(a, b)| a * b))
            .sum()
    }

    pub fn beckmann(&self, flow: &Flow) -> f64 {
        let fe = self.edge_flows(flow);
        fe.iter()
            .enumerate()
            .map(|(e, &x)| self.edges[e].cost.integral(x))
            .sum()
    }

    pub fn is_feasible(&self, flow: &Flow) -> bool {
        flow.paths.len() == self.commodities.len()
            && self.commodities.iter().zip(&flow.paths).all(|(c, f)| {
                f.len() == c.paths.len()
                    && f.iter().all(|x| *x >= -FEASIBILITY_TOLERANCE)
                    && (f.iter().sum::<f64>() - c.rate).abs() <= FEASIBILITY_TOLERANCE
            })
    }

    /// Whether paths of different commodities never share an edge.
    pub fn commodities_disjoint(&self) -> bool {
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (i, c) in self.commodities.iter().enumerate() {
            for &e in c.paths.iter().flatten() {
                if *owner.entry(e).or_insert(i) != i {
                    return false;
                }
            }
        }
        true
    }

    /// Whether each commodity's paths are pairwise edge-disjoint.
    pub fn paths_edge_disjoint(&self) -> bool {
        self.commodities.iter().all(|c| {
            let mut seen = std::collections::HashSet::new();
            c.paths.iter().flatten().all(|e| seen.insert(*e))
        })
    }
}

/// Path flows, indexed by commodity then path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub paths: Vec<Vec<f64>>,
}

impl Flow {
    /// Each commodity spread evenly over its allowed paths.
    pub fn uniform(inst: &RoutingInstance, allowed: &[Vec<bool>]) -> Self {
        Flow {
            paths: inst
                .commodities
                .iter()
                .zip(allowed)
                .map(|(c, ok)| {
                    let k = ok.iter().filter(|b| **b).count().max(1) as f64;
                    ok.iter()
                        .map(|&b| if b { c.rate / k } else { 0.0 })
                        .collect()
                })
                .collect(),
        }
    }

    /// Each commodity entirely on the chosen path.
    pub fn vertex(inst: &RoutingInstance, choice: &[usize]) -> Self {
        Flow {
            paths: inst
                .commodities
                .iter()
                .zip(choice)
                .map(|(c, &p)| {
                    (0..c.paths.len())
                        .map(|k| if k == p { c.rate } else { 0.0 })
                        .collect()
                })
                .collect(),
        }
    }

    /// Paths carrying more than the feasibility tolerance.
    pub fn used(&self) -> Vec<Vec<bool>> {
        self.paths
            .iter()
            .map(|f| f.iter().map(|x| *x > FEASIBILITY_TOLERANCE).collect())
            .collect()
    }
}
