//! Pairwise conditional gradient over path flows. Each step moves flow of
//! one commodity from its most expensive used path to its cheapest path,
//! with an exact line search on the directional derivative.

use super::network::{Flow, RoutingInstance};
use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Beckmann potential; minimisers are equilibrium flows.
    Wardrop,
    /// Total latency; minimisers are optimal flows.
    SystemOptimum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub flow: Flow,
    pub relative_gap: f64,
    pub iterations: usize,
}

fn edge_gradient(inst: &RoutingInstance, objective: Objective, e: usize, x: f64) -> f64 {
    let c = &inst.edges[e].cost;
    match objective {
        Objective::Wardrop => c.eval(x),
        Objective::SystemOptimum => c.marginal(x),
    }
}

/// (sum_P f_P g_P - sum_i r_i min_P g_P) / sum_P f_P g_P over allowed paths.
pub fn relative_gap(
    inst: &RoutingInstance,
    objective: Objective,
    allowed: &[Vec<bool>],
    flow: &Flow,
) -> f64 {
    let fe = inst.edge_flows(flow);
    let g = inst.path_values(&fe, |e, x| edge_gradient(inst, objective, e, x));
    let mut total = 0.0;
    let mut lower = 0.0;
    for (i, c) in inst.commodities.iter().enumerate() {
        total += flow.paths[i]
            .iter()
            .zip(&g[i])
            .map(|(f, v)| f * v)
            .sum::<f64>();
        let best = g[i]
            .iter()
            .zip(&allowed[i])
            .filter(|(_, ok)| **ok)
            .map(|(v, _)| *v)
            .fold(f64::INFINITY, f64::min);
        lower += c.rate * best;
    }
    if total <= 0.0 {
        0.0
    } else {
        ((total - lower) / total).max(0.0)
    }
}

/// Minimises the objective over feasible flows that use only allowed paths.
pub fn solve(
    inst: &RoutingInstance,
    objective: Objective,
    allowed: &[Vec<bool>],
    tol: f64,
    max_iterations: usize,
) -> Result<Solution> {
    inst.validate()?;
    if allowed.len() != inst.commodities.len()
        || allowed
            .iter()
            .zip(&inst.commodities)
            .any(|(a, c)| a.len() != c.paths.len() || !a.contains(&true))
    {
        return Err(Error::BadParams(
            "every commodity needs at least one allowed path".into(),
        ));
    }
    let mut flow = Flow::uniform(inst, allowed);
    let mut fe = inst.edge_flows(&flow);
    let grad = |fe: &[f64], path: &[usize]| -> f64 {
        path.iter()
            .map(|&e| edge_gradient(inst, objective, e, fe[e]))
            .sum()
    };
    let mut gap = relative_gap(inst, objective, allowed, &flow);
    let mut iterations = 0;
    while gap > tol {
        if iterations >= max_iterations {
            return Err(Error::NoConvergence { iterations, gap });
        }
        iterations += 1;
        for (i, c) in inst.commodities.iter().enumerate() {
            for _ in 0..2 * c.paths.len() {
                let g: Vec<f64> = c.paths.iter().map(|p| grad(&fe, p)).collect();
                let cheap = (0..g.len())
                    .filter(|&p| allowed[i][p])
                    .min_by(|&a, &b| g[a].total_cmp(&g[b]))
                    .unwrap();
                let Some(dear) = (0..g.len())
                    .filter(|&p| flow.paths[i][p] > 0.0)
                    .max_by(|&a, &b| g[a].total_cmp(&g[b]))
                else {
                    break;
                };
                if dear == cheap || g[dear] - g[cheap] <= f64::EPSILON * g[dear].abs() {
                    break;
                }
                let gain: Vec<usize> = c.paths[cheap]
                    .iter()
                    .filter(|e| !c.paths[dear].contains(e))
                    .copied()
                    .collect();
                let lose: Vec<usize> = c.paths[dear]
                    .iter()
                    .filter(|e| !c.paths[cheap].contains(e))
                    .copied()
                    .collect();
                // derivative of the objective along the move, as a function of the amount moved
                let slope = |t: f64| -> f64 {
                    gain.iter()
                        .map(|&e| edge_gradient(inst, objective, e, fe[e] + t))
                        .sum::<f64>()
                        - lose
                            .iter()
                            .map(|&e| edge_gradient(inst, objective, e, (fe[e] - t).max(0.0)))
                            .sum::<f64>()
                };
                let cap = flow.paths[i][dear];
                let step = if slope(cap) <= 0.0 {
                    cap
                } else {
                    let (mut lo, mut hi) = (0.0, cap);
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if slope(mid) <= 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    lo
                };
                if step <= 0.0 {
                    break;
                }
                flow.paths[i][dear] -= step;
                flow.paths[i][cheap] += step;
                if flow.paths[i][dear] < 1e-15 * c.rate {
                    flow.paths[i][cheap] += flow.paths[i][dear];
                    flow.paths[i][dear] = 0.0;
                }
                for &e in &gain {
                    fe[e] += step;
                }
                for &e in &lose {
                    fe[e] -= step;
                }
            }
        }
        // resync to keep rounding from accumulating
        fe = inst.edge_flows(&flow);
        let next = relative_gap(inst, objective, allowed, &flow);
        if next >= gap && next > tol && iterations > 10 && (next - gap).abs() <= f64::EPSILON {
            return Err(Error::NoConvergence {
                iterations,
                gap: next,
            });
        }
        gap = next;
    }
    Ok(Solution {
        flow,
        relative_gap: gap,
        iterations,
    })
}

pub fn all_paths(inst: &RoutingInstance) -> Vec<Vec<bool>> {
    inst.commodities
        .iter()
        .map(|c| vec![true; c.paths.len()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::families::{even_links, pigou, two_link_unsupported};

    #[test]
    fn parallel_identical_links_split_evenly() {
        let inst = even_links(4).unwrap();
        let sol = solve(&inst, Objective::Wardrop, &all_paths(&inst), 1e-12, 1000).unwrap();
        for f in &sol.flow.paths[0] {
            assert!((f - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn pigou_style_equilibrium() {
        let inst = pigou();
        let sol = solve(&inst, Objective::Wardrop, &all_paths(&inst), 1e-12, 10_000).unwrap();
        assert!((sol.flow.paths[0][0] - 1.0).abs() < 1e-6);
        assert!((sol.flow.paths[0][1] - 1.0).abs() < 1e-6);
        let opt = solve(
            &inst,
            Objective::SystemOptimum,
            &all_paths(&inst),
            1e-12,
            10_000,
        )
        .unwrap();
        assert!(inst.cost(&opt.flow) < inst.cost(&sol.flow));
    }

    #[test]
    fn expensive_link_stays_empty() {
        let inst = two_link_unsupported();
        let sol = solve(&inst, Objective::Wardrop, &all_paths(&inst), 1e-12, 10_000).unwrap();
        assert!((sol.flow.paths[0][0] - 1.0).abs() < 1e-12);
        assert_eq!(sol.flow.paths[0][1], 0.0);
    }

    #[test]
    fn needs_an_allowed_path() {
        let inst = even_links(2).unwrap();
        assert!(matches!(
            solve(&inst, Objective::Wardrop, &[vec![false, false]], 1e-8, 10),
            Err(Error::BadParams(_))
        ));
    }
}
