//! Transition flows, their extreme costs and the stretch bound.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::network::{Flow, RoutingInstance, FEASIBILITY_TOLERANCE};
use super::solver::{all_paths, solve, Objective, DEFAULT_MAX_ITERATIONS};
use crate::degree::CoverInstance;
use crate::error::{Error, Result};
use crate::game::{check_size, ProfileIter};

/// Relative slack when deciding whether a path is a cheapest path.
pub const SUPPORT_TOLERANCE: f64 = 1e-6;

pub fn equilibrium_flow(inst: &RoutingInstance, tol: f64) -> Result<Flow> {
    Ok(solve(
        inst,
        Objective::Wardrop,
        &all_paths(inst),
        tol,
        DEFAULT_MAX_ITERATIONS,
    )?
    .flow)
}

/// Cheapest feasible flow over all paths.
pub fn optimal_flow(inst: &RoutingInstance, tol: f64) -> Result<Flow> {
    Ok(solve(
        inst,
        Objective::SystemOptimum,
        &all_paths(inst),
        tol,
        DEFAULT_MAX_ITERATIONS,
    )?
    .flow)
}

/// Paths whose latency at the equilibrium edge flows matches the cheapest
/// path of their commodity.
pub fn supported_paths(inst: &RoutingInstance, eq: &Flow) -> Vec<Vec<bool>> {
    let costs = inst.path_costs(&inst.edge_flows(eq));
    costs
        .iter()
        .map(|c| {
            let best = c.iter().copied().fold(f64::INFINITY, f64::min);
            c.iter()
                .map(|v| *v <= best + SUPPORT_TOLERANCE * best.abs().max(1e-12))
                .collect()
        })
        .collect()
}

/// Whether every used path is supported and, with `m`, whether the used
/// paths are covered by the positive supports of at most `m` of the given
/// equilibrium flows.
pub fn is_transition_flow(
    inst: &RoutingInstance,
    flow: &Flow,
    supported: &[Vec<bool>],
    m: Option<usize>,
    witnesses: &[Flow],
) -> Result<bool> {
    if !inst.is_feasible(flow) {
        return Err(Error::InvalidProfile("flow is not feasible".into()));
    }
    let used = flow.used();
    let ok = used
        .iter()
        .zip(supported)
        .all(|(u, s)| u.iter().zip(s).all(|(u, s)| !u || *s));
    match m {
        None => Ok(ok),
        Some(m) => Ok(ok && cover_size(&used, witnesses)?.is_some_and(|k| k <= m)),
    }
}

/// Fewest witnesses whose positive paths include every used path.
fn cover_size(used: &[Vec<bool>], witnesses: &[Flow]) -> Result<Option<usize>> {
    let index = |i: usize, p: usize| used[..i].iter().map(Vec::len).sum::<usize>() + p;
    let universe: Vec<usize> = used
        .iter()
        .enumerate()
        .flat_map(|(i, u)| {
            u.iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(move |(p, _)| (i, p))
        })
        .map(|(i, p)| index(i, p))
        .collect();
    if universe.is_empty() {
        return Ok(Some(0));
    }
    let position = |x: usize| universe.iter().position(|&u| u == x);
    let sets: Vec<Vec<usize>> = witnesses
        .iter()
        .map(|w| {
            w.used()
                .iter()
                .enumerate()
                .flat_map(|(i, u)| {
                    u.iter()
                        .enumerate()
                        .filter(|(_, b)| **b)
                        .map(move |(p, _)| (i, p))
                })
                .filter_map(|(i, p)| position(index(i, p)))
                .collect()
        })
        .collect();
    let cover = CoverInstance::new(universe.len(), &sets)?;
    if !cover.is_feasible() {
        return Ok(None);
    }
    Ok(Some(cover.exact()?.size()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremeFlow {
    pub flow: Flow,
    pub cost: f64,
    /// False when some x c(x) is not convex, making a vertex maximum only a
    /// lower bound on the worst transition.
    pub exact: bool,
}

/// Largest cost over polytope vertices: every commodity entirely on one
/// allowed path, restricted further to vertices accepted by `keep`.
fn worst_vertex(
    inst: &RoutingInstance,
    allowed: &[Vec<bool>],
    keep: impl Fn(&Flow) -> bool + Sync,
) -> Result<ExtremeFlow> {
    let choices: Vec<Vec<usize>> = allowed
        .iter()
        .map(|a| {
            a.iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(p, _)| p)
                .collect()
        })
        .collect();
    let shape: Vec<usize> = choices.iter().map(Vec::len).collect();
    check_size(&shape)?;
    let vertices: Vec<Vec<usize>> = ProfileIter::over(choices).collect();
    let best = vertices
        .par_iter()
        .filter_map(|v| {
            let flow = Flow::vertex(inst, v);
            keep(&flow).then(|| {
                let cost = inst.cost(&flow);
                (cost, flow)
            })
        })
        .reduce_with(|a, b| if b.0 > a.0 { b } else { a });
    let (cost, flow) = best.ok_or_else(|| Error::Infeasible("no admissible vertex".into()))?;
    let upto = inst.total_rate();
    let exact = inst.edges.iter().all(|e| e.cost.total_cost_convex(upto));
    Ok(ExtremeFlow { flow, cost, exact })
}

pub fn worst_transition(inst: &RoutingInstance, supported: &[Vec<bool>]) -> Result<ExtremeFlow> {
    worst_vertex(inst, supported, |_| true)
}

pub fn best_transition(
    inst: &RoutingInstance,
    supported: &[Vec<bool>],
    tol: f64,
) -> Result<ExtremeFlow> {
    let sol = solve(
        inst,
        Objective::SystemOptimum,
        supported,
        tol,
        DEFAULT_MAX_ITERATIONS,
    )?;
    Ok(ExtremeFlow {
        cost: inst.cost(&sol.flow),
        flow: sol.flow,
        exact: true,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StretchRow {
    /// Infinite when the denominator vanishes.
    pub general: f64,
    pub linear: Option<f64>,
    pub non_intersecting: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StretchReport {
    pub rows: Vec<StretchRow>,
    pub max_stretch: f64,
    pub degenerate: bool,
}

impl StretchReport {
    pub fn require_finite(&self) -> Result<f64> {
        if self.degenerate {
            Err(Error::DegenerateStretch(
                "a cheapest-share latency is zero".into(),
            ))
        } else {
            Ok(self.max_stretch)
        }
    }
}

/// Per commodity: longest path length times the largest latency at the
/// total rate, over shortest path length times the smallest latency at an
/// even split of the commodity, taken over all edge latencies present.
pub fn stretch_bound(inst: &RoutingInstance) -> StretchReport {
    let total = inst.total_rate();
    let costs: Vec<_> = inst.edges.iter().map(|e| &e.cost).collect();
    let slopes: Option<Vec<f64>> = costs.iter().map(|c| c.linear_slope()).collect();
    let disjoint = inst.commodities_disjoint();
    let rows: Vec<StretchRow> = inst
        .commodities
        .iter()
        .map(|c| {
            let longest = c.paths.iter().map(Vec::len).max().unwrap_or(0) as f64;
            let shortest = c.paths.iter().map(Vec::len).min().unwrap_or(0) as f64;
            let count = c.paths.len() as f64;
            let sup = costs
                .iter()
                .map(|f| f.eval(total))
                .fold(f64::NEG_INFINITY, f64::max);
            let inf = costs
                .iter()
                .map(|f| f.eval(c.rate / count))
                .fold(f64::INFINITY, f64::min);
            let den = shortest * inf;
            let general = if den > 0.0 {
                longest * sup / den
            } else {
                f64::INFINITY
            };
            let linear = slopes.as_ref().and_then(|a| {
                let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
                (lo > 0.0).then(|| longest * hi * total / (shortest * lo * c.rate) * count)
            });
            let non_intersecting = match (&slopes, disjoint) {
                (Some(a), true) => {
                    let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
                    (lo > 0.0).then(|| longest * hi / (shortest * lo) * count)
                }
                _ => None,
            };
            StretchRow {
                general,
                linear,
                non_intersecting,
            }
        })
        .collect();
    let max_stretch = rows
        .iter()
        .map(|r| r.general)
        .fold(f64::NEG_INFINITY, f64::max);
    StretchReport {
        degenerate: !max_stretch.is_finite(),
        max_stretch,
        rows,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoutingReport {
    pub equilibrium: Flow,
    pub equilibrium_cost: f64,
    pub optimum: Flow,
    pub optimum_cost: f64,
    pub supported: Vec<Vec<bool>>,
    pub worst: ExtremeFlow,
    pub best: ExtremeFlow,
    /// Worst transition using paths from at most m equilibrium witnesses.
    pub m_worst: Option<(usize, ExtremeFlow)>,
    pub poa: f64,
    pub pota: f64,
    pub pots: f64,
    pub m_pota: Option<f64>,
    pub stretch: StretchReport,
    /// pota <= poa * max stretch, vacuous when the stretch is infinite.
    pub stretch_holds: bool,
    /// The support criterion is exact only when each commodity's paths are
    /// pairwise edge-disjoint.
    pub support_exact: bool,
}

impl RoutingReport {
    pub fn to_json(&self) -> Value {
        let extreme = |x: &ExtremeFlow| json!({ "cost": x.cost, "path_flows": x.flow.paths, "exact": x.exact });
        json!({
            "equilibrium": { "cost": self.equilibrium_cost, "path_flows": self.equilibrium.paths },
            "optimum": { "cost": self.optimum_cost, "path_flows": self.optimum.paths },
            "supported_paths": self.supported,
            "support_exact": self.support_exact,
            "worst_transition": extreme(&self.worst),
            "best_transition": extreme(&self.best),
            "m_worst_transition": self.m_worst.as_ref().map(|(m, x)| json!({ "m": m, "flow": extreme(x) })),
            "poa": self.poa,
            "pota": self.pota,
            "pots": self.pots,
            "m_pota": self.m_pota,
            "stretch": {
                "per_commodity": self.stretch.rows.iter().map(|r| json!({
                    "general": if r.general.is_finite() { json!(r.general) } else { json!("inf") },
                    "linear": r.linear,
                    "non_intersecting": r.non_intersecting,
                })).collect::<Vec<_>>(),
                "max": if self.stretch.max_stretch.is_finite() { json!(self.stretch.max_stretch) } else { json!("inf") },
                "degenerate": self.stretch.degenerate,
                "holds": self.stretch_holds,
            },
        })
    }
}

/// Full analysis; `witnesses` are the equilibrium flows the m-variant may
/// draw paths from (the computed equilibrium when empty).
pub fn analyze(
    inst: &RoutingInstance,
    tol: f64,
    m: Option<usize>,
    witnesses: &[Flow],
) -> Result<RoutingReport> {
    inst.validate()?;
    let equilibrium = equilibrium_flow(inst, tol)?;
    let optimum = optimal_flow(inst, tol)?;
    let supported = supported_paths(inst, &equilibrium);
    let worst = worst_transition(inst, &supported)?;
    let best = best_transition(inst, &supported, tol)?;
    let equilibrium_cost = inst.cost(&equilibrium);
    let optimum_cost = inst.cost(&optimum);
    if optimum_cost <= 0.0 {
        return Err(Error::UndefinedPrice {
            measure: "routing prices".into(),
            reason: "the cheapest feasible flow costs nothing".into(),
        });
    }
    let witnesses: Vec<Flow> = if witnesses.is_empty() {
        vec![equilibrium.clone()]
    } else {
        witnesses.to_vec()
    };
    for w in &witnesses {
        if !inst.is_feasible(w) {
            return Err(Error::InvalidProfile("witness flow is not feasible".into()));
        }
    }
    let m_worst = match m {
        Some(m) => {
            let x = worst_vertex(inst, &supported, |f| {
                cover_size(&f.used(), &witnesses)
                    .ok()
                    .flatten()
                    .is_some_and(|k| k <= m)
            })?;
            Some((m, x))
        }
        None => None,
    };
    let stretch = stretch_bound(inst);
    let poa = equilibrium_cost / optimum_cost;
    let pota = worst.cost / optimum_cost;
    let pots = best.cost / optimum_cost;
    let stretch_holds = stretch.degenerate || pota <= poa * stretch.max_stretch * (1.0 + 1e-9);
    Ok(RoutingReport {
        m_pota: m_worst.as_ref().map(|(_, x)| x.cost / optimum_cost),
        support_exact: inst.paths_edge_disjoint(),
        equilibrium,
        equilibrium_cost,
        optimum,
        optimum_cost,
        supported,
        worst,
        best,
        m_worst,
        poa,
        pota,
        pots,
        stretch,
        stretch_holds,
    })
}

/// Whether the used paths of each commodity are cheapest paths within
/// `tol` relative.
pub fn is_equilibrium(inst: &RoutingInstance, flow: &Flow, tol: f64) -> bool {
    let costs = inst.path_costs(&inst.edge_flows(flow));
    costs.iter().zip(&flow.paths).all(|(c, f)| {
        let best = c.iter().copied().fold(f64::INFINITY, f64::min);
        c.iter()
            .zip(f)
            .all(|(v, x)| *x <= FEASIBILITY_TOLERANCE || *v <= best + tol * best.abs().max(1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::families::{common_intercept, even_links, two_link_unsupported};

    #[test]
    fn even_links_prices() {
        for n in [2, 3, 5] {
            let inst = even_links(n).unwrap();
            let rep = analyze(&inst, 1e-12, None, &[]).unwrap();
            assert!((rep.equilibrium_cost - 1.0 / n as f64).abs() < 1e-12);
            assert!((rep.pota - n as f64).abs() < 1e-9);
            assert!((rep.pots - 1.0).abs() < 1e-9);
            assert!((rep.stretch.max_stretch - n as f64).abs() < 1e-12);
            assert!(rep.stretch_holds);
            assert_eq!(rep.stretch.rows[0].non_intersecting, Some(n as f64));
        }
    }

    #[test]
    fn all_on_one_edge_is_a_transition() {
        let inst = even_links(3).unwrap();
        let eq = equilibrium_flow(&inst, 1e-12).unwrap();
        let sup = supported_paths(&inst, &eq);
        let corner = Flow::vertex(&inst, &[0]);
        assert!(is_transition_flow(&inst, &eq, &sup, None, &[]).unwrap());
        assert!(is_transition_flow(&inst, &corner, &sup, None, &[]).unwrap());
        for m in 1..=3 {
            assert!(
                is_transition_flow(&inst, &corner, &sup, Some(m), std::slice::from_ref(&eq))
                    .unwrap()
            );
        }
    }

    #[test]
    fn unsupported_link() {
        let inst = two_link_unsupported();
        let eq = equilibrium_flow(&inst, 1e-12).unwrap();
        let sup = supported_paths(&inst, &eq);
        assert_eq!(sup, vec![vec![true, false]]);
        let bad = Flow {
            paths: vec![vec![0.5, 0.5]],
        };
        assert!(!is_transition_flow(&inst, &bad, &sup, None, &[]).unwrap());
        let rep = analyze(&inst, 1e-12, Some(1), &[]).unwrap();
        assert!((rep.pota - 1.0).abs() < 1e-9 && (rep.pots - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equal_intercepts_reach_optimum() {
        let rep = analyze(&common_intercept(), 1e-12, None, &[]).unwrap();
        assert!(rep.supported[0].iter().all(|b| *b));
        assert!((rep.pots - 1.0).abs() < 1e-6);
    }
}
