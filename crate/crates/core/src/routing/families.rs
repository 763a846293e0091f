//! Named instance families.

use super::cost::CostFn;
use super::network::{Commodity, Edge, RoutingInstance};
use crate::error::{Error, Result};

fn parallel(costs: Vec<CostFn>, rate: f64) -> RoutingInstance {
    let edges: Vec<Edge> = costs
        .into_iter()
        .map(|cost| Edge {
            from: "s".into(),
            to: "t".into(),
            cost,
        })
        .collect();
    RoutingInstance {
        nodes: vec!["s".into(), "t".into()],
        commodities: vec![Commodity {
            source: "s".into(),
            sink: "t".into(),
            rate,
            paths: (0..edges.len()).map(|e| vec![e]).collect(),
        }],
        edges,
    }
}

/// n parallel links with c(x) = x and unit demand.
pub fn even_links(n: usize) -> Result<RoutingInstance> {
    if n == 0 {
        return Err(Error::BadParams("need at least one link".into()));
    }
    Ok(parallel(vec![CostFn::linear(1.0); n], 1.0))
}

/// `copies` unit commodities between one source and sink. Each has n
/// parallel linear links with slopes a_j = (1 + delta)^((n - j) / (n - 1)),
/// j = 1..n; the steepest link is shared by all commodities and the rest
/// are private.
pub fn shared_steep_link(n: usize, copies: usize, delta: f64) -> Result<RoutingInstance> {
    if n < 2 || copies == 0 || !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::BadParams(
            "need n >= 2 links, one or more copies and delta > 0".into(),
        ));
    }
    let slope = |j: usize| (1.0 + delta).powf((n - j) as f64 / (n - 1) as f64);
    let mut edges = vec![Edge {
        from: "s".into(),
        to: "t".into(),
        cost: CostFn::linear(slope(1)),
    }];
    let mut commodities = Vec::new();
    for _ in 0..copies {
        let mut paths = vec![vec![0]];
        for j in 2..=n {
            paths.push(vec![edges.len()]);
            edges.push(Edge {
                from: "s".into(),
                to: "t".into(),
                cost: CostFn::linear(slope(j)),
            });
        }
        commodities.push(Commodity {
            source: "s".into(),
            sink: "t".into(),
            rate: 1.0,
            paths,
        });
    }
    Ok(RoutingInstance {
        nodes: vec!["s".into(), "t".into()],
        edges,
        commodities,
    })
}

/// Two links with x^2 and x^3 carrying a demand of 2.
pub fn pigou() -> RoutingInstance {
    parallel(
        vec![
            CostFn::Poly(vec![0.0, 0.0, 1.0]),
            CostFn::Poly(vec![0.0, 0.0, 0.0, 1.0]),
        ],
        2.0,
    )
}

/// Edge-disjoint strictly increasing links with a common intercept.
pub fn common_intercept() -> RoutingInstance {
    parallel(
        vec![CostFn::Poly(vec![1.0, 1.0]), CostFn::Poly(vec![1.0, 2.0])],
        1.0,
    )
}

/// c1(x) = x and c2(x) = 10 + x with unit demand; the second link is never
/// used.
pub fn two_link_unsupported() -> RoutingInstance {
    parallel(
        vec![CostFn::linear(1.0), CostFn::Poly(vec![10.0, 1.0])],
        1.0,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    EvenLinks { n: usize },
    SharedSteepLink { n: usize, copies: usize, delta: f64 },
    Pigou,
    CommonIntercept,
}

pub fn generate_family(family: Family) -> Result<RoutingInstance> {
    match family {
        Family::EvenLinks { n } => even_links(n),
        Family::SharedSteepLink { n, copies, delta } => shared_steep_link(n, copies, delta),
        Family::Pigou => Ok(pigou()),
        Family::CommonIntercept => Ok(common_intercept()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_validate() {
        for f in [
            Family::EvenLinks { n: 3 },
            Family::SharedSteepLink {
                n: 5,
                copies: 2,
                delta: 0.1,
            },
            Family::Pigou,
            Family::CommonIntercept,
        ] {
            generate_family(f).unwrap().validate().unwrap();
        }
        assert!(shared_steep_link(1, 1, 0.1).is_err());
        assert!(shared_steep_link(3, 1, 0.0).is_err());
        assert!(even_links(0).is_err());
    }

    #[test]
    fn shared_steep_link_layout() {
        let inst = shared_steep_link(5, 2, 0.1).unwrap();
        assert_eq!(inst.edges.len(), 1 + 2 * 4);
        assert_eq!(inst.commodities[1].paths[0], vec![0]);
        assert_eq!(inst.edges[0].cost.linear_slope(), Some(1.1));
        assert!((inst.edges[4].cost.linear_slope().unwrap() - 1.0).abs() < 1e-15);
        assert!(!inst.commodities_disjoint());
    }
}
