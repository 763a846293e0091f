//! Non-atomic routing: equilibrium flows and the transition flows built
//! from them.

pub mod analysis;
pub mod cost;
pub mod families;
pub mod network;
pub mod solver;

pub use analysis::{
    analyze, best_transition, equilibrium_flow, is_equilibrium, is_transition_flow, optimal_flow,
    stretch_bound, supported_paths, worst_transition, ExtremeFlow, RoutingReport, StretchReport,
    StretchRow,
};
pub use cost::CostFn;
pub use families::{
    common_intercept, even_links, generate_family, pigou, shared_steep_link, two_link_unsupported,
    Family,
};
pub use network::{Commodity, Edge, Flow, RoutingInstance};
pub use solver::{solve, Objective, Solution};
