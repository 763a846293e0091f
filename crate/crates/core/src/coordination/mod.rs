//! Two-colour coordination games on graphs. A node's utility is the number
//! of neighbours sharing its colour.

pub mod constructions;
pub mod efficiency;
pub mod graph;
pub mod stability;

pub use constructions::{construct_st_not_ne, detect_topology, Topology};
pub use efficiency::{
    efficiency_bounds, search_tight_posta, sweep, CoordinationBounds, MaskGraph, Sweep,
};
pub use graph::{
    clique, cycle, parse_colouring, path, random_forest, random_graph, star, Colouring,
    CoordinationGraph,
};
pub use stability::{
    check_stable_transition_exact, check_stable_transition_fast, equilibrium_floor, is_equilibrium,
    threshold_violations, transition_floor, FastVariant,
};
