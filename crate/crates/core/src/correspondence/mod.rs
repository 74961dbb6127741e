//! From the Kasteleyn matrix to spanning trees of the extended graph.

pub mod directed;
pub mod double;
pub mod kpw;
pub mod parity;

pub use directed::{build_g, build_g0, map_ost_a_to_d, map_ost_d_to_a, DirectedModel, Stage};
pub use double::{
    check_local_rules, double_to_ost, dual_in_double, matching_to_trees, tree_to_matching, CompatClass, DoubleTree,
};
