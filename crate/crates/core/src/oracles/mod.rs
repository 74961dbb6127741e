//! Brute-force ground truth and the dense linear algebra it is compared
//! against.

pub mod digraph;
pub mod dual_tree;
pub mod enumerate;
pub mod matrix;

pub use digraph::{Arc, ArcOrigin, WeightedDigraph};
pub use dual_tree::{dual_tree, is_spanning_tree, Dsu};
pub use enumerate::{
    count_osts, dimer_z, for_each_matching, for_each_ost, ising_z, ost_z, plus_boundary_reduce, EnumCaps, SpinGraph,
};
pub use matrix::{laplacian, matrix_tree_z, permanent_01, ComplexMatrix};
