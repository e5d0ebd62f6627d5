//! Parallel greedy graph coloring with classical and GraphSAGE-learned
//! vertex orderings.
//!
//! The pipeline is always the same: an ordering heuristic assigns every
//! vertex a priority ([`PriorityMap`]), then [`greedy_color`] or
//! [`jp_color`] colors vertices so that higher priority (ties: lower ID)
//! goes first. The learned heuristic evaluates a small GraphSAGE model
//! ([`gnn`]) trained by [`train`] and refined by [`genetic`].

pub mod coloring;
pub mod error;
pub mod generate;
pub mod genetic;
pub mod gnn;
pub mod graph;
pub mod manifest;
pub mod ordering;
pub mod parallel;
pub mod priority;
pub mod train;

pub use coloring::{culberson_chain, culberson_recolor, greedy_color, jp_color, validate, Coloring};
pub use error::{Error, Result};
pub use graph::{load_graph, parse_dimacs, parse_edge_list, save_graph, CsrGraph, Vertex};
pub use ordering::{order_ff, order_id, order_lf, order_sd, order_sl, par_order_sl, Heuristic};
pub use priority::PriorityMap;
