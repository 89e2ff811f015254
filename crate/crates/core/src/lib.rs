//! Scale-free percolation on finite lattice boxes: exact and coupled
//! generation, moment calculators, hierarchy machinery and a reproducible
//! Monte-Carlo harness.

pub mod params;
pub mod quad;
pub mod rng;
pub mod lattice;
pub mod graph;
pub mod moments;
pub mod hierarchy;
pub mod stats;
pub mod experiments;
pub mod verify;
pub mod cli;
