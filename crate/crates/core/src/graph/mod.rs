//! Finite-box realizations of SFP, LRP and SFP with nearest-neighbour edges.
//!
//! Generation is exact pair enumeration: the edge `{x, y}` is open iff
//! `U_xy < p_xy`, where `U_xy` is the keyed edge uniform of [`crate::rng`].
//! Realizations of different kinds built from the same seed therefore share
//! every per-edge coin, and `LRP ⊆ SFP ⊆ SFP_NN` holds edge by edge.

mod generate;
mod io;
mod query;

pub use generate::{
    box_weights, connection_probability, coupled_pair, generate_box, generate_box_truncated, generate_box_with,
    generate_coupled, GenerateOptions, DEFAULT_PAIR_BUDGET,
};
pub use io::{load_realization, read_realization, save_realization, write_realization, FORMAT_HEADER};
pub use query::{bfs_distances, clusters, degree_sequence, graph_distance, Clusters, DistanceSample, UNREACHABLE};

use thiserror::Error;

use crate::lattice::{BoxError, BoxSpec, Vertex};
use crate::params::{ModelKind, ModelParams, ParamError};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("model dimension {params} differs from box dimension {spec}")]
    DimensionMismatch { params: u32, spec: u32 },
    #[error("box has {pairs} vertex pairs, above the budget of {budget}")]
    BoxTooLarge { pairs: u128, budget: u128 },
    #[error("truncation radius must be at least 1 (got {0})")]
    InvalidCutoff(f64),
    #[error("vertex {0} is outside the box")]
    VertexOutOfBox(Vertex),
    #[error("margin {margin} must be below half the side {side}")]
    MarginTooLarge { margin: u64, side: u64 },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("weight vector has {got} entries, box has {expected} vertices")]
    WeightCount { expected: usize, got: usize },
    #[error("unsupported realization format `{0}`")]
    FormatVersionMismatch(String),
    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Record of a truncated generation: pairs farther apart than `radius` were
/// never opened, and `bias_bound` is the union bound
/// `Σ_{|x-y| > R} (λ W_x W_y |x-y|^{-α} ∧ 1)` on the expected number of
/// edges lost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub radius: f64,
    pub bias_bound: f64,
}

/// One sampled configuration on a box.
///
/// Vertices are identified by their box index (see [`BoxSpec::index_of`]);
/// adjacency is stored as sorted neighbour lists.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRealization {
    spec: BoxSpec,
    params: ModelParams,
    seed: u64,
    weights: Option<Vec<f64>>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    truncation: Option<Truncation>,
}

impl BoxRealization {
    /// Builds a realization from an explicit edge list. Duplicate edges are
    /// merged; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(
        spec: BoxSpec,
        params: ModelParams,
        seed: u64,
        weights: Option<Vec<f64>>,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let n = spec.vertex_count();
        check_dims(&params, &spec)?;
        if let Some(w) = &weights {
            if w.len() != n {
                return Err(GraphError::WeightCount { expected: n, got: w.len() });
            }
        }
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(GraphError::InvalidEdge(a, b));
            }
            list.push((a.min(b) as u32, a.max(b) as u32));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self::from_sorted_edges(spec, params, seed, weights, &list, None))
    }

    /// `edges` must be sorted, unique, with `a < b` in every pair.
    pub(crate) fn from_sorted_edges(
        spec: BoxSpec,
        params: ModelParams,
        seed: u64,
        weights: Option<Vec<f64>>,
        edges: &[(u32, u32)],
        truncation: Option<Truncation>,
    ) -> Self {
        let n = spec.vertex_count();
        let mut offsets = vec![0usize; n + 1];
        for &(a, b) in edges {
            offsets[a as usize + 1] += 1;
            offsets[b as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        // Sorted input makes each list sorted: lower neighbours arrive in
        // order of `a`, and all of them precede the higher ones.
        for &(a, b) in edges {
            neighbors[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        for &(a, b) in edges {
            neighbors[fill[a as usize]] = b;
            fill[a as usize] += 1;
        }
        BoxRealization { spec, params, seed, weights, offsets, neighbors, truncation }
    }

    pub fn spec(&self) -> &BoxSpec {
        &self.spec
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of vertex `i`; 1 when the realization carries no weights.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncation
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Open edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count())
            .flat_map(move |a| self.neighbors(a).iter().filter(move |&&b| (b as usize) > a).map(move |&b| (a, b as usize)))
    }

    pub fn vertex(&self, i: usize) -> Vertex {
        self.spec.vertex(i)
    }

    pub fn index_of(&self, x: &Vertex) -> Result<usize, GraphError> {
        self.spec.index_of(x.coords()).ok_or_else(|| GraphError::VertexOutOfBox(x.clone()))
    }

    /// Whether every edge of `self` is also an edge of `other`.
    pub fn edges_subset_of(&self, other: &BoxRealization) -> bool {
        self.inclusion_violations(other) == 0
    }

    /// Number of edges of `self` missing from `other`.
    pub fn inclusion_violations(&self, other: &BoxRealization) -> usize {
        self.edges().filter(|&(a, b)| !other.has_edge(a, b)).count()
    }

    pub fn same_edges(&self, other: &BoxRealization) -> bool {
        self.offsets == other.offsets && self.neighbors == other.neighbors
    }
}

fn check_dims(params: &ModelParams, spec: &BoxSpec) -> Result<(), GraphError> {
    if params.d() != spec.d() {
        return Err(GraphError::DimensionMismatch { params: params.d(), spec: spec.d() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Sfp).unwrap()
    }

    #[test]
    fn csr_from_edges() {
        let spec = BoxSpec::new(1, 5).unwrap();
        let r = BoxRealization::from_edges(spec, params(), 0, None, &[(3, 1), (0, 4), (1, 3), (1, 0)]).unwrap();
        assert_eq!(r.edge_count(), 3);
        assert_eq!(r.neighbors(1), &[0, 3]);
        assert_eq!(r.neighbors(0), &[1, 4]);
        assert!(r.has_edge(4, 0));
        assert!(!r.has_edge(2, 3));
        assert_eq!(r.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 4), (1, 3)]);
        assert!(matches!(
            BoxRealization::from_edges(BoxSpec::new(1, 5).unwrap(), params(), 0, None, &[(2, 2)]),
            Err(GraphError::InvalidEdge(2, 2))
        ));
    }
}
