//! Decomposition of graphs into parallel flows.
//!
//! A parallel flow is a set of pairwise vertex-disjoint, non-extendable
//! paths. A collection of flows epsilon-covers a graph when the union of
//! their paths' edges contains at least an epsilon fraction of the graph's
//! edges. The strategies here trade exactness for generality:
//!
//! * [`tree_decompose`] covers a tree with exactly `floor((d_max + 1) / 2)`
//!   flows, which is optimal.
//! * [`bfs_peel`] / [`dfs_peel`] cover arbitrary graphs by repeatedly
//!   decomposing spanning forests, using at most
//!   `(k + 1) * k` flows for `k = floor((d_max + 1) / 2)`.
//! * [`lattice_flows`] produces the fixed row/column/diagonal flows of an
//!   image lattice.
//! * [`centered_paths`] grows fixed-length windows around chosen vertices.

mod file;
mod peel;
mod regularize;
mod special;
mod tree;
mod validate;

pub use file::{cover_from_json, cover_to_json};
pub use peel::{bfs_peel, dfs_peel, spanning_peel};
pub use regularize::regularize;
pub use special::{centered_paths, lattice_flows};
pub use tree::tree_decompose;
pub use validate::{validate_cover, CoverReport, Violation, ViolationKind};

use gfcn_graph::{Graph, GraphError, Path};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}; use bfs_peel or dfs_peel for general graphs")]
    NotATree(String),
    #[error("vertex {vertex} has degree {degree} below the maximum {max_degree} but is not in the boundary")]
    BoundaryInsufficient {
        vertex: usize,
        degree: usize,
        max_degree: usize,
    },
    #[error("paths in flow {flow} share vertex {vertex}")]
    NotParallel { flow: usize, vertex: usize },
    #[error("epsilon target {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("min path length {min} exceeds max {max}")]
    BadLengthBounds { min: usize, max: usize },
    #[error("centered paths need an odd window length, got {0}")]
    EvenWindow(usize),
    #[error("no center vertices given")]
    NoCenters,
    #[error("flow file: {0}")]
    File(String),
}

/// Pairwise vertex-disjoint, non-extendable paths. Paths are kept sorted by
/// their first vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelFlow {
    paths: Vec<Path>,
}

impl ParallelFlow {
    /// Validating constructor: rejects vertex reuse across paths.
    pub fn new(paths: Vec<Path>) -> Result<Self, FlowError> {
        let mut seen = HashSet::new();
        for p in &paths {
            let distinct = p.num_vertices();
            for &v in &p.vertices()[..distinct] {
                if !seen.insert(v) {
                    return Err(FlowError::NotParallel { flow: 0, vertex: v });
                }
            }
        }
        Ok(Self::unchecked(paths))
    }

    /// Sorts but does not validate; used when loading files that the
    /// validator will inspect afterwards.
    pub fn unchecked(mut paths: Vec<Path>) -> Self {
        paths.sort_by_key(|p| (p.first(), p.vertices().to_vec()));
        ParallelFlow { paths }
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn covered_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.paths.iter().flat_map(|p| p.edges())
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.paths.iter().any(|p| p.contains(v))
    }
}

/// An ordered collection of flows together with the coverage fraction it
/// achieves on its graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCover {
    flows: Vec<ParallelFlow>,
    epsilon: f64,
    graph_ref: String,
}

impl FlowCover {
    /// Builds a cover and measures its coverage against `g`.
    pub fn new(g: &Graph, flows: Vec<ParallelFlow>, graph_ref: impl Into<String>) -> Self {
        let epsilon = measure_epsilon(g, &flows);
        FlowCover {
            flows,
            epsilon,
            graph_ref: graph_ref.into(),
        }
    }

    /// Trusts the given epsilon; used when deserializing. The validator
    /// re-measures.
    pub fn from_parts(flows: Vec<ParallelFlow>, epsilon: f64, graph_ref: impl Into<String>) -> Self {
        FlowCover {
            flows,
            epsilon,
            graph_ref: graph_ref.into(),
        }
    }

    pub fn flows(&self) -> &[ParallelFlow] {
        &self.flows
    }

    pub fn num_flows(&self) -> usize {
        self.flows.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn graph_ref(&self) -> &str {
        &self.graph_ref
    }

    pub fn set_graph_ref(&mut self, name: impl Into<String>) {
        self.graph_ref = name.into();
    }

    /// Distinct graph edges covered by any path of any flow.
    pub fn covered_edge_set(&self, g: &Graph) -> HashSet<(usize, usize)> {
        covered_edges(g, &self.flows)
    }
}

fn covered_edges(g: &Graph, flows: &[ParallelFlow]) -> HashSet<(usize, usize)> {
    flows
        .iter()
        .flat_map(|f| f.covered_edges())
        .filter(|&(u, v)| g.has_edge(u, v))
        .collect()
}

/// Fraction of `g`'s edges covered; 1.0 for edgeless graphs.
pub fn measure_epsilon(g: &Graph, flows: &[ParallelFlow]) -> f64 {
    if g.num_edges() == 0 {
        return 1.0;
    }
    covered_edges(g, flows).len() as f64 / g.num_edges() as f64
}

/// Number of flows tree_decompose needs for maximum degree `d_max`.
pub fn exact_flow_count(d_max: usize) -> usize {
    (d_max + 1) / 2
}

/// Upper bound on the flows the peel strategies emit for a full cover.
pub fn flow_count_bound(d_max: usize) -> usize {
    let k = exact_flow_count(d_max);
    (k + 1) * k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Exact decomposition; requires a tree.
    TreeExact,
    /// Iterated BFS spanning forest peeling.
    BfsPeel,
    /// Iterated DFS spanning forest peeling.
    DfsPeel,
    /// Fixed-length windows around configured centers.
    Centered,
}

/// Options for [`decompose`]. `seed` is recorded alongside results for
/// reproducibility; the built-in strategies are fully deterministic and
/// ignore it.
#[derive(Debug, Clone)]
pub struct DecomposeConfig {
    pub strategy: Strategy,
    pub epsilon_target: f64,
    pub min_path_len: usize,
    pub max_path_len: Option<usize>,
    pub centers: Vec<usize>,
    pub window_len: usize,
    pub seed: u64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            strategy: Strategy::BfsPeel,
            epsilon_target: 1.0,
            min_path_len: 1,
            max_path_len: None,
            centers: Vec::new(),
            window_len: 1,
            seed: 0,
        }
    }
}

impl DecomposeConfig {
    fn check(&self) -> Result<(), FlowError> {
        if !(0.0..=1.0).contains(&self.epsilon_target) {
            return Err(FlowError::EpsilonOutOfRange(self.epsilon_target));
        }
        if let Some(max) = self.max_path_len {
            if self.min_path_len > max {
                return Err(FlowError::BadLengthBounds {
                    min: self.min_path_len,
                    max,
                });
            }
        }
        Ok(())
    }
}

/// Strategy dispatch plus optional length regularization.
pub fn decompose(g: &Graph, cfg: &DecomposeConfig) -> Result<FlowCover, FlowError> {
    cfg.check()?;
    let cover = match cfg.strategy {
        Strategy::TreeExact => tree_decompose(g)?,
        Strategy::BfsPeel => spanning_peel(g, cfg.epsilon_target, false)?,
        Strategy::DfsPeel => spanning_peel(g, cfg.epsilon_target, true)?,
        Strategy::Centered => centered_paths(g, &cfg.centers, cfg.window_len)?,
    };
    if cfg.min_path_len > 1 || cfg.max_path_len.is_some() {
        Ok(regularize(g, &cover, cfg.min_path_len, cfg.max_path_len))
    } else {
        Ok(cover)
    }
}
