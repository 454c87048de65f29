//! Epidemic spreading on graphs and source identification baselines.
//!
//! The simulator runs a susceptible-infected-recovered process with
//! reinfection: recovered vertices can catch the infection again, so an
//! observed snapshot shows a noisy, partial picture of where the
//! epidemic has been. [`jordan_center`] implements the classic
//! distance-based source estimate used as a baseline.

mod dataset;
mod jordan;
mod sim;

pub use dataset::{make_dataset, snapshots_from_jsonl, snapshots_to_jsonl, DatasetConfig};
pub use jordan::{jordan_center, jordan_centers, jordan_scores, top_k, topx_hit};
pub use sim::{simulate, SimParams, Snapshot};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpreadError {
    #[error(transparent)]
    Graph(#[from] gfcn_graph::GraphError),
    #[error("bad parameter: {0}")]
    BadParams(String),
    #[error("vertex {vertex} out of range for a graph on {num_vertices} vertices")]
    BadVertex { vertex: usize, num_vertices: usize },
    #[error("the infected set is empty")]
    EmptyInfected,
    #[error("dataset generation stalled: {0}")]
    Dataset(String),
    #[error("bad snapshot data: {0}")]
    Json(#[from] serde_json::Error),
}
