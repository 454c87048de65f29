//! Convolutional networks over flow decompositions.
//!
//! A decomposition turns a graph into a family of vertex-disjoint paths,
//! and [`Gfcn`] runs a 1-D convolutional stack along every path. Fusion
//! layers exchange information between flows by combining all positions
//! that carry the same vertex, so the network sees the graph through
//! several overlaid 1-D views instead of an adjacency matrix.

mod layout;
mod params;
mod forward;
mod spec;
mod train;

pub use forward::Gfcn;
pub use layout::Layout;
pub use params::init_params;
pub use spec::{
    ActKind, FusionMode, HeadSpec, LayerSpec, ModelSpec, PaddingSpec, PoolMode,
};
pub use train::{evaluate, predict, train, Optimizer, Sample, TaskKind, TrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Tensor(#[from] gfcn_tensor::TensorError),
    #[error(transparent)]
    Graph(#[from] gfcn_graph::GraphError),
    #[error("layer {layer}: {detail}")]
    BadLayer { layer: usize, detail: String },
    #[error("skip from {from_layer} to {to_layer}: {detail}")]
    BadSkip {
        from_layer: usize,
        to_layer: usize,
        detail: String,
    },
    #[error("head: {0}")]
    BadHead(String),
    #[error("missing parameter {0}")]
    MissingParam(String),
    #[error("parameter {name}: expected shape {expect:?}, found {got:?}")]
    ParamShape {
        name: String,
        expect: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("input: {0}")]
    BadInput(String),
    #[error("model spec: {0}")]
    BadSpec(String),
}
