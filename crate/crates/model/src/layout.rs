//! Fixed path layout derived from a flow cover.

use gfcn_flow::FlowCover;
use gfcn_graph::Graph;

use crate::ModelError;

/// One path of the cover as the network sees it: a plain vertex
/// sequence. Closed loops are laid out linearly over their distinct
/// vertices, so the wrap-around edge does not feed the convolution.
#[derive(Debug, Clone)]
pub struct PathLayout {
    pub flow: usize,
    pub vertices: Vec<usize>,
}

/// The flattened view of a cover: every path of every flow, in flow
/// order then path order. All position bookkeeping in the forward pass
/// is relative to this layout.
#[derive(Debug, Clone)]
pub struct Layout {
    paths: Vec<PathLayout>,
    num_vertices: usize,
    covered: Vec<bool>,
}

impl Layout {
    pub fn new(graph: &Graph, cover: &FlowCover) -> Result<Self, ModelError> {
        let mut paths = Vec::new();
        let mut covered = vec![false; graph.num_vertices()];
        for (flow_idx, flow) in cover.flows().iter().enumerate() {
            for path in flow.paths() {
                path.check_in(graph)?;
                let mut vertices = path.vertices().to_vec();
                if path.is_closed_loop() {
                    vertices.pop();
                }
                for &v in &vertices {
                    covered[v] = true;
                }
                paths.push(PathLayout {
                    flow: flow_idx,
                    vertices,
                });
            }
        }
        if paths.is_empty() {
            return Err(ModelError::BadInput(
                "the cover contains no paths".to_string(),
            ));
        }
        Ok(Layout {
            paths,
            num_vertices: graph.num_vertices(),
            covered,
        })
    }

    pub fn paths(&self) -> &[PathLayout] {
        &self.paths
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Total number of positions across all paths.
    pub fn num_positions(&self) -> usize {
        self.paths.iter().map(|p| p.vertices.len()).sum()
    }

    pub fn is_covered(&self, vertex: usize) -> bool {
        self.covered[vertex]
    }
}
