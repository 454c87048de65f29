//! JSON serialization of flow covers.
//!
//! Layout: `{"graph": <name>, "epsilon": <fraction>, "flows": [[[vid, ...],
//! ...], ...]}` with flows in creation order and paths sorted by first
//! vertex id. Serialization is canonical, so equal covers produce
//! byte-identical files.

use crate::{FlowCover, FlowError, ParallelFlow};
use gfcn_graph::Path;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct FlowFileRepr {
    graph: String,
    epsilon: f64,
    flows: Vec<Vec<Vec<usize>>>,
}

pub fn cover_to_json(cover: &FlowCover) -> String {
    let repr = FlowFileRepr {
        graph: cover.graph_ref().to_string(),
        epsilon: cover.epsilon(),
        flows: cover
            .flows()
            .iter()
            .map(|f| f.paths().iter().map(|p| p.vertices().to_vec()).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&repr).expect("flow cover serializes")
}

/// Parse a flow file. Paths are checked structurally (non-empty, no
/// repeats); adjacency and disjointness against a concrete graph are the
/// validator's job, so damaged covers can still be loaded and reported on.
pub fn cover_from_json(text: &str) -> Result<FlowCover, FlowError> {
    let repr: FlowFileRepr =
        serde_json::from_str(text).map_err(|e| FlowError::File(e.to_string()))?;
    let flows = repr
        .flows
        .into_iter()
        .map(|f| {
            let paths = f
                .into_iter()
                .map(|s| Path::new(s).map_err(FlowError::from))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ParallelFlow::unchecked(paths))
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    Ok(FlowCover::from_parts(flows, repr.epsilon, repr.graph))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_decompose;
    use gfcn_graph::Graph;

    #[test]
    fn round_trip_preserves_everything() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let mut cover = tree_decompose(&g).unwrap();
        cover.set_graph_ref("star");
        let text = cover_to_json(&cover);
        let back = cover_from_json(&text).unwrap();
        assert_eq!(back.graph_ref(), "star");
        assert_eq!(back.epsilon(), cover.epsilon());
        assert_eq!(back.flows(), cover.flows());
        assert_eq!(cover_to_json(&back), text);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(cover_from_json("{").is_err());
        assert!(cover_from_json(r#"{"graph":"g","epsilon":1.0}"#).is_err());
        // repeated vertex inside a path
        let bad = r#"{"graph":"g","epsilon":1.0,"flows":[[[0,1,0]]]}"#;
        assert!(cover_from_json(bad).is_err());
        let empty_path = r#"{"graph":"g","epsilon":1.0,"flows":[[[]]]}"#;
        assert!(cover_from_json(empty_path).is_err());
    }

    #[test]
    fn loads_unsorted_paths_canonically() {
        let text = r#"{"graph":"g","epsilon":0.5,"flows":[[[4,5],[0,1]]]}"#;
        let cover = cover_from_json(text).unwrap();
        let firsts: Vec<_> = cover.flows()[0].paths().iter().map(|p| p.first()).collect();
        assert_eq!(firsts, vec![0, 4]);
        assert_eq!(cover.epsilon(), 0.5);
    }
}
