//! The single-edge cover used by compiled filters.

use gfcn_flow::{FlowCover, ParallelFlow};
use gfcn_graph::{Graph, Path};

/// Split every edge into its own two-vertex path and group the paths
/// into matchings by greedy edge coloring. On such a cover a vertex
/// appears exactly once per incident edge, which is what makes
/// degree-based shift operators compile exactly.
pub fn matching_cover(graph: &Graph) -> FlowCover {
    let mut color_of = Vec::with_capacity(graph.num_edges());
    let mut used_at: Vec<Vec<bool>> = vec![Vec::new(); graph.num_vertices()];
    let mut num_colors = 0;
    for &(u, v, _) in graph.edges() {
        let mut color = 0;
        while used_at[u].get(color).copied().unwrap_or(false)
            || used_at[v].get(color).copied().unwrap_or(false)
        {
            color += 1;
        }
        for w in [u, v] {
            if used_at[w].len() <= color {
                used_at[w].resize(color + 1, false);
            }
            used_at[w][color] = true;
        }
        color_of.push(color);
        num_colors = num_colors.max(color + 1);
    }

    let mut classes: Vec<Vec<Path>> = vec![Vec::new(); num_colors];
    for (&(u, v, _), &color) in graph.edges().iter().zip(&color_of) {
        classes[color].push(Path::new(vec![u, v]).expect("two distinct endpoints"));
    }
    let flows = classes
        .into_iter()
        .map(|paths| ParallelFlow::new(paths).expect("matchings are vertex-disjoint"))
        .collect();
    FlowCover::new(graph, flows, "matching")
}
