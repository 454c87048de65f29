//! Path length normalization: drop short paths, split long ones.

use crate::{FlowCover, ParallelFlow};
use gfcn_graph::{Graph, Path};

/// Enforce `min_len <= path length <= max_len` (in vertices). Long paths
/// are split into consecutive disjoint segments, losing the edge between
/// segments; loops are unrolled before splitting. Short paths (including
/// short split remainders) are dropped, and flows left empty disappear.
/// Coverage is re-measured on the result.
pub fn regularize(
    g: &Graph,
    cover: &FlowCover,
    min_len: usize,
    max_len: Option<usize>,
) -> FlowCover {
    let mut flows = Vec::new();
    for f in cover.flows() {
        let mut paths: Vec<Path> = Vec::new();
        for p in f.paths() {
            let too_long = max_len.map_or(false, |m| p.num_vertices() > m);
            if !too_long {
                if p.num_vertices() >= min_len {
                    paths.push(p.clone());
                }
                continue;
            }
            let m = max_len.unwrap();
            let body = &p.vertices()[..p.num_vertices()];
            for seg in body.chunks(m) {
                if seg.len() >= min_len {
                    paths.push(Path::new(seg.to_vec()).expect("segment of a valid path"));
                }
            }
        }
        if !paths.is_empty() {
            flows.push(ParallelFlow::new(paths).expect("segments of disjoint paths stay disjoint"));
        }
    }
    FlowCover::new(g, flows, cover.graph_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gfcn_graph::Graph;

    fn chain(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn cover_of(g: &Graph, seqs: Vec<Vec<Vec<usize>>>) -> FlowCover {
        let flows = seqs
            .into_iter()
            .map(|f| {
                ParallelFlow::new(f.into_iter().map(|s| Path::new(s).unwrap()).collect()).unwrap()
            })
            .collect();
        FlowCover::new(g, flows, "t")
    }

    #[test]
    fn splits_long_paths() {
        let g = chain(7);
        let cover = cover_of(&g, vec![vec![vec![0, 1, 2, 3, 4, 5, 6]]]);
        let reg = regularize(&g, &cover, 1, Some(3));
        let paths = reg.flows()[0].paths();
        assert_eq!(paths.len(), 3);
        assert_eq!(paths[0].vertices(), &[0, 1, 2]);
        assert_eq!(paths[1].vertices(), &[3, 4, 5]);
        assert_eq!(paths[2].vertices(), &[6]);
        // two cut edges lost
        assert!((reg.epsilon() - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn drops_short_paths_and_empty_flows() {
        let g = chain(5);
        let cover = cover_of(&g, vec![vec![vec![0, 1, 2, 3]], vec![vec![4]]]);
        let reg = regularize(&g, &cover, 2, None);
        assert_eq!(reg.num_flows(), 1);
        assert_eq!(reg.flows()[0].paths()[0].vertices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn split_then_drop_remainder() {
        let g = chain(7);
        let cover = cover_of(&g, vec![vec![vec![0, 1, 2, 3, 4, 5, 6]]]);
        let reg = regularize(&g, &cover, 2, Some(3));
        assert_eq!(reg.flows()[0].num_paths(), 2);
    }

    #[test]
    fn unrolls_loops() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let cover = cover_of(&g, vec![vec![vec![0, 1, 2, 3, 0]]]);
        let reg = regularize(&g, &cover, 1, Some(2));
        let paths = reg.flows()[0].paths();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].vertices(), &[0, 1]);
        assert_eq!(paths[1].vertices(), &[2, 3]);
    }

    #[test]
    fn identity_when_unconstrained() {
        let g = chain(4);
        let cover = cover_of(&g, vec![vec![vec![0, 1, 2, 3]]]);
        let reg = regularize(&g, &cover, 1, None);
        assert_eq!(reg.flows(), cover.flows());
        assert_eq!(reg.epsilon(), cover.epsilon());
    }
}
