//! Spanning-forest peeling for arbitrary graphs.
//!
//! Each round extracts a spanning forest of the still-uncovered edges,
//! decomposes every forest tree exactly, and removes the forest. A vertex
//! loses at least one incident edge per round, so the residual maximum
//! degree drops by one each time and the total flow count is at most
//! `sum_{j=1..d_max} floor((j + 1) / 2) <= (k + 1) * k`.

use crate::tree::color_component;
use crate::{FlowCover, FlowError, ParallelFlow};
use gfcn_graph::{Graph, Path};
use std::collections::{BTreeSet, VecDeque};

pub fn bfs_peel(g: &Graph, epsilon_target: f64) -> Result<FlowCover, FlowError> {
    spanning_peel(g, epsilon_target, false)
}

pub fn dfs_peel(g: &Graph, epsilon_target: f64) -> Result<FlowCover, FlowError> {
    spanning_peel(g, epsilon_target, true)
}

/// Peel spanning forests (breadth-first or depth-first) until at least an
/// `epsilon_target` fraction of the edges is covered. Isolated vertices are
/// ignored; an edgeless graph yields an empty cover.
pub fn spanning_peel(g: &Graph, epsilon_target: f64, depth_first: bool) -> Result<FlowCover, FlowError> {
    if !(0.0..=1.0).contains(&epsilon_target) {
        return Err(FlowError::EpsilonOutOfRange(epsilon_target));
    }
    let n = g.num_vertices();
    let total = g.num_edges();
    if total == 0 {
        return Ok(FlowCover::new(g, vec![], ""));
    }
    let required = (((epsilon_target * total as f64) - 1e-9).ceil()).max(0.0) as usize;

    let mut live: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut covered = 0usize;
    let mut flows_acc: Vec<ParallelFlow> = Vec::new();

    while covered < required {
        let (forest_adj, comps) = spanning_forest(&live, depth_first);

        let mut round: Vec<Vec<Vec<usize>>> = Vec::new();
        for comp in &comps {
            for (i, f) in color_component(&forest_adj, comp).into_iter().enumerate() {
                if round.len() <= i {
                    round.push(Vec::new());
                }
                round[i].extend(f);
            }
        }
        for seqs in round {
            let paths = seqs
                .into_iter()
                .map(|s| Path::new(s).expect("forest paths are valid"))
                .collect();
            flows_acc.push(ParallelFlow::new(paths).expect("forest paths are disjoint"));
        }

        for (v, nbrs) in forest_adj.iter().enumerate() {
            for &u in nbrs {
                if v < u {
                    live[v].remove(&u);
                    live[u].remove(&v);
                    covered += 1;
                }
            }
        }
    }

    Ok(FlowCover::new(g, flows_acc, ""))
}

/// Spanning forest of the live edges. Per component the root is the vertex
/// of highest remaining degree (lowest id on ties); traversal visits
/// neighbors in ascending order.
fn spanning_forest(
    live: &[BTreeSet<usize>],
    depth_first: bool,
) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = live.len();
    let mut forest_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut comps = Vec::new();
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] || live[s].is_empty() {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in &live[v] {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        let root = comp
            .iter()
            .copied()
            .max_by_key(|&v| (live[v].len(), usize::MAX - v))
            .unwrap();

        let mut visited = vec![false; comp.len()];
        let index = |v: usize| comp.binary_search(&v).unwrap();
        visited[index(root)] = true;
        if depth_first {
            let mut stack: Vec<(usize, usize)> = live[root]
                .iter()
                .rev()
                .map(|&u| (u, root))
                .collect();
            while let Some((v, from)) = stack.pop() {
                if visited[index(v)] {
                    continue;
                }
                visited[index(v)] = true;
                forest_adj[from].push(v);
                forest_adj[v].push(from);
                for &u in live[v].iter().rev() {
                    if !visited[index(u)] {
                        stack.push((u, v));
                    }
                }
            }
        } else {
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &u in &live[v] {
                    if !visited[index(u)] {
                        visited[index(u)] = true;
                        forest_adj[v].push(u);
                        forest_adj[u].push(v);
                        queue.push_back(u);
                    }
                }
            }
        }
        comps.push(comp);
    }
    for list in &mut forest_adj {
        list.sort_unstable();
    }
    (forest_adj, comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{flow_count_bound, validate_cover};

    #[test]
    fn cycle_needs_two_rounds() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let cover = bfs_peel(&g, 1.0).unwrap();
        assert_eq!(cover.epsilon(), 1.0);
        let report = validate_cover(&g, &cover);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!(cover.num_flows() <= flow_count_bound(2));
    }

    #[test]
    fn partial_target_stops_early() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)]).unwrap();
        let full = bfs_peel(&g, 1.0).unwrap();
        let half = bfs_peel(&g, 0.5).unwrap();
        assert!(half.num_flows() <= full.num_flows());
        assert!(half.epsilon() >= 0.5);
        assert_eq!(full.epsilon(), 1.0);
    }

    #[test]
    fn empty_and_edgeless() {
        let g = Graph::new(0);
        assert_eq!(bfs_peel(&g, 1.0).unwrap().num_flows(), 0);
        let g = Graph::new(5);
        let cover = bfs_peel(&g, 1.0).unwrap();
        assert_eq!(cover.num_flows(), 0);
        assert_eq!(cover.epsilon(), 1.0);
    }

    #[test]
    fn dfs_variant_also_covers() {
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4)]).unwrap();
        let cover = dfs_peel(&g, 1.0).unwrap();
        assert_eq!(cover.epsilon(), 1.0);
        let report = validate_cover(&g, &cover);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(matches!(
            bfs_peel(&g, 1.2),
            Err(FlowError::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn deterministic() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3), (1, 4)]).unwrap();
        let a = bfs_peel(&g, 1.0).unwrap();
        let b = bfs_peel(&g, 1.0).unwrap();
        assert_eq!(a, b);
    }
}
