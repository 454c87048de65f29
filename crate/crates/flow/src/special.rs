//! Fixed decompositions for image lattices and window-based covers around
//! chosen center vertices.

use crate::{FlowCover, FlowError, ParallelFlow};
use gfcn_graph::{Graph, Path};
use std::collections::HashSet;
use std::collections::VecDeque;

/// Row, column, and (optionally) diagonal flows of an `h x w` lattice.
/// Corner diagonals contribute single-vertex paths so that every flow
/// assigns each pixel a position. Covers all edges exactly once per
/// direction.
pub fn lattice_flows(h: usize, w: usize, diagonals: bool) -> (Graph, FlowCover) {
    let g = Graph::lattice(h, w, diagonals);
    let id = |r: usize, c: usize| r * w + c;

    let mut flows: Vec<Vec<Vec<usize>>> = Vec::new();
    flows.push((0..h).map(|r| (0..w).map(|c| id(r, c)).collect()).collect());
    flows.push((0..w).map(|c| (0..h).map(|r| id(r, c)).collect()).collect());
    if diagonals {
        let mut se = Vec::new();
        for d in -(w as isize - 1)..=(h as isize - 1) {
            let mut r = d.max(0) as usize;
            let mut c = (r as isize - d) as usize;
            let mut seq = Vec::new();
            while r < h && c < w {
                seq.push(id(r, c));
                r += 1;
                c += 1;
            }
            se.push(seq);
        }
        flows.push(se);
        let mut sw = Vec::new();
        for s in 0..h + w - 1 {
            let mut r = s.saturating_sub(w - 1);
            let mut seq = Vec::new();
            while r < h && s >= r {
                let c = s - r;
                if c < w {
                    seq.push(id(r, c));
                }
                r += 1;
            }
            sw.push(seq);
        }
        flows.push(sw);
    }

    let flows = flows
        .into_iter()
        .map(|seqs| {
            let paths = seqs
                .into_iter()
                .filter(|s| !s.is_empty())
                .map(|s| Path::new(s).expect("lattice lines are valid paths"))
                .collect();
            ParallelFlow::new(paths).expect("lattice lines are disjoint")
        })
        .collect();
    let cover = FlowCover::new(&g, flows, format!("lattice-{}x{}", h, w));
    debug_assert_eq!(cover.epsilon(), 1.0);
    (g, cover)
}

/// Windows of odd length `window` grown around each center: first away from
/// the front, then away from the back, preferring vertices not yet used by
/// earlier windows, then lowest id. Windows are packed into flows first-fit
/// by vertex-disjointness.
pub fn centered_paths(
    g: &Graph,
    centers: &[usize],
    window: usize,
) -> Result<FlowCover, FlowError> {
    if centers.is_empty() {
        return Err(FlowError::NoCenters);
    }
    if window % 2 == 0 {
        return Err(FlowError::EvenWindow(window));
    }
    for &c in centers {
        g.check_vertex(c)?;
    }
    let mut cs = centers.to_vec();
    cs.sort_unstable();
    cs.dedup();

    let half = window / 2;
    let mut used = vec![false; g.num_vertices()];
    let mut windows: Vec<Vec<usize>> = Vec::new();
    for &c in &cs {
        let mut seq = VecDeque::from([c]);
        let mut in_path: HashSet<usize> = HashSet::from([c]);
        for front in [true, false] {
            for _ in 0..half {
                let end = if front {
                    *seq.front().unwrap()
                } else {
                    *seq.back().unwrap()
                };
                let free = || g.neighbors(end).filter(|&u| !in_path.contains(&u));
                let pick = free().find(|&u| !used[u]).or_else(|| free().next());
                match pick {
                    Some(u) => {
                        if front {
                            seq.push_front(u);
                        } else {
                            seq.push_back(u);
                        }
                        in_path.insert(u);
                    }
                    None => break,
                }
            }
        }
        for &v in &seq {
            used[v] = true;
        }
        windows.push(seq.into());
    }

    let mut flows: Vec<(Vec<Path>, HashSet<usize>)> = Vec::new();
    for wseq in windows {
        let path = Path::new(wseq).expect("window is a valid path");
        let verts: Vec<usize> = path.vertices().to_vec();
        let slot = flows
            .iter_mut()
            .find(|(_, occ)| verts.iter().all(|v| !occ.contains(v)));
        match slot {
            Some((paths, occ)) => {
                occ.extend(verts.iter().copied());
                paths.push(path);
            }
            None => {
                flows.push((vec![path], verts.into_iter().collect()));
            }
        }
    }
    let flows = flows
        .into_iter()
        .map(|(paths, _)| ParallelFlow::new(paths).expect("first-fit keeps flows disjoint"))
        .collect();
    Ok(FlowCover::new(g, flows, ""))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_cover;

    #[test]
    fn lattice_2x2_plain() {
        let (g, cover) = lattice_flows(2, 2, false);
        assert_eq!(cover.num_flows(), 2);
        assert_eq!(cover.epsilon(), 1.0);
        for f in cover.flows() {
            assert_eq!(f.num_paths(), 2);
            for p in f.paths() {
                assert_eq!(p.num_vertices(), 2);
            }
        }
        assert!(validate_cover(&g, &cover).violations.is_empty());
    }

    #[test]
    fn lattice_with_diagonals() {
        let (g, cover) = lattice_flows(3, 4, true);
        assert_eq!(cover.num_flows(), 4);
        assert_eq!(cover.epsilon(), 1.0);
        let report = validate_cover(&g, &cover);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        // diagonal flows assign every vertex a position
        for f in cover.flows() {
            for v in 0..g.num_vertices() {
                assert!(f.contains_vertex(v), "vertex {v} missing from a flow");
            }
        }
    }

    #[test]
    fn lattice_28x28_has_four_flows() {
        let (g, cover) = lattice_flows(28, 28, true);
        assert_eq!(cover.num_flows(), 4);
        assert_eq!(cover.epsilon(), 1.0);
        assert_eq!(g.num_vertices(), 784);
    }

    #[test]
    fn centered_windows_on_path_graph() {
        let g = Graph::from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]).unwrap();
        let cover = centered_paths(&g, &[3], 5).unwrap();
        assert_eq!(cover.num_flows(), 1);
        let p = &cover.flows()[0].paths()[0];
        assert_eq!(p.num_vertices(), 5);
        assert_eq!(p.vertices()[2], 3);
    }

    #[test]
    fn centered_isolated_vertex() {
        let mut g = Graph::new(3);
        g.add_edge(0, 1).unwrap();
        let cover = centered_paths(&g, &[2], 3).unwrap();
        assert_eq!(cover.flows()[0].paths()[0].vertices(), &[2]);
        assert_eq!(cover.epsilon(), 0.0);
    }

    #[test]
    fn centered_overlapping_windows_split_into_flows() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let cover = centered_paths(&g, &[1, 2], 3).unwrap();
        assert_eq!(cover.num_flows(), 2);
        for (i, f) in cover.flows().iter().enumerate() {
            assert!(f.contains_vertex([1, 2][i]));
        }
    }

    #[test]
    fn centered_rejects_bad_input() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(matches!(
            centered_paths(&g, &[], 3),
            Err(FlowError::NoCenters)
        ));
        assert!(matches!(
            centered_paths(&g, &[0], 4),
            Err(FlowError::EvenWindow(4))
        ));
        assert!(centered_paths(&g, &[9], 3).is_err());
    }
}
