//! Exact tree decomposition.
//!
//! With the full vertex set as boundary, a single edge-coloring pass
//! suffices: at every vertex the incident edges are paired and each pair
//! receives one color, so a color class touches a vertex at most twice and
//! forms vertex-disjoint paths. A vertex of degree q needs `ceil(q / 2)`
//! groups, so `floor((d_max + 1) / 2)` colors cover the whole tree.
//!
//! With a restricted boundary (every vertex of non-maximum degree must be
//! in it), path ends may only rest on boundary vertices. The tree is first
//! embedded into one whose internal vertices all have degree exactly
//! `d_max` by attaching phantom leaves; the embedded tree is decomposed so
//! that paths end only at leaves, and trimming the phantom ends leaves
//! paths ending at original leaves or at attachment vertices, all of which
//! are boundary by precondition.

use crate::{exact_flow_count, FlowCover, FlowError, ParallelFlow};
use gfcn_graph::{Graph, Path};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// Decompose a tree into exactly `floor((d_max + 1) / 2)` parallel flows
/// that cover every edge. The graph's boundary must contain every vertex
/// of non-maximum degree; the default full boundary always qualifies.
pub fn tree_decompose(g: &Graph) -> Result<FlowCover, FlowError> {
    if g.num_vertices() == 0 {
        return Ok(FlowCover::new(g, vec![], ""));
    }
    if !g.is_tree() {
        return Err(FlowError::NotATree(format!(
            "graph with {} vertices and {} edges is not a connected tree",
            g.num_vertices(),
            g.num_edges()
        )));
    }
    let d = g.max_degree();
    for v in 0..g.num_vertices() {
        if g.degree(v) < d && !g.in_boundary(v) {
            return Err(FlowError::BoundaryInsufficient {
                vertex: v,
                degree: g.degree(v),
                max_degree: d,
            });
        }
    }
    if d == 0 {
        return Ok(FlowCover::new(g, vec![], ""));
    }

    let adj: Vec<Vec<usize>> = (0..g.num_vertices())
        .map(|v| g.neighbors(v).collect())
        .collect();
    let comp: Vec<usize> = (0..g.num_vertices()).collect();
    let raw = if g.has_full_boundary() {
        color_component(&adj, &comp)
    } else {
        strict_decompose(g, &adj, d)?
    };

    let k = exact_flow_count(d);
    assert_eq!(raw.len(), k, "tree decomposition must emit exactly k flows");
    let flows = raw
        .into_iter()
        .map(|seqs| {
            let paths = seqs
                .into_iter()
                .map(|s| Path::new(s).expect("decomposition emits structurally valid paths"))
                .collect();
            ParallelFlow::new(paths).expect("decomposition emits vertex-disjoint paths")
        })
        .collect();
    let cover = FlowCover::new(g, flows, "");
    debug_assert_eq!(cover.epsilon(), 1.0);
    Ok(cover)
}

fn edge_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn bfs_order(adj: &[Vec<usize>], root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut parent = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut order = Vec::new();
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some(v);
                queue.push_back(u);
            }
        }
    }
    (order, parent)
}

/// Pair-coloring decomposition of one tree component. Valid whenever every
/// path may end anywhere (full boundary), and also for trees whose
/// odd-degree vertices are all in the boundary, since path ends appear only
/// where a vertex has an unpaired incident edge.
pub(crate) fn color_component(adj: &[Vec<usize>], comp: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let d = comp.iter().map(|&v| adj[v].len()).max().unwrap_or(0);
    if d == 0 {
        return Vec::new();
    }
    let k = exact_flow_count(d);
    let root = comp
        .iter()
        .copied()
        .filter(|&v| adj[v].len() == d)
        .min()
        .expect("component has a maximum-degree vertex");
    let (order, parent) = bfs_order(adj, root);

    let mut color: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &v in &order {
        let pcolor = parent[v].map(|p| color[&edge_key(v, p)]);
        let children: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|&u| Some(u) != parent[v])
            .collect();
        let mut rest = &children[..];
        if let Some(pc) = pcolor {
            // an odd child count pairs one child with the parent edge,
            // keeping this vertex interior in that color
            if children.len() % 2 == 1 {
                color.insert(edge_key(v, children[0]), pc);
                rest = &children[1..];
            }
        }
        let mut cursor = 0;
        for group in rest.chunks(2) {
            if pcolor == Some(cursor) {
                cursor += 1;
            }
            let c = cursor;
            cursor += 1;
            debug_assert!(c < k, "pairing never needs more than k colors");
            for &u in group {
                color.insert(edge_key(v, u), c);
            }
        }
    }

    collect_color_paths(&color, k)
}

/// Turn each color class (vertex degrees <= 2) into its paths.
fn collect_color_paths(
    color: &BTreeMap<(usize, usize), usize>,
    k: usize,
) -> Vec<Vec<Vec<usize>>> {
    let mut cadj: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); k];
    for (&(u, v), &c) in color {
        cadj[c].entry(u).or_default().push(v);
        cadj[c].entry(v).or_default().push(u);
    }
    let mut flows = vec![Vec::new(); k];
    for (c, amap) in cadj.iter().enumerate() {
        debug_assert!(amap.values().all(|l| l.len() <= 2));
        let mut visited: HashSet<usize> = HashSet::new();
        for (&start, nbrs) in amap {
            if nbrs.len() != 1 || visited.contains(&start) {
                continue;
            }
            let mut seq = vec![start];
            visited.insert(start);
            let mut prev = None;
            let mut cur = start;
            while let Some(&next) = amap[&cur].iter().find(|&&u| Some(u) != prev) {
                seq.push(next);
                visited.insert(next);
                prev = Some(cur);
                cur = next;
            }
            flows[c].push(seq);
        }
    }
    flows
}

/// Boundary-restricted decomposition via embedding into a tree whose
/// internal vertices all have degree `d`.
fn strict_decompose(
    g: &Graph,
    adj: &[Vec<usize>],
    d: usize,
) -> Result<Vec<Vec<Vec<usize>>>, FlowError> {
    let n = g.num_vertices();
    if d == 1 {
        // single edge; both endpoints must be able to end a path
        let (u, v, _) = g.edges()[0];
        for x in [u, v] {
            if !g.in_boundary(x) {
                return Err(FlowError::BoundaryInsufficient {
                    vertex: x,
                    degree: 1,
                    max_degree: 1,
                });
            }
        }
        return Ok(vec![vec![vec![u, v]]]);
    }

    // attach phantom leaves so every internal vertex reaches degree d
    let mut eadj: Vec<Vec<usize>> = adj.to_vec();
    for v in 0..n {
        let dv = adj[v].len();
        if dv > 1 && dv < d {
            for _ in 0..d - dv {
                let ph = eadj.len();
                eadj[v].push(ph);
                eadj.push(vec![v]);
            }
        }
    }

    let comp: Vec<usize> = (0..eadj.len()).collect();
    let flows = decompose_regular(&eadj, &comp, d);

    // trim phantom ends; every flow keeps at least one real edge because
    // each flow routes through every internal vertex, whose edges are real
    let mut out = Vec::with_capacity(flows.len());
    for flow in flows {
        let mut kept = Vec::new();
        for seq in flow {
            let start = seq.iter().position(|&v| v < n);
            let end = seq.iter().rposition(|&v| v < n);
            if let (Some(s), Some(e)) = (start, end) {
                if e > s {
                    let trimmed = seq[s..=e].to_vec();
                    debug_assert!(trimmed.iter().all(|&v| v < n), "phantoms only at ends");
                    kept.push(trimmed);
                }
            }
        }
        assert!(!kept.is_empty(), "trimming never empties a flow");
        for seq in &kept {
            for &end in [seq.first().unwrap(), seq.last().unwrap()].iter() {
                debug_assert!(g.in_boundary(*end), "trimmed ends are boundary vertices");
            }
        }
        out.push(kept);
    }
    Ok(out)
}

/// Decompose a tree whose vertices all have degree 1 or exactly `d`, with
/// every path ending at a leaf. Emits `floor((d + 1) / 2)` flows.
fn decompose_regular(adj: &[Vec<usize>], comp: &[usize], d: usize) -> Vec<Vec<Vec<usize>>> {
    debug_assert!(comp
        .iter()
        .all(|&v| adj[v].len() == 1 || adj[v].len() == d));
    match d {
        0 => Vec::new(),
        1 => {
            let u = comp[0];
            let v = adj[u][0];
            vec![vec![vec![u.min(v), u.max(v)]]]
        }
        2 => {
            let start = comp
                .iter()
                .copied()
                .filter(|&v| adj[v].len() == 1)
                .min()
                .expect("path component has leaves");
            let mut seq = vec![start];
            let mut prev = None;
            let mut cur = start;
            while let Some(&next) = adj[cur].iter().find(|&&u| Some(u) != prev) {
                seq.push(next);
                prev = Some(cur);
                cur = next;
            }
            vec![vec![seq]]
        }
        3 => regular3(adj, comp),
        _ if d % 2 == 0 => color_component(adj, comp),
        _ => {
            // saturate every degree-d vertex with one flow, then recurse on
            // the residual, which is regular with internal degree d - 2
            let peel = saturating_peel(adj, comp, d);
            let mut removed: HashSet<(usize, usize)> = HashSet::new();
            for seq in &peel {
                for w in seq.windows(2) {
                    removed.insert(edge_key(w[0], w[1]));
                }
            }
            let mut radj = vec![Vec::new(); adj.len()];
            for &v in comp {
                radj[v] = adj[v]
                    .iter()
                    .copied()
                    .filter(|&u| !removed.contains(&edge_key(v, u)))
                    .collect();
            }
            let mut seen = vec![false; adj.len()];
            let mut rcomps: Vec<Vec<usize>> = Vec::new();
            for &s in comp {
                if seen[s] || radj[s].is_empty() {
                    continue;
                }
                let mut rc = vec![s];
                seen[s] = true;
                let mut queue = VecDeque::from([s]);
                while let Some(v) = queue.pop_front() {
                    for &u in &radj[v] {
                        if !seen[u] {
                            seen[u] = true;
                            rc.push(u);
                            queue.push_back(u);
                        }
                    }
                }
                rc.sort_unstable();
                rcomps.push(rc);
            }
            let k_sub = exact_flow_count(d - 2);
            let mut sub: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k_sub];
            for rc in &rcomps {
                let fl = decompose_regular(&radj, rc, d - 2);
                debug_assert_eq!(fl.len(), k_sub);
                for (i, f) in fl.into_iter().enumerate() {
                    sub[i].extend(f);
                }
            }
            let mut flows = Vec::with_capacity(k_sub + 1);
            flows.push(peel);
            flows.extend(sub);
            flows
        }
    }
}

/// One flow that visits every degree-`d` vertex as an interior vertex:
/// process them top-down from a leaf root; each still-uncovered one sends a
/// path down its two smallest child subtrees. Chains never collide because
/// an uncovered vertex has an untouched subtree.
fn saturating_peel(adj: &[Vec<usize>], comp: &[usize], d: usize) -> Vec<Vec<usize>> {
    let root = comp
        .iter()
        .copied()
        .filter(|&v| adj[v].len() == 1)
        .min()
        .expect("tree has leaves");
    let (order, parent) = bfs_order(adj, root);
    let mut covered: HashSet<usize> = HashSet::new();
    let mut paths = Vec::new();
    for &v in &order {
        if adj[v].len() != d || covered.contains(&v) {
            continue;
        }
        let children: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|&u| Some(u) != parent[v])
            .collect();
        let left = descend(adj, v, children[0]);
        let right = descend(adj, v, children[1]);
        let mut seq: Vec<usize> = left.into_iter().rev().collect();
        seq.push(v);
        seq.extend(right);
        for &x in &seq {
            let fresh = covered.insert(x);
            debug_assert!(fresh, "saturating chains never collide");
        }
        paths.push(seq);
    }
    paths
}

/// Walk from `start` away from `from`, always taking the smallest child,
/// until a leaf.
fn descend(adj: &[Vec<usize>], from: usize, start: usize) -> Vec<usize> {
    let mut chain = vec![start];
    let mut prev = from;
    let mut cur = start;
    while let Some(&next) = adj[cur].iter().find(|&&u| u != prev) {
        chain.push(next);
        prev = cur;
        cur = next;
    }
    chain
}

/// Two flows for a tree with internal degree exactly 3: repeatedly detach
/// two leaf siblings from a deepest internal vertex, solve the 4-vertex
/// star, then reattach. Reattachment may reuse one edge in both flows,
/// which is allowed: flows must be internally vertex-disjoint but may
/// overlap each other.
fn regular3(adj: &[Vec<usize>], comp: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let root = comp
        .iter()
        .copied()
        .filter(|&v| adj[v].len() == 1)
        .min()
        .expect("tree has leaves");
    let (order, parent) = bfs_order(adj, root);
    let mut depth = vec![0usize; adj.len()];
    for &v in &order {
        if let Some(p) = parent[v] {
            depth[v] = depth[p] + 1;
        }
    }

    let mut live: BTreeMap<usize, BTreeSet<usize>> = comp
        .iter()
        .map(|&v| (v, adj[v].iter().copied().collect()))
        .collect();
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();

    while live.len() > 4 {
        let mut best: Option<(usize, usize)> = None;
        for (&v, nbrs) in &live {
            if nbrs.len() != 3 {
                continue;
            }
            let leaf_children = nbrs
                .iter()
                .filter(|&&u| Some(u) != parent[v] && live[&u].len() == 1)
                .count();
            if leaf_children >= 2 && best.map_or(true, |(bd, _)| depth[v] > bd) {
                best = Some((depth[v], v));
            }
        }
        let (_, v) = best.expect("a deepest internal vertex has two leaf children");
        let leaves: Vec<usize> = live[&v]
            .iter()
            .copied()
            .filter(|&u| Some(u) != parent[v] && live[&u].len() == 1)
            .collect();
        let (l1, l2) = (leaves[0], leaves[1]);
        for l in [l1, l2] {
            live.get_mut(&v).unwrap().remove(&l);
            live.remove(&l);
        }
        stack.push((v, l1, l2));
    }

    // base: a 4-vertex star; both flows pass through the hub and share one
    // hub edge
    let hub = *live
        .iter()
        .find(|(_, nbrs)| nbrs.len() == 3)
        .expect("4-vertex base is a star")
        .0;
    let leaves: Vec<usize> = live[&hub].iter().copied().collect();
    let (b1, b2, b3) = (leaves[0], leaves[1], leaves[2]);
    let mut f1: Vec<VecDeque<usize>> = vec![VecDeque::from([b1, hub, b2])];
    let mut f2: Vec<VecDeque<usize>> = vec![VecDeque::from([b3, hub, b1])];

    while let Some((v, l1, l2)) = stack.pop() {
        let extend = |paths: &mut Vec<VecDeque<usize>>, at: usize, leaf: usize| -> bool {
            for p in paths.iter_mut() {
                if *p.front().unwrap() == at {
                    p.push_front(leaf);
                    return true;
                }
                if *p.back().unwrap() == at {
                    p.push_back(leaf);
                    return true;
                }
            }
            false
        };
        if extend(&mut f1, v, l1) {
            if !extend(&mut f2, v, l2) {
                f2.push(VecDeque::from([l1, v, l2]));
            }
        } else if extend(&mut f2, v, l1) {
            f1.push(VecDeque::from([l1, v, l2]));
        } else {
            unreachable!("every leaf ends a path in at least one flow");
        }
    }

    vec![
        f1.into_iter().map(Vec::from).collect(),
        f2.into_iter().map(Vec::from).collect(),
    ]
}
