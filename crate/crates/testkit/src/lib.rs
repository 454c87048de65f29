//! Seeded graph generators for tests and experiments. Everything here is
//! deterministic in the seed.

use gfcn_graph::Graph;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random labeled tree on `n` vertices where no vertex exceeds degree
/// `degree_cap`. Vertices attach one at a time to a uniformly chosen
/// earlier vertex that still has capacity.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize, degree_cap: usize) -> Graph {
    assert!(degree_cap >= 2 || n <= 2);
    let mut g = Graph::new(n);
    let mut open: Vec<usize> = if n > 0 { vec![0] } else { vec![] };
    let mut deg = vec![0usize; n];
    for v in 1..n {
        let idx = rng.gen_range(0..open.len());
        let u = open[idx];
        g.add_edge(u, v).unwrap();
        deg[u] += 1;
        deg[v] += 1;
        if deg[u] >= degree_cap {
            open.swap_remove(idx);
        }
        if deg[v] < degree_cap {
            open.push(v);
        }
    }
    g
}

/// Erdos-Renyi style random graph, connected components not guaranteed.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// Random connected graph built from a random spanning tree plus extra
/// edges added with probability `extra_p` per non-tree pair.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra_p: f64) -> Graph {
    let mut g = Graph::new(n);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v).unwrap();
    }
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) && rng.gen_bool(extra_p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// Preferential-attachment graph: starts from a star on `m + 1` vertices,
/// then each new vertex attaches to `m` distinct existing vertices sampled
/// proportionally to degree (by drawing from the repeated-endpoint list).
pub fn preferential_attachment(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Graph {
    assert!(n > m && m >= 1);
    let mut g = Graph::new(n);
    let mut endpoints: Vec<usize> = Vec::new();
    for v in 1..=m {
        g.add_edge(0, v).unwrap();
        endpoints.extend([0, v]);
    }
    for v in m + 1..n {
        let mut targets = Vec::with_capacity(m);
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            g.add_edge(t, v).unwrap();
            endpoints.extend([t, v]);
        }
    }
    g
}


/// Decode a Prufer sequence into the labeled tree on `seq.len() + 2`
/// vertices.
pub fn prufer_decode(seq: &[usize]) -> Graph {
    let n = seq.len() + 2;
    let mut deg = vec![1usize; n];
    for &s in seq {
        deg[s] += 1;
    }
    let mut g = Graph::new(n);
    let mut leaf_heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&v| deg[v] == 1)
        .map(std::cmp::Reverse)
        .collect();
    for &s in seq {
        let std::cmp::Reverse(leaf) = leaf_heap.pop().expect("leaf available");
        g.add_edge(leaf, s).expect("prufer edge");
        deg[leaf] -= 1;
        deg[s] -= 1;
        if deg[s] == 1 {
            leaf_heap.push(std::cmp::Reverse(s));
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    debug_assert_eq!(rest.len(), 2);
    g.add_edge(rest[0], rest[1]).expect("final prufer edge");
    g
}

/// Canonical string of an unlabeled tree (centroid-rooted subtree
/// encoding); isomorphic trees map to equal strings.
pub fn tree_canonical_form(g: &Graph) -> String {
    assert!(g.is_tree());
    let n = g.num_vertices();
    if n == 1 {
        return "()".to_string();
    }
    let centroids = tree_centroids(g);
    centroids
        .iter()
        .map(|&c| ahu_encode(g, c, usize::MAX))
        .min()
        .unwrap()
}

fn tree_centroids(g: &Graph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut size = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![usize::MAX; n];
    let mut stack = vec![0usize];
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        order.push(v);
        for u in g.neighbors(v) {
            if !seen[u] {
                seen[u] = true;
                parent[u] = v;
                stack.push(u);
            }
        }
    }
    for &v in order.iter().rev() {
        size[v] = 1 + g.neighbors(v).filter(|&u| parent[u] == v).map(|u| size[u]).sum::<usize>();
    }
    let mut best = Vec::new();
    let mut best_weight = usize::MAX;
    for v in 0..n {
        let mut weight = n - size[v];
        for u in g.neighbors(v) {
            if parent[u] == v {
                weight = weight.max(size[u]);
            }
        }
        if v == 0 {
            weight = g.neighbors(0).map(|u| size[u]).max().unwrap_or(0);
        }
        match weight.cmp(&best_weight) {
            std::cmp::Ordering::Less => {
                best_weight = weight;
                best = vec![v];
            }
            std::cmp::Ordering::Equal => best.push(v),
            std::cmp::Ordering::Greater => {}
        }
    }
    best
}

fn ahu_encode(g: &Graph, v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = g
        .neighbors(v)
        .filter(|&u| u != parent)
        .map(|u| ahu_encode(g, u, v))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

/// All unlabeled trees on `n` vertices, one labeled representative each.
pub fn enumerate_trees(n: usize) -> Vec<Graph> {
    assert!(n >= 2);
    if n == 2 {
        return vec![Graph::from_edges(2, [(0, 1)]).unwrap()];
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut seq = vec![0usize; n - 2];
    loop {
        let g = prufer_decode(&seq);
        if seen.insert(tree_canonical_form(&g)) {
            out.push(g);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == seq.len() {
                return out;
            }
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

/// Does an assignment of the tree's edges to `classes` groups exist where
/// every vertex has at most two incident edges per group? Any cover of all
/// edges by `classes` flows induces such an assignment, so a "no" here is a
/// lower bound on the flow count. Exhaustive backtracking with class
/// symmetry pruning.
pub fn edge_grouping_exists(g: &Graph, classes: usize) -> bool {
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v, _)| (u, v)).collect();
    if edges.is_empty() {
        return true;
    }
    if classes == 0 {
        return false;
    }
    let n = g.num_vertices();
    let mut counts = vec![0u8; n * classes];
    backtrack(&edges, 0, classes, 0, &mut counts, n)
}

fn backtrack(
    edges: &[(usize, usize)],
    i: usize,
    classes: usize,
    max_used: usize,
    counts: &mut [u8],
    n: usize,
) -> bool {
    if i == edges.len() {
        return true;
    }
    let (u, v) = edges[i];
    let limit = classes.min(max_used + 1);
    for c in 0..limit {
        let (cu, cv) = (c * n + u, c * n + v);
        if counts[cu] < 2 && counts[cv] < 2 {
            counts[cu] += 1;
            counts[cv] += 1;
            if backtrack(edges, i + 1, classes, max_used.max(c + 1), counts, n) {
                return true;
            }
            counts[cu] -= 1;
            counts[cv] -= 1;
        }
    }
    false
}

#[cfg(test)]
mod enumeration_tests {
    use super::*;

    #[test]
    fn prufer_decode_examples() {
        let g = prufer_decode(&[3, 3, 3]);
        assert!(g.is_tree());
        assert_eq!(g.degree(3), 4);
        let g = prufer_decode(&[0, 1, 2]);
        assert!(g.is_tree());
    }

    #[test]
    fn unlabeled_tree_counts() {
        // known counts of unlabeled trees
        assert_eq!(enumerate_trees(2).len(), 1);
        assert_eq!(enumerate_trees(3).len(), 1);
        assert_eq!(enumerate_trees(4).len(), 2);
        assert_eq!(enumerate_trees(5).len(), 3);
        assert_eq!(enumerate_trees(6).len(), 6);
        assert_eq!(enumerate_trees(7).len(), 11);
        assert_eq!(enumerate_trees(8).len(), 23);
    }

    #[test]
    fn canonical_form_ignores_labels() {
        let a = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = Graph::from_edges(4, [(3, 2), (2, 0), (0, 1)]).unwrap();
        assert_eq!(tree_canonical_form(&a), tree_canonical_form(&b));
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_ne!(tree_canonical_form(&a), tree_canonical_form(&star));
    }

    #[test]
    fn grouping_oracle_small_cases() {
        // path: one group suffices
        let p = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(edge_grouping_exists(&p, 1));
        // star K_{1,3}: a single group would put 3 edges at the hub
        let s = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(!edge_grouping_exists(&s, 1));
        assert!(edge_grouping_exists(&s, 2));
        // K_{1,5} needs 3
        let s5 = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        assert!(!edge_grouping_exists(&s5, 2));
        assert!(edge_grouping_exists(&s5, 3));
    }
}
