//! Undirected graphs with optional positive edge weights and a designated
//! boundary vertex set, plus the path machinery used by flow decomposition.
//!
//! Vertices are dense ids `0..num_vertices`. Graphs are immutable once
//! constructed (all queries take `&self`), so they can be shared freely
//! across threads.

mod edgelist;
mod path;

pub use edgelist::{parse_edge_list, serialize_edge_list};
pub use path::{are_parallel, is_non_extendable, Path};

use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("edge {u}-{v} has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },
    #[error("vertex {0} out of range; graph has {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

/// Immutable undirected graph. Neighbor lists are kept sorted by vertex id
/// so every traversal in the workspace is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    adj: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
    weighted: bool,
    boundary: Vec<bool>,
}

impl Graph {
    /// Graph on `n` vertices with no edges. The boundary defaults to the
    /// full vertex set.
    pub fn new(n: usize) -> Self {
        Graph {
            num_vertices: n,
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
            weighted: false,
            boundary: vec![true; n],
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.insert_edge(u, v, 1.0, false)
    }

    pub fn add_weighted_edge(&mut self, u: usize, v: usize, w: f64) -> Result<(), GraphError> {
        self.insert_edge(u, v, w, true)
    }

    fn insert_edge(&mut self, u: usize, v: usize, w: f64, weighted: bool) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(w > 0.0) {
            return Err(GraphError::NonPositiveWeight { u, v, weight: w });
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        if self.has_edge(a, b) {
            return Err(GraphError::DuplicateEdge(a, b));
        }
        let pos = self.adj[u].partition_point(|&(x, _)| x < v);
        self.adj[u].insert(pos, (v, w));
        let pos = self.adj[v].partition_point(|&(x, _)| x < u);
        self.adj[v].insert(pos, (u, w));
        let pos = self
            .edges
            .partition_point(|&(x, y, _)| (x, y) < (a, b));
        self.edges.insert(pos, (a, b, w));
        self.weighted |= weighted;
        Ok(())
    }

    /// Restrict the boundary to `verts`. Pass every vertex to restore the
    /// default full boundary; an empty slice is a legal (empty) boundary.
    pub fn set_boundary(&mut self, verts: &[usize]) -> Result<(), GraphError> {
        for &v in verts {
            self.check_vertex(v)?;
        }
        self.boundary = vec![false; self.num_vertices];
        for &v in verts {
            self.boundary[v] = true;
        }
        Ok(())
    }

    pub fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.num_vertices {
            Err(GraphError::VertexOutOfRange(v, self.num_vertices))
        } else {
            Ok(())
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Neighbors of `v` in ascending id order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(u, _)| u)
    }

    pub fn weighted_neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search_by_key(&v, |&(x, _)| x).is_ok()
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adj[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| self.adj[u][i].1)
    }

    /// Edges as `(u, v, w)` with `u < v`, ascending.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn in_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary(&self) -> Vec<usize> {
        (0..self.num_vertices).filter(|&v| self.boundary[v]).collect()
    }

    pub fn has_full_boundary(&self) -> bool {
        self.boundary.iter().all(|&b| b)
    }

    /// Hop distances from `src` to every vertex; `None` marks unreachable
    /// vertices.
    pub fn bfs_distances(&self, src: usize) -> Result<Vec<Option<usize>>, GraphError> {
        self.check_vertex(src)?;
        let mut dist = vec![None; self.num_vertices];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for u in self.neighbors(v) {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        Ok(dist)
    }

    /// Hop distance between two vertices, `None` if they are in different
    /// components.
    pub fn distance(&self, u: usize, v: usize) -> Result<Option<usize>, GraphError> {
        self.check_vertex(v)?;
        Ok(self.bfs_distances(u)?[v])
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.num_vertices];
        let mut out = Vec::new();
        for start in 0..self.num_vertices {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for u in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn is_tree(&self) -> bool {
        self.num_vertices > 0
            && self.num_edges() == self.num_vertices - 1
            && self.is_connected()
    }

    /// Cartesian product. Vertex `(a, b)` maps to id `a * other.num_vertices() + b`;
    /// `(a, b)` and `(c, d)` are adjacent when `a == c` and `b ~ d`, or `b == d`
    /// and `a ~ c`. Weights multiply into the copied edge when either factor
    /// is weighted.
    pub fn product(&self, other: &Graph) -> Graph {
        let n = self.num_vertices * other.num_vertices;
        let mut g = Graph::new(n);
        for a in 0..self.num_vertices {
            for &(b, d, w) in other.edges() {
                let u = a * other.num_vertices + b;
                let v = a * other.num_vertices + d;
                g.insert_edge(u, v, w, other.weighted).expect("product edge");
            }
        }
        for &(a, c, w) in self.edges() {
            for b in 0..other.num_vertices {
                let u = a * other.num_vertices + b;
                let v = c * other.num_vertices + b;
                g.insert_edge(u, v, w, self.weighted).expect("product edge");
            }
        }
        g
    }

    /// h x w grid; vertex (r, c) has id r * w + c. With `diagonals` the two
    /// diagonal neighbors of each cell are connected as well, giving the
    /// 8-neighbor lattice.
    pub fn lattice(h: usize, w: usize, diagonals: bool) -> Graph {
        let mut g = Graph::new(h * w);
        for r in 0..h {
            for c in 0..w {
                let v = r * w + c;
                if c + 1 < w {
                    g.add_edge(v, v + 1).expect("lattice edge");
                }
                if r + 1 < h {
                    g.add_edge(v, v + w).expect("lattice edge");
                }
                if diagonals && r + 1 < h {
                    if c + 1 < w {
                        g.add_edge(v, v + w + 1).expect("lattice edge");
                    }
                    if c > 0 {
                        g.add_edge(v, v + w - 1).expect("lattice edge");
                    }
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_rejects_bad_edges() {
        let mut g = Graph::new(3);
        assert!(matches!(g.add_edge(1, 1), Err(GraphError::SelfLoop(1))));
        assert!(matches!(g.add_edge(0, 3), Err(GraphError::VertexOutOfRange(3, 3))));
        g.add_edge(0, 1).unwrap();
        assert!(matches!(g.add_edge(1, 0), Err(GraphError::DuplicateEdge(0, 1))));
        assert!(matches!(
            g.add_weighted_edge(0, 2, 0.0),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            g.add_weighted_edge(0, 2, f64::NAN),
            Err(GraphError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn neighbors_sorted() {
        let g = Graph::from_edges(5, [(2, 4), (2, 0), (2, 3), (2, 1)]).unwrap();
        assert_eq!(g.neighbors(2).collect::<Vec<_>>(), vec![0, 1, 3, 4]);
        assert_eq!(g.max_degree(), 4);
    }

    #[test]
    fn distance_basics() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (4, 5)]).unwrap();
        assert_eq!(g.distance(0, 3).unwrap(), Some(3));
        assert_eq!(g.distance(0, 0).unwrap(), Some(0));
        assert_eq!(g.distance(0, 5).unwrap(), None);
        assert!(g.distance(0, 6).is_err());
    }

    #[test]
    fn components_and_tree() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1, 2], vec![3, 4]]);
        assert!(!g.is_tree());
        let t = Graph::from_edges(4, [(0, 1), (1, 2), (1, 3)]).unwrap();
        assert!(t.is_tree());
        let cycle = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(!cycle.is_tree());
    }

    #[test]
    fn product_p3_p3() {
        let p3 = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let g = p3.product(&p3);
        assert_eq!(g.num_vertices(), 9);
        assert_eq!(g.num_edges(), 12);
        // center of the 3x3 grid
        assert_eq!(g.neighbors(4).collect::<Vec<_>>(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn product_edge_count_formula() {
        let g1 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let g2 = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let p = g1.product(&g2);
        assert_eq!(
            p.num_edges(),
            g1.num_vertices() * g2.num_edges() + g2.num_vertices() * g1.num_edges()
        );
    }

    #[test]
    fn product_weights_multiply_through() {
        let mut g1 = Graph::new(2);
        g1.add_weighted_edge(0, 1, 2.5).unwrap();
        let g2 = Graph::from_edges(2, [(0, 1)]).unwrap();
        let p = g1.product(&g2);
        assert_eq!(p.edge_weight(0, 2), Some(2.5));
        assert_eq!(p.edge_weight(0, 1), Some(1.0));
    }

    #[test]
    fn lattice_shapes() {
        let g = Graph::lattice(2, 2, false);
        assert_eq!(g.num_edges(), 4);
        let g = Graph::lattice(2, 2, true);
        assert_eq!(g.num_edges(), 6);
        let g = Graph::lattice(3, 4, false);
        assert_eq!(g.num_edges(), 3 * 3 + 4 * 2);
        // 8-neighbor lattice: interior vertex of a 3x3 grid sees everyone
        let g = Graph::lattice(3, 3, true);
        assert_eq!(g.degree(4), 8);
    }

    #[test]
    fn boundary_defaults_full() {
        let mut g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(g.has_full_boundary());
        g.set_boundary(&[0, 2]).unwrap();
        assert!(g.in_boundary(0) && !g.in_boundary(1) && g.in_boundary(2));
        assert_eq!(g.boundary(), vec![0, 2]);
        assert!(g.set_boundary(&[5]).is_err());
    }
}
