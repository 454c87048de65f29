use crate::{Graph, GraphError};

/// A path is a sequence of vertices where consecutive vertices are adjacent
/// and no vertex repeats, except that a closed loop repeats its first vertex
/// at the end. A single vertex is a valid path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    vertices: Vec<usize>,
}

impl Path {
    /// Structural construction; adjacency against a concrete graph is
    /// checked separately by [`Path::check_in`].
    pub fn new(vertices: Vec<usize>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::InvalidPath("empty vertex sequence".into()));
        }
        let closed = vertices.len() > 1 && vertices.first() == vertices.last();
        if closed && vertices.len() < 4 {
            return Err(GraphError::InvalidPath(format!(
                "closed loop needs at least 3 distinct vertices, got {:?}",
                vertices
            )));
        }
        let body = if closed {
            &vertices[..vertices.len() - 1]
        } else {
            &vertices[..]
        };
        let mut sorted = body.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(GraphError::InvalidPath(format!(
                "repeated vertex in {:?}",
                vertices
            )));
        }
        Ok(Path { vertices })
    }

    pub fn single(v: usize) -> Self {
        Path { vertices: vec![v] }
    }

    /// Vertex sequence, including the repeated closing vertex for loops.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Distinct vertices visited.
    pub fn num_vertices(&self) -> usize {
        if self.is_closed_loop() {
            self.vertices.len() - 1
        } else {
            self.vertices.len()
        }
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_single_vertex(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn is_closed_loop(&self) -> bool {
        self.vertices.len() > 1 && self.vertices.first() == self.vertices.last()
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    /// Edges as unordered pairs `(min, max)`, in traversal order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertices.windows(2).map(|w| {
            if w[0] < w[1] {
                (w[0], w[1])
            } else {
                (w[1], w[0])
            }
        })
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    /// Verify every vertex exists in `g` and consecutive vertices are
    /// adjacent.
    pub fn check_in(&self, g: &Graph) -> Result<(), GraphError> {
        for &v in &self.vertices {
            g.check_vertex(v)?;
        }
        for w in self.vertices.windows(2) {
            if !g.has_edge(w[0], w[1]) {
                return Err(GraphError::InvalidPath(format!(
                    "edge {}-{} not in graph",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// A path cannot be extended when it is a single vertex, a closed loop, or
/// both of its ends lie in the graph's boundary set.
pub fn is_non_extendable(g: &Graph, p: &Path) -> Result<bool, GraphError> {
    p.check_in(g)?;
    if p.is_single_vertex() || p.is_closed_loop() {
        return Ok(true);
    }
    Ok(g.in_boundary(p.first()) && g.in_boundary(p.last()))
}

/// Two paths are parallel when they share no vertex.
pub fn are_parallel(a: &Path, b: &Path) -> bool {
    let (small, big) = if a.num_vertices() <= b.num_vertices() {
        (a, b)
    } else {
        (b, a)
    };
    small.vertices().iter().all(|&v| !big.contains(v))
}
