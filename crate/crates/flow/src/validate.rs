//! Structural validation of flow covers against a graph.

use crate::FlowCover;
use gfcn_graph::{is_non_extendable, Graph};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Path references missing vertices or edges.
    InvalidPath { msg: String },
    /// Two paths of the same flow share a vertex.
    NotParallel { other_path: usize, vertex: usize },
    /// An open path end rests on a non-boundary vertex.
    Extendable { end: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub flow: usize,
    pub path: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::InvalidPath { msg } => {
                write!(f, "flow {} path {}: {}", self.flow, self.path, msg)
            }
            ViolationKind::NotParallel { other_path, vertex } => write!(
                f,
                "flow {} path {}: shares vertex {} with path {}",
                self.flow, self.path, vertex, other_path
            ),
            ViolationKind::Extendable { end } => write!(
                f,
                "flow {} path {}: end {} is extendable (not in the boundary)",
                self.flow, self.path, end
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoverReport {
    pub num_flows: usize,
    pub covered_edges: usize,
    pub total_edges: usize,
    pub epsilon_measured: f64,
    pub epsilon_recorded: f64,
    pub violations: Vec<Violation>,
}

impl CoverReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every path exists in `g`, flows are internally vertex-disjoint,
/// and no open path could be extended. Coverage is measured from scratch;
/// the recorded epsilon is reported alongside for comparison.
pub fn validate_cover(g: &Graph, cover: &FlowCover) -> CoverReport {
    let mut violations = Vec::new();
    let mut covered: HashSet<(usize, usize)> = HashSet::new();

    for (fi, flow) in cover.flows().iter().enumerate() {
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (pi, p) in flow.paths().iter().enumerate() {
            if let Err(e) = p.check_in(g) {
                violations.push(Violation {
                    flow: fi,
                    path: pi,
                    kind: ViolationKind::InvalidPath { msg: e.to_string() },
                });
                continue;
            }
            covered.extend(p.edges());
            match is_non_extendable(g, p) {
                Ok(true) => {}
                Ok(false) => {
                    let end = if !g.in_boundary(p.first()) {
                        p.first()
                    } else {
                        p.last()
                    };
                    violations.push(Violation {
                        flow: fi,
                        path: pi,
                        kind: ViolationKind::Extendable { end },
                    });
                }
                Err(_) => unreachable!("checked above"),
            }
            let mut reported = false;
            for &v in &p.vertices()[..p.num_vertices()] {
                match owner.get(&v) {
                    Some(&o) => {
                        if !reported {
                            violations.push(Violation {
                                flow: fi,
                                path: pi,
                                kind: ViolationKind::NotParallel {
                                    other_path: o,
                                    vertex: v,
                                },
                            });
                            reported = true;
                        }
                    }
                    None => {
                        owner.insert(v, pi);
                    }
                }
            }
        }
    }

    let total_edges = g.num_edges();
    let covered_edges = covered.len();
    let epsilon_measured = if total_edges == 0 {
        1.0
    } else {
        covered_edges as f64 / total_edges as f64
    };
    CoverReport {
        num_flows: cover.num_flows(),
        covered_edges,
        total_edges,
        epsilon_measured,
        epsilon_recorded: cover.epsilon(),
        violations,
    }
}
