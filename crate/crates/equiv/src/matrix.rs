//! Dense reference evaluation of shift operators and their polynomials.

use gfcn_graph::Graph;
use gfcn_tensor::Tensor;

use crate::{Polynomial, ShiftKind};

/// The shift operator as a dense row-major `n x n` matrix.
pub fn shift_matrix(graph: &Graph, kind: ShiftKind) -> Vec<f64> {
    let n = graph.num_vertices();
    let mut m = vec![0.0; n * n];
    for v in 0..n {
        let deg = graph.degree(v) as f64;
        let inv = if deg > 0.0 { 1.0 / deg } else { 0.0 };
        match kind {
            ShiftKind::Adjacency => {
                for u in graph.neighbors(v) {
                    m[v * n + u] = 1.0;
                }
            }
            ShiftKind::NormAdjacency => {
                for u in graph.neighbors(v) {
                    m[v * n + u] = inv;
                }
            }
            ShiftKind::Laplacian => {
                m[v * n + v] = deg;
                for u in graph.neighbors(v) {
                    m[v * n + u] = -1.0;
                }
            }
            ShiftKind::NormLaplacian => {
                m[v * n + v] = 1.0;
                for u in graph.neighbors(v) {
                    m[v * n + u] = -inv;
                }
            }
        }
    }
    m
}

fn matvec(m: &[f64], x: &Tensor) -> Tensor {
    let (n, c) = (x.rows(), x.cols());
    let mut out = vec![0.0; n * c];
    for i in 0..n {
        for k in 0..n {
            let coef = m[i * n + k];
            if coef == 0.0 {
                continue;
            }
            for ch in 0..c {
                out[i * c + ch] += coef * x.data()[k * c + ch];
            }
        }
    }
    Tensor::new(x.shape().to_vec(), out).unwrap()
}

/// Evaluate `p(S) x` densely by Horner's rule.
pub fn apply_polynomial(graph: &Graph, kind: ShiftKind, poly: &Polynomial, x: &Tensor) -> Tensor {
    let m = shift_matrix(graph, kind);
    let mut acc = Tensor::zeros(x.shape().to_vec());
    for &c in poly.coeffs().iter().rev() {
        acc = matvec(&m, &acc);
        if c != 0.0 {
            for (a, &xv) in acc.data_mut().iter_mut().zip(x.data()) {
                *a += c * xv;
            }
        }
    }
    acc
}
