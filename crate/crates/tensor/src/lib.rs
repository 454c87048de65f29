//! Dense `f64` tensors and a tape-based reverse-mode autodiff engine.
//!
//! Values live on a [`Tape`]; operations append nodes and return ids, so
//! the tape order is a topological order and [`Tape::backward`] is a single
//! reverse sweep. Everything is deterministic: no threading, no hashing in
//! any value path.

mod checkpoint;
pub mod fd;
mod optim;
mod tape;

pub use checkpoint::{params_from_json, params_to_json};
pub use optim::{adam_step, sgd_step, AdamConfig, AdamState, SgdConfig};
pub use tape::{Gradients, SegmentMode, Tape, TensorId};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape {shape:?} holds {expect} elements but {got} were given")]
    BadShape {
        shape: Vec<usize>,
        expect: usize,
        got: usize,
    },
    #[error("{op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("{op}: produces an empty output ({detail})")]
    EmptyOutput { op: &'static str, detail: String },
    #[error("backward root must be a scalar, got shape {0:?}")]
    NonScalarRoot(Vec<usize>),
    #[error("gradient for {param} is not finite")]
    NonFiniteGrad { param: String },
    #[error("parameter {param}: {detail}")]
    BadParam { param: String, detail: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Row-major dense tensor. Rank 1 and 2 are used throughout; rank 3 occurs
/// only for convolution filters `[taps, in_channels, out_channels]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, TensorError> {
        let expect = shape.iter().product::<usize>();
        if expect != data.len() {
            return Err(TensorError::BadShape {
                shape,
                expect,
                got: data.len(),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn full(shape: Vec<usize>, value: f64) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![value; len],
        }
    }

    pub fn scalar(x: f64) -> Self {
        Tensor {
            shape: vec![1],
            data: vec![x],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of rows when viewed as a matrix: rank-1 tensors are single
    /// rows, rank-2 use their leading dimension.
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            0 | 1 => 1,
            _ => self.shape[0],
        }
    }

    pub fn cols(&self) -> usize {
        match self.shape.len() {
            0 => 1,
            1 => self.shape[0],
            _ => self.shape[1..].iter().product(),
        }
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self, TensorError> {
        let expect: usize = shape.iter().product();
        if expect != self.data.len() {
            return Err(TensorError::BadShape {
                shape,
                expect,
                got: self.data.len(),
            });
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    pub fn scalar_value(&self) -> f64 {
        debug_assert!(self.is_scalar());
        self.data[0]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}
