//! Mini-batch training and evaluation.

use std::collections::BTreeMap;

use gfcn_tensor::{
    adam_step, sgd_step, AdamConfig, AdamState, SgdConfig, Tape, Tensor, TensorId,
};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::forward::Gfcn;
use crate::ModelError;

/// What the labels mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// One class per input signal; the head must emit a single row of
    /// class logits.
    GraphClass,
    /// One score per vertex; the label names a vertex. The head must
    /// emit one value per vertex.
    VertexClass,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub input: Tensor,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Sgd { learning_rate: f64 },
    Adam { learning_rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
    #[serde(default)]
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            optimizer: Optimizer::Adam {
                learning_rate: 0.001,
            },
            seed: 0,
            shuffle: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Run the model and leave class logits as a single row on the tape.
fn logits(
    gfcn: &Gfcn,
    tape: &mut Tape,
    params: &BTreeMap<String, Tensor>,
    input: &Tensor,
    task: TaskKind,
) -> Result<(TensorId, BTreeMap<String, TensorId>), ModelError> {
    let pass = gfcn.forward(tape, params, input)?;
    let out = tape.value(pass.output);
    let id = match task {
        TaskKind::GraphClass => {
            if out.rows() != 1 {
                return Err(ModelError::BadHead(format!(
                    "graph classification needs a single logit row, got {:?}",
                    out.shape()
                )));
            }
            pass.output
        }
        TaskKind::VertexClass => {
            if out.cols() != 1 {
                return Err(ModelError::BadHead(format!(
                    "vertex classification needs one score per vertex, got {:?}",
                    out.shape()
                )));
            }
            let n = out.rows();
            tape.reshape(pass.output, vec![1, n])?
        }
    };
    Ok((id, pass.param_ids))
}

/// Train `params` in place, returning the per-epoch mean losses.
///
/// Every batch accumulates per-sample gradients of the mean cross
/// entropy, then takes one optimizer step. With a fixed seed, the whole
/// run is deterministic.
pub fn train(
    gfcn: &Gfcn,
    samples: &[Sample],
    params: &mut BTreeMap<String, Tensor>,
    task: TaskKind,
    config: &TrainConfig,
    mut progress: impl FnMut(usize, f64),
) -> Result<TrainReport, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::BadInput("no training samples".into()));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut adam = AdamState::new();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let batch_size = config.batch_size.max(1);

    for epoch in 0..config.epochs {
        if config.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (epoch as u64).wrapping_mul(0x9e37_79b9));
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for batch in order.chunks(batch_size) {
            let mut grad_sum: BTreeMap<String, Tensor> = BTreeMap::new();
            let mut batch_loss = 0.0;
            for &idx in batch {
                let sample = &samples[idx];
                let mut tape = Tape::new();
                let (row, param_ids) = logits(gfcn, &mut tape, params, &sample.input, task)?;
                let loss = tape.cross_entropy_loss(row, &[sample.label])?;
                batch_loss += tape.value(loss).scalar_value();
                let grads = tape.backward(loss)?;
                for (name, id) in &param_ids {
                    if let Some(g) = grads.get(*id) {
                        match grad_sum.get_mut(name) {
                            Some(acc) => {
                                for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                                    *a += b;
                                }
                            }
                            None => {
                                grad_sum.insert(name.clone(), g.clone());
                            }
                        }
                    }
                }
            }
            let inv = 1.0 / batch.len() as f64;
            for g in grad_sum.values_mut() {
                for x in g.data_mut() {
                    *x *= inv;
                }
            }
            match config.optimizer {
                Optimizer::Sgd { learning_rate } => {
                    sgd_step(params, &grad_sum, &SgdConfig { learning_rate })?
                }
                Optimizer::Adam { learning_rate } => adam_step(
                    params,
                    &grad_sum,
                    &mut adam,
                    &AdamConfig {
                        learning_rate,
                        ..AdamConfig::default()
                    },
                )?,
            }
            epoch_loss += batch_loss;
        }
        let mean = epoch_loss / samples.len() as f64;
        epoch_losses.push(mean);
        progress(epoch, mean);
    }
    Ok(TrainReport { epoch_losses })
}

/// Class scores for one input.
pub fn predict(
    gfcn: &Gfcn,
    params: &BTreeMap<String, Tensor>,
    input: &Tensor,
    task: TaskKind,
) -> Result<Vec<f64>, ModelError> {
    let mut tape = Tape::new();
    let (row, _) = logits(gfcn, &mut tape, params, input, task)?;
    Ok(tape.value(row).data().to_vec())
}

/// Fraction of samples whose argmax score matches the label; score ties
/// resolve to the lowest class index.
pub fn evaluate(
    gfcn: &Gfcn,
    params: &BTreeMap<String, Tensor>,
    samples: &[Sample],
    task: TaskKind,
) -> Result<f64, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::BadInput("no evaluation samples".into()));
    }
    let mut correct = 0usize;
    for sample in samples {
        let scores = predict(gfcn, params, &sample.input, task)?;
        let best = scores
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (i, &s)| {
                if s > acc.1 {
                    (i, s)
                } else {
                    acc
                }
            })
            .0;
        if best == sample.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.len() as f64)
}
