//! Plain SGD and Adam over named parameter maps.

use std::collections::BTreeMap;

use crate::{Tensor, TensorError};

#[derive(Debug, Clone, Copy)]
pub struct SgdConfig {
    pub learning_rate: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 0.01,
        }
    }
}

/// One SGD step. Parameters without a gradient entry stay untouched.
pub fn sgd_step(
    params: &mut BTreeMap<String, Tensor>,
    grads: &BTreeMap<String, Tensor>,
    config: &SgdConfig,
) -> Result<(), TensorError> {
    for (name, p) in params.iter_mut() {
        let Some(g) = grads.get(name) else { continue };
        check_grad(name, p, g)?;
        for (x, &d) in p.data_mut().iter_mut().zip(g.data()) {
            *x -= config.learning_rate * d;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators, keyed like the parameter map.
#[derive(Debug, Clone, Default)]
pub struct AdamState {
    m: BTreeMap<String, Tensor>,
    v: BTreeMap<String, Tensor>,
    t: u64,
}

impl AdamState {
    pub fn new() -> Self {
        AdamState::default()
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam step with bias correction. Parameters without a gradient
/// entry stay untouched (their moments also stay frozen).
pub fn adam_step(
    params: &mut BTreeMap<String, Tensor>,
    grads: &BTreeMap<String, Tensor>,
    state: &mut AdamState,
    config: &AdamConfig,
) -> Result<(), TensorError> {
    state.t += 1;
    let corr1 = 1.0 - config.beta1.powi(state.t as i32);
    let corr2 = 1.0 - config.beta2.powi(state.t as i32);
    for (name, p) in params.iter_mut() {
        let Some(g) = grads.get(name) else { continue };
        check_grad(name, p, g)?;
        let m = state
            .m
            .entry(name.clone())
            .or_insert_with(|| Tensor::zeros(p.shape().to_vec()));
        let v = state
            .v
            .entry(name.clone())
            .or_insert_with(|| Tensor::zeros(p.shape().to_vec()));
        for ((x, &d), (mi, vi)) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut().iter_mut().zip(v.data_mut()))
        {
            *mi = config.beta1 * *mi + (1.0 - config.beta1) * d;
            *vi = config.beta2 * *vi + (1.0 - config.beta2) * d * d;
            let m_hat = *mi / corr1;
            let v_hat = *vi / corr2;
            *x -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
    Ok(())
}

fn check_grad(name: &str, param: &Tensor, grad: &Tensor) -> Result<(), TensorError> {
    if grad.shape() != param.shape() {
        return Err(TensorError::BadParam {
            param: name.to_string(),
            detail: format!(
                "gradient shape {:?} does not match parameter shape {:?}",
                grad.shape(),
                param.shape()
            ),
        });
    }
    if !grad.all_finite() {
        return Err(TensorError::NonFiniteGrad {
            param: name.to_string(),
        });
    }
    Ok(())
}
