//! JSON (de)serialization of named parameter maps.
//!
//! `BTreeMap` keeps the key order stable, and `serde_json` round-trips
//! every finite `f64` exactly, so saving and reloading a checkpoint
//! reproduces the parameters bit for bit.

use std::collections::BTreeMap;

use crate::{Tensor, TensorError};

pub fn params_to_json(params: &BTreeMap<String, Tensor>) -> Result<String, TensorError> {
    for (name, t) in params {
        if !t.all_finite() {
            return Err(TensorError::BadParam {
                param: name.clone(),
                detail: "contains a non-finite value".into(),
            });
        }
    }
    serde_json::to_string_pretty(params).map_err(|e| TensorError::Checkpoint(e.to_string()))
}

pub fn params_from_json(json: &str) -> Result<BTreeMap<String, Tensor>, TensorError> {
    let params: BTreeMap<String, Tensor> =
        serde_json::from_str(json).map_err(|e| TensorError::Checkpoint(e.to_string()))?;
    for (name, t) in &params {
        let expect: usize = t.shape().iter().product();
        if t.data().len() != expect {
            return Err(TensorError::BadParam {
                param: name.clone(),
                detail: format!(
                    "shape {:?} wants {} values, found {}",
                    t.shape(),
                    expect,
                    t.data().len()
                ),
            });
        }
        if !t.all_finite() {
            return Err(TensorError::BadParam {
                param: name.clone(),
                detail: "contains a non-finite value".into(),
            });
        }
    }
    Ok(params)
}
