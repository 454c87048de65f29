//! Serializable model descriptions.

use serde::{Deserialize, Serialize};

use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaddingSpec {
    /// Zero-pad so that a stride-1 convolution keeps the path length;
    /// requires an odd tap count.
    Same,
    Explicit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMode {
    Max,
    Avg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    Sum,
    Avg,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActKind {
    Relu,
    LeakyRelu { slope: f64 },
}

/// What the network emits after its last layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadSpec {
    /// The last layer already produced a single flat row; pass it through.
    Flat,
    /// Average each vertex's positions, then project to `out_features`
    /// values per vertex. Vertices the cover misses emit zeros.
    PerVertex { out_features: usize },
    /// Average each vertex's positions and return them unchanged, one row
    /// per vertex. Vertices the cover misses emit zeros.
    VertexAvg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    /// 1-D convolution along every path.
    Conv {
        taps: usize,
        stride: usize,
        padding: PaddingSpec,
        out_channels: usize,
        /// One filter for all flows, or one filter per flow.
        #[serde(default = "default_true")]
        share_across_flows: bool,
        #[serde(default = "default_true")]
        bias: bool,
    },
    Pool {
        window: usize,
        stride: usize,
        mode: PoolMode,
    },
    /// Combine all positions holding the same vertex, across every flow,
    /// and write the result back to each of them.
    Fusion { mode: FusionMode },
    /// Attention over each position's path window: scores from a shared
    /// linear map, normalized over the in-range window positions.
    Attention {
        feature_dim: usize,
        #[serde(default = "default_window")]
        window: usize,
    },
    /// Concatenate every path of every flow into a single row.
    Flatten,
    Dense {
        out_features: usize,
    },
    Activation {
        kind: ActKind,
    },
    /// Multiply by a fixed constant.
    Scale { factor: f64 },
}

fn default_true() -> bool {
    true
}

fn default_window() -> usize {
    3
}

/// A full network: layer stack, skip connections, and output head.
///
/// Skips are `(source, target)` pairs over 1-based layer indices, with 0
/// standing for the model input; the target layer's input becomes its
/// predecessor's output plus every skip source's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub in_channels: usize,
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub skips: Vec<(usize, usize)>,
    pub head: HeadSpec,
}

impl ModelSpec {
    /// Structural checks that need no graph: layer parameters in range,
    /// skips well-ordered.
    pub fn check(&self) -> Result<(), ModelError> {
        if self.in_channels == 0 {
            return Err(ModelError::BadSpec("in_channels must be positive".into()));
        }
        for (idx, layer) in self.layers.iter().enumerate() {
            let layer_no = idx + 1;
            let bad = |detail: String| ModelError::BadLayer {
                layer: layer_no,
                detail,
            };
            match layer {
                LayerSpec::Conv {
                    taps,
                    stride,
                    padding,
                    out_channels,
                    ..
                } => {
                    if *taps == 0 || *stride == 0 || *out_channels == 0 {
                        return Err(bad("taps, stride and out_channels must be positive".into()));
                    }
                    if *padding == PaddingSpec::Same && taps % 2 == 0 {
                        return Err(bad(format!(
                            "same padding needs an odd tap count, got {}",
                            taps
                        )));
                    }
                }
                LayerSpec::Pool { window, stride, .. } => {
                    if *window == 0 || *stride == 0 {
                        return Err(bad("window and stride must be positive".into()));
                    }
                }
                LayerSpec::Attention {
                    feature_dim,
                    window,
                } => {
                    if *feature_dim == 0 {
                        return Err(bad("feature_dim must be positive".into()));
                    }
                    if *window == 0 || window % 2 == 0 {
                        return Err(bad(format!("window must be odd, got {}", window)));
                    }
                }
                LayerSpec::Dense { out_features } => {
                    if *out_features == 0 {
                        return Err(bad("out_features must be positive".into()));
                    }
                }
                LayerSpec::Activation { kind } => {
                    if let ActKind::LeakyRelu { slope } = kind {
                        if !slope.is_finite() {
                            return Err(bad("slope must be finite".into()));
                        }
                    }
                }
                LayerSpec::Scale { factor } => {
                    if !factor.is_finite() {
                        return Err(bad("factor must be finite".into()));
                    }
                }
                LayerSpec::Fusion { .. } | LayerSpec::Flatten => {}
            }
        }
        for &(source, target) in &self.skips {
            let err = |detail: &str| ModelError::BadSkip {
                from_layer: source,
                to_layer: target,
                detail: detail.into(),
            };
            if target == 0 || target > self.layers.len() {
                return Err(err("target is not a layer index"));
            }
            if source >= target {
                return Err(err("source must come before target"));
            }
            if source > self.layers.len() {
                return Err(err("source is not a layer index"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model specs always serialize")
    }

    pub fn from_json(json: &str) -> Result<Self, ModelError> {
        let spec: ModelSpec =
            serde_json::from_str(json).map_err(|e| ModelError::BadSpec(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }
}
