//! Building the compute graph for one forward evaluation.

use std::collections::BTreeMap;

use gfcn_flow::FlowCover;
use gfcn_graph::Graph;
use gfcn_tensor::{SegmentMode, Tape, Tensor, TensorId};

use crate::layout::Layout;
use crate::spec::{
    ActKind, FusionMode, HeadSpec, LayerSpec, ModelSpec, PaddingSpec, PoolMode,
};
use crate::ModelError;

/// Slope of the leaky relu inside attention score computation.
const ATTN_SLOPE: f64 = 0.2;

/// A model bound to one graph and one flow cover.
pub struct Gfcn {
    spec: ModelSpec,
    layout: Layout,
    param_decls: Vec<(String, Vec<usize>)>,
}

/// The result of one forward construction: the output tensor plus the
/// tape ids under which each named parameter was registered, so that
/// gradients can be collected by name after a backward sweep.
pub struct ForwardPass {
    pub output: TensorId,
    pub param_ids: BTreeMap<String, TensorId>,
}

/// The signal state between layers: either one tensor per path, or a
/// single flattened row.
#[derive(Clone)]
enum State {
    PerPath {
        tensors: Vec<TensorId>,
        /// Per path: which vertex each position still corresponds to.
        /// `None` once a layer has destroyed the correspondence.
        verts: Vec<Option<Vec<usize>>>,
        channels: usize,
    },
    Flat(TensorId),
}

/// Shape-only mirror of `State`, used for static checking and parameter
/// declaration before any data exists.
#[derive(Clone)]
enum ShapeState {
    PerPath {
        lens: Vec<usize>,
        aligned: bool,
        channels: usize,
    },
    Flat(usize),
}

impl Gfcn {
    pub fn new(graph: &Graph, cover: &FlowCover, spec: ModelSpec) -> Result<Self, ModelError> {
        spec.check()?;
        let layout = Layout::new(graph, cover)?;
        let param_decls = infer_params(&spec, &layout)?;
        Ok(Gfcn {
            spec,
            layout,
            param_decls,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Names and shapes of every parameter the forward pass will look up.
    pub fn param_decls(&self) -> &[(String, Vec<usize>)] {
        &self.param_decls
    }

    /// Run the model on a `[num_vertices, in_channels]` signal.
    pub fn forward(
        &self,
        tape: &mut Tape,
        params: &BTreeMap<String, Tensor>,
        input: &Tensor,
    ) -> Result<ForwardPass, ModelError> {
        let n = self.layout.num_vertices();
        if input.shape() != [n, self.spec.in_channels] {
            return Err(ModelError::BadInput(format!(
                "expected a [{}, {}] signal, got {:?}",
                n,
                self.spec.in_channels,
                input.shape()
            )));
        }
        let mut ctx = Ctx {
            tape,
            params,
            param_ids: BTreeMap::new(),
        };

        let input_id = ctx.tape.leaf(input.clone());
        let mut tensors = Vec::with_capacity(self.layout.num_paths());
        let mut verts = Vec::with_capacity(self.layout.num_paths());
        for path in self.layout.paths() {
            tensors.push(ctx.tape.gather_rows(input_id, &path.vertices)?);
            verts.push(Some(path.vertices.clone()));
        }
        let mut states: Vec<State> = vec![State::PerPath {
            tensors,
            verts,
            channels: self.spec.in_channels,
        }];

        let mut incoming: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(source, target) in &self.spec.skips {
            incoming.entry(target).or_default().push(source);
        }

        for (idx, layer) in self.spec.layers.iter().enumerate() {
            let layer_no = idx + 1;
            let mut state = states[layer_no - 1].clone();
            if let Some(sources) = incoming.get(&layer_no) {
                for &source in sources {
                    state = add_states(ctx.tape, state, &states[source], source, layer_no)?;
                }
            }
            let next = self.apply_layer(&mut ctx, layer_no, layer, state)?;
            states.push(next);
        }

        let output = self.apply_head(&mut ctx, states.last().unwrap())?;
        Ok(ForwardPass {
            output,
            param_ids: ctx.param_ids,
        })
    }

    fn apply_layer(
        &self,
        ctx: &mut Ctx<'_, '_>,
        layer_no: usize,
        layer: &LayerSpec,
        state: State,
    ) -> Result<State, ModelError> {
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
                share_across_flows,
                bias,
            } => {
                let State::PerPath {
                    tensors,
                    verts,
                    channels,
                } = state
                else {
                    return Err(bad("convolution needs per-path signals".into()));
                };
                let pad = match padding {
                    PaddingSpec::Same => (taps - 1) / 2,
                    PaddingSpec::Explicit(p) => *p,
                };
                let mut out_tensors = Vec::with_capacity(tensors.len());
                let mut out_verts = Vec::with_capacity(tensors.len());
                for (p, (&x, v)) in tensors.iter().zip(&verts).enumerate() {
                    let flow = self.layout.paths()[p].flow;
                    let key = conv_key(layer_no, *share_across_flows, flow);
                    let w = ctx.fetch(&format!("{key}.weight"), &[*taps, channels, *out_channels])?;
                    let b = if *bias {
                        Some(ctx.fetch(&format!("{key}.bias"), &[*out_channels])?)
                    } else {
                        None
                    };
                    let y = ctx
                        .tape
                        .conv1d(x, w, b, *stride, pad)
                        .map_err(|e| bad(format!("path {}: {}", p, e)))?;
                    let out_len = ctx.tape.value(y).shape()[0];
                    out_verts.push(match (padding, v) {
                        (PaddingSpec::Same, Some(vs)) => {
                            Some((0..out_len).map(|t| vs[t * stride]).collect())
                        }
                        _ => None,
                    });
                    out_tensors.push(y);
                }
                Ok(State::PerPath {
                    tensors: out_tensors,
                    verts: out_verts,
                    channels: *out_channels,
                })
            }
            LayerSpec::Pool {
                window,
                stride,
                mode,
            } => {
                let State::PerPath {
                    tensors,
                    verts,
                    channels,
                } = state
                else {
                    return Err(bad("pooling needs per-path signals".into()));
                };
                let mut out_tensors = Vec::with_capacity(tensors.len());
                let mut out_verts = Vec::with_capacity(tensors.len());
                for (p, (&x, v)) in tensors.iter().zip(&verts).enumerate() {
                    let y = ctx
                        .tape
                        .pool1d(x, *window, *stride, *mode == PoolMode::Max)
                        .map_err(|e| bad(format!("path {}: {}", p, e)))?;
                    let out_len = ctx.tape.value(y).shape()[0];
                    out_verts.push(
                        v.as_ref()
                            .map(|vs| (0..out_len).map(|t| vs[t * stride]).collect()),
                    );
                    out_tensors.push(y);
                }
                Ok(State::PerPath {
                    tensors: out_tensors,
                    verts: out_verts,
                    channels,
                })
            }
            LayerSpec::Fusion { mode } => {
                let State::PerPath {
                    tensors,
                    verts,
                    channels,
                } = state
                else {
                    return Err(bad("fusion needs per-path signals".into()));
                };
                let mut segments = Vec::new();
                for v in &verts {
                    match v {
                        Some(vs) => segments.extend_from_slice(vs),
                        None => {
                            return Err(bad(
                                "fusion needs vertex-aligned positions; an earlier layer \
                                 discarded the alignment"
                                    .into(),
                            ))
                        }
                    }
                }
                let all = ctx.tape.concat_rows(&tensors)?;
                let seg_mode = match mode {
                    FusionMode::Sum => SegmentMode::Sum,
                    FusionMode::Avg => SegmentMode::Avg,
                    FusionMode::Max => SegmentMode::Max,
                };
                let fused = ctx.tape.segment_reduce(all, &segments, seg_mode)?;
                let mut out_tensors = Vec::with_capacity(tensors.len());
                let mut offset = 0;
                for &t in &tensors {
                    let len = ctx.tape.value(t).shape()[0];
                    out_tensors.push(ctx.tape.slice_rows(fused, offset, len)?);
                    offset += len;
                }
                Ok(State::PerPath {
                    tensors: out_tensors,
                    verts,
                    channels,
                })
            }
            LayerSpec::Attention {
                feature_dim,
                window,
            } => {
                let State::PerPath {
                    tensors,
                    verts,
                    channels,
                } = state
                else {
                    return Err(bad("attention needs per-path signals".into()));
                };
                let w = ctx.fetch(
                    &format!("layer{layer_no}.attn.weight"),
                    &[channels, *feature_dim],
                )?;
                let a_src = ctx.fetch(&format!("layer{layer_no}.attn.src"), &[*feature_dim, 1])?;
                let a_dst = ctx.fetch(&format!("layer{layer_no}.attn.dst"), &[*feature_dim, 1])?;
                let half = (*window / 2) as isize;
                let mut out_tensors = Vec::with_capacity(tensors.len());
                for &x in &tensors {
                    out_tensors.push(attention_path(
                        ctx.tape, x, w, a_src, a_dst, half, *feature_dim,
                    )?);
                }
                Ok(State::PerPath {
                    tensors: out_tensors,
                    verts,
                    channels: *feature_dim,
                })
            }
            LayerSpec::Flatten => {
                let State::PerPath { tensors, .. } = state else {
                    return Err(bad("the signal is already flat".into()));
                };
                let all = ctx.tape.concat_rows(&tensors)?;
                let total = ctx.tape.value(all).len();
                Ok(State::Flat(ctx.tape.reshape(all, vec![1, total])?))
            }
            LayerSpec::Dense { out_features } => {
                let w_name = format!("layer{layer_no}.dense.weight");
                let b_name = format!("layer{layer_no}.dense.bias");
                match state {
                    State::Flat(x) => {
                        let width = ctx.tape.value(x).cols();
                        let w = ctx.fetch(&w_name, &[width, *out_features])?;
                        let b = ctx.fetch(&b_name, &[*out_features])?;
                        Ok(State::Flat(ctx.tape.dense(x, w, b)?))
                    }
                    State::PerPath {
                        tensors,
                        verts,
                        channels,
                    } => {
                        let w = ctx.fetch(&w_name, &[channels, *out_features])?;
                        let b = ctx.fetch(&b_name, &[*out_features])?;
                        let mut out_tensors = Vec::with_capacity(tensors.len());
                        for &x in &tensors {
                            out_tensors.push(ctx.tape.dense(x, w, b)?);
                        }
                        Ok(State::PerPath {
                            tensors: out_tensors,
                            verts,
                            channels: *out_features,
                        })
                    }
                }
            }
            LayerSpec::Activation { kind } => Ok(map_state(ctx.tape, state, |tape, x| match kind {
                ActKind::Relu => tape.relu(x),
                ActKind::LeakyRelu { slope } => tape.leaky_relu(x, *slope),
            })),
            LayerSpec::Scale { factor } => {
                Ok(map_state(ctx.tape, state, |tape, x| tape.scale(x, *factor)))
            }
        }
    }

    fn apply_head(&self, ctx: &mut Ctx<'_, '_>, state: &State) -> Result<TensorId, ModelError> {
        match (&self.spec.head, state) {
            (HeadSpec::Flat, State::Flat(x)) => Ok(*x),
            (HeadSpec::Flat, State::PerPath { .. }) => Err(ModelError::BadHead(
                "flat head needs a flattened signal; add a flatten layer".into(),
            )),
            (HeadSpec::PerVertex { .. } | HeadSpec::VertexAvg, State::Flat(_)) => Err(
                ModelError::BadHead("per-vertex heads need per-path signals".into()),
            ),
            (head, State::PerPath {
                tensors,
                verts,
                channels,
            }) => {
                let mut segments = Vec::new();
                for v in verts {
                    match v {
                        Some(vs) => segments.extend_from_slice(vs),
                        None => {
                            return Err(ModelError::BadHead(
                                "per-vertex heads need vertex-aligned positions".into(),
                            ))
                        }
                    }
                }
                let all = ctx.tape.concat_rows(tensors)?;
                let fused = ctx.tape.segment_reduce(all, &segments, SegmentMode::Avg)?;
                // one representative row per vertex; absent vertices hit
                // the appended zero row
                let zero = ctx.tape.leaf(Tensor::zeros(vec![1, *channels]));
                let padded = ctx.tape.concat_rows(&[fused, zero])?;
                let absent = segments.len();
                let mut rep = vec![absent; self.layout.num_vertices()];
                for (pos, &v) in segments.iter().enumerate() {
                    if rep[v] == absent {
                        rep[v] = pos;
                    }
                }
                let per_vertex = ctx.tape.gather_rows(padded, &rep)?;
                match head {
                    HeadSpec::VertexAvg => Ok(per_vertex),
                    HeadSpec::PerVertex { out_features } => {
                        let w = ctx.fetch("head.weight", &[*channels, *out_features])?;
                        let b = ctx.fetch("head.bias", &[*out_features])?;
                        Ok(ctx.tape.dense(per_vertex, w, b)?)
                    }
                    HeadSpec::Flat => unreachable!("handled above"),
                }
            }
        }
    }
}

struct Ctx<'t, 'p> {
    tape: &'t mut Tape,
    params: &'p BTreeMap<String, Tensor>,
    param_ids: BTreeMap<String, TensorId>,
}

impl Ctx<'_, '_> {
    /// Register a named parameter on the tape once, checking its shape.
    fn fetch(&mut self, name: &str, expect: &[usize]) -> Result<TensorId, ModelError> {
        if let Some(&id) = self.param_ids.get(name) {
            return Ok(id);
        }
        let tensor = self
            .params
            .get(name)
            .ok_or_else(|| ModelError::MissingParam(name.to_string()))?;
        if tensor.shape() != expect {
            return Err(ModelError::ParamShape {
                name: name.to_string(),
                expect: expect.to_vec(),
                got: tensor.shape().to_vec(),
            });
        }
        let id = self.tape.param(tensor.clone());
        self.param_ids.insert(name.to_string(), id);
        Ok(id)
    }
}

fn conv_key(layer_no: usize, shared: bool, flow: usize) -> String {
    if shared {
        format!("layer{layer_no}.conv")
    } else {
        format!("layer{layer_no}.conv.flow{flow}")
    }
}

fn map_state(
    tape: &mut Tape,
    state: State,
    mut f: impl FnMut(&mut Tape, TensorId) -> TensorId,
) -> State {
    match state {
        State::Flat(x) => State::Flat(f(tape, x)),
        State::PerPath {
            tensors,
            verts,
            channels,
        } => State::PerPath {
            tensors: tensors.into_iter().map(|x| f(tape, x)).collect(),
            verts,
            channels,
        },
    }
}

fn add_states(
    tape: &mut Tape,
    state: State,
    source_state: &State,
    source: usize,
    target: usize,
) -> Result<State, ModelError> {
    let err = |detail: String| ModelError::BadSkip {
        from_layer: source,
        to_layer: target,
        detail,
    };
    match (state, source_state) {
        (State::Flat(a), State::Flat(b)) => {
            let sum = tape
                .add(a, *b)
                .map_err(|e| err(format!("incompatible widths: {e}")))?;
            Ok(State::Flat(sum))
        }
        (
            State::PerPath {
                tensors,
                verts,
                channels,
            },
            State::PerPath {
                tensors: src_tensors,
                channels: src_channels,
                ..
            },
        ) => {
            if channels != *src_channels {
                return Err(err(format!(
                    "channel mismatch: {} vs {}",
                    channels, src_channels
                )));
            }
            let mut out = Vec::with_capacity(tensors.len());
            for (&a, &b) in tensors.iter().zip(src_tensors) {
                out.push(tape.add(a, b).map_err(|e| err(format!("path shapes differ: {e}")))?);
            }
            Ok(State::PerPath {
                tensors: out,
                verts,
                channels,
            })
        }
        _ => Err(err("one side is flat, the other per-path".into())),
    }
}

/// Window attention along one path.
fn attention_path(
    tape: &mut Tape,
    x: TensorId,
    w: TensorId,
    a_src: TensorId,
    a_dst: TensorId,
    half: isize,
    feature_dim: usize,
) -> Result<TensorId, ModelError> {
    let h = tape.matmul(x, w)?;
    let len = tape.value(h).shape()[0];
    let u = tape.matmul(h, a_src)?;
    let v = tape.matmul(h, a_dst)?;

    let offsets: Vec<isize> = (-half..=half).collect();
    let mut scores = Vec::with_capacity(offsets.len());
    let mut mask = Vec::with_capacity(offsets.len() * len);
    for &d in &offsets {
        let shifted = tape.shift_rows(v, d)?;
        let e = tape.add(u, shifted)?;
        scores.push(tape.leaky_relu(e, ATTN_SLOPE));
        for i in 0..len as isize {
            mask.push(if i + d >= 0 && i + d < len as isize {
                1.0
            } else {
                0.0
            });
        }
    }
    let stacked = tape.concat_rows(&scores)?;
    let segments: Vec<usize> = (0..offsets.len()).flat_map(|_| 0..len).collect();
    // stabilized masked softmax over each position's window
    let maxes = tape.segment_reduce(stacked, &segments, SegmentMode::Max)?;
    let centered = tape.sub(stacked, maxes)?;
    let exps = tape.exp(centered);
    let mask_id = tape.leaf(Tensor::new(vec![mask.len(), 1], mask).unwrap());
    let masked = tape.mul(exps, mask_id)?;
    let denom = tape.segment_reduce(masked, &segments, SegmentMode::Sum)?;
    let alpha = tape.div(masked, denom)?;

    let mut out: Option<TensorId> = None;
    for (k, &d) in offsets.iter().enumerate() {
        let weights = tape.slice_rows(alpha, k * len, len)?;
        let neighbor = tape.shift_rows(h, d)?;
        let contrib = tape.row_scale(neighbor, weights)?;
        out = Some(match out {
            Some(acc) => tape.add(acc, contrib)?,
            None => contrib,
        });
    }
    let result = out.expect("window is never empty");
    debug_assert_eq!(tape.value(result).shape(), &[len, feature_dim]);
    Ok(result)
}

/// Walk the layer stack over shapes only, producing the parameter
/// declarations the forward pass will require.
fn infer_params(spec: &ModelSpec, layout: &Layout) -> Result<Vec<(String, Vec<usize>)>, ModelError> {
    let mut decls: Vec<(String, Vec<usize>)> = Vec::new();
    let mut declare = |name: String, shape: Vec<usize>| {
        if !decls.iter().any(|(n, _)| *n == name) {
            decls.push((name, shape));
        }
    };

    let lens: Vec<usize> = layout.paths().iter().map(|p| p.vertices.len()).collect();
    let mut states: Vec<ShapeState> = vec![ShapeState::PerPath {
        lens,
        aligned: true,
        channels: spec.in_channels,
    }];

    let mut incoming: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(source, target) in &spec.skips {
        incoming.entry(target).or_default().push(source);
    }

    for (idx, layer) in spec.layers.iter().enumerate() {
        let layer_no = idx + 1;
        let bad = |detail: String| ModelError::BadLayer {
            layer: layer_no,
            detail,
        };
        let state = states[layer_no - 1].clone();
        if let Some(sources) = incoming.get(&layer_no) {
            for &source in sources {
                check_skip_shapes(&state, &states[source], source, layer_no)?;
            }
        }
        let next = match layer {
            LayerSpec::Conv {
                taps,
                stride,
                padding,
                out_channels,
                share_across_flows,
                bias,
            } => {
                let ShapeState::PerPath { lens, aligned, channels } = state else {
                    return Err(bad("convolution needs per-path signals".into()));
                };
                let pad = match padding {
                    PaddingSpec::Same => (taps - 1) / 2,
                    PaddingSpec::Explicit(p) => *p,
                };
                let mut out_lens = Vec::with_capacity(lens.len());
                for (p, &len) in lens.iter().enumerate() {
                    if len + 2 * pad < *taps {
                        return Err(bad(format!(
                            "path {} has length {}, too short for {} taps with padding {}",
                            p, len, taps, pad
                        )));
                    }
                    out_lens.push((len + 2 * pad - taps) / stride + 1);
                    let flow = layout.paths()[p].flow;
                    let key = conv_key(layer_no, *share_across_flows, flow);
                    declare(format!("{key}.weight"), vec![*taps, channels, *out_channels]);
                    if *bias {
                        declare(format!("{key}.bias"), vec![*out_channels]);
                    }
                }
                ShapeState::PerPath {
                    lens: out_lens,
                    aligned: aligned && *padding == PaddingSpec::Same,
                    channels: *out_channels,
                }
            }
            LayerSpec::Pool { stride, .. } => {
                let ShapeState::PerPath { lens, aligned, channels } = state else {
                    return Err(bad("pooling needs per-path signals".into()));
                };
                ShapeState::PerPath {
                    lens: lens.iter().map(|&l| l.div_ceil(*stride)).collect(),
                    aligned,
                    channels,
                }
            }
            LayerSpec::Fusion { .. } => {
                let ShapeState::PerPath { lens, aligned, channels } = state else {
                    return Err(bad("fusion needs per-path signals".into()));
                };
                if !aligned {
                    return Err(bad(
                        "fusion needs vertex-aligned positions; an earlier layer \
                         discarded the alignment"
                            .into(),
                    ));
                }
                ShapeState::PerPath {
                    lens,
                    aligned,
                    channels,
                }
            }
            LayerSpec::Attention { feature_dim, .. } => {
                let ShapeState::PerPath { lens, aligned, channels } = state else {
                    return Err(bad("attention needs per-path signals".into()));
                };
                declare(
                    format!("layer{layer_no}.attn.weight"),
                    vec![channels, *feature_dim],
                );
                declare(format!("layer{layer_no}.attn.src"), vec![*feature_dim, 1]);
                declare(format!("layer{layer_no}.attn.dst"), vec![*feature_dim, 1]);
                ShapeState::PerPath {
                    lens,
                    aligned,
                    channels: *feature_dim,
                }
            }
            LayerSpec::Flatten => {
                let ShapeState::PerPath { lens, channels, .. } = state else {
                    return Err(bad("the signal is already flat".into()));
                };
                ShapeState::Flat(lens.iter().sum::<usize>() * channels)
            }
            LayerSpec::Dense { out_features } => match state {
                ShapeState::Flat(width) => {
                    declare(
                        format!("layer{layer_no}.dense.weight"),
                        vec![width, *out_features],
                    );
                    declare(format!("layer{layer_no}.dense.bias"), vec![*out_features]);
                    ShapeState::Flat(*out_features)
                }
                ShapeState::PerPath { lens, aligned, channels } => {
                    declare(
                        format!("layer{layer_no}.dense.weight"),
                        vec![channels, *out_features],
                    );
                    declare(format!("layer{layer_no}.dense.bias"), vec![*out_features]);
                    ShapeState::PerPath {
                        lens,
                        aligned,
                        channels: *out_features,
                    }
                }
            },
            LayerSpec::Activation { .. } | LayerSpec::Scale { .. } => state,
        };
        states.push(next);
    }

    match (&spec.head, states.last().unwrap()) {
        (HeadSpec::Flat, ShapeState::Flat(_)) => {}
        (HeadSpec::Flat, _) => {
            return Err(ModelError::BadHead(
                "flat head needs a flattened signal; add a flatten layer".into(),
            ))
        }
        (HeadSpec::VertexAvg, ShapeState::PerPath { aligned: true, .. }) => {}
        (HeadSpec::PerVertex { out_features }, ShapeState::PerPath { aligned: true, channels, .. }) => {
            declare("head.weight".into(), vec![*channels, *out_features]);
            declare("head.bias".into(), vec![*out_features]);
        }
        (HeadSpec::PerVertex { .. } | HeadSpec::VertexAvg, ShapeState::Flat(_)) => {
            return Err(ModelError::BadHead(
                "per-vertex heads need per-path signals".into(),
            ))
        }
        (HeadSpec::PerVertex { .. } | HeadSpec::VertexAvg, _) => {
            return Err(ModelError::BadHead(
                "per-vertex heads need vertex-aligned positions".into(),
            ))
        }
    }
    Ok(decls)
}

fn check_skip_shapes(
    state: &ShapeState,
    source_state: &ShapeState,
    source: usize,
    target: usize,
) -> Result<(), ModelError> {
    let err = |detail: String| ModelError::BadSkip {
        from_layer: source,
        to_layer: target,
        detail,
    };
    match (state, source_state) {
        (ShapeState::Flat(a), ShapeState::Flat(b)) => {
            if a != b {
                return Err(err(format!("widths differ: {} vs {}", a, b)));
            }
        }
        (
            ShapeState::PerPath { lens, channels, .. },
            ShapeState::PerPath {
                lens: src_lens,
                channels: src_channels,
                ..
            },
        ) => {
            if channels != src_channels {
                return Err(err(format!(
                    "channel mismatch: {} vs {}",
                    channels, src_channels
                )));
            }
            if lens != src_lens {
                return Err(err("path lengths differ".into()));
            }
        }
        _ => return Err(err("one side is flat, the other per-path".into())),
    }
    Ok(())
}
