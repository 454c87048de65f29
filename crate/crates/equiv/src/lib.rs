//! Compiling polynomial graph filters into flow networks.
//!
//! For a polynomial `p` and a shift operator `S` built from a graph,
//! [`compile`] produces a network whose forward pass computes `p(S) x`
//! for every input signal `x` -- not approximately, but as the same
//! linear map. The construction stacks one convolution/fusion stage per
//! power of `S`, injects lower-order terms through skip connections from
//! the input, and hides the coefficients in filter scale factors, so
//! every spectral filter of this family is also a flow network.

mod matrix;
mod poly;
mod refine;

pub use matrix::{apply_polynomial, shift_matrix};
pub use poly::Polynomial;
pub use refine::matching_cover;

use std::collections::{BTreeMap, BTreeSet};

use gfcn_flow::{validate_cover, FlowCover};
use gfcn_graph::Graph;
use gfcn_model::{
    FusionMode, Gfcn, HeadSpec, LayerSpec, ModelError, ModelSpec, PaddingSpec,
};
use gfcn_tensor::{Tape, Tensor};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EquivError {
    #[error(transparent)]
    Graph(#[from] gfcn_graph::GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// The shift operators a polynomial can be taken in.
///
/// The normalized variants divide by vertex degree: the normalized
/// adjacency is `D^-1 A` and the normalized Laplacian is `I - D^-1 A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    Adjacency,
    NormAdjacency,
    Laplacian,
    NormLaplacian,
}

impl ShiftKind {
    pub const ALL: [ShiftKind; 4] = [
        ShiftKind::Adjacency,
        ShiftKind::NormAdjacency,
        ShiftKind::Laplacian,
        ShiftKind::NormLaplacian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShiftKind::Adjacency => "adjacency",
            ShiftKind::NormAdjacency => "norm-adjacency",
            ShiftKind::Laplacian => "laplacian",
            ShiftKind::NormLaplacian => "norm-laplacian",
        }
    }

    /// Center and neighbor filter weights of one stage, before scaling.
    fn filter_base(self) -> (f64, f64) {
        match self {
            ShiftKind::Adjacency | ShiftKind::NormAdjacency => (0.0, 1.0),
            ShiftKind::Laplacian | ShiftKind::NormLaplacian => (1.0, -1.0),
        }
    }

    fn fusion(self) -> FusionMode {
        match self {
            ShiftKind::Adjacency | ShiftKind::Laplacian => FusionMode::Sum,
            ShiftKind::NormAdjacency | ShiftKind::NormLaplacian => FusionMode::Avg,
        }
    }
}

/// A compiled filter: the network, its fixed parameters, and the cover
/// it runs on.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub spec: ModelSpec,
    pub params: BTreeMap<String, Tensor>,
    pub cover: FlowCover,
}

/// Checks a graph is eligible for compilation. Isolated vertices cannot
/// be reached by any flow, so a filter with a constant term would have
/// nowhere to put it.
pub fn check_graph(graph: &Graph) -> Result<(), EquivError> {
    if graph.num_vertices() == 0 {
        return Err(EquivError::Precondition("the graph is empty".into()));
    }
    for v in 0..graph.num_vertices() {
        if graph.degree(v) == 0 {
            return Err(EquivError::Precondition(format!(
                "vertex {v} is isolated; compiled filters need every vertex on some flow"
            )));
        }
    }
    Ok(())
}

/// Checks a user-supplied cover can carry an exact compilation: it must
/// be valid, cover every edge exactly once with open paths, and leave no
/// vertex behind.
pub fn check_cover(graph: &Graph, cover: &FlowCover) -> Result<(), EquivError> {
    check_graph(graph)?;
    let report = validate_cover(graph, cover);
    if !report.is_valid() {
        let first = report
            .violations
            .first()
            .map(|v| v.to_string())
            .unwrap_or_else(|| "unknown violation".into());
        return Err(EquivError::Precondition(format!("invalid cover: {first}")));
    }
    if report.epsilon_measured < 1.0 {
        return Err(EquivError::Precondition(format!(
            "the cover reaches only {:.3} of the edges; exact compilation needs all of them",
            report.epsilon_measured
        )));
    }
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for flow in cover.flows() {
        for path in flow.paths() {
            if path.is_closed_loop() {
                return Err(EquivError::Precondition(
                    "closed loops cannot be laid out for exact compilation".into(),
                ));
            }
            for edge in path.edges() {
                if !seen.insert(edge) {
                    return Err(EquivError::Precondition(format!(
                        "edge ({}, {}) is covered twice; each edge must appear in exactly one path",
                        edge.0, edge.1
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Compile `p(S)` on its own single-edge matching cover.
pub fn compile(graph: &Graph, poly: &Polynomial, kind: ShiftKind) -> Result<Compiled, EquivError> {
    check_graph(graph)?;
    let cover = matching_cover(graph);
    compile_on(cover, poly, kind)
}

/// Compile `p(S)` on a caller-supplied cover.
///
/// Adjacency filters are exact on any admissible cover. The other kinds
/// count each vertex's path memberships as its degree, which only holds
/// when every path is a single edge, so for them the cover is refined to
/// the matching cover regardless.
pub fn compile_with_cover(
    graph: &Graph,
    cover: &FlowCover,
    poly: &Polynomial,
    kind: ShiftKind,
) -> Result<Compiled, EquivError> {
    check_cover(graph, cover)?;
    let cover = match kind {
        ShiftKind::Adjacency => cover.clone(),
        _ => matching_cover(graph),
    };
    compile_on(cover, poly, kind)
}

fn compile_on(
    cover: FlowCover,
    poly: &Polynomial,
    kind: ShiftKind,
) -> Result<Compiled, EquivError> {
    let mut layers = Vec::new();
    let mut skips = Vec::new();
    let mut params: BTreeMap<String, Tensor> = BTreeMap::new();

    let a0 = poly.coeff(0);
    let degrees = poly.nonzero_degrees_above_zero();

    if let Some(&top) = degrees.last() {
        // one conv+fusion stage per power of S; stage t sits at layer
        // index 2t-1 with its fusion at 2t
        let (center, neighbor) = kind.filter_base();
        let mut scale_of = vec![1.0; top + 1];
        let mut prev_coeff = if a0 != 0.0 { a0 } else { 1.0 };
        for &n_j in &degrees {
            let stage = top - n_j + 1;
            scale_of[stage] = poly.coeff(n_j) / prev_coeff;
            prev_coeff = poly.coeff(n_j);
            if n_j != top {
                skips.push((0, 2 * stage - 1));
            }
        }
        for stage in 1..=top {
            let gamma = scale_of[stage];
            layers.push(LayerSpec::Conv {
                taps: 3,
                stride: 1,
                padding: PaddingSpec::Same,
                out_channels: 1,
                share_across_flows: true,
                bias: false,
            });
            layers.push(LayerSpec::Fusion {
                mode: kind.fusion(),
            });
            let w = gamma * neighbor;
            let c = gamma * center;
            params.insert(
                format!("layer{}.conv.weight", 2 * stage - 1),
                Tensor::new(vec![3, 1, 1], vec![w, c, w]).unwrap(),
            );
        }
        if a0 != 0.0 {
            layers.push(LayerSpec::Scale { factor: a0 });
            skips.push((0, layers.len()));
        }
    } else {
        // constant polynomial, including the zero polynomial
        layers.push(LayerSpec::Scale { factor: a0 });
    }

    skips.sort_unstable();
    let spec = ModelSpec {
        in_channels: 1,
        layers,
        skips,
        head: HeadSpec::VertexAvg,
    };
    spec.check()?;
    Ok(Compiled {
        spec,
        params,
        cover,
    })
}

/// Outcome of checking a compiled filter against its dense oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub max_abs_err: f64,
    pub trials: usize,
    pub num_layers: usize,
    pub num_flows: usize,
}

/// Run the compiled network against dense polynomial evaluation on
/// random signals and report the largest absolute difference.
pub fn verify(
    graph: &Graph,
    poly: &Polynomial,
    kind: ShiftKind,
    seed: u64,
    trials: usize,
) -> Result<VerifyReport, EquivError> {
    let compiled = compile(graph, poly, kind)?;
    verify_compiled(graph, &compiled, poly, kind, seed, trials)
}

/// Like [`verify`], but for an already-compiled filter.
pub fn verify_compiled(
    graph: &Graph,
    compiled: &Compiled,
    poly: &Polynomial,
    kind: ShiftKind,
    seed: u64,
    trials: usize,
) -> Result<VerifyReport, EquivError> {
    let gfcn = Gfcn::new(graph, &compiled.cover, compiled.spec.clone())?;
    let n = graph.num_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs_err = 0.0f64;
    for _ in 0..trials.max(1) {
        let data: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Tensor::new(vec![n, 1], data).unwrap();
        let expect = apply_polynomial(graph, kind, poly, &x);
        let mut tape = Tape::new();
        let pass = gfcn.forward(&mut tape, &compiled.params, &x)?;
        let got = tape.value(pass.output);
        for (g, e) in got.data().iter().zip(expect.data()) {
            max_abs_err = max_abs_err.max((g - e).abs());
        }
    }
    Ok(VerifyReport {
        max_abs_err,
        trials: trials.max(1),
        num_layers: compiled.spec.layers.len(),
        num_flows: compiled.cover.num_flows(),
    })
}
