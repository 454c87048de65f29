//! Dataset assembly and built-in model architectures for the two
//! bundled experiments.

use std::collections::BTreeMap;

use gfcn_graph::Graph;
use gfcn_model::{
    predict, ActKind, FusionMode, Gfcn, HeadSpec, LayerSpec, ModelSpec, PaddingSpec, PoolMode,
    Sample, TaskKind,
};
use gfcn_spread::{jordan_scores, topx_hit, Snapshot};
use gfcn_tensor::Tensor;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::idx::MnistData;

/// Two convolution/pool stages over the lattice flows, then a dense
/// classifier over the flattened feature map.
pub fn default_mnist_spec() -> ModelSpec {
    let conv = |out_channels| LayerSpec::Conv {
        taps: 3,
        stride: 1,
        padding: PaddingSpec::Same,
        out_channels,
        share_across_flows: true,
        bias: true,
    };
    let pool = LayerSpec::Pool {
        window: 3,
        stride: 2,
        mode: PoolMode::Max,
    };
    let relu = LayerSpec::Activation {
        kind: ActKind::Relu,
    };
    ModelSpec {
        in_channels: 1,
        layers: vec![
            conv(16),
            relu.clone(),
            pool.clone(),
            conv(16),
            relu.clone(),
            pool,
            LayerSpec::Flatten,
            LayerSpec::Dense { out_features: 64 },
            relu,
            LayerSpec::Dense { out_features: 10 },
        ],
        skips: vec![],
        head: HeadSpec::Flat,
    }
}

/// Two convolution stages fused back onto vertices, scoring each vertex
/// as a possible epidemic source.
pub fn default_source_spec() -> ModelSpec {
    let conv = |out_channels| LayerSpec::Conv {
        taps: 3,
        stride: 1,
        padding: PaddingSpec::Same,
        out_channels,
        share_across_flows: true,
        bias: true,
    };
    let relu = LayerSpec::Activation {
        kind: ActKind::Relu,
    };
    ModelSpec {
        in_channels: 1,
        layers: vec![
            conv(8),
            relu.clone(),
            conv(8),
            relu,
            LayerSpec::Fusion {
                mode: FusionMode::Avg,
            },
        ],
        skips: vec![],
        head: HeadSpec::PerVertex { out_features: 1 },
    }
}

/// A seeded choice of `count` indices out of `total`, ascending.
pub fn subset_indices(total: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order.truncate(count.min(total));
    order.sort_unstable();
    order
}

pub fn mnist_samples(data: &MnistData, indices: &[usize]) -> Result<Vec<Sample>, CliError> {
    let pixels = data.rows * data.cols;
    indices
        .iter()
        .map(|&i| {
            let image = data
                .images
                .get(i)
                .ok_or_else(|| CliError::input(format!("image index {i} out of range")))?;
            Ok(Sample {
                input: Tensor::new(vec![pixels, 1], image.clone())
                    .map_err(|e| CliError::input(e.to_string()))?,
                label: data.labels[i],
            })
        })
        .collect()
}

pub fn snapshot_samples(snaps: &[Snapshot], num_vertices: usize) -> Result<Vec<Sample>, CliError> {
    snaps
        .iter()
        .enumerate()
        .map(|(i, snap)| {
            if snap.infected.len() != num_vertices {
                return Err(CliError::input(format!(
                    "snapshot {i} covers {} vertices but the graph has {num_vertices}",
                    snap.infected.len()
                )));
            }
            if snap.source >= num_vertices {
                return Err(CliError::input(format!(
                    "snapshot {i} names source {} outside the graph",
                    snap.source
                )));
            }
            let data = snap
                .infected
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect();
            Ok(Sample {
                input: Tensor::new(vec![num_vertices, 1], data)
                    .map_err(|e| CliError::input(e.to_string()))?,
                label: snap.source,
            })
        })
        .collect()
}

/// Fraction of samples whose true source lands in the model's top-x%
/// scores, for each requested percentage.
pub fn model_topx(
    gfcn: &Gfcn,
    params: &BTreeMap<String, Tensor>,
    samples: &[Sample],
    percents: &[f64],
) -> Result<Vec<f64>, CliError> {
    let mut hits = vec![0usize; percents.len()];
    for sample in samples {
        let scores = predict(gfcn, params, &sample.input, TaskKind::VertexClass)?;
        for (h, &p) in hits.iter_mut().zip(percents) {
            if topx_hit(&scores, sample.label, p)? {
                *h += 1;
            }
        }
    }
    Ok(hits
        .iter()
        .map(|&h| h as f64 / samples.len().max(1) as f64)
        .collect())
}

/// The Jordan-center baseline under the same metric. Snapshots with
/// nothing infected count as misses.
pub fn jordan_topx(
    graph: &Graph,
    snaps: &[Snapshot],
    percents: &[f64],
) -> Result<Vec<f64>, CliError> {
    let mut hits = vec![0usize; percents.len()];
    for snap in snaps {
        let infected = snap.infected_ids();
        if infected.is_empty() {
            continue;
        }
        let scores = jordan_scores(graph, &infected)?;
        for (h, &p) in hits.iter_mut().zip(percents) {
            if topx_hit(&scores, snap.source, p)? {
                *h += 1;
            }
        }
    }
    Ok(hits
        .iter()
        .map(|&h| h as f64 / snaps.len().max(1) as f64)
        .collect())
}

pub fn parse_percents(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|p| {
            let v: f64 = p
                .trim()
                .parse()
                .map_err(|_| CliError::input(format!("bad percentage {:?}", p.trim())))?;
            if !(v > 0.0 && v <= 100.0) {
                return Err(CliError::input(format!(
                    "percentage {v} outside (0, 100]"
                )));
            }
            Ok(v)
        })
        .collect()
}

pub fn parse_ids(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::input(format!("bad vertex id {:?}", p.trim())))
        })
        .collect()
}

/// Parses `"lo,hi"` or a single `"p"` into an inclusive range pair.
pub fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parse = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| CliError::input(format!("bad probability {p:?}")))
    };
    match parts.as_slice() {
        [single] => {
            let v = parse(single)?;
            Ok((v, v))
        }
        [lo, hi] => Ok((parse(lo)?, parse(hi)?)),
        _ => Err(CliError::input(format!(
            "expected \"p\" or \"lo,hi\", got {text:?}"
        ))),
    }
}
