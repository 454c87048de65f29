use gfcn_graph::Graph;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{simulate, SimParams, Snapshot, SpreadError};

/// How to draw a labelled collection of epidemic snapshots. Sources
/// are uniform over the vertices and the infection and recovery rates
/// are redrawn per run, so the estimator has to cope with unknown
/// dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub count: usize,
    pub infection_range: (f64, f64),
    pub recovery_range: (f64, f64),
    pub stop_fraction: f64,
    pub max_steps: usize,
    /// Runs whose final snapshot shows fewer infected vertices than
    /// this are discarded and redrawn.
    pub min_infected: usize,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            count: 1000,
            infection_range: (0.1, 0.9),
            recovery_range: (0.0, 0.3),
            stop_fraction: 0.3,
            max_steps: 100,
            min_infected: 2,
            seed: 0,
        }
    }
}

pub fn make_dataset(graph: &Graph, config: &DatasetConfig) -> Result<Vec<Snapshot>, SpreadError> {
    let n = graph.num_vertices();
    if n == 0 {
        return Err(SpreadError::BadParams("the graph has no vertices".into()));
    }
    for (name, (lo, hi)) in [
        ("infection_range", config.infection_range),
        ("recovery_range", config.recovery_range),
    ] {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(SpreadError::BadParams(format!(
                "{name} must be an ordered pair within [0, 1], got ({lo}, {hi})"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.count);
    let mut attempts = 0usize;
    let budget = 200 * config.count.max(1);
    while out.len() < config.count {
        attempts += 1;
        if attempts > budget {
            return Err(SpreadError::Dataset(format!(
                "{} attempts produced only {} of {} usable snapshots; \
                 lower min_infected or adjust the rate ranges",
                attempts - 1,
                out.len(),
                config.count
            )));
        }
        let params = SimParams {
            infection_prob: draw(&mut rng, config.infection_range),
            recovery_prob: draw(&mut rng, config.recovery_range),
            stop_fraction: config.stop_fraction,
            max_steps: config.max_steps,
        };
        let source = rng.gen_range(0..n);
        let snap = simulate(graph, source, &params, &mut rng)?;
        if snap.num_infected() >= config.min_infected {
            out.push(snap);
        }
    }
    Ok(out)
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// One snapshot per line, as JSON.
pub fn snapshots_to_jsonl(snapshots: &[Snapshot]) -> String {
    let mut s = String::new();
    for snap in snapshots {
        s.push_str(&serde_json::to_string(snap).expect("snapshots always serialize"));
        s.push('\n');
    }
    s
}

pub fn snapshots_from_jsonl(text: &str) -> Result<Vec<Snapshot>, SpreadError> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(SpreadError::from))
        .collect()
}
