//! The train and eval subcommands.
//!
//! Both read the same configuration shape: flags merged over an
//! optional JSON config file. A train run writes its fully resolved
//! configuration next to the checkpoint, so `eval --model-dir` (or a
//! rerun via `--config`) reconstructs the exact same model and data
//! pipeline.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use gfcn_flow::{decompose, lattice_flows, DecomposeConfig, FlowCover};
use gfcn_graph::{parse_edge_list, Graph};
use gfcn_model::{
    evaluate, init_params, train, Gfcn, ModelSpec, Optimizer, Sample, TaskKind, TrainConfig,
};
use gfcn_spread::{snapshots_from_jsonl, Snapshot};
use gfcn_tensor::{params_from_json, params_to_json, Tensor};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{read_file, write_file, CliError};
use crate::idx::load_idx;
use crate::tasks::{
    default_mnist_spec, default_source_spec, jordan_topx, mnist_samples, model_topx,
    parse_percents, snapshot_samples, subset_indices,
};

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSON config file; explicit flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// "mnist" or "source-id"
    #[arg(long)]
    pub task: Option<String>,
    /// Edge-list file (source-id)
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Flow file; derived from the graph when omitted
    #[arg(long)]
    pub flows: Option<PathBuf>,
    /// Snapshot JSON lines (source-id)
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    /// IDX image file (mnist)
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// IDX label file (mnist)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Train on a seeded subset of this many samples
    #[arg(long)]
    pub subset: Option<usize>,
    /// Model spec JSON file; a built-in architecture when omitted
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// "adam" or "sgd"
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for config, checkpoint, and metrics
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory written by a train run
    #[arg(long)]
    pub model_dir: PathBuf,
    /// Evaluate on these snapshots instead of the training ones
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    /// Evaluate on this IDX image file
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Evaluate only a seeded subset of this many samples
    #[arg(long)]
    pub subset: Option<usize>,
    /// Top-percentage cutoffs for source scoring
    #[arg(long, default_value = "1,5,10")]
    pub percents: String,
    /// Also write the metrics to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Configuration file format; identical to the resolved config a train
/// run records.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFileConfig {
    pub task: Option<String>,
    pub graph: Option<String>,
    pub flows: Option<String>,
    pub snapshots: Option<String>,
    pub images: Option<String>,
    pub labels: Option<String>,
    pub subset: Option<usize>,
    /// Path to a model spec file; folded into `model_spec` on resolve.
    pub model_file: Option<String>,
    pub model_spec: Option<ModelSpec>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub optimizer: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskArg {
    Mnist,
    SourceId,
}

impl TaskArg {
    fn parse(text: &str) -> Result<Self, CliError> {
        match text.to_ascii_lowercase().as_str() {
            "mnist" => Ok(TaskArg::Mnist),
            "source-id" | "source_id" => Ok(TaskArg::SourceId),
            other => Err(CliError::input(format!(
                "unknown task {other:?}; use mnist or source-id"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            TaskArg::Mnist => "mnist",
            TaskArg::SourceId => "source-id",
        }
    }

    fn kind(self) -> TaskKind {
        match self {
            TaskArg::Mnist => TaskKind::GraphClass,
            TaskArg::SourceId => TaskKind::VertexClass,
        }
    }
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

/// Merge flags over the config file and fill defaults.
fn resolve(args: &TrainArgs) -> Result<TrainFileConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str::<TrainFileConfig>(&read_file(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => TrainFileConfig::default(),
    };
    cfg.task = args.task.clone().or(cfg.task);
    cfg.graph = path_string(&args.graph).or(cfg.graph);
    cfg.flows = path_string(&args.flows).or(cfg.flows);
    cfg.snapshots = path_string(&args.snapshots).or(cfg.snapshots);
    cfg.images = path_string(&args.images).or(cfg.images);
    cfg.labels = path_string(&args.labels).or(cfg.labels);
    cfg.subset = args.subset.or(cfg.subset);
    cfg.model_file = path_string(&args.model).or(cfg.model_file);
    cfg.epochs = args.epochs.or(cfg.epochs).or(Some(10));
    cfg.batch_size = args.batch_size.or(cfg.batch_size).or(Some(32));
    cfg.learning_rate = args.learning_rate.or(cfg.learning_rate).or(Some(0.001));
    cfg.optimizer = args.optimizer.clone().or(cfg.optimizer).or_else(|| Some("adam".into()));
    cfg.seed = args.seed.or(cfg.seed).or(Some(0));

    let task = TaskArg::parse(
        cfg.task
            .as_deref()
            .ok_or_else(|| CliError::input("no task given; use --task mnist or source-id"))?,
    )?;
    if cfg.model_spec.is_none() {
        cfg.model_spec = Some(match &cfg.model_file {
            Some(path) => ModelSpec::from_json(&read_file(Path::new(path))?)
                .map_err(|e| CliError::model(format!("{path}: {e}")))?,
            None => match task {
                TaskArg::Mnist => default_mnist_spec(),
                TaskArg::SourceId => default_source_spec(),
            },
        });
    }
    cfg.model_file = None;
    Ok(cfg)
}

struct LoadedData {
    graph: Graph,
    cover: FlowCover,
    samples: Vec<Sample>,
    /// Raw snapshots when the task is source identification.
    snapshots: Option<Vec<Snapshot>>,
}

fn require<'a>(field: &'a Option<String>, what: &str) -> Result<&'a str, CliError> {
    field
        .as_deref()
        .ok_or_else(|| CliError::input(format!("missing {what}")))
}

/// Load graph, flows, and samples for a resolved config. `subset`
/// selects a seeded sample subset; `None` takes everything.
fn load_data(
    task: TaskArg,
    cfg: &TrainFileConfig,
    subset: Option<usize>,
    seed: u64,
) -> Result<LoadedData, CliError> {
    match task {
        TaskArg::Mnist => {
            let data = load_idx(
                Path::new(require(&cfg.images, "--images (IDX file)")?),
                Path::new(require(&cfg.labels, "--labels (IDX file)")?),
            )?;
            let (graph, cover) = match (&cfg.graph, &cfg.flows) {
                (Some(g), Some(f)) => {
                    let graph = parse_edge_list(&read_file(Path::new(g))?)?;
                    let cover = gfcn_flow::cover_from_json(&read_file(Path::new(f))?)?;
                    (graph, cover)
                }
                _ => lattice_flows(data.rows, data.cols, true),
            };
            let indices = match subset {
                Some(count) => subset_indices(data.len(), count, seed),
                None => (0..data.len()).collect(),
            };
            let samples = mnist_samples(&data, &indices)?;
            Ok(LoadedData {
                graph,
                cover,
                samples,
                snapshots: None,
            })
        }
        TaskArg::SourceId => {
            let graph = parse_edge_list(&read_file(Path::new(require(
                &cfg.graph,
                "--graph (edge list)",
            )?))?)?;
            let cover = match &cfg.flows {
                Some(f) => gfcn_flow::cover_from_json(&read_file(Path::new(f))?)?,
                None => decompose(&graph, &DecomposeConfig::default())?,
            };
            let mut snaps = snapshots_from_jsonl(&read_file(Path::new(require(
                &cfg.snapshots,
                "--snapshots (JSON lines)",
            )?))?)?;
            if let Some(count) = subset {
                let indices = subset_indices(snaps.len(), count, seed);
                snaps = indices.into_iter().map(|i| snaps[i].clone()).collect();
            }
            let samples = snapshot_samples(&snaps, graph.num_vertices())?;
            Ok(LoadedData {
                graph,
                cover,
                samples,
                snapshots: Some(snaps),
            })
        }
    }
}

fn parse_optimizer(name: &str, learning_rate: f64) -> Result<Optimizer, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "adam" => Ok(Optimizer::Adam { learning_rate }),
        "sgd" => Ok(Optimizer::Sgd { learning_rate }),
        other => Err(CliError::input(format!(
            "unknown optimizer {other:?}; use adam or sgd"
        ))),
    }
}

pub fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let task = TaskArg::parse(cfg.task.as_deref().unwrap())?;
    let seed = cfg.seed.unwrap();
    let data = load_data(task, &cfg, cfg.subset, seed)?;
    let spec = cfg.model_spec.clone().unwrap();

    let gfcn = Gfcn::new(&data.graph, &data.cover, spec)?;
    let mut params = init_params(&gfcn, seed);
    let train_config = TrainConfig {
        epochs: cfg.epochs.unwrap(),
        batch_size: cfg.batch_size.unwrap(),
        optimizer: parse_optimizer(cfg.optimizer.as_deref().unwrap(), cfg.learning_rate.unwrap())?,
        seed,
        shuffle: true,
    };
    let report = train(
        &gfcn,
        &data.samples,
        &mut params,
        task.kind(),
        &train_config,
        |epoch, loss| eprintln!("epoch {:>3}: loss {loss:.6}", epoch + 1),
    )?;

    let final_loss = report.epoch_losses.last().copied().unwrap_or(f64::NAN);
    write_file(
        &args.out.join("config.json"),
        &format!("{}\n", serde_json::to_string_pretty(&cfg)?),
    )?;
    write_file(&args.out.join("checkpoint.json"), &params_to_json(&params)?)?;
    write_file(
        &args.out.join("metrics.json"),
        &format!(
            "{:#}\n",
            json!({
                "task": task.name(),
                "samples": data.samples.len(),
                "epochs": train_config.epochs,
                "epoch_losses": report.epoch_losses,
                "final_loss": final_loss,
            })
        ),
    )?;
    println!(
        "{}",
        json!({
            "command": "train",
            "task": task.name(),
            "samples": data.samples.len(),
            "epochs": train_config.epochs,
            "final_loss": final_loss,
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let config_path = args.model_dir.join("config.json");
    let mut cfg: TrainFileConfig = serde_json::from_str(&read_file(&config_path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", config_path.display())))?;
    let params: BTreeMap<String, Tensor> =
        params_from_json(&read_file(&args.model_dir.join("checkpoint.json"))?)?;

    let task = TaskArg::parse(
        cfg.task
            .as_deref()
            .ok_or_else(|| CliError::input("recorded config has no task"))?,
    )?;
    cfg.snapshots = path_string(&args.snapshots).or(cfg.snapshots);
    cfg.images = path_string(&args.images).or(cfg.images);
    cfg.labels = path_string(&args.labels).or(cfg.labels);
    let spec = cfg
        .model_spec
        .clone()
        .ok_or_else(|| CliError::input("recorded config has no model spec"))?;
    let seed = cfg.seed.unwrap_or(0);

    let data = load_data(task, &cfg, args.subset, seed)?;
    let gfcn = Gfcn::new(&data.graph, &data.cover, spec)?;
    let accuracy = evaluate(&gfcn, &params, &data.samples, task.kind())?;

    let mut metrics = json!({
        "command": "eval",
        "task": task.name(),
        "samples": data.samples.len(),
        "accuracy": accuracy,
    });
    if task == TaskArg::SourceId {
        let percents = parse_percents(&args.percents)?;
        let model = model_topx(&gfcn, &params, &data.samples, &percents)?;
        let snaps = data.snapshots.as_deref().unwrap_or(&[]);
        let jordan = jordan_topx(&data.graph, snaps, &percents)?;
        let as_map = |values: &[f64]| -> BTreeMap<String, f64> {
            percents
                .iter()
                .zip(values)
                .map(|(p, &v)| (format!("{p}"), v))
                .collect()
        };
        metrics["top_percent"] = json!(as_map(&model));
        metrics["jordan_top_percent"] = json!(as_map(&jordan));
    }
    println!("{metrics}");
    if let Some(out) = &args.out {
        write_file(out, &format!("{metrics:#}\n"))?;
    }
    Ok(())
}
