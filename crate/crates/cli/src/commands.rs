//! The non-training subcommands.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gfcn_equiv::{compile, compile_with_cover, verify_compiled, Polynomial, ShiftKind};
use gfcn_flow::{
    cover_from_json, cover_to_json, decompose, exact_flow_count, flow_count_bound, lattice_flows,
    validate_cover, DecomposeConfig, Strategy,
};
use gfcn_graph::{parse_edge_list, serialize_edge_list};
use gfcn_spread::{jordan_scores, make_dataset, snapshots_to_jsonl, top_k, DatasetConfig};
use serde_json::json;

use crate::error::{read_file, write_file, CliError};
use crate::idx::load_idx;
use crate::tasks::{parse_ids, parse_range, subset_indices};

pub const EQUIV_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    TreeExact,
    BfsPeel,
    DfsPeel,
    Centered,
}

impl StrategyArg {
    fn to_strategy(self) -> Strategy {
        match self {
            StrategyArg::TreeExact => Strategy::TreeExact,
            StrategyArg::BfsPeel => Strategy::BfsPeel,
            StrategyArg::DfsPeel => Strategy::DfsPeel,
            StrategyArg::Centered => Strategy::Centered,
        }
    }

    fn name(self) -> &'static str {
        match self {
            StrategyArg::TreeExact => "tree-exact",
            StrategyArg::BfsPeel => "bfs-peel",
            StrategyArg::DfsPeel => "dfs-peel",
            StrategyArg::Centered => "centered",
        }
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Edge-list file of the graph to decompose
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = StrategyArg::BfsPeel)]
    pub strategy: StrategyArg,
    /// Fraction of edges the flows must cover
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Split or drop paths to keep lengths at least this many vertices
    #[arg(long, default_value_t = 1)]
    pub min_path_len: usize,
    /// Split paths longer than this many vertices
    #[arg(long)]
    pub max_path_len: Option<usize>,
    /// Center vertices for the centered strategy, comma separated
    #[arg(long)]
    pub centers: Option<String>,
    /// Window length for the centered strategy
    #[arg(long, default_value_t = 5)]
    pub window_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the flow file
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<(), CliError> {
    let graph = parse_edge_list(&read_file(&args.graph)?)?;
    let config = DecomposeConfig {
        strategy: args.strategy.to_strategy(),
        epsilon_target: args.epsilon,
        min_path_len: args.min_path_len,
        max_path_len: args.max_path_len,
        centers: match &args.centers {
            Some(text) => parse_ids(text)?,
            None => Vec::new(),
        },
        window_len: args.window_len,
        seed: args.seed,
    };
    let cover = decompose(&graph, &config)?;
    write_file(&args.out, &cover_to_json(&cover))?;

    let d_max = graph.max_degree();
    let k = exact_flow_count(d_max);
    let bound = flow_count_bound(d_max);
    let mut stats = json!({
        "command": "decompose",
        "graph": args.graph.display().to_string(),
        "strategy": args.strategy.name(),
        "epsilon_target": args.epsilon,
        "min_path_len": args.min_path_len,
        "max_path_len": args.max_path_len,
        "seed": args.seed,
        "num_vertices": graph.num_vertices(),
        "num_edges": graph.num_edges(),
        "max_degree": d_max,
        "num_flows": cover.num_flows(),
        "epsilon_measured": cover.epsilon(),
        "bound": bound,
        "within_bound": cover.num_flows() <= bound,
        "out": args.out.display().to_string(),
    });
    if args.strategy == StrategyArg::TreeExact {
        stats["expected_flows"] = json!(k);
    }
    println!("{stats}");

    if cover.epsilon() < args.epsilon - 1e-12 {
        return Err(CliError::target(format!(
            "covered {:.4} of the edges, target was {}",
            cover.epsilon(),
            args.epsilon
        )));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Flow file to check against the graph
    #[arg(long)]
    pub flows: PathBuf,
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<(), CliError> {
    let graph = parse_edge_list(&read_file(&args.graph)?)?;
    let cover = cover_from_json(&read_file(&args.flows)?)?;
    let report = validate_cover(&graph, &cover);
    let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    println!(
        "{}",
        json!({
            "command": "validate",
            "valid": report.is_valid(),
            "epsilon_measured": report.epsilon_measured,
            "num_flows": cover.num_flows(),
            "violations": violations,
        })
    );
    if !report.is_valid() {
        return Err(CliError::precondition(format!(
            "cover is invalid: {}",
            violations.first().map(String::as_str).unwrap_or("unknown")
        )));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ProductArgs {
    /// Edge-list file of the left factor
    #[arg(long)]
    pub left: PathBuf,
    /// Edge-list file of the right factor
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_product(args: &ProductArgs) -> Result<(), CliError> {
    let left = parse_edge_list(&read_file(&args.left)?)?;
    let right = parse_edge_list(&read_file(&args.right)?)?;
    let product = left.product(&right);
    write_file(&args.out, &serialize_edge_list(&product))?;
    println!(
        "{}",
        json!({
            "command": "product",
            "num_vertices": product.num_vertices(),
            "num_edges": product.num_edges(),
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Number of snapshots to generate
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Per-run infection probability, "p" or "lo,hi"
    #[arg(long, default_value = "0.1,0.9")]
    pub infection: String,
    /// Per-run recovery probability, "p" or "lo,hi"
    #[arg(long, default_value = "0.0,0.3")]
    pub recovery: String,
    #[arg(long, default_value_t = 0.3)]
    pub stop_fraction: f64,
    #[arg(long, default_value_t = 100)]
    pub max_steps: usize,
    /// Redraw runs that end with fewer infected vertices than this
    #[arg(long, default_value_t = 2)]
    pub min_infected: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the snapshot JSON lines
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let graph = parse_edge_list(&read_file(&args.graph)?)?;
    let config = DatasetConfig {
        count: args.count,
        infection_range: parse_range(&args.infection)?,
        recovery_range: parse_range(&args.recovery)?,
        stop_fraction: args.stop_fraction,
        max_steps: args.max_steps,
        min_infected: args.min_infected,
        seed: args.seed,
    };
    let snaps = make_dataset(&graph, &config)?;
    write_file(&args.out, &snapshots_to_jsonl(&snaps))?;

    let n = graph.num_vertices().max(1);
    let mean_fraction = snaps
        .iter()
        .map(|s| s.num_infected() as f64 / n as f64)
        .sum::<f64>()
        / snaps.len().max(1) as f64;
    println!(
        "{}",
        json!({
            "command": "simulate",
            "graph": args.graph.display().to_string(),
            "config": config,
            "count": snaps.len(),
            "mean_infected_fraction": mean_fraction,
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct JordanArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Infected vertex ids, comma separated
    #[arg(long)]
    pub infected: String,
}

pub fn cmd_jordan(args: &JordanArgs) -> Result<(), CliError> {
    let graph = parse_edge_list(&read_file(&args.graph)?)?;
    let infected = parse_ids(&args.infected)?;
    let scores = jordan_scores(&graph, &infected)?;
    let center = top_k(&scores, 1)[0];
    let centers: Vec<usize> = (0..scores.len())
        .filter(|&v| scores[v] == scores[center])
        .collect();
    println!(
        "{}",
        json!({
            "command": "jordan",
            "center": center,
            "centers": centers,
            "eccentricity": -scores[center],
        })
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Polynomial coefficients, lowest degree first ("2,0,1" is 2 + S^2);
    /// repeat for several polynomials
    #[arg(long = "poly", required = true)]
    pub polys: Vec<String>,
    /// Shift operator: A, Atilde, L, Ltilde, or all; repeatable
    #[arg(long = "op", default_value = "all")]
    pub ops: Vec<String>,
    /// Check on this flow cover instead of the built-in matching cover
    #[arg(long)]
    pub flows: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random signals per check
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
}

fn parse_ops(texts: &[String]) -> Result<Vec<ShiftKind>, CliError> {
    let mut kinds = Vec::new();
    for text in texts {
        match text.to_ascii_lowercase().as_str() {
            "a" | "adjacency" => kinds.push(ShiftKind::Adjacency),
            "atilde" | "norm-adjacency" => kinds.push(ShiftKind::NormAdjacency),
            "l" | "laplacian" => kinds.push(ShiftKind::Laplacian),
            "ltilde" | "norm-laplacian" => kinds.push(ShiftKind::NormLaplacian),
            "all" => kinds.extend(ShiftKind::ALL),
            other => {
                return Err(CliError::input(format!(
                    "unknown operator {other:?}; use A, Atilde, L, Ltilde, or all"
                )))
            }
        }
    }
    kinds.dedup();
    Ok(kinds)
}

pub fn cmd_equiv_check(args: &EquivArgs) -> Result<(), CliError> {
    let graph = parse_edge_list(&read_file(&args.graph)?)?;
    let kinds = parse_ops(&args.ops)?;
    let polys: Vec<Polynomial> = args
        .polys
        .iter()
        .map(|text| text.parse().map_err(CliError::input))
        .collect::<Result<_, _>>()?;
    let user_cover = match &args.flows {
        Some(path) => Some(cover_from_json(&read_file(path)?)?),
        None => None,
    };

    let mut worst = 0.0f64;
    for poly in &polys {
        for &kind in &kinds {
            let compiled = match &user_cover {
                Some(cover) => compile_with_cover(&graph, cover, poly, kind)?,
                None => compile(&graph, poly, kind)?,
            };
            let report =
                verify_compiled(&graph, &compiled, poly, kind, args.seed, args.trials)?;
            worst = worst.max(report.max_abs_err);
            println!(
                "{}",
                json!({
                    "poly": poly.to_string(),
                    "coeffs": poly.coeffs(),
                    "op": kind.name(),
                    "layers": report.num_layers,
                    "flows": report.num_flows,
                    "trials": report.trials,
                    "max_abs_err": report.max_abs_err,
                    "pass": report.max_abs_err < EQUIV_TOLERANCE,
                })
            );
        }
    }
    if worst >= EQUIV_TOLERANCE {
        return Err(CliError::target(format!(
            "max deviation {worst:e} is at or above {EQUIV_TOLERANCE:e}"
        )));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct MnistPrepareArgs {
    /// IDX image file
    #[arg(long)]
    pub images: PathBuf,
    /// IDX label file
    #[arg(long)]
    pub labels: PathBuf,
    /// Keep a seeded subset of this many images in the summary
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the lattice graph, flow file, and summary
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_mnist_prepare(args: &MnistPrepareArgs) -> Result<(), CliError> {
    let data = load_idx(&args.images, &args.labels)?;
    let (graph, cover) = lattice_flows(data.rows, data.cols, true);
    write_file(&args.out.join("graph.edges"), &serialize_edge_list(&graph))?;
    write_file(&args.out.join("flows.json"), &cover_to_json(&cover))?;

    let selected = match args.count {
        Some(count) => subset_indices(data.len(), count, args.seed),
        None => (0..data.len()).collect(),
    };
    let mut histogram = [0usize; 10];
    for &i in &selected {
        histogram[data.labels[i]] += 1;
    }
    let summary = json!({
        "command": "mnist-prepare",
        "images": args.images.display().to_string(),
        "labels": args.labels.display().to_string(),
        "rows": data.rows,
        "cols": data.cols,
        "count_total": data.len(),
        "count_selected": selected.len(),
        "seed": args.seed,
        "label_histogram": histogram.to_vec(),
        "num_flows": cover.num_flows(),
        "out": args.out.display().to_string(),
    });
    write_file(
        &args.out.join("summary.json"),
        &format!("{:#}\n", summary),
    )?;
    println!("{summary}");
    Ok(())
}
