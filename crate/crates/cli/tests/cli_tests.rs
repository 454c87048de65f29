use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

/// Six-vertex tree with maximum degree 3: two flows when decomposed exactly.
const TREE: &str = "0 1\n1 2\n2 3\n1 4\n4 5\n";
/// Six-vertex ring with two chords; every vertex has degree at least 2.
const RING: &str = "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n0 3\n1 4\n";
const PATH3: &str = "0 1\n1 2\n";

fn gfcn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfcn"))
        .args(args)
        .output()
        .expect("the gfcn binary should run")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("the process should exit on its own")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout should hold json: {e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).expect("writing a fixture should work");
    path.to_str().expect("temp paths are utf-8").to_owned()
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().expect("temp paths are utf-8").to_owned()
}

fn mnist_file(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/mnist")
        .join(name)
        .to_str()
        .expect("repo paths are utf-8")
        .to_owned()
}

#[test]
fn decompose_emits_stats_and_a_cover_that_revalidates() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "tree.edges", TREE);
    let flows = path_str(dir.path(), "flows.json");

    let out = gfcn(&[
        "decompose",
        "--graph",
        &graph,
        "--strategy",
        "tree-exact",
        "--out",
        &flows,
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));
    let stats = stdout_json(&out);
    assert_eq!(stats["command"], "decompose");
    assert_eq!(stats["num_flows"], 2);
    assert_eq!(stats["expected_flows"], 2);
    assert_eq!(stats["epsilon_measured"], 1.0);
    assert_eq!(stats["within_bound"], true);

    let check = gfcn(&["validate", "--graph", &graph, "--flows", &flows]);
    assert_eq!(code(&check), 0, "stderr: {}", stderr_text(&check));
    let report = stdout_json(&check);
    assert_eq!(report["valid"], true);
    assert_eq!(report["epsilon_measured"], 1.0);
}

#[test]
fn decompose_exits_3_when_the_coverage_target_is_unmet() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    let flows = path_str(dir.path(), "flows.json");

    let out = gfcn(&[
        "decompose",
        "--graph",
        &graph,
        "--strategy",
        "centered",
        "--centers",
        "0",
        "--window-len",
        "3",
        "--out",
        &flows,
    ]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("target"));
    // The stats line and the cover file are still produced for inspection.
    assert_eq!(stdout_json(&out)["command"], "decompose");
    assert!(dir.path().join("flows.json").exists());
}

#[test]
fn decompose_rejects_a_non_tree_under_the_exact_strategy() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    let out = gfcn(&[
        "decompose",
        "--graph",
        &graph,
        "--strategy",
        "tree-exact",
        "--out",
        &path_str(dir.path(), "flows.json"),
    ]);
    assert_eq!(code(&out), 5, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("tree"));
}

#[test]
fn missing_input_files_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = gfcn(&[
        "decompose",
        "--graph",
        &path_str(dir.path(), "absent.edges"),
        "--out",
        &path_str(dir.path(), "flows.json"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr_text(&out).contains("absent.edges"));
}

#[test]
fn validate_reports_violations_and_exits_5() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    // Two paths in the same flow share vertex 1, so they are not parallel.
    let flows = write(
        dir.path(),
        "bad.json",
        r#"{"graph":"ring","epsilon":1.0,"flows":[[[0,1],[1,2]]]}"#,
    );

    let out = gfcn(&["validate", "--graph", &graph, "--flows", &flows]);
    assert_eq!(code(&out), 5, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("cover is invalid"));
    let report = stdout_json(&out);
    assert_eq!(report["valid"], false);
    assert!(!report["violations"].as_array().unwrap().is_empty());
}

#[test]
fn equiv_check_prints_one_line_per_poly_and_operator() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "tree.edges", TREE);
    let out = gfcn(&[
        "equiv-check",
        "--graph",
        &graph,
        "--poly",
        "2,0,1",
        "--poly",
        "0,1",
        "--op",
        "all",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));

    let lines: Vec<Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is a json object"))
        .collect();
    assert_eq!(lines.len(), 8, "two polynomials across four operators");
    for line in &lines {
        assert_eq!(line["pass"], true, "line: {line}");
        assert!(line["max_abs_err"].as_f64().unwrap() < 1e-9);
        assert!(line["layers"].as_u64().unwrap() >= 1);
    }
    let ops: Vec<&str> = lines.iter().filter_map(|l| l["op"].as_str()).collect();
    for op in ["adjacency", "norm-adjacency", "laplacian", "norm-laplacian"] {
        assert_eq!(ops.iter().filter(|&&o| o == op).count(), 2);
    }
}

#[test]
fn equiv_check_rejects_a_cover_with_a_duplicated_edge() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "path.edges", PATH3);
    // Both edges are covered, but 0-1 appears in two different flows.
    let flows = write(
        dir.path(),
        "dup.json",
        r#"{"graph":"path","epsilon":1.0,"flows":[[[0,1,2]],[[0,1]]]}"#,
    );
    let out = gfcn(&[
        "equiv-check",
        "--graph",
        &graph,
        "--poly",
        "0,1",
        "--op",
        "a",
        "--flows",
        &flows,
    ]);
    assert_eq!(code(&out), 5, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("covered twice"));
}

#[test]
fn equiv_check_rejects_an_unknown_operator() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "path.edges", PATH3);
    let out = gfcn(&["equiv-check", "--graph", &graph, "--poly", "0,1", "--op", "bogus"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_text(&out).contains("unknown operator"));
}

#[test]
fn jordan_names_the_midpoint_of_a_path() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "path.edges", PATH3);
    let out = gfcn(&["jordan", "--graph", &graph, "--infected", "0,2"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));
    let report = stdout_json(&out);
    assert_eq!(report["center"], 1);
    assert_eq!(report["centers"], serde_json::json!([1]));
    assert_eq!(report["eccentricity"], 1.0);
}

#[test]
fn product_of_two_paths_is_a_grid() {
    let dir = TempDir::new().unwrap();
    let left = write(dir.path(), "p.edges", PATH3);
    let out_path = path_str(dir.path(), "grid.edges");
    let out = gfcn(&["product", "--left", &left, "--right", &left, "--out", &out_path]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));
    let stats = stdout_json(&out);
    assert_eq!(stats["num_vertices"], 9);
    assert_eq!(stats["num_edges"], 12);
    let text = fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn simulate_writes_parseable_snapshots_and_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    let first = path_str(dir.path(), "a.jsonl");
    let second = path_str(dir.path(), "b.jsonl");
    let args = |out: &str| {
        vec![
            "simulate".to_owned(),
            "--graph".to_owned(),
            graph.clone(),
            "--count".to_owned(),
            "30".to_owned(),
            "--seed".to_owned(),
            "11".to_owned(),
            "--out".to_owned(),
            out.to_owned(),
        ]
    };

    let run_a = gfcn(&args(&first).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&run_a), 0, "stderr: {}", stderr_text(&run_a));
    let run_b = gfcn(&args(&second).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&run_b), 0);

    let text_a = fs::read_to_string(&first).unwrap();
    let text_b = fs::read_to_string(&second).unwrap();
    assert_eq!(text_a, text_b, "same seed must give byte-identical datasets");
    assert_eq!(text_a.lines().count(), 30);
    for line in text_a.lines() {
        let snap: Value = serde_json::from_str(line).unwrap();
        assert!(snap["source"].as_u64().unwrap() < 6);
        assert_eq!(snap["infected"].as_array().unwrap().len(), 6);
        assert!(snap["p_i"].as_f64().is_some());
        assert!(snap["p_r"].as_f64().is_some());
    }
    let stats = stdout_json(&run_a);
    assert_eq!(stats["count"], 30);
    assert!(stats["mean_infected_fraction"].as_f64().unwrap() > 0.0);
}

#[test]
fn train_then_eval_round_trip_on_a_source_task() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    let snaps = path_str(dir.path(), "snaps.jsonl");
    let run = gfcn(&[
        "simulate", "--graph", &graph, "--count", "50", "--seed", "7", "--out", &snaps,
    ]);
    assert_eq!(code(&run), 0, "stderr: {}", stderr_text(&run));

    let model_dir = path_str(dir.path(), "run");
    let train = gfcn(&[
        "train",
        "--task",
        "source-id",
        "--graph",
        &graph,
        "--snapshots",
        &snaps,
        "--epochs",
        "2",
        "--seed",
        "1",
        "--out",
        &model_dir,
    ]);
    assert_eq!(code(&train), 0, "stderr: {}", stderr_text(&train));
    let summary = stdout_json(&train);
    assert_eq!(summary["task"], "source-id");
    assert_eq!(summary["samples"], 50);
    assert!(summary["final_loss"].as_f64().unwrap() > 0.0);
    for name in ["config.json", "checkpoint.json", "metrics.json"] {
        assert!(dir.path().join("run").join(name).exists(), "{name} missing");
    }

    let metrics_out = path_str(dir.path(), "eval.json");
    let eval = gfcn(&[
        "eval",
        "--model-dir",
        &model_dir,
        "--snapshots",
        &snaps,
        "--out",
        &metrics_out,
    ]);
    assert_eq!(code(&eval), 0, "stderr: {}", stderr_text(&eval));
    let metrics = stdout_json(&eval);
    assert!(metrics["accuracy"].as_f64().unwrap() >= 0.0);
    for key in ["1", "5", "10"] {
        assert!(metrics["top_percent"][key].as_f64().is_some());
        assert!(metrics["jordan_top_percent"][key].as_f64().is_some());
    }
    let saved: Value = serde_json::from_str(&fs::read_to_string(&metrics_out).unwrap()).unwrap();
    assert_eq!(saved["accuracy"], metrics["accuracy"]);
}

#[test]
fn train_flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    let snaps = path_str(dir.path(), "snaps.jsonl");
    let run = gfcn(&[
        "simulate", "--graph", &graph, "--count", "20", "--seed", "3", "--out", &snaps,
    ]);
    assert_eq!(code(&run), 0, "stderr: {}", stderr_text(&run));

    let config = write(
        dir.path(),
        "train.json",
        &format!(
            r#"{{"task":"source-id","graph":{:?},"snapshots":{:?},"epochs":4,"seed":9}}"#,
            graph, snaps
        ),
    );
    let model_dir = path_str(dir.path(), "run");
    let train = gfcn(&[
        "train", "--config", &config, "--epochs", "1", "--out", &model_dir,
    ]);
    assert_eq!(code(&train), 0, "stderr: {}", stderr_text(&train));

    let resolved: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/config.json")).unwrap())
            .unwrap();
    assert_eq!(resolved["epochs"], 1, "the flag wins over the file");
    assert_eq!(resolved["seed"], 9, "unset flags fall back to the file");
    assert_eq!(resolved["task"], "source-id");
}

#[test]
fn rerunning_a_recorded_config_reproduces_the_checkpoint() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    let snaps = path_str(dir.path(), "snaps.jsonl");
    let run = gfcn(&[
        "simulate", "--graph", &graph, "--count", "30", "--seed", "5", "--out", &snaps,
    ]);
    assert_eq!(code(&run), 0, "stderr: {}", stderr_text(&run));

    let first_dir = path_str(dir.path(), "first");
    let train = gfcn(&[
        "train",
        "--task",
        "source-id",
        "--graph",
        &graph,
        "--snapshots",
        &snaps,
        "--epochs",
        "2",
        "--seed",
        "4",
        "--out",
        &first_dir,
    ]);
    assert_eq!(code(&train), 0, "stderr: {}", stderr_text(&train));

    let second_dir = path_str(dir.path(), "second");
    let config = path_str(dir.path(), "first/config.json");
    let again = gfcn(&["train", "--config", &config, "--out", &second_dir]);
    assert_eq!(code(&again), 0, "stderr: {}", stderr_text(&again));

    let a = fs::read(dir.path().join("first/checkpoint.json")).unwrap();
    let b = fs::read(dir.path().join("second/checkpoint.json")).unwrap();
    assert_eq!(a, b, "the recorded config must reproduce the weights exactly");
}

#[test]
fn train_surfaces_model_errors_with_exit_4() {
    let dir = TempDir::new().unwrap();
    let graph = write(dir.path(), "ring.edges", RING);
    let snaps = path_str(dir.path(), "snaps.jsonl");
    let run = gfcn(&[
        "simulate", "--graph", &graph, "--count", "10", "--seed", "2", "--out", &snaps,
    ]);
    assert_eq!(code(&run), 0, "stderr: {}", stderr_text(&run));

    // Same-padded convolutions need an odd tap count; four taps is invalid.
    let model = write(
        dir.path(),
        "model.json",
        r#"{
            "in_channels": 1,
            "layers": [
                {"type": "conv", "taps": 4, "stride": 1, "padding": "same", "out_channels": 2}
            ],
            "skips": [],
            "head": "vertex_avg"
        }"#,
    );
    let train = gfcn(&[
        "train",
        "--task",
        "source-id",
        "--graph",
        &graph,
        "--snapshots",
        &snaps,
        "--model",
        &model,
        "--epochs",
        "1",
        "--out",
        &path_str(dir.path(), "run"),
    ]);
    assert_eq!(code(&train), 4, "stderr: {}", stderr_text(&train));
    assert!(stderr_text(&train).contains("layer 1"));
}

#[test]
fn mnist_prepare_summarizes_the_lattice() {
    let dir = TempDir::new().unwrap();
    let out_dir = path_str(dir.path(), "mnist");
    let out = gfcn(&[
        "mnist-prepare",
        "--images",
        &mnist_file("train-images-idx3-ubyte"),
        "--labels",
        &mnist_file("train-labels-idx1-ubyte"),
        "--count",
        "50",
        "--seed",
        "3",
        "--out",
        &out_dir,
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_text(&out));
    let summary = stdout_json(&out);
    assert_eq!(summary["rows"], 28);
    assert_eq!(summary["cols"], 28);
    assert_eq!(summary["count_selected"], 50);
    assert_eq!(summary["num_flows"], 4);
    let histogram = summary["label_histogram"].as_array().unwrap();
    assert_eq!(histogram.len(), 10);
    let total: u64 = histogram.iter().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(total, 50);
    assert!(dir.path().join("mnist/graph.edges").exists());
    assert!(dir.path().join("mnist/flows.json").exists());
}

#[test]
fn mnist_prepare_rejects_a_wrong_magic_number() {
    let dir = TempDir::new().unwrap();
    let images = dir.path().join("fake-images");
    let labels = dir.path().join("fake-labels");
    // Image magic must be 0x00000803; hand it the label magic instead.
    fs::write(&images, [0u8, 0, 8, 1, 0, 0, 0, 0]).unwrap();
    fs::write(&labels, [0u8, 0, 8, 1, 0, 0, 0, 0]).unwrap();
    let out = gfcn(&[
        "mnist-prepare",
        "--images",
        images.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--out",
        &path_str(dir.path(), "mnist"),
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("magic"));
}
