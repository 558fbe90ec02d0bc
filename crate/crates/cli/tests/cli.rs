//! Black-box tests of the `echelon` binary: exit codes, artifact layout,
//! JSON summaries, and error wording.

use std::path::Path;
use std::process::{Command, Output};

fn echelon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_echelon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Small config so debug-build invocations stay fast.
const TINY_CONFIG: &str = r#"
seed = 7

[split]
train_periods = 14
test_periods = 7

[orders]
n_skus = 60
orders_per_day = 120
n_clusters = 6

[demand]
n_skus = 8
n_fdcs = 2
order_up_to = 120

[policy]
kinds = ["params"]
scenarios = 3
z_grid = [0.0, 1.0]
d_grid = [1.0]
"#;

fn write_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, TINY_CONFIG).unwrap();
    path
}

#[test]
fn bench_emits_the_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = echelon(&[
        "bench",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let summary = stdout_json(&out);
    assert_eq!(summary["seed"], 7);
    assert!(summary["k"].as_u64().unwrap() > 0);

    for name in [
        "orders_train.csv",
        "orders_test.csv",
        "daily_counts.csv",
        "demand.csv",
        "replenishment.csv",
        "assortment_topk.csv",
        "assortment_mltopk.csv",
        "assortment_reverse.csv",
        "assortment_hybrid.csv",
        "ratio_sweep.csv",
        "fulfillment_table.csv",
        "policy_table.csv",
        "params_search.csv",
        "params_params.csv",
        "trajectory_params.ndjson",
        "report_params.json",
        "run_summary.json",
    ] {
        assert!(out_dir.join(name).exists(), "missing artifact {name}");
    }

    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("run_summary.json")).unwrap())
            .unwrap();
    assert_eq!(on_disk, summary, "printed summary must match the saved one");
}

#[test]
fn stage_subcommands_compose_through_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out_dir = dir.path().join("out");
    let base = [
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ];

    let gen = stdout_json(&echelon(&[&["gen-orders"], &base[..]].concat()));
    assert!(gen["train_orders"].as_u64().unwrap() > 0);

    let assort = stdout_json(&echelon(
        &[&["assort", "--method", "topk", "--k", "20"], &base[..]].concat(),
    ));
    assert_eq!(assort["k"], 20);
    let train_rate = assort["train_rate"].as_f64().unwrap();

    // Scoring the emitted file against the training split must reproduce
    // the rate the assort step reported.
    let assortment_path = out_dir.join("assortment_topk.csv");
    let train_path = out_dir.join("orders_train.csv");
    let eval = stdout_json(&echelon(
        &[
            &[
                "eval-assort",
                "--assortment",
                assortment_path.to_str().unwrap(),
                "--orders",
                train_path.to_str().unwrap(),
            ],
            &base[..],
        ]
        .concat(),
    ));
    assert_eq!(eval["k"], 20);
    assert!((eval["rate"].as_f64().unwrap() - train_rate).abs() < 1e-12);

    stdout_json(&echelon(&[&["gen-demand"], &base[..]].concat()));
    let sim = stdout_json(&echelon(
        &[&["simulate", "--policy", "params"], &base[..]].concat(),
    ));
    assert_eq!(sim["policy"], "params");
    assert!(sim["total_cost"].as_f64().unwrap() >= 0.0);
    assert!(out_dir.join("trajectory_params.ndjson").exists());
}

#[test]
fn rerunning_bench_reproduces_every_artifact_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let mut listings = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = echelon(&[
            "bench",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        stdout_json(&out);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        listings.push(files);
    }
    assert_eq!(
        listings[0].len(),
        listings[1].len(),
        "runs produced different artifact sets"
    );
    for (a, b) in listings[0].iter().zip(&listings[1]) {
        assert_eq!(a.0, b.0, "artifact sets diverge");
        assert_eq!(a.1, b.1, "artifact {} differs between runs", a.0);
    }
}

#[test]
fn unknown_config_keys_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\n[orders]\nnskus = 10\n").unwrap();
    let out = echelon(&["bench", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(
        stderr_of(&out).contains("nskus"),
        "error must name the unknown key: {}",
        stderr_of(&out)
    );
}

#[test]
fn conflicting_size_flags_fail_fast() {
    let dir = tempfile::tempdir().unwrap();
    let out = echelon(&[
        "assort",
        "--method",
        "topk",
        "--k",
        "5",
        "--coverage",
        "0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr_of(&out).contains("mutually exclusive"));
}

#[test]
fn missing_prerequisites_point_at_the_generating_stage() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--out", dir.path().to_str().unwrap()];

    let out = echelon(&[&["assort", "--method", "topk", "--k", "5"], &base[..]].concat());
    assert!(!out.status.success());
    assert!(
        stderr_of(&out).contains("run gen-orders first"),
        "got: {}",
        stderr_of(&out)
    );

    let out = echelon(&[&["simulate", "--policy", "myopic"], &base[..]].concat());
    assert!(!out.status.success());
    let err = stderr_of(&out);
    assert!(err.contains("stage simulate"), "got: {err}");
    assert!(err.contains("run gen-demand first"), "got: {err}");
}

#[test]
fn dp_oracle_solves_an_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("instance.json");
    // One sku, one FDC, no lead time: shipping a unit (cost 1) beats
    // spilling it (cost 2), so the optimum ships exactly the demand.
    std::fs::write(
        &instance,
        serde_json::json!({
            "lead_time": 0,
            "spillover_cost": 2.0,
            "lost_sale_cost": 10.0,
            "transfer_cost": 1.0,
            "rdc_on_hand": 10,
            "fdc_on_hand": [0],
            "demand": [[{"rdc": 0, "fdc": [2], "prob": 1.0}]],
            "replenishment": [0]
        })
        .to_string(),
    )
    .unwrap();
    let out = echelon(&[
        "dp-oracle",
        "--instance",
        instance.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let report = stdout_json(&out);
    assert_eq!(report["expected_cost"], 2.0);
    assert!(dir.path().join("dp_solution.json").exists());
}
