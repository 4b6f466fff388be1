use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cbnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbnn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_split_fit_evaluate_bootstrap() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    assert_ok(&cbnn(&["simulate", "--n", "600", "--seed", "3", "--out", p(&data)]));
    let text = fs::read_to_string(&data).unwrap();
    assert!(text.starts_with("time,status,z1,z2,z3\n"));
    assert_eq!(text.lines().count(), 601);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sim.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["n"], 600);

    let parts = dir.path().join("parts");
    assert_ok(&cbnn(&["split", "--data", p(&data), "--seed", "4", "--out", p(&parts)]));
    for f in ["train.csv", "validation.csv", "test.csv"] {
        assert!(parts.join(f).exists());
    }

    let network = dir.path().join("network.json");
    fs::write(&network, r#"{"hidden_layers": [8, 4], "epochs": 3, "num_batches": 10}"#).unwrap();
    let cbnn_dir = dir.path().join("cbnn");
    let moments = dir.path().join("moments.csv");
    assert_ok(&cbnn(&[
        "fit",
        "--data",
        p(&parts.join("train.csv")),
        "--time-col",
        "time",
        "--status-col",
        "status",
        "--covariates",
        "z1,z2,z3",
        "--network",
        p(&network),
        "--ratio",
        "10",
        "--dump-moments",
        p(&moments),
        "--out",
        p(&cbnn_dir),
    ]));
    assert!(fs::read_to_string(&moments).unwrap().starts_with("time,z1,z2,z3,label\n"));
    let cblr_dir = dir.path().join("cblr");
    assert_ok(&cbnn(&[
        "fit",
        "--data",
        p(&parts.join("train.csv")),
        "--model",
        "cblr",
        "--network",
        p(&network),
        "--ratio",
        "10",
        "--out",
        p(&cblr_dir),
    ]));

    let eval_dir = dir.path().join("eval");
    assert_ok(&cbnn(&[
        "evaluate",
        "--data",
        p(&parts.join("test.csv")),
        "--model",
        p(&cbnn_dir.join("model.json")),
        "--model",
        &format!("linear={}", p(&cblr_dir.join("model.json"))),
        "--points",
        "10",
        "--out",
        p(&eval_dir),
    ]));
    let ibs = fs::read_to_string(eval_dir.join("ibs.csv")).unwrap();
    assert!(ibs.starts_with("model,ibs\nCBNN,"));
    assert!(ibs.contains("\nlinear,") && ibs.contains("\nKM,"));
    let metrics = fs::read_to_string(eval_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("time,model,metric,estimate,lower,upper\n"));
    assert!(eval_dir.join("risk_curves.csv").exists());

    let boot_dir = dir.path().join("boot");
    assert_ok(&cbnn(&[
        "bootstrap",
        "--train",
        p(&parts.join("train.csv")),
        "--test",
        p(&parts.join("test.csv")),
        "--network",
        p(&network),
        "--n-boot",
        "3",
        "--ratio",
        "10",
        "--out",
        p(&boot_dir),
    ]));
    let metrics = fs::read_to_string(boot_dir.join("metrics.csv")).unwrap();
    let row = metrics.lines().nth(1).unwrap();
    assert!(!row.ends_with(",,"), "bands expected: {row}");
}

#[test]
fn gridsearch_and_pipeline_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    assert_ok(&cbnn(&["simulate", "--n", "400", "--seed", "5", "--out", p(&data)]));

    let grid_cfg = dir.path().join("grid.json");
    fs::write(
        &grid_cfg,
        r#"{"space": {"learning_rates": [0.001, 0.01], "dropout_rates": [0.05], "first_layer": [6],
            "second_layer": [3], "num_batches": [10], "activations": ["relu"], "epochs": 3},
            "options": {"ratio": 10, "folds": 3, "seed": 1}}"#,
    )
    .unwrap();
    let grid_dir = dir.path().join("grid");
    assert_ok(&cbnn(&["gridsearch", "--config", p(&grid_cfg), "--data", p(&data), "--out", p(&grid_dir)]));
    let grid = fs::read_to_string(grid_dir.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 3);
    assert!(grid.starts_with("cell,model,hidden_layers,activation,dropout_rate,learning_rate,num_batches,epochs,parameters,fold1_ibs,fold2_ibs,fold3_ibs,mean_ibs,selected\n"));
    assert!(grid_dir.join("selected.json").exists());

    let cfg = dir.path().join("pipeline.json");
    fs::write(
        &cfg,
        r#"{"data": {"source": "simulate", "n": 400}, "ratio": 10, "search": null,
            "network": {"hidden_layers": [6, 3], "epochs": 3, "num_batches": 10},
            "bootstrap": 2, "eval_grid": {"points": 10}, "seed": 2}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    assert_ok(&cbnn(&["pipeline", "--config", p(&cfg), "--out", p(&out)]));
    for f in ["manifest.json", "metrics.csv", "ibs.csv", "risk_curves.csv", "model.json", "summary.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n": 10, "unknown_field": 1}"#).unwrap();
    assert_eq!(cbnn(&["simulate", "--config", p(&bad), "--out", "x.csv"]).status.code(), Some(2));

    let missing = dir.path().join("nope.csv");
    let out = cbnn(&["split", "--data", p(&missing), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(3));

    let toy = dir.path().join("toy.csv");
    fs::write(&toy, "time,status,x\n1,1,0.1\n2,0,0.2\n3,1,0.3\n").unwrap();
    let out = cbnn(&["pipeline", "--data", p(&toy), "--out", p(&dir.path().join("toy"))]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("grid_search") && stderr.contains("no events"), "{stderr}");

    let gap = dir.path().join("gap.csv");
    fs::write(&gap, "time,status,x\n1,1,\n").unwrap();
    let out = cbnn(&["split", "--data", p(&gap), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 1"));
}
