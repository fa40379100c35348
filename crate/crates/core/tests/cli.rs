use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cavex::mlp::Params;
use serde_json::Value;

fn cavex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn short_config(dir: &Path) -> PathBuf {
    let path = dir.join("short.cfg");
    fs::write(
        &path,
        "# quick run\nmax_iters = 60\nrestarts = 1\nn_col = 20\n",
    )
    .unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn unknown_case_exits_1_without_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = cavex(&["train", "--case", "v", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown case"));
    assert!(!out.exists());
}

#[test]
fn bad_arguments_exit_1() {
    assert_eq!(cavex(&["train", "--case", "ii", "--formulation", "A"]).status.code(), Some(1));
    assert_eq!(cavex(&["train"]).status.code(), Some(1));
    assert_eq!(cavex(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cavex(&["train", "--case", "i", "--seed", "x"]).status.code(), Some(1));
    assert_eq!(cavex(&["--help"]).status.code(), Some(0));

    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "seed = 1\nwhat = 2\n").unwrap();
    let o = cavex(&["train", "--case", "i", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn train_then_evaluate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = short_config(tmp.path());
    let out = tmp.path().join("run");
    let o = cavex(&["train", "--case", "i", "--config", s(&cfg), "--seed", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let m = manifest(&out);
    assert_eq!(m["config"]["seed"], 3);
    assert_eq!(m["config"]["max_iters"], 60);
    assert_eq!(m["exit_status"], 0);
    let listed: Vec<String> = m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for name in ["stress_field.csv", "loss_history.csv", "gradhist.csv", "weights.txt", "manifest.json"] {
        assert!(out.join(name).exists(), "{name}");
        assert!(listed.iter().any(|p| p.ends_with(name)), "{name} not in manifest");
    }
    assert!(listed.last().unwrap().ends_with("manifest.json"));

    let field = fs::read_to_string(out.join("stress_field.csv")).unwrap();
    let mut lines = field.lines();
    assert_eq!(
        lines.next().unwrap(),
        "r,sigma_r_pred,sigma_theta_pred,sigma_r_exact,sigma_theta_exact,err_r,err_theta,region"
    );
    assert_eq!(lines.count(), 100);
    let history = fs::read_to_string(out.join("loss_history.csv")).unwrap();
    assert_eq!(
        history.lines().next().unwrap(),
        "iter,total,stress_radius,equilibrium,bc_inner,bc_outer,grad_norm,step"
    );
    let gradhist = fs::read_to_string(out.join("gradhist.csv")).unwrap();
    assert_eq!(gradhist.lines().count(), 1 + 3 * 30);

    let weights = out.join("weights.txt");
    let text = fs::read_to_string(&weights).unwrap();
    assert_eq!(Params::from_text(&text).unwrap().to_text(), text);

    let ev = tmp.path().join("eval");
    let o = cavex(&["evaluate", "--case", "i", "--weights", s(&weights), "--out", s(&ev)]);
    assert!(o.status.success());
    assert_eq!(manifest(&ev)["metrics"], m["metrics"]);

    let dense = tmp.path().join("dense");
    let o = cavex(&["evaluate", "--case", "i", "--weights", s(&weights), "--grid", "1000", "--out", s(&dense)]);
    assert!(o.status.success());
    let d = manifest(&dense);
    assert_eq!(fs::read_to_string(dense.join("stress_field.csv")).unwrap().lines().count(), 1001);
    for key in ["mse_r", "mse_theta"] {
        let (a, b) = (m["metrics"][key].as_f64().unwrap(), d["metrics"][key].as_f64().unwrap());
        assert!((a - b).abs() <= 0.1 * a, "{key}: {a} vs {b}");
    }
}

#[test]
fn evaluate_rejects_bad_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = short_config(tmp.path());
    let out = tmp.path().join("run");
    assert!(cavex(&["train", "--case", "i", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let text = fs::read_to_string(out.join("weights.txt")).unwrap();

    let mut lines: Vec<&str> = text.lines().collect();
    lines[5] = "0.1 oops 0.3";
    let corrupt = tmp.path().join("corrupt.txt");
    fs::write(&corrupt, lines.join("\n")).unwrap();
    let o = cavex(&["evaluate", "--case", "i", "--weights", s(&corrupt)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 6"), "{}", String::from_utf8_lossy(&o.stderr));

    let o = cavex(&["evaluate", "--case", "i", "--formulation", "A", "--weights", s(&out.join("weights.txt"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outputs"));

    let o = cavex(&["evaluate", "--case", "i", "--weights", s(&tmp.path().join("missing.txt"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn elastoplastic_run_writes_both_networks() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = short_config(tmp.path());
    let out = tmp.path().join("iii");
    let o = cavex(&["train", "--case", "iii", "--config", s(&cfg), "--out", s(&out), "--plot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in [
        "weights_elastic.txt",
        "weights_plastic.txt",
        "loss_history_elastic.csv",
        "loss_history_plastic.csv",
        "gradhist_elastic.csv",
        "gradhist_plastic.csv",
        "stress.svg",
        "loss.svg",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    let field = fs::read_to_string(out.join("stress_field.csv")).unwrap();
    let rows: Vec<Vec<&str>> = field.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 199);
    let r: Vec<f64> = rows.iter().map(|row| row[0].parse().unwrap()).collect();
    assert_eq!((r[0], r[198]), (0.2, 2.0));
    assert!(r.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(rows[99][7], "plastic");
    assert_eq!(rows[100][7], "elastic");

    let m = manifest(&out);
    assert!(m["recovered_inner_pressure"].is_number());
    assert_eq!(m["frozen_boundary_stresses"].as_array().unwrap().len(), 2);

    let ev = tmp.path().join("ev");
    let o = cavex(&[
        "evaluate",
        "--case",
        "iii",
        "--weights",
        s(&out.join("weights_elastic.txt")),
        "--plastic-weights",
        s(&out.join("weights_plastic.txt")),
        "--out",
        s(&ev),
    ]);
    assert!(o.status.success());
    assert_eq!(manifest(&ev)["metrics"], m["metrics"]);
    let o = cavex(&["evaluate", "--case", "iii", "--weights", s(&out.join("weights_elastic.txt"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_formulations_writes_three_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = short_config(tmp.path());
    let out = tmp.path().join("cmp");
    let o = cavex(&["compare-formulations", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("formulations.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "formulation,mse_r,mse_theta,mean_abs_grad_1,mean_abs_grad_2,mean_abs_grad_3"
    );
    assert_eq!(lines.len(), 4);
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["A", "B", "C"]);
    for f in ["A", "B", "C"] {
        assert!(out.join(format!("gradhist_{f}.csv")).exists());
    }
}

#[test]
fn config_file_and_flags_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    let out = tmp.path().join("from-file");
    fs::write(
        &cfg,
        format!(
            "case = ii\nseed = 9\nmax_iters = 20\nrestarts = 1\nn_col = 10\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = cavex(&["train", "--config", s(&cfg), "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["case"], "ii");
    assert_eq!(m["config"]["seed"], 4);
    assert_eq!(m["config"]["n_col"], 10);
}
