//! End-to-end runs of the `bbl-lab` binary: exit codes, artifacts and
//! determinism.

use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbl-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn box_fixture_report() {
    let out = run(&["bbl", "bm", "--A", "box:0,0,1,1", "--B", "box:0,0,2,2", "--s", "0.5", "--p", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema"], "bbl-lab/1");
    assert_eq!(v["path"], "exact");
    assert_eq!(v["deficit"].as_f64(), Some(0.125));
    let closed = (3.0 - 2.0 * 2f64.sqrt()) / 1.5;
    assert!((v["closed_form_bound"].as_f64().unwrap() - closed).abs() < 1e-15);
    assert!((v["bound"].as_f64().unwrap() - closed).abs() < 1e-12);
    // 17 significant digits in the artifact text
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"deficit\": 1.2500000000000000e-1"));
}

#[test]
fn grid_path_agrees_with_exact_on_aligned_boxes() {
    let out = run(&[
        "bbl", "bm", "--A", "box:0,0,1,1", "--B", "box:0,0,2,2", "--s", "0.5", "--p", "0", "--grid-only",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["path"], "grid");
    let d = v["deficit"].as_f64().unwrap();
    assert!((d - 0.125).abs() <= v["discretization_error"].as_f64().unwrap());
}

#[test]
fn violation_exits_with_two() {
    // h far below any admissible density
    let out = run(&[
        "bbl", "deficit", "--f", "box:0,1", "--g", "box:1,3", "--h", "box:0,0.5", "--s", "0.5", "--p", "0",
        "--grid-h", "0.0625",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["accepted"], false);
    assert!(v["deficit"].as_f64().unwrap() < 0.0);
}

#[test]
fn admissible_deficit_is_accepted() {
    let out = run(&[
        "bbl", "deficit", "--f", "box:0,1", "--g", "box:1,3", "--s", "0.5", "--p", "0", "--grid-h", "0.03125",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["accepted"], true);
    assert_eq!(v["h_source"], "admissible");
    assert!(v["deficit"].as_f64().unwrap() >= v["lower_bound"].as_f64().unwrap() - v["tolerance"].as_f64().unwrap());
}

#[test]
fn usage_and_domain_errors_exit_with_one() {
    let out = run(&["bbl", "bm", "--A", "box:0,x,1,1", "--B", "box:0,0,2,2", "--s", "0.5", "--p", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("column 7"), "{}", stderr(&out));

    let out = run(&["bbl", "bm", "--A", "box:0,0,1,1", "--B", "box:0,0,2,2", "--s", "1.5", "--p", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("domain"), "{}", stderr(&out));

    let out = run(&["bbl", "bm", "--A", "box:0,0,1,1", "--B", "box:0,0,2,2", "--s", "0.5", "--p", "-1"]);
    assert_eq!(out.status.code(), Some(1), "p below -1/n");

    let out = run(&["gap", "sweep", "--samples", "ten"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_files_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    fs::write(&csv, "0,1,1,0\n0,1,oops,0\n").unwrap();
    let lit = format!("file:{}", csv.display());
    let out = run(&["bbl", "deficit", "--f", &lit, "--g", &lit, "--s", "0.5", "--p", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2, column 5"), "{}", stderr(&out));

    let js = dir.path().join("f.json");
    fs::write(&js, "{\n  \"origin\": [0, 0],\n  \"h\": 0.5\n  \"values\": []\n}").unwrap();
    let lit = format!("file:{}", js.display());
    let out = run(&["bbl", "deficit", "--f", &lit, "--g", &lit, "--s", "0.5", "--p", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn csv_density_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let g = dir.path().join("g.csv");
    fs::write(&f, "0,0,0,0\n0,1,2,0\n0,1,2,0\n0,0,0,0\n").unwrap();
    fs::write(&g, "# same profile\n0,0,0,0\n0,1,2,0\n0,1,2,0\n0,0,0,0\n").unwrap();
    let (lf, lg) = (format!("file:{}", f.display()), format!("file:{}", g.display()));
    let out = run(&["bbl", "deficit", "--f", &lf, "--g", &lg, "--s", "0.5", "--p", "inf", "--grid-h", "0.25"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["mass_f"].as_f64(), Some(0.375));
    assert_eq!(v["mass_g"].as_f64(), Some(0.375));
    // f = g: h = f is admissible and optimal for every p
    assert!(v["deficit"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["lower_bound"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).display().to_string();
    for name in ["a.json", "b.json"] {
        let out = run(&[
            "bbl", "bm", "--A", "disk:0.5,0.5,0.4", "--B", "box:0,0,1.5,1", "--s", "0.3", "--p", "1", "--grid-h",
            "0.05", "--out", &p(name),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_eq!(fs::read(p("a.json")).unwrap(), fs::read(p("b.json")).unwrap());

    let one = run(&["gap", "sweep", "--samples", "3000", "--seed", "11", "--threads", "1"]);
    let many = run(&["gap", "sweep", "--samples", "3000", "--seed", "11", "--threads", "7"]);
    assert_eq!(one.stdout, many.stdout);
    let other = run(&["gap", "sweep", "--samples", "3000", "--seed", "12"]);
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn gap_sweep_has_no_violations() {
    let out = run(&["gap", "sweep", "--samples", "100000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,s,p,n,a,b,c,d,regime,gap,lhs,rhs,slack,pass"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100_000);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert!(stderr(&out).contains("violations 0"));
}

#[test]
fn matsumoto_figure() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fig1b.svg");
    let out = run(&[
        "finsler", "balls", "--norm", "matsumoto", "--alpha", "35deg", "--v", "6", "--svg", &svg.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["homothety"]["homothetic"], false);
    assert!(v["homothety"]["residual"].as_f64().unwrap() >= 0.01);
    assert_eq!(v["strict"], true);
    let doc = fs::read_to_string(&svg).unwrap();
    assert!(doc.starts_with("<?xml"));
    assert!(doc.contains("version=\"1.1\""));
    assert_eq!(doc.matches("<path").count(), 2);
}

#[test]
fn randers_figure() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("fig1a.svg");
    let out = run(&[
        "finsler", "balls", "--norm", "randers", "--q", "5,-1,-1,1", "--b", "0.2,0.5", "--r", "1", "--R", "2", "--y",
        "3,-1", "--svg", &svg.display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["homothety"]["homothetic"], true);
    assert!(v["homothety"]["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["equality"], true);
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<path").count(), 2);
}

#[test]
fn ot_solve_plan() {
    let out = run(&["ot", "solve", "--A", "box:0,0,0.5,0.5", "--B", "box:1,1,1.5,1.5", "--grid-h", "0.125", "--exact"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["source_len"], 16);
    assert_eq!(v["transport"]["method"], "exact");
    // a pure translation by (1, 1): cost = |t|²/2 = 1
    assert!((v["cost"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["wasserstein"]["strict_lower"], true);
    assert_eq!(v["wasserstein"]["strict_upper"], true);
}

#[test]
fn distorted_bm_on_sphere() {
    let out = run(&[
        "bbl", "distorted-bm", "--space", "sphere:2:1", "--A", "disk:-1,0,0.5", "--B", "disk:1,0,0.5", "--s", "0.5",
        "--grid-h", "0.02",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!(v["deficit"].as_f64().unwrap() > 3.0 * v["tolerance"].as_f64().unwrap());
}
