//! End-to-end runs of the `eqlines` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use eqlines::cli::{parse_weights, EXIT_ERROR, EXIT_FAILED_CHECK};
use eqlines::equiangular::{parse_lines, verify_line_system};
use eqlines::graph::parse_edge_list;

fn run(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_eqlines"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn table(path: &Path) -> toml::Table {
    fs::read_to_string(path).unwrap().parse().unwrap()
}

#[test]
fn c4_single_factor_has_zero_m() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("c4");
    assert_eq!(run(&["generate", "--family", "cycle", "--n", "4"], &g), 0);
    let graph = g.join("graph.txt").display().to_string();
    let out = dir.path().join("f");
    assert_eq!(run(&["sample-factor", "--graph", &graph, "--a", "1", "--seed", "0"], &out), 0);
    let m = parse_weights(&fs::read_to_string(out.join("m_0000.txt")).unwrap()).unwrap();
    assert!(m.iter().all(|&x| x == 0.0));
    let h = parse_edge_list(&fs::read_to_string(out.join("h_0000.txt")).unwrap()).unwrap();
    assert_eq!(h.regularity(), Some(1));
    let manifest = table(&out.join("manifest.toml"));
    assert_eq!(manifest["command"].as_str(), Some("sample-factor"));
    assert_eq!(manifest["success"].as_bool(), Some(true));
}

#[test]
fn factor_degree_above_d_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k33");
    assert_eq!(run(&["generate", "--family", "complete-bipartite", "--n", "3"], &g), 0);
    let graph = g.join("graph.txt").display().to_string();
    let code = run(&["sample-factor", "--graph", &graph, "--a", "4", "--seed", "0"], &dir.path().join("f"));
    assert_eq!(code, i32::from(EXIT_ERROR));
}

#[test]
fn hundred_samples_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("rb");
    assert_eq!(run(&["generate", "--family", "random-bipartite", "--n", "32", "--d", "6", "--seed", "1"], &g), 0);
    let graph = g.join("graph.txt").display().to_string();
    let out = dir.path().join("f");
    assert_eq!(run(&["sample-factor", "--graph", &graph, "--a", "2", "--seed", "5", "--samples", "100"], &out), 0);
    let summary = table(&out.join("summary.toml"));
    let s = summary["summary"].as_table().unwrap();
    assert_eq!(s["samples"].as_integer(), Some(100));
    assert_eq!(s["a_regular"].as_integer(), Some(100));
    assert_eq!(s["pass"].as_bool(), Some(true));
    assert!(s["max_m_norm"].as_float().unwrap() <= s["six_sqrt_d"].as_float().unwrap());
}

#[test]
fn pipeline_zero_iterations_reports_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    assert_eq!(run(&["pipeline", "--surd", "t=12", "u=10", "--iters", "0"], &out), 0);
    let report = table(&out.join("report.toml"));
    assert!(report.contains_key("run"));
    let seed = parse_edge_list(&fs::read_to_string(out.join("stage_0.txt")).unwrap()).unwrap();
    assert_eq!(seed.n(), 48);
}

#[test]
fn paper_mode_halts_as_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["pipeline", "--int", "d=22000", "--paper", "--iters", "1"], &dir.path().join("p"));
    assert_eq!(code, i32::from(EXIT_FAILED_CHECK));
}

#[test]
fn nonmember_needs_override() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["pipeline", "--int", "d=8", "a=2", "--relaxed", "--iters", "1", "--seed", "3"];
    assert_eq!(run(&args, &dir.path().join("a")), i32::from(EXIT_ERROR));
    let mut with = args.to_vec();
    with.push("--allow-nonmember");
    let code = run(&with, &dir.path().join("b"));
    assert!(code == 0 || code == i32::from(EXIT_FAILED_CHECK));
    assert!(dir.path().join("b/report.toml").exists());
}

#[test]
fn lines_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k4");
    assert_eq!(run(&["generate", "--family", "complete", "--n", "4", "--copies", "2"], &g), 0);
    let graph = g.join("graph.txt").display().to_string();
    let out = dir.path().join("l");
    assert_eq!(run(&["lines", "--graph", &graph, "--lambda", "3", "--ell", "12", "--seed", "0"], &out), 0);
    let ls = parse_lines(&fs::read_to_string(out.join("lines.txt")).unwrap()).unwrap();
    assert_eq!((ls.vectors.len(), ls.dim), (12, 11));
    assert!(verify_line_system(&ls).pass);
    let lines = out.join("lines.txt").display().to_string();
    assert_eq!(run(&["verify", "--lines", &lines], &dir.path().join("v")), 0);

    let p = dir.path().join("pet");
    assert_eq!(run(&["generate", "--family", "petersen"], &p), 0);
    let pet = p.join("graph.txt").display().to_string();
    let code = run(&["lines", "--graph", &pet, "--lambda", "1", "--ell", "12", "--seed", "0"], &dir.path().join("x"));
    assert_eq!(code, i32::from(EXIT_ERROR));
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k44");
    assert_eq!(run(&["generate", "--family", "complete-bipartite", "--n", "4"], &g), 0);
    let graph = g.join("graph.txt").display().to_string();
    let first = dir.path().join("a");
    assert_eq!(run(&["lift", "--graph", &graph, "--t", "2", "--seed", "8"], &first), 0);
    let manifest = first.join("manifest.toml").display().to_string();
    let second = dir.path().join("b");
    assert_eq!(run(&["replay", "--manifest", &manifest], &second), 0);
    for name in ["lifted.txt", "report.toml", "manifest.toml"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
}
