use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const HUB_CYCLE_SYM: &str =
    r#"{"n":4,"generators":[{"n":4,"edges":[[0,1],[0,2],[0,3],[1,2],[2,3],[3,1]]}],"symmetric":true}"#;
const STARS_S3_N4: &str =
    r#"{"n":4,"generators":[{"n":4,"edges":[[0,1],[0,2],[0,3],[1,0],[1,2],[1,3],[2,0],[2,1],[2,3]]}],"symmetric":true}"#;
const CLIQUE_N3: &str = r#"{"n":3,"generators":[{"n":3,"edges":[[0,1],[0,2],[1,0],[1,2],[2,0],[2,1]]}]}"#;
const RING6: &str = r#"{"n":6,"generators":[{"n":6,"edges":[[0,1],[1,2],[2,3],[3,4],[4,5],[5,0]]}]}"#;

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn put(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn kset(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kset"));
    cmd.args(args).env_remove("KSET_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn squared_ring(extra: &[[usize; 2]]) -> String {
    let mut edges: Vec<[usize; 2]> = (0..6).flat_map(|i| [[i, (i + 1) % 6], [i, (i + 2) % 6]]).collect();
    edges.extend_from_slice(extra);
    serde_json::json!({"n": 6, "edges": edges}).to_string()
}

#[test]
fn metrics_of_hub_cycle_model() {
    let f = Files::new();
    let m = f.put("hub-cycle-sym.json", HUB_CYCLE_SYM);
    let out = kset(&["metrics", p(&m)], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["cov"]["2"], 3);
    assert_eq!(v["edom"], 4);
}

#[test]
fn unsat_exits_zero() {
    let f = Files::new();
    let m = f.put("stars-s3-n4.json", STARS_S3_N4);
    let out = kset(&["solve", p(&m), "--rounds", "1", "--k", "1", "--values", "2"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"], "UNSAT");
}

#[test]
fn sat_carries_replayed_witness() {
    let f = Files::new();
    let m = f.put("clique-n3.json", CLIQUE_N3);
    let out = kset(&["solve", p(&m), "--rounds", "1", "--k", "1", "--values", "2"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"], "SAT");
    assert!(!v["witness"].as_array().unwrap().is_empty());
    assert_eq!(v["replay"]["ok"], true);
}

#[test]
fn malformed_input_exits_two() {
    let f = Files::new();
    let bad = f.put("bad.json", r#"{"n":4,"generators":[{"n":4,"edges":[[0,9]]}]}"#);
    assert_eq!(kset(&["metrics", p(&bad)], &[]).status.code(), Some(2));
    let junk = f.put("junk.json", "not json");
    assert_eq!(kset(&["bounds", p(&junk)], &[]).status.code(), Some(2));
    assert_eq!(kset(&["metrics", "/definitely/missing.json"], &[]).status.code(), Some(2));
}

#[test]
fn unknown_flag_prints_usage() {
    let f = Files::new();
    let m = f.put("m.json", CLIQUE_N3);
    let out = kset(&["metrics", p(&m), "--frobnicate"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(kset(&["solve", p(&m), "--k", "0", "--values", "2"], &[]).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_three() {
    let f = Files::new();
    let m = f.put("m.json", STARS_S3_N4);
    let args = ["solve", p(&m), "--k", "2", "--values", "3"];
    assert_eq!(kset(&args, &[("KSET_BUDGET", "5")]).status.code(), Some(3));
    assert_eq!(kset(&args, &[("KSET_BUDGET", "zero")]).status.code(), Some(2));
    let mut flagged = args.to_vec();
    flagged.extend(["--budget", "5"]);
    assert_eq!(kset(&flagged, &[]).status.code(), Some(3));
}

#[test]
fn json_is_byte_deterministic() {
    let f = Files::new();
    let m = f.put("m.json", HUB_CYCLE_SYM);
    for args in [vec!["metrics", p(&m)], vec!["bounds", p(&m)], vec!["audit", p(&m)]] {
        let a = kset(&args, &[]);
        let b = kset(&args, &[]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn emitted_graphs_reparse() {
    let f = Files::new();
    let m = f.put("ring.json", RING6);
    let out = kset(&["product", p(&m), "--rounds", "2"], &[]);
    let v = json(&out);
    assert_eq!(v["count"], 1);
    let g = f.put("sq.json", &v["graphs"][0].to_string());
    let again = kset(&["product", p(&m), "--rounds", "2", "--target", p(&g)], &[]);
    assert_eq!(json(&again)["reachable"], true);
    assert_eq!(json(&again)["witness"][0]["edges"], serde_json::json!([[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0]]));
}

#[test]
fn squared_ring_with_chord_is_unreachable() {
    let f = Files::new();
    let m = f.put("ring.json", RING6);
    let t = f.put("t.json", &squared_ring(&[[1, 5]]));
    let out = kset(&["product", p(&m), "--rounds", "2", "--target", p(&t)], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["reachable"], false);
}

#[test]
fn bounds_and_audit_agree_on_hub_cycle_model() {
    let f = Files::new();
    let m = f.put("m.json", HUB_CYCLE_SYM);
    let b = json(&kset(&["bounds", p(&m)], &[]));
    let k_of = |method: &str| {
        b["upper"].as_array().unwrap().iter().find(|u| u["method"] == method).map(|u| u["k"].clone())
    };
    assert_eq!(k_of("cov"), Some(3.into()));
    assert_eq!(k_of("edom"), Some(4.into()));
    let a = json(&kset(&["audit", p(&m)], &[]));
    assert_eq!(a["threshold"], 3);
}

#[test]
fn topology_checks() {
    let f = Files::new();
    let m = f.put("m.json", STARS_S3_N4);
    let nerve = json(&kset(&["topology", p(&m), "--check", "nerve"], &[]));
    assert_eq!(nerve["full_simplex"], true);
    let hom = json(&kset(&["topology", p(&m), "--check", "homology"], &[]));
    assert!(hom["reduced_ranks"].as_array().unwrap().iter().all(|r| r == 0));
    let ps = json(&kset(&["topology", p(&m), "--check", "pseudosphere"], &[]));
    assert!(ps["generators"].as_array().unwrap().iter().all(|g| g["matches_closure"] == true));
    let sh = kset(&["topology", p(&m), "--check", "shelling", "--output", "text"], &[]);
    assert!(String::from_utf8_lossy(&sh.stdout).contains("shellable"));
}

#[test]
fn fuzz_echoes_seed() {
    let out = kset(&["fuzz", "--seed", "11", "--count", "5", "--max-n", "3"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["violations"], 0);
}

#[test]
fn simulate_ring_consensus() {
    let f = Files::new();
    let m = f.put("ring.json", RING6);
    let v = json(&kset(&["simulate", p(&m), "--rounds", "5"], &[]));
    assert_eq!(v["worst_case"], 1);
}
