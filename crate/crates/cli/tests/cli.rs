use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_unconditional"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], files: &[&Path]) -> Output {
    let mut c = bin();
    c.args(args);
    for f in files {
        c.arg(f);
    }
    c.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const K3: &str = "c triangle\n3 3\n1 2\n2 3\n1 3\n";
const K4: &str = "4 6\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n";

#[test]
fn unit_square_and_its_reflection() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.json", r#"{"dim":2,"generators":[[1,1]]}"#);
    let out = run(&["build"], &[&sq]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["base"]["num_lattice_points"], 4);
    assert_eq!(v["unconditional"]["num_lattice_points"], 9);
}

#[test]
fn triangle_stable_set_polytope() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k3.txt", K3);
    let out = run(&["build", "--stable-set"], &[&g]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["base"]["num_lattice_points"], 4);

    let out = run(&["quad", "--stable-set"], &[&g]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["base"]["verdict"], "certified-quadratic");
    assert_eq!(v["agree"], true);
}

#[test]
fn graph_json_input_matches_edge_list() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "k3.txt", K3);
    let b = write(&dir, "k3.json", r#"{"n":3,"edges":[[1,2],[2,3],[1,3]]}"#);
    let x = run(&["idp", "--stable-set"], &[&a]);
    let y = run(&["idp", "--stable-set"], &[&b]);
    assert_eq!(x.status.code(), Some(0));
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{ not json");
    assert_eq!(run(&["idp"], &[&bad]).status.code(), Some(2));
    let neg = write(&dir, "neg.json", r#"{"dim":2,"generators":[[1,-1]]}"#);
    assert_eq!(run(&["build"], &[&neg]).status.code(), Some(2));
    let graph = write(&dir, "g.txt", "3 1\n1 4\n");
    assert_eq!(run(&["kempe"], &[&graph]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["build"], &[&missing]).status.code(), Some(2));
}

#[test]
fn descend_equal_endpoints_gives_empty_chain() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.json", r#"{"dim":2,"generators":[[1,1]]}"#);
    let b = write(
        &dir,
        "b.json",
        r#"{"lhs":[[1,0],[0,1]],"rhs":[[0,1],[1,0]]}"#,
    );
    let out = run(&["descend", "--binomial", b.to_str().unwrap()], &[&sq]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["descended_chain"]["steps"].as_array().unwrap().len(), 0);
}

#[test]
fn descend_then_audit() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.json", r#"{"dim":2,"generators":[[1,1]]}"#);
    let b = write(
        &dir,
        "b.json",
        r#"{"lhs":[[1,1],[0,0]],"rhs":[[1,0],[0,1]]}"#,
    );
    let chain = dir.path().join("chain.json");
    let out = run(
        &[
            "descend",
            "--binomial",
            b.to_str().unwrap(),
            "--out",
            chain.to_str().unwrap(),
        ],
        &[&sq],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["audit", "--chain", chain.to_str().unwrap()], &[&sq]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["accepted"], true);
}

#[test]
fn audit_rejects_a_forged_chain() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.json", r#"{"dim":2,"generators":[[1,1]]}"#);
    let forged = write(
        &dir,
        "forged.json",
        r#"{"from":[[0,0],[1,1]],"to":[[0,1],[1,0]],"steps":[]}"#,
    );
    let out = run(&["audit", "--chain", forged.to_str().unwrap()], &[&sq]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn weight_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.json", r#"{"dim":2,"generators":[[1,1]]}"#);
    let b = write(
        &dir,
        "b.json",
        r#"{"lhs":[[1,1],[0,0]],"rhs":[[1,0],[0,0]]}"#,
    );
    let out = run(&["descend", "--binomial", b.to_str().unwrap()], &[&sq]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kempe_on_k4_agrees() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k4.txt", K4);
    let out = run(&["kempe"], &[&g]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["agreement"], "agree");
}

#[test]
fn kempe_over_budget_exits_6() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k4.txt", K4);
    let out = run(&["kempe", "--k-extra", "40", "--a-budget", "8"], &[&g]);
    assert_eq!(out.status.code(), Some(6));
    assert_eq!(json(&out)["agreement"], "inconclusive");
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let g = write(
        &dir,
        "prism.txt",
        "6 9\n1 2\n2 3\n1 3\n4 5\n5 6\n4 6\n1 4\n2 5\n3 6\n",
    );
    let a = run(&["--jobs", "1", "kempe"], &[&g]);
    let b = run(&["kempe"], &[&g]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        json(&a)["unconditional_quadratic"]["verdict"],
        "counterexample"
    );
}

#[test]
fn search_reports_its_seed() {
    let out = run(
        &["search", "non-idp", "--seed", "0", "--attempts", "300"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: 0"));
    assert_eq!(json(&out)["hit"]["attempt"], 236);
}
