use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/channels.csv")
}

#[test]
fn generate_two_copies_of_small_distribution() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    ok(&["--out", s(&out), "generate", "--model", "ddelta2", "--delta", "4,3,2"]);
    let graph = json(&out.join("graph.json"));
    assert_eq!(graph["nodes"], 18);
    assert_eq!(graph["communities"], 2);
    let planted = std::fs::read_to_string(out.join("planted.jsonl")).unwrap();
    assert_eq!(planted.lines().count(), 2);
    let edges = std::fs::read_to_string(out.join("edges.csv")).unwrap();
    assert_eq!(edges.lines().count() - 1, graph["edges"].as_u64().unwrap() as usize);
}

#[test]
fn generate_complete_gnp() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    ok(&["--out", s(&out), "generate", "--model", "gnp", "--n", "4", "--p", "1"]);
    assert_eq!(json(&out.join("graph.json"))["edges"], 6);
}

#[test]
fn olap_sizes_reservoir_from_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let stdout = ok(&[
        "--out", s(&out), "olap", "--epsilon", "0.1", "--delta", "0.05", "--cardinality", "2",
    ])
    .stdout;
    assert!(String::from_utf8_lossy(&stdout).contains("k = 600"));
    assert_eq!(json(&out.join("report.json"))["k"], 600);
}

#[test]
fn olap_channel_density_from_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    ok(&[
        "--out", s(&out), "olap", "--input", s(&fixture()), "--dimension", "Channel", "--measure", "SA",
        "--k", "400",
    ]);
    let csv = std::fs::read_to_string(out.join("density.csv")).unwrap();
    let cnn: Vec<&str> = csv.lines().find(|l| l.starts_with("CNN,")).unwrap().split(',').collect();
    let exact: f64 = cnn[1].parse().unwrap();
    let estimate: f64 = cnn[2].parse().unwrap();
    assert!((exact - 2.0 / 3.0).abs() < 1e-12);
    assert!((estimate - exact).abs() < 0.1, "estimate {estimate}");
}

#[test]
fn detect_and_integrate_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let gen = root.join("g");
    ok(&["--seed", "5", "--out", s(&gen), "generate", "--model", "ddelta2", "--edges", "300"]);
    let input = gen.join("edges.csv");
    let detect = |dir: &str| {
        let d = root.join(dir);
        ok(&[
            "--seed", "9", "--out", s(&d), "detect", "--input", s(&input), "--k", "60", "--h", "3", "--c", "5",
            "--tau", "50", "--window", "200",
        ]);
        d
    };
    let a = detect("a");
    let b = detect("b");
    for f in ["snapshots.jsonl", "global_components.jsonl", "size_series.csv", "nodes.jsonl", "stats.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
    let i = root.join("i");
    ok(&["--out", s(&i), "integrate", s(&a), s(&b), "--labels", "x,y"]);
    let r = json(&i.join("integration.json"));
    assert_eq!(r["rho_v"], 1.0);
    assert_eq!(r["rho_c"], 1.0);
    let matrix = std::fs::read_to_string(i.join("matrix.csv")).unwrap();
    assert!(matrix.starts_with("stream_a,stream_b,rho_v,rho_c\n"));
    assert_eq!(matrix.lines().count(), 5);
}

#[test]
fn config_file_is_layered_under_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"seed": 11, "generate": {"model": "gnp", "n": 5, "p": 1.0}}"#).unwrap();
    let out = tmp.path().join("g");
    ok(&["--config", s(&cfg), "--out", s(&out), "generate", "--n", "6"]);
    assert_eq!(json(&out.join("graph.json"))["edges"], 15);
    let written = json(&out.join("config.json"));
    assert_eq!(written["seed"], 11);
    assert_eq!(written["generate"]["n"], 6);
    assert_eq!(written["generate"]["model"], "gnp");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"detect": {"kk": 3}}"#).unwrap();
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["--config", s(&bad), "--out", s(&out), "detect", "--input", "x.csv"]), 2);
    assert_eq!(code(&["--out", s(&out), "experiment", "no-such-experiment"]), 2);
    assert_eq!(code(&["--out", s(&out), "detect", "--input", s(&tmp.path().join("missing.csv"))]), 3);
    assert_eq!(code(&["--out", s(&out), "integrate", s(&tmp.path().join("only-one"))]), 2);
    // A two-edge reservoir never holds h nodes of both planted sets.
    assert_eq!(
        code(&["--out", s(&out), "experiment", "theorem2", "--seeds", "4", "--edges-per-community", "300", "--k", "2"]),
        4
    );
    assert!(out.join("report.json").exists());
}

#[test]
fn experiment_lemma1_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    ok(&["--out", s(&out), "experiment", "lemma1", "--trials", "20000"]);
    assert_eq!(json(&out.join("report.json"))["passed"], true);
}
