use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn lhf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut args = vec!["generate", "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = lhf(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn run(dir: &TempDir, engine: &str, input: &Path, verify: Option<&Path>) -> (Output, PathBuf, PathBuf) {
    let report = path(dir, &format!("{engine}.csv"));
    let digest = path(dir, &format!("{engine}.digest"));
    let mut args = vec![
        "run", "--engine", engine, "--in", s(input), "--report", s(&report), "--digest", s(&digest),
    ];
    if let Some(v) = verify {
        args.extend(["--verify-against", s(v)]);
    }
    (lhf(&args), report, digest)
}

#[test]
fn claim1_has_requested_op_count() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "w.txt", &["--mode", "claim1", "--ops", "30000", "--seed", "1"]);
    let text = fs::read_to_string(file).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("OP ")).count(), 30000);
    assert!(text.starts_with("# lhf-workload mode=claim1 target=scalar ops=30000 seed=1"));
}

#[test]
fn zero_ops_is_header_only() {
    let dir = TempDir::new().unwrap();
    let file = generate(&dir, "w.txt", &["--mode", "pessimistic", "--ops", "0", "--corpus", "1"]);
    let text = fs::read_to_string(file).unwrap();
    assert!(text.lines().all(|l| l.starts_with('#') || l.starts_with("REG ")));
    assert!(!text.contains("OP "));
}

#[test]
fn generation_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["--mode", "optimistic", "--target", "pointsto", "--ops", "5000", "--seed", "9"];
    let a = generate(&dir, "a.txt", &args);
    let b = generate(&dir, "b.txt", &args);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn engines_agree_and_verify() {
    let dir = TempDir::new().unwrap();
    for (mode, target) in [("pessimistic", "scalar"), ("claim1", "pointsto")] {
        let file = generate(&dir, "w.txt", &["--mode", mode, "--target", target, "--ops", "3000", "--seed", "4"]);
        let (o, _, naive_digest) = run(&dir, "naive", &file, None);
        assert!(o.status.success());
        let (o, report, _) = run(&dir, "lhf", &file, Some(&naive_digest));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = fs::read_to_string(report).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "engine,mode,target,ops,kind,invocations,hits,equal_hits,subset_hits,empty_hits,cold_misses,edge_misses,cumulative_ns,sets_registered,memo_entries,logical_bytes"
        );
        let union = lines.next().unwrap();
        assert!(union.starts_with(&format!("lhf,{mode},{target},3000,union,")), "{union}");
    }
}

#[test]
fn digest_mismatch_exits_one() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.txt");
    let b = path(&dir, "b.txt");
    fs::write(&a, "REG 2 1 2\nREG 1 3\nOP UNION 0 1\n").unwrap();
    fs::write(&b, "REG 2 1 2\nREG 1 3\nOP INTER 0 1\n").unwrap();
    let (_, _, digest_a) = run(&dir, "lhf", &a, None);
    let moved = path(&dir, "a.digest");
    fs::rename(&digest_a, &moved).unwrap();
    let (o, _, _) = run(&dir, "naive", &b, Some(&moved));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 2"));
}

#[test]
fn walkthrough_report() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "walk.txt");
    fs::write(&file, "REG 3 1 2 3\nREG 3 1 2 4\nOP UNION 0 1\n").unwrap();
    let (o, report, digest) = run(&dir, "lhf", &file, None);
    assert!(o.status.success());
    let csv = fs::read_to_string(report).unwrap();
    let union: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(union[4], "union");
    assert_eq!(union[5], "1");
    assert_eq!(union[6], "0");
    assert_eq!(union[10], "1");
    assert_eq!(fs::read_to_string(digest).unwrap().lines().count(), 3);
}

#[test]
fn empty_input_gives_empty_digest() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "empty.txt");
    fs::write(&file, "").unwrap();
    let (o, report, digest) = run(&dir, "lhf", &file, None);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(digest).unwrap(), "");
    let csv = fs::read_to_string(report).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[5..12].iter().all(|x| *x == "0"), "{line}");
    }
}

#[test]
fn bad_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "bad.txt");
    fs::write(&file, "REG 1 1\nOP UNION 0 7\n").unwrap();
    let (o, _, _) = run(&dir, "lhf", &file, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    assert_eq!(lhf(&["generate", "--mode", "claim1"]).status.code(), Some(2));
    assert_eq!(lhf(&["frobnicate"]).status.code(), Some(2));
    let missing = path(&dir, "missing.json");
    assert_eq!(lhf(&["normalize", "--spec", s(&missing)]).status.code(), Some(2));
    let spec = path(&dir, "bad.json");
    fs::write(&spec, r#"{"prop":"int"}"#).unwrap();
    let o = lhf(&["normalize", "--spec", s(&spec)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing field `ops`"));
    let cfg = path(&dir, "bad.cfg");
    fs::write(&cfg, "block a\nblock b\n").unwrap();
    assert_eq!(lhf(&["demo-pointsto", "--cfg", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn pointsto_demo_matches_golden() {
    let golden = include_str!("golden/branch_join.out");
    let bundled = lhf(&["demo-pointsto"]);
    assert!(bundled.status.success());
    assert_eq!(String::from_utf8(bundled.stdout).unwrap(), golden);
    let from_file = lhf(&["demo-pointsto", "--cfg", s(&fixture("branch_join.cfg"))]);
    assert_eq!(String::from_utf8(from_file.stdout).unwrap(), golden);
    assert!(golden.contains("block4.in: p1 -> {a, b}\n"));
}

#[test]
fn normalize_matches_golden() {
    let o = lhf(&["normalize", "--spec", s(&fixture("points_to_liveness.json"))]);
    assert!(o.status.success());
    let golden = fs::read_to_string(fixture("points_to_liveness.plan")).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), golden);

    let dir = TempDir::new().unwrap();
    let leaf = path(&dir, "leaf.json");
    fs::write(&leaf, r#"{"prop":"int","ops":["union"]}"#).unwrap();
    let o = lhf(&["normalize", "--spec", s(&leaf)]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "#0 LHF(int, {union})\n");
}
