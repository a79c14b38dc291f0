//! End-to-end tests of the binary: golden files, determinism, exit codes,
//! and config precedence.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exotime"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn unfold_matches_golden_dot() {
    let dir = scratch("unfold");
    let dot = dir.join("tree.dot");
    run_ok(bin()
        .arg("unfold")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--alpha")
        .arg("3")
        .arg("--dot")
        .arg(&dot));
    let got = fs::read(&dot).unwrap();
    let want = fs::read(fixture("golden/tree_alpha3.dot")).unwrap();
    assert_eq!(got, want);
    let text = String::from_utf8(got).unwrap();
    // 8 worlds, each with a reflexive loop
    assert_eq!(text.matches("label=").count(), 8);
    assert!(text.contains("\"ε\" -> \"ε\";"));
}

#[test]
fn run_is_deterministic_and_matches_golden() {
    let dir = scratch("run");
    let first = dir.join("a.jsonl");
    let second = dir.join("b.jsonl");
    for out in [&first, &second] {
        run_ok(bin()
            .arg("run")
            .arg("--seed")
            .arg(fixture("fig1.json"))
            .arg("--stages")
            .arg("3")
            .arg("--out")
            .arg(out));
    }
    let a = fs::read(&first).unwrap();
    let b = fs::read(&second).unwrap();
    assert_eq!(a, b, "identical invocations must be byte-identical");
    let want = fs::read(fixture("golden/trace_k3.jsonl")).unwrap();
    assert_eq!(a, want);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 4);
}

#[test]
fn ds_matches_golden_csv() {
    let dir = scratch("ds");
    let report = dir.join("bel.csv");
    run_ok(bin()
        .arg("ds")
        .arg("--model")
        .arg(fixture("worked_model.json"))
        .arg("--frame")
        .arg("x1,x2")
        .arg("--report")
        .arg(&report));
    let got = fs::read_to_string(&report).unwrap();
    let want = fs::read_to_string(fixture("golden/bel.csv")).unwrap();
    assert_eq!(got, want);
    // the worked values: m({x2}) = 0.4, bel({x1}) = 0, pl({x1}) = 0.6
    assert!(got.contains("\"{x2}\",4.0000000000000002e-1"));
    assert!(got.contains("\"{x1}\",0.0000000000000000e0,0.0000000000000000e0,5.9999999999999998e-1"));
}

#[test]
fn bisim_report_verifies_the_mirror() {
    let dir = scratch("bisim");
    let report = dir.join("report.json");
    let dot = dir.join("sigma.dot");
    run_ok(bin()
        .arg("bisim")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--alpha")
        .arg("3")
        .arg("--report")
        .arg(&report)
        .arg("--dot")
        .arg(&dot));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"ok\":true"));
    assert!(text.contains("\"violations\":[]"));
    assert!(text.contains("[\"ε\",\"ε'\"]"));
    let dot = fs::read_to_string(&dot).unwrap();
    assert!(dot.contains("style=dashed"));
}

#[test]
fn lattice_matches_golden() {
    let dir = scratch("lattice");
    let out = dir.join("lattice.json");
    run_ok(bin()
        .arg("lattice")
        .arg("--space")
        .arg(fixture("path3_space.json"))
        .arg("--out")
        .arg(&out));
    let got = fs::read(&out).unwrap();
    let want = fs::read(fixture("golden/lattice_path3.json")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn spectrum_writes_all_artifacts() {
    let dir = scratch("spectrum");
    let csv = dir.join("spec.csv");
    let d2 = dir.join("d2.csv");
    let cw = dir.join("cw.txt");
    run_ok(bin()
        .arg("spectrum")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--alpha")
        .arg("3")
        .arg("--csv")
        .arg(&csv)
        .arg("--d2")
        .arg(&d2)
        .arg("--codewords")
        .arg(&cw));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 9);
    assert_eq!(fs::read_to_string(&d2).unwrap().lines().count(), 8);
    let words = fs::read_to_string(&cw).unwrap();
    assert_eq!(words.lines().count(), 8);
    assert_eq!(words.lines().next().unwrap(), "0000000");
}

#[test]
fn stage_writes_artifacts_and_explanation() {
    let dir = scratch("stage").join("out");
    run_ok(bin()
        .arg("stage")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--alpha")
        .arg("2")
        .arg("--out-dir")
        .arg(&dir));
    for name in [
        "tree.dot",
        "tree.json",
        "spectrum.csv",
        "d2.csv",
        "codewords.txt",
        "omega.json",
        "diagnostics.json",
        "code.json",
        "predict.json",
        "explain.json",
    ] {
        assert!(dir.join(name).exists(), "{name} missing");
    }
    let code = fs::read_to_string(dir.join("code.json")).unwrap();
    assert!(code.contains("\"d_min\":1"));
    assert!(code.contains("\"e\":0"));
    let explain = fs::read_to_string(dir.join("explain.json")).unwrap();
    assert!(explain.contains("\"likelihood_sum\""));
}

#[test]
fn config_file_applies_and_flags_win() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "depth_cap = 12\nnode_cap = 3\n# tight cap\n").unwrap();
    let out = dir.join("trace.jsonl");
    // the config's node cap rejects the run
    let failed = bin()
        .arg("run")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--stages")
        .arg("3")
        .arg("--out")
        .arg(&out)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("node cap"));
    // the flag overrides the file
    run_ok(bin()
        .arg("run")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--stages")
        .arg("3")
        .arg("--out")
        .arg(&out)
        .arg("--config")
        .arg(&cfg)
        .arg("--node-cap")
        .arg("100000"));
    // unknown config keys are a domain error with a location
    fs::write(&cfg, "bogus = 1\n").unwrap();
    let failed = bin()
        .arg("run")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--stages")
        .arg("1")
        .arg("--out")
        .arg(&out)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&failed.stderr).contains(":1:"));
}

#[test]
fn exit_codes() {
    // usage error: unknown flag
    let out = bin().arg("run").arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // usage error: unknown subcommand
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // domain error: missing input file
    let out = bin()
        .arg("unfold")
        .arg("--seed")
        .arg("/nonexistent.json")
        .arg("--alpha")
        .arg("1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // domain error: malformed JSON reports a location
    let dir = scratch("exitcodes");
    let dot = dir.join("x.dot");
    let out = bin()
        .arg("unfold")
        .arg("--seed")
        .arg(fixture("broken.json"))
        .arg("--alpha")
        .arg("1")
        .arg("--dot")
        .arg(&dot)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "no location in: {stderr}");
}

#[test]
fn help_lists_defaults() {
    let out = run_ok(bin().arg("run").arg("--help"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("default 12"));
    assert!(text.contains("default 1000000"));
    assert!(text.contains("positional"));
}

#[test]
fn prior_file_feeds_the_explanation() {
    let dir = scratch("prior");
    let prior = dir.join("prior.json");
    fs::write(&prior, "[0.25,0.25,0.25,0.25]").unwrap();
    let out_dir = dir.join("out");
    run_ok(bin()
        .arg("stage")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--alpha")
        .arg("2")
        .arg("--out-dir")
        .arg(&out_dir)
        .arg("--prior-file")
        .arg(&prior));
    assert!(out_dir.join("explain.json").exists());
    // a wrong-length prior is rejected
    fs::write(&prior, "[0.5,0.5]").unwrap();
    let failed = bin()
        .arg("stage")
        .arg("--seed")
        .arg(fixture("fig1.json"))
        .arg("--alpha")
        .arg("2")
        .arg("--out-dir")
        .arg(&out_dir)
        .arg("--prior-file")
        .arg(&prior)
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(1));
}
