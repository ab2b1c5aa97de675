//! End-to-end runs of the binary against the bundled system files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tilezeta"))
}

fn sys(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../systems").join(name);
    p.to_str().unwrap().to_owned()
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> &str {
    std::str::from_utf8(&out.stderr).unwrap()
}

#[test]
fn bundled_systems_validate() {
    for name in ["omega2.json", "plusminus.json", "thue_morse.json", "fibonacci.json", "biased_p13.json"]
    {
        let out = bin().args(["validate", &sys(name)]).output().unwrap();
        assert!(out.status.success(), "{name}: {}", stderr(&out));
        assert!(stdout(&out).contains("valid: yes"));
    }
}

#[test]
fn bad_weight_sum_fails_with_exit_one() {
    let out = bin().args(["validate", &sys("bad_sum.json")]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("weights sum"), "stderr: {}", stderr(&out));
}

#[test]
fn malformed_json_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"alphabet\": [\"0\"],\n  \"mode\" \"exact\"}").unwrap();
    let out = bin().args(["validate", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 2") && err.contains("column"), "stderr: {err}");
}

#[test]
fn iterate_prints_the_fourth_position_weight() {
    let out = bin()
        .args(["iterate", &sys("plusminus.json"), "--color", "+", "--n", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("k=4  +  1/81"), "stdout: {}", stdout(&out));
}

#[test]
fn base_group_lists_the_two_generators() {
    let out = bin().args(["base-group", &sys("plusminus.json")]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("weight 4/9"));
    assert!(text.contains("weight 1/81"));
    assert!(text.contains("classification: dense"));
}

#[test]
fn zeta_eval_matches_the_closed_form() {
    let out = bin()
        .args(["zeta", "eval", &sys("plusminus.json"), "--alpha", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    // (1 - w)^2 / [(1 - 2w)^2 - v] at w = 16/81, v = 1/6561 is 4225/2400
    let text = stdout(&out);
    let value: f64 = text.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((value - 4225.0 / 2400.0).abs() < 1e-12, "stdout: {text}");
}

#[test]
fn zeta_rational_of_the_dyadic_system() {
    let out = bin().args(["zeta", "rational", &sys("omega2.json")]).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("(1 - z) / (1 - 2*z)"));
}

#[test]
fn zeta_rational_needs_a_lattice() {
    let out = bin().args(["zeta", "rational", &sys("plusminus.json")]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dense"));
}

#[test]
fn zeta_poles_finds_the_simple_pole_at_one() {
    for name in ["omega2.json", "plusminus.json"] {
        let out = bin()
            .args(["zeta", "poles", &sys(name), "--interval", "0.5,1.5"])
            .output()
            .unwrap();
        assert!(out.status.success());
        assert!(stdout(&out).contains("alpha = 1  multiplicity 1"), "{name}");
    }
}

#[test]
fn zeta_oracle_stays_within_its_tail_bound() {
    let out = bin()
        .args(["zeta", "oracle", &sys("thue_morse.json"), "--alpha", "2", "--max-len", "12"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("within bound: yes"));
}

#[test]
fn separating_counts_commensurable_orbits() {
    let out = bin().args(["separating", &sys("biased_p13.json")]).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("commensurable orbits: 0 of 1"));
}

#[test]
fn tile_json_of_the_dyadic_separating_patch() {
    let out = bin()
        .args([
            "tile",
            &sys("omega2.json"),
            "--window",
            "-2,2,1/4,4",
            "--phase",
            "separating",
            "--out",
            "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(doc["tiles"].as_array().unwrap().len(), 30);
}

#[test]
fn tile_svg_contains_one_rect_per_tile() {
    let out = bin()
        .args([
            "tile",
            &sys("omega2.json"),
            "--window",
            "-2,2,1/4,4",
            "--phase",
            "separating",
            "--out",
            "svg",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let svg = stdout(&out);
    assert!(svg.starts_with("<svg"));
    // window frame plus 30 tiles
    assert_eq!(svg.matches("<rect").count(), 31);
}

#[test]
fn sampled_tiles_are_deterministic_per_seed() {
    let run = |seed: &str| {
        let out = bin()
            .args([
                "tile",
                &sys("thue_morse.json"),
                "--window",
                "-2,2,0.3,2",
                "--phase",
                "sample",
                "--seed",
                seed,
                "--out",
                "json",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        out.stdout
    };
    assert_eq!(run("12648430"), run("12648430"));
    assert_ne!(run("12648430"), run("7"));
}

#[test]
fn output_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let out = bin()
        .args(["g-function", &sys("thue_morse.json"), "--output", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "g(0) = 1\ng(1) = 1/2\n");
}

#[test]
fn solenoid_commands_round_trip() {
    let run = |args: &[&str]| {
        let out = bin().arg("solenoid").args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        stdout(&out).trim().to_owned()
    };
    assert_eq!(run(&["embed", "11/2"]), "(0)1.101e0");
    assert_eq!(run(&["add", "(0)1.101e0", "(0)1.1e-1"]), "(0)10.011e0");
    assert_eq!(run(&["scale", "(0)1.101e0", "2"]), "(0).01101e0");
    let neg = run(&["negate", "(0)1.101e0"]);
    assert_eq!(run(&["add", "(0)1.101e0", &neg]), "(0).e0");
    let out = bin().args(["solenoid", "embed", "1/3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solenoid_tile_emits_the_axis_column() {
    let out = bin()
        .args(["solenoid", "tile", "(0)1.101e0", "--depth", "3", "--out", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(doc["tiles"].as_array().unwrap().len(), 9);
}

#[test]
fn natural_weights_of_fibonacci() {
    let out = bin().args(["natural-weights", &sys("fibonacci.json")]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("lambda: 1.618033988749895"));
    assert!(text.contains("lambda^-1"));
}

#[test]
fn json_format_is_stable_and_parses() {
    let run = || {
        let out = bin()
            .args(["base-group", &sys("plusminus.json"), "--format", "json"])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let a = run();
    assert_eq!(a, run());
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["classification"]["kind"], "dense");
}
