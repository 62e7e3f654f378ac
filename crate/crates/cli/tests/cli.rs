use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tradeoff"));
    c.env_remove("TRADEOFF_SEED");
    c
}

fn ensemble(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/ensembles")
        .join(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn bb84_curve_has_requested_rows_and_endpoints() {
    let out = stdout(&["curve", "--ensemble", &ensemble("bb84.json"), "--samples", "41"]);
    assert!(out.starts_with("R,Q,grid_k,support_size\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 41);
    assert!((r[0][0] - 0.0).abs() < 1e-12 && (r[0][1] - 1.0).abs() < 1e-6);
    let last = r.last().unwrap();
    assert!((last[0] - 2.0).abs() < 1e-9 && last[1].abs() < 1e-6);
}

#[test]
fn pair_point_at_zero_rate() {
    let r = rows(&stdout(&["point", "--ensemble", &ensemble("pair.json"), "--R", "0"]));
    assert!((r[0][1] - 0.600876).abs() < 1e-6);
}

#[test]
fn x_adds_the_rate() {
    let m = rows(&stdout(&["point", "--ensemble", &ensemble("pair.json"), "--R", "0.3"]));
    let x = rows(&stdout(&[
        "point",
        "--ensemble",
        &ensemble("pair.json"),
        "--R",
        "0.3",
        "--quantity",
        "x",
    ]));
    assert!((x[0][1] - m[0][1] - 0.3).abs() < 1e-9);
}

#[test]
fn three_state_blind_rate_and_components() {
    let out = stdout(&["blind", "--ensemble", &ensemble("three_state.json")]);
    let line = out.lines().nth(1).unwrap();
    let q: f64 = line.split(',').next().unwrap().parse().unwrap();
    assert!((q - 0.40058).abs() < 1e-5);
    assert!(line.ends_with(",\"[1,2],[3]\""), "{line}");
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["point", "--ensemble", "/nonexistent.json", "--R", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let n_below = run(&[
        "point",
        "--ensemble",
        &ensemble("pair.json"),
        "--R",
        "0.2",
        "--quantity",
        "n",
    ]);
    assert_eq!(n_below.status.code(), Some(2));
    assert!(!n_below.stderr.is_empty());
    let huge = run(&[
        "oracle",
        "--ensemble",
        &ensemble("pair.json"),
        "--R",
        "0.5",
        "--steps",
        "5000",
    ]);
    assert_eq!(huge.status.code(), Some(3));
}

#[test]
fn malformed_ensemble_is_rejected() {
    let p = scratch("bad.json");
    std::fs::write(&p, r#"{"dim": 2, "states": [[[1,0]]], "probs": [1]}"#).unwrap();
    assert_eq!(
        run(&["curve", "--ensemble", p.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn unnormalized_state_warns_and_loads() {
    let p = scratch("loose.json");
    std::fs::write(
        &p,
        r#"{"dim": 2, "states": [[[2,0],[0,0]], [[0,0],[1,0]]], "probs": [0.5, 0.5]}"#,
    )
    .unwrap();
    let o = run(&["point", "--ensemble", p.to_str().unwrap(), "--R", "0"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!((rows(&String::from_utf8(o.stdout).unwrap())[0][1] - 1.0).abs() < 1e-9);
}

#[test]
fn output_file_gets_a_manifest() {
    let out = scratch("pair_curve.csv");
    let o = run(&[
        "curve",
        "--ensemble",
        &ensemble("pair.json"),
        "--samples",
        "5",
        "--seed",
        "7",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let mut m = out.clone().into_os_string();
    m.push(".manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
    assert_eq!(manifest["schema"], "1");
    assert_eq!(manifest["command"], "curve");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["flags"]["command"]["samples"], 5);
    assert!(manifest["grid_resolution"].as_u64().unwrap() > 0);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn seed_comes_from_the_environment() {
    let out = scratch("env_seed.csv");
    let o = bin()
        .env("TRADEOFF_SEED", "42")
        .args([
            "blind",
            "--ensemble",
            &ensemble("pair.json"),
            "-o",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(o.status.success());
    let mut m = out.into_os_string();
    m.push(".manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
}

#[test]
fn tensor_of_two_orthogonal_pairs() {
    let a = scratch("o2_curve.csv");
    assert!(run(&[
        "curve",
        "--ensemble",
        &ensemble("orthogonal2.json"),
        "--samples",
        "5",
        "-o",
        a.to_str().unwrap()
    ])
    .status
    .success());
    let r = rows(&stdout(&[
        "tensor",
        "--first",
        a.to_str().unwrap(),
        "--second",
        a.to_str().unwrap(),
        "--samples",
        "9",
    ]));
    for row in r {
        assert!((row[1] - (2.0 - row[0])).abs() < 1e-6, "{row:?}");
    }
}

#[test]
fn uniform_qubit_closed_form_is_decreasing() {
    let r = rows(&stdout(&["uniform-qubit", "--samples", "21"]));
    assert_eq!(r.len(), 21);
    assert!(r.windows(2).all(|w| w[1][0] > w[0][0] && w[1][1] <= w[0][1]));
}

#[test]
fn oracle_matches_the_solver_on_the_pair() {
    let o = rows(&stdout(&[
        "oracle",
        "--ensemble",
        &ensemble("pair.json"),
        "--R",
        "0.5",
        "--steps",
        "200",
    ]));
    let s = rows(&stdout(&["point", "--ensemble", &ensemble("pair.json"), "--R", "0.5"]));
    assert!((o[0][1] - s[0][1]).abs() < 5e-3);
}

#[test]
fn simulation_and_audit_are_reproducible() {
    let rst = [
        "simulate-rst",
        "--bsc",
        "0.11",
        "--n",
        "60",
        "--delta",
        "8",
        "--trials",
        "400",
        "--seed",
        "3",
    ];
    assert_eq!(stdout(&rst), stdout(&rst));
    let audit = [
        "audit-coding",
        "--ensemble",
        &ensemble("bb84.json"),
        "--labels",
        "0,0,1,1",
        "--n",
        "40",
        "--delta",
        "20",
        "--draws",
        "100",
        "--panel",
        "2",
    ];
    let first = stdout(&audit);
    assert_eq!(first, stdout(&audit));
    assert_eq!(first.lines().count(), 3);
}

#[test]
fn avs_over_all_priors_of_the_pair() {
    let r = rows(&stdout(&["avs", "--ensemble", &ensemble("pair.json"), "--R", "0"]));
    assert!((r[0][1] - 0.600876).abs() < 1e-3);
    let t = rows(&stdout(&[
        "avs",
        "--ensemble",
        &ensemble("pair.json"),
        "--R",
        "0",
        "--transitive",
    ]));
    assert!((t[0][1] - 0.600876).abs() < 1e-6);
    assert_eq!(&t[0][2..], &[0.5, 0.5]);
}
