//! The `bellnet` binary end to end: output formats, files and exit codes.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::{Command, Output};

use bellnet::behaviors::behavior_from_quantum;
use bellnet::bell::chsh_measurements;
use bellnet::states::{isotropic, IsotropicParams};

fn bellnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sweep_chsh_has_101_rows_and_flips_near_tsirelson_visibility() {
    let out = bellnet(&["sweep-chsh"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,chsh,v_star,member,error"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 101);
    let flip = rows
        .iter()
        .find(|r| r[3] == "false")
        .map(|r| r[0].parse::<f64>().unwrap())
        .unwrap();
    assert!((flip - FRAC_1_SQRT_2).abs() <= 0.01);
    assert_eq!(rows[0][2], "inf");
    assert!(rows.iter().all(|r| r[4].is_empty()));
}

#[test]
fn hashing_threshold_csv_is_monotone() {
    let out = bellnet(&["hashing-threshold", "--d-list", "2,4,8,16,1024"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("d,p_star\n2,0.7476"));
    let ps: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(ps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn membership_from_behavior_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    let b = behavior_from_quantum(
        &isotropic(IsotropicParams::new(1.0, 2).unwrap()).unwrap(),
        &chsh_measurements(),
    )
    .unwrap();
    std::fs::write(&path, b.to_json().unwrap()).unwrap();
    let out = bellnet(&[
        "membership",
        "--behavior",
        path.to_str().unwrap(),
        "--model",
        "local",
    ]);
    assert!(out.status.success());
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["member"], false);
    assert!((verdict["v_star"].as_f64().unwrap() - FRAC_1_SQRT_2).abs() < 1e-9);
    assert_eq!(verdict["certificate"]["bound_kind"], "local");

    let csv = bellnet(&[
        "membership",
        "--behavior",
        path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(stdout(&csv).starts_with("v_star,member,violation\n0.707106781187,false,"));
}

#[test]
fn membership_from_layout_and_measurements() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("net.json");
    let meas = dir.path().join("m.json");
    std::fs::write(
        &layout,
        r#"{"parties":["A","B"],"links":[{"state":"iso","p":0.6,"d":2,"assign":["A","B"]}]}"#,
    )
    .unwrap();
    std::fs::write(&meas, chsh_measurements().to_json().unwrap()).unwrap();
    let out = bellnet(&[
        "membership",
        "--layout",
        layout.to_str().unwrap(),
        "--measurements",
        meas.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["member"], true);
    assert!(verdict["certificate"].is_null());
}

#[test]
fn star_reports_value_bound_and_violation() {
    let out = bellnet(&["star", "--n", "3", "--p", "0.85", "--ineq", "mermin"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bound"], 2.0);
    assert_eq!(v["violated"], true);
    assert!(v["value"].as_f64().unwrap() > 2.0);
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "star", "--n", "2", "--p", "0.95", "--ineq", "chsh", "--seed", "9",
    ];
    assert_eq!(bellnet(&args).stdout, bellnet(&args).stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("swap.csv");
    let out = bellnet(&[
        "lambda-swap",
        "--range",
        "0:1:0.25",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("p,probability,fidelity,isotropic_p2_fidelity,error\n"));
}

#[test]
fn catalog_and_lift_emit_functional_json() {
    let out = bellnet(&["catalog", "--ineq", "svetlichny"]);
    let f: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(f["bound"], 4.0);
    assert_eq!(f["bound_kind"], "hybrid-ns");
    assert_eq!(f["table"].as_array().unwrap().len(), 64);

    let out = bellnet(&[
        "lift",
        "--post-parties",
        "0",
        "--post-settings",
        "0",
        "--post-outcomes",
        "0",
    ]);
    assert!(out.status.success());
    let f: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(f["scenario"]["parties"], 3);
    assert_eq!(f["bound"], 0.0);
}

#[test]
fn povm_reduce_matches_direct_probability() {
    let dir = tempfile::tempdir().unwrap();
    let effect = dir.path().join("e.json");
    let state = dir.path().join("rho.json");
    std::fs::write(&effect, "[[0.7,0],[0.1,0.2],[0.1,-0.2],[0.4,0]]").unwrap();
    std::fs::write(&state, "[[0.6,0],[0.1,0.1],[0.1,-0.1],[0.4,0]]").unwrap();
    let out = bellnet(&[
        "povm-reduce",
        "--effect",
        effect.to_str().unwrap(),
        "--state",
        state.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let (d, s) = (
        v["direct"].as_f64().unwrap(),
        v["simulated"].as_f64().unwrap(),
    );
    assert!((d - 0.64).abs() < 1e-12 && (d - s).abs() < 1e-12);
}

#[test]
fn activate_tau_rows() {
    let out = bellnet(&[
        "activate-tau",
        "--n",
        "3",
        "--p",
        "0.95",
        "--l-list",
        "3,40",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(
        rows[0],
        "copies,coverage,star_value,guaranteed,bound,violated"
    );
    assert!(rows[1].ends_with(",false") && rows[2].ends_with(",true"));
}

#[test]
fn usage_and_computation_errors() {
    assert_eq!(bellnet(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        bellnet(&["sweep-chsh", "--range", "0:1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bellnet(&["sweep-chsh", "--format", "xml"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bellnet(&["membership", "--behavior", "/does/not/exist.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bellnet(&["star", "--n", "9"]).status.code(), Some(1));
    let help = bellnet(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = stdout(&help);
    for cmd in [
        "sweep-chsh",
        "hashing-threshold",
        "star",
        "lambda-swap",
        "membership",
        "lift",
        "activate-sigma",
        "activate-tau",
        "catalog",
        "povm-reduce",
    ] {
        assert!(text.contains(cmd), "--help lists {cmd}");
    }
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_bellnet"))
        .args(["catalog", "--ineq", "chsh"])
        .env("BELLNET_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_bellnet"))
        .args(["catalog", "--ineq", "chsh"])
        .env("BELLNET_THREADS", "2")
        .output()
        .unwrap();
    assert!(ok.status.success());
}
