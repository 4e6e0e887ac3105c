use std::path::PathBuf;
use std::process::{Command, Output};

use qwcat_cli::{parse_report, Report};
use serde_json::Value;

fn qwcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwcat")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Report) {
    let out = qwcat(args);
    let text = String::from_utf8(out.stdout).unwrap();
    let r = parse_report(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (out.status.code().unwrap(), r)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qwcat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn reports_round_trip() {
    for args in [
        vec!["validate", "@coin(0.6)"],
        vec!["spectrum", "@cube", "--grid", "512"],
        vec!["decompose", "@grover4", "--grid", "512"],
        vec!["simulate", "@grover3", "--t", "5"],
    ] {
        let out = qwcat(&args);
        let text = String::from_utf8(out.stdout).unwrap();
        let r = parse_report(&text).unwrap();
        assert_eq!(r.to_json(), text);
        assert_eq!(parse_report(&r.to_json()).unwrap(), r);
        assert_eq!(r.schema, "qwcat.report/1");
        assert!(!r.provenance.is_empty());
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    for args in [
        vec!["intertwine", "@s3-walk", "@grover4", "--verify", "--grid", "512", "--states", "4", "--seed", "9"],
        vec!["ctqw", "@grover3", "--verify", "--grid", "512", "--trials", "3", "--seed", "4"],
        vec!["limit", "@coin(0.6)", "--grid", "512"],
    ] {
        assert_eq!(qwcat(&args).stdout, qwcat(&args).stdout);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(qwcat(&["validate", "@shift"]).status.code(), Some(0));
    assert_eq!(qwcat(&["--help"]).status.code(), Some(0));
    assert_eq!(qwcat(&["--version"]).status.code(), Some(0));
    let negative = qwcat(&["intertwine", "@coin-decomposable(0.6)", "@coin-decomposable(0.8)", "--grid", "512"]);
    assert_eq!(negative.status.code(), Some(3));
    assert_eq!(qwcat(&["ctqw", "@coin(0.6)", "--grid", "512"]).status.code(), Some(3));
    assert_eq!(qwcat(&["ctqw", "@grover3", "--grid", "512"]).status.code(), Some(0));
    for bad in [
        vec!["validate", "/no/such/walk.json"],
        vec!["validate", "@nonsense"],
        vec!["spectrum", "@coin(0.6)", "--grid", "500"],
        vec!["spectrum", "@grover2d"],
        vec!["simulate", "@coin(0.6)", "--init", "@delta(0:5)"],
        vec!["simulate", "@coin(0.6)", "--t", "10", "--window", "5"],
        vec!["validate", "@coin(0.6)", "--format", "csv"],
        vec!["frobnicate"],
    ] {
        let out = qwcat(&bad);
        assert_eq!(out.status.code(), Some(1), "{bad:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn rejects_non_unitary_documents() {
    let path = scratch("bad.json");
    let doc = r#"{"name": "half", "d": 1, "n": 1, "entries": [[[{"shift": [0], "re": 0.5, "im": 0.0}]]]}"#;
    std::fs::write(&path, doc).unwrap();
    let out = qwcat(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spectrum_of_coin_reports_minimal_period() {
    let (code, r) = report(&["spectrum", "@coin(0.6)"]);
    assert_eq!(code, 0);
    let b = &r.result["branches"][0];
    assert!((b["minimal_period"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    assert_eq!(b["winding"], 1);
    assert!(r.result["coverage_defect"].as_f64().unwrap() < 1e-8);
}

#[test]
fn velocity_of_shift_is_one() {
    let out = qwcat(&["velocity", "@shift", "--t", "10", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "v,mass\n1,1\n");
}

#[test]
fn registry_walks_validate() {
    let (_, listing) = report(&["examples"]);
    assert!(listing.result["walks"].as_array().unwrap().len() >= 10);
    let dir = scratch("exported");
    let out = qwcat(&["examples", "--export", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let (code, r) = report(&["validate", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(r.result["unitarity_defect"].as_f64().unwrap() <= 1e-10, "{}", path.display());
        count += 1;
    }
    assert!(count >= 10);
}

#[test]
fn out_flag_writes_the_report() {
    let path = scratch("spectrum.csv");
    let out = qwcat(&["spectrum", "@grover3", "--grid", "512", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("branch 1"));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("branch,k,re,im,group_velocity"));
    // Constant branch on 512 points plus the 4π branch on 1024.
    assert_eq!(lines.count(), 512 + 1024);
}

#[test]
fn states_from_files_and_shorthands() {
    let path = scratch("state.json");
    let doc = r#"{"d": 1, "n": 2, "amplitudes": [{"site": [0], "component": 1, "re": 1.0, "im": 0.0}]}"#;
    std::fs::write(&path, doc).unwrap();
    let (_, from_file) = report(&["simulate", "@coin(0.6)", "--t", "1", "--init", path.to_str().unwrap()]);
    let (_, shorthand) = report(&["simulate", "@coin(0.6)", "--t", "1", "--init", "@delta(0:1)"]);
    assert_eq!(from_file.result, shorthand.result);
    // [[aS, -bS], [b, a]] sends δ₀ ⊗ e₂ to -b at (1, 0) and a at (0, 1).
    let positions: Vec<(i64, f64)> = shorthand.result["positions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["site"][0].as_i64().unwrap(), p["mass"].as_f64().unwrap()))
        .collect();
    assert_eq!(positions.len(), 2);
    assert!((positions[0].1 - 0.36).abs() < 1e-12 && positions[0].0 == 0);
    assert!((positions[1].1 - 0.64).abs() < 1e-12 && positions[1].0 == 1);
}

#[test]
fn charfn_at_zero_is_one() {
    let (_, r) = report(&["charfn", "@grover4", "--t", "30", "--kgrid", "0:2:5"]);
    let values = r.result["values"].as_array().unwrap();
    assert_eq!(values.len(), 5);
    let first: &Value = &values[0]["value"];
    assert!((first[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn ctqw_build_exports_generator() {
    let (code, r) = report(&["ctqw", "@coin-realizable(0.6)", "--build", "--grid", "512"]);
    assert_eq!(code, 0);
    let g = r.result["generator"].as_array().unwrap();
    assert_eq!(g.len(), 2);
    for doc in g {
        assert!(doc["phase_samples"].as_array().unwrap().len() >= 512);
    }
    assert!(r.result["generator_residual"].as_f64().unwrap() < 1e-12);
}
