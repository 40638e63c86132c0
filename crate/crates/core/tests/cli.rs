use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use sublap::io::{load, parse_str};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn fixtures() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(fixture(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    out.sort();
    out
}

/// Run the binary; returns stdout, stderr and the exit code.
fn sublap(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_sublap"))
        .args(args)
        .env_remove("SUBLAP_SEED")
        .output()
        .unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

fn report(args: &[&str]) -> (Value, i32) {
    let (stdout, _, code) = sublap(args);
    (serde_json::from_str(&stdout).unwrap(), code)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn four_cycle_diffusion_eigenvalue_is_one() {
    let c4 = fixture("c4.graph");
    let (r, code) = report(&["spectral", c4.to_str().unwrap(), "--mode", "diffusion"]);
    assert_eq!(code, 0);
    assert!((num(&r["results"]["lambda"]) - 1.0).abs() <= 1e-3);
    assert_eq!(r["instance"]["n"], 4);
    assert_eq!(r["instance"]["m"], 4);
    assert_eq!(r["command"]["name"], "spectral");
}

#[test]
fn four_clique_symmetric_relaxation_is_at_most_four_thirds() {
    let k4 = fixture("k4.graph");
    let (r, code) = report(&["spectral", k4.to_str().unwrap(), "--mode", "sdp-sym", "--eps", "0.5"]);
    assert_eq!(code, 0);
    assert!(num(&r["results"]["sdp_value"]) <= 4.0 / 3.0 + 1e-4);
    assert!(num(&r["results"]["lambda_hat"]) >= num(&r["results"]["sdp_value"]) - 1e-6);
}

#[test]
fn graph_without_edges_has_zero_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.graph");
    std::fs::write(&path, "3 0\n").unwrap();
    let (r, code) = report(&["spectral", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(num(&r["results"]["lambda"]), 0.0);
}

#[test]
fn conductance_of_given_set_and_by_brute_force() {
    let c4 = fixture("c4.graph");
    let (r, code) = report(&["conductance", c4.to_str().unwrap(), "--set", "1,2"]);
    assert_eq!(code, 0);
    assert_eq!(num(&r["results"]["phi"]), 0.5);
    assert_eq!(r["results"]["set"], serde_json::json!([1, 2]));
    let k4 = fixture("k4.graph");
    let (r, _) = report(&["conductance", k4.to_str().unwrap(), "--brute"]);
    assert!((num(&r["results"]["phi"]) - 2.0 / 3.0).abs() <= 1e-12);
}

#[test]
fn usage_errors_exit_with_two() {
    let c4 = fixture("c4.graph");
    let c4 = c4.to_str().unwrap();
    let (r, code) = report(&["conductance", c4, "--set", "1,2,3,4"]);
    assert_eq!(code, 2);
    assert_eq!(r["error"]["exit_code"], 2);
    let digraph = fixture("cycle4.digraph");
    let (_, code) = report(&["spectral", digraph.to_str().unwrap(), "--mode", "sdp-sym"]);
    assert_eq!(code, 2);
    let (_, _, code) = sublap(&["spectral", c4, "--mode", "nonsense"]);
    assert_eq!(code, 2);
    let (_, _, code) = sublap(&["certify", "/nonexistent/file.graph"]);
    assert_eq!(code, 2);
}

#[test]
fn malformed_file_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.graph");
    std::fs::write(&path, "3 2\n1 2\n1 9\n").unwrap();
    let (stdout, stderr, code) = sublap(&["certify", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("bad.graph:3"), "{stderr}");
    let r: Value = serde_json::from_str(&stdout).unwrap();
    assert!(r["error"]["message"].as_str().unwrap().contains("vertex 9"));
}

#[test]
fn certify_exits_zero_on_fixtures() {
    for name in ["k4.graph", "correlated_bits.jointdist"] {
        let path = fixture(name);
        let (r, code) = report(&["certify", path.to_str().unwrap(), "--seed", "3"]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(r["results"]["holds"], true);
    }
    let (r, _) = report(&["certify", fixture("k4.graph").to_str().unwrap()]);
    let tilde = num(&r["results"]["lambda_tilde"]);
    assert!((tilde / 2.0 - num(&r["results"]["phi"])).abs() <= 1e-6);
}

#[test]
fn seed_comes_from_environment_when_not_given() {
    let c4 = fixture("c4.graph");
    let out = Command::new(env!("CARGO_BIN_EXE_sublap"))
        .args(["spectral", c4.to_str().unwrap()])
        .env("SUBLAP_SEED", "42")
        .output()
        .unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 42);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let rings = fixture("rings6.hgr");
    let rings = rings.to_str().unwrap();
    for args in [
        vec!["spectral", rings, "--mode", "sdp-sym", "--seed", "5", "--emit-vector"],
        vec!["spectral", rings, "--seed", "5"],
        vec!["certify", rings, "--seed", "5"],
    ] {
        assert_eq!(sublap(&args).0, sublap(&args).0);
    }
}

#[test]
fn cover_command_writes_certified_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edge.cover");
    let c4 = fixture("c4.graph");
    let (r, code) = report(&[
        "cover",
        c4.to_str().unwrap(),
        "--function-index",
        "1",
        "--eps",
        "0.5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let cover = sublap::polytope::CoverSet::read_from(&text).unwrap();
    assert_eq!(cover.len() as u64, r["results"]["size"].as_u64().unwrap());
    let f = sublap::oracle::SubmodularOracle::undirected_edge(0, 1);
    let h = sublap::polytope::PolytopeHandle::new(&f);
    for p in &cover.points {
        assert!(sublap::polytope::membership(&h, p).unwrap().worst_violation <= 1e-7);
    }
    for w in [[1.0, -1.0], [-1.0, 1.0], [0.0, 0.0]] {
        assert!(cover.distance_to(&w) <= cover.eps_abs + 1e-12);
    }
}

#[test]
fn min_norm_point_of_symmetric_edge_and_arc_is_zero() {
    for name in ["c4.graph", "cycle4.digraph"] {
        let (r, code) = report(&["minnorm", fixture(name).to_str().unwrap(), "--function-index", "2"]);
        assert_eq!(code, 0);
        assert!(num(&r["results"]["norm"]) <= 1e-9);
    }
}

#[test]
fn fixtures_round_trip_through_text() {
    for path in fixtures() {
        let file = load(&path, None).unwrap();
        let text = file.data.to_text();
        let back = parse_str(&text, file.format, &path.to_string_lossy()).unwrap();
        assert_eq!(back.data, file.data, "{}", path.display());
        let (a, b) = (file.data.build().unwrap(), back.data.build().unwrap());
        assert_eq!(a.n(), b.n());
        assert_eq!(a.degrees(), b.degrees());
        for mask in 0..1u64 << a.n() {
            assert_eq!(a.evaluate(mask), b.evaluate(mask));
        }
    }
}
