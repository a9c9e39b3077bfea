use std::path::Path;

use afsec::cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn afsec(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("afsec").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn gen(dir: &Path, relays: usize, eavesdroppers: usize, seed: u64) -> String {
    let path = dir.join(format!("net-{relays}-{eavesdroppers}-{seed}.json"));
    let path = path.to_str().unwrap().to_string();
    let (code, _, err) = afsec(&[
        "gen",
        "--relays",
        &relays.to_string(),
        "--eavesdroppers",
        &eavesdroppers.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        &path,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    path
}

#[test]
fn zero_forcing_json_silences_eavesdroppers() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen(dir.path(), 5, 3, 7);
    let (code, out, err) = afsec(&["solve", "--net", &net, "--method", "zero_forcing", "--json"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["method"], "zero_forcing");
    let snr_e = v["snr_e"].as_array().unwrap();
    assert_eq!(snr_e.len(), 3);
    for s in snr_e {
        assert!(s.as_f64().unwrap() <= 1e-10, "{s}");
    }
    assert!(v["secrecy_rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn generated_network_validates_as_degraded() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen(dir.path(), 4, 2, 3);
    let (code, out, err) = afsec(&["validate", &net]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("valid=true"), "{out}");
    assert!(out.contains("degraded=true"), "{out}");
}

#[test]
fn invalid_network_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"m":1,"k":0,"h_s":[1.0],"h_d":[1.0],"h_e":[],"p_s":-1.0,"p_r":[1.0],"sigma2":1.0}"#,
    )
    .unwrap();
    let (code, out, _) = afsec(&["validate", path.to_str().unwrap(), "--json"]);
    assert_eq!(code, EXIT_FAILURE);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["valid"], false);
}

#[test]
fn unknown_method_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen(dir.path(), 3, 1, 1);
    let (code, _, err) = afsec(&["solve", "--net", &net, "--method", "simplex"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("unknown method"), "{err}");
}

#[test]
fn help_exits_cleanly() {
    let (code, out, _) = afsec(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("sweep"));
}

#[test]
fn missing_file_is_a_data_error() {
    let (code, _, err) = afsec(&["solve", "--net", "/nonexistent/net.json", "--method", "sum_iterative"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("/nonexistent/net.json"), "{err}");
}

#[test]
fn zero_forcing_with_too_many_eavesdroppers_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let net = gen(dir.path(), 2, 2, 5);
    let (code, _, err) = afsec(&["solve", "--net", &net, "--method", "zero_forcing"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("zero-forcing infeasible"), "{err}");
}

#[test]
fn gen_is_reproducible_from_env_seed() {
    std::env::set_var("AFSEC_SEED", "99");
    let a = afsec(&["gen", "--relays", "3", "--eavesdroppers", "1"]);
    let b = afsec(&["gen", "--relays", "3", "--eavesdroppers", "1", "--seed", "99"]);
    std::env::remove_var("AFSEC_SEED");
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
}

#[test]
fn sweep_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let (code, _, err) = afsec(&[
        "sweep",
        "--var",
        "source-power",
        "--from",
        "1",
        "--to",
        "2",
        "--steps",
        "2",
        "--trials",
        "3",
        "--methods",
        "individual_iterative,zero_forcing",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 2, "{text}");
    assert!(lines[0].starts_with("sweep_var,value,method"));
    let meta = std::fs::read_to_string(dir.path().join("out.csv.meta.json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta["spec"]["trials"], 3);
    assert!(meta["rng"].as_str().unwrap().contains("chacha8"));
}

#[test]
fn sweep_rejects_invalid_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"sweep":"source_power","from":1,"to":2,"steps":0}"#).unwrap();
    let (code, _, err) = afsec(&["sweep", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE, "{err}");
    std::fs::write(&spec, r#"{"sweep":"source_power","from":1,"to":2,"steps":2,"bogus":1}"#).unwrap();
    let (code, _, _) = afsec(&["sweep", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
}
