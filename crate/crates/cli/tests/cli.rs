use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use netmod_core::netcore::save_network;
use netmod_core::synthetic::{noordin_style, NOORDIN_COVARIATES};
use netmod_core::WeightedNetwork;

fn netmod(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netmod"))
        .args(args)
        .current_dir(dir)
        .env("NETMOD_JOBS", "1")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn counterexample(dir: &Path) {
    let labels = ["i", "j", "k", "a", "b"].map(String::from).to_vec();
    let mut net = WeightedNetwork::empty(labels).unwrap();
    net.set_weight(0, 1, 4.0);
    net.set_weight(0, 2, 4.0);
    net.set_weight(1, 3, 3.0);
    net.set_weight(2, 4, 3.0);
    save_network(&net, dir.join("fixture.csv")).unwrap();
}

fn noordin_bundle(dir: &Path) {
    let data = noordin_style(20, 3).unwrap();
    save_network(data.state.focal(), dir.join("communication.csv")).unwrap();
    for name in NOORDIN_COVARIATES {
        save_network(data.state.layer(name).unwrap(), dir.join(format!("{name}.csv"))).unwrap();
    }
    save_network(&data.collaboration, dir.join("collaboration.csv")).unwrap();
}

#[test]
fn optimize_fixture_greedy_and_exhaustive() {
    let tmp = tempfile::tempdir().unwrap();
    counterexample(tmp.path());
    let base = ["optimize", "--network", "fixture.csv", "--metric", "total-weight", "--budget", "2"];

    let greedy = netmod(&[&base[..], &["--strategy", "greedy", "--seed", "1"]].concat(), tmp.path());
    assert!(greedy.status.success(), "{}", stderr(&greedy));
    assert!(stderr(&greedy).contains("greedy: chosen [i, j], final 3"), "{}", stderr(&greedy));
    let report: serde_json::Value = serde_json::from_slice(&greedy.stdout).unwrap();
    assert_eq!(report["trace"], serde_json::json!([14.0, 6.0, 3.0]));
    assert_eq!(report["seed"], 1);
    assert!(report.get("elapsed_seconds").is_none());

    let exhaustive = netmod(
        &[&base[..], &["--strategy", "exhaustive", "--seed", "1", "--out", "ex.json"]].concat(),
        tmp.path(),
    );
    assert!(exhaustive.status.success(), "{}", stderr(&exhaustive));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("ex.json")).unwrap()).unwrap();
    assert_eq!(report["metric_final"], 0.0);

    let again = netmod(&[&base[..], &["--strategy", "greedy", "--seed", "1"]].concat(), tmp.path());
    assert_eq!(again.stdout, greedy.stdout);
}

#[test]
fn qap_test_reports_one_p_value_per_predictor() {
    let tmp = tempfile::tempdir().unwrap();
    noordin_bundle(tmp.path());
    let out = netmod(
        &[
            "qap-test",
            "--response",
            "collaboration.csv",
            "--predictors",
            "communication.csv,organization.csv",
            "--permutations",
            "100",
            "--seed",
            "5",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("seed: 5"));
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = result["p_values"].as_array().unwrap();
    assert_eq!(p.len(), 2);
    assert!(p.iter().all(|v| (0.0..=1.0).contains(&v.as_f64().unwrap())));
}

#[test]
fn fit_simulate_evolve_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    noordin_bundle(tmp.path());
    let fit = netmod(
        &[
            "fit-ergm",
            "--network",
            "communication.csv",
            "--statistics",
            "edges,gwesp:0.25,edgecov:kin",
            "--covariate",
            "kin=kin.csv",
            "--out",
            "ergm.json",
        ],
        tmp.path(),
    );
    assert!(fit.status.success(), "{}", stderr(&fit));

    let sim = netmod(
        &[
            "simulate", "--model", "ergm.json", "--network", "communication.csv", "--covariate", "kin=kin.csv",
            "--sweeps", "3", "--seed", "2",
        ],
        tmp.path(),
    );
    assert!(sim.status.success(), "{}", stderr(&sim));
    let net = netmod_core::netcore::io::read_square_matrix(sim.stdout.as_slice()).unwrap();
    assert_eq!(net.n(), 20);

    let evolve = netmod(
        &[
            "evolve", "--model", "ergm.json", "--network", "communication.csv", "--covariate", "kin=kin.csv",
            "--metric", "total-weight", "--steps", "4", "--replicates", "3", "--seed", "2",
        ],
        tmp.path(),
    );
    assert!(evolve.status.success(), "{}", stderr(&evolve));
    let csv = String::from_utf8(evolve.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,strategy,mean,sd,lower,upper"));
    assert_eq!(lines.count(), 5);
}

const CONFIG: &str = r#"
seed = 11
output_dir = "out"

[inputs]
focal = "communication.csv"
focal_name = "communication"
response = "collaboration.csv"

[inputs.covariates]
organization = "organization.csv"
education = "education.csv"

[metric]
kind = "expected-dyad-sum"
predictors = ["communication", "education", "organization"]

[optimize]
strategies = ["greedy", "do-nothing"]
budget = 3
"#;

#[test]
fn validate_and_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    noordin_bundle(tmp.path());
    fs::write(tmp.path().join("run.toml"), CONFIG).unwrap();

    let ok = netmod(&["validate", "--config", "run.toml"], tmp.path());
    assert!(ok.status.success());
    assert!(stderr(&ok).contains("OK"));

    let run = netmod(&["pipeline", "--config", "run.toml", "--output-dir", "elsewhere"], tmp.path());
    assert!(run.status.success(), "{}", stderr(&run));
    assert!(tmp.path().join("elsewhere/manifest.json").exists());
    assert!(stderr(&run).contains("greedy: chosen ["));

    fs::remove_file(tmp.path().join("education.csv")).unwrap();
    let missing = netmod(&["validate", "--config", "run.toml"], tmp.path());
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    counterexample(tmp.path());
    assert_eq!(netmod(&["--help"], tmp.path()).status.code(), Some(0));
    assert_eq!(netmod(&["no-such-command"], tmp.path()).status.code(), Some(1));
    let zero_budget = netmod(
        &["optimize", "--network", "fixture.csv", "--metric", "total-weight", "--budget", "0"],
        tmp.path(),
    );
    assert_eq!(zero_budget.status.code(), Some(1));
    // exhaustive does not handle edge changes
    let unsupported = netmod(
        &[
            "optimize", "--network", "fixture.csv", "--metric", "total-weight", "--budget", "1", "--strategy",
            "exhaustive", "--change", "add-edge-unit",
        ],
        tmp.path(),
    );
    assert_eq!(unsupported.status.code(), Some(2), "{}", stderr(&unsupported));
}
