use std::path::Path;
use std::process::{Command, Output};

use asfm::harness::{read_records, Algorithm};
use asfm::Status;

fn asfm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asfm")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_solve_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("loc.json");
    let out = asfm(&[
        "generate",
        "--type",
        "loc",
        "--n",
        "10",
        "--k",
        "3",
        "--gamma-lower",
        "0.8",
        "--seed",
        "5",
        "--out",
        path(&inst),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let records = dir.path().join("rec.csv");
    let trace = dir.path().join("trace.csv");
    let out =
        asfm(&["solve", "--instance", path(&inst), "--algo", "icg", "--out", path(&records), "--trace", path(&trace)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = read_records(std::fs::File::open(&records).unwrap()).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].algorithm, Algorithm::Icg);
    assert_eq!(recs[0].status, Status::Optimal);
    assert_eq!(recs[0].instance, "LOC-n10-k3-s5-g0.8");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("# asfm-cg-trace v1"));

    let brute = asfm(&["solve", "--instance", path(&inst), "--algo", "BRUTE"]);
    let brute = read_records(brute.stdout.as_slice()).unwrap();
    assert!((brute[0].value - recs[0].value).abs() <= 1e-9);
}

#[test]
fn verify_passes_on_perturbed_instance() {
    let out = asfm(&["verify", "--type", "inf", "--n", "8", "--k", "3", "--gamma-lower", "0.8", "--seed", "2"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("PASS prop3"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn suite_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("suite.toml");
    std::fs::write(
        &config,
        "algorithms = [\"BRUTE\", \"ICG\", \"BC-ICG\"]\n\n[[class]]\ntype = \"cov\"\nn = 8\nk = 3\ngamma_lower = 0.8\nseeds = [1, 2]\n",
    )
    .unwrap();
    let records = dir.path().join("rec.csv");
    let profile = dir.path().join("prof.csv");
    let out = asfm(&["suite", "--config", path(&config), "--out", path(&records), "--profile", path(&profile)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_records(std::fs::File::open(&records).unwrap()).unwrap().len(), 6);

    let again = asfm(&["profile", "--records", path(&records)]);
    assert!(again.status.success());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), std::fs::read_to_string(&profile).unwrap());
}

#[test]
fn malformed_suite_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "algorithms = [\"ICG\"]\n[[class]]\ntype = \"loc\"\nn = 8\nk = 3\nflavour = 1\n").unwrap();
    let out = asfm(&["suite", "--config", path(&config)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ingest_transactions() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("groceries.csv");
    std::fs::write(&csv, "milk,bread\nmilk,bread,eggs\nbutter\nbread,eggs\n").unwrap();
    let inst = dir.path().join("ca.json");
    let out = asfm(&["ingest-ca", "--input", path(&csv), "--k", "2", "--seed", "3", "--out", path(&inst)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let solved = asfm(&["solve", "--instance", path(&inst), "--algo", "BC-ICG"]);
    assert!(solved.status.success(), "{}", String::from_utf8_lossy(&solved.stderr));
    let recs = read_records(solved.stdout.as_slice()).unwrap();
    assert_eq!(recs[0].status, Status::Optimal);
}
