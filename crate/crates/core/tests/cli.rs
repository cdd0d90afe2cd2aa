use std::path::Path;
use std::process::{Command, Output};

use colombeau_core::cli::Report;

fn colombeau(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colombeau"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_shows_every_formula() {
    let o = colombeau(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for id in [
        "MIK", "FSTEP", "CMUC", "XPDQ", "TH1+", "TH3-", "COR2-", "TH2_0", "P2", "XX_PROP",
    ] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
}

#[test]
fn passing_verify_exits_zero() {
    let o = colombeau(&["verify", "--formula", "CMUC", "--p", "1", "--levels", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("6 of 6 verdicts passed"));
}

#[test]
fn failed_verdicts_exit_one() {
    let o = colombeau(&[
        "verify",
        "--formula",
        "TH1+",
        "--p",
        "2",
        "--tol-rel",
        "1e-12",
        "--tol-abs",
        "1e-15",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    let o = colombeau(&["verify", "--formula", "MIK", "--eps0", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps0"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "formulas = []\nunknown_key = 1\n").unwrap();
    let o = colombeau(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn run_to(dir: &Path) -> String {
    let o = colombeau(&[
        "verify",
        "--formula",
        "TH2+",
        "--p",
        "1",
        "--out",
        dir.to_str().unwrap(),
        "--format",
        "json",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::read_to_string(dir.join("report.json")).unwrap()
}

#[test]
fn reports_are_written_and_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_to(a.path());
    assert_eq!(first, run_to(b.path()));
    let report = Report::from_json(&first).unwrap();
    assert_eq!(report.records.len(), 6);
    let csv = std::fs::read_to_string(a.path().join("verdicts.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn config_file_round_trips_through_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(
        &cfg,
        r#"
[[formulas]]
id = "XPD1"
p = [2]

[[mollifiers]]
variant = "weighted"

[schedule]
eps0 = 0.08
ratio = 0.5
count = 6
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = colombeau(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    let report =
        Report::from_json(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.config.schedule.count, 6);
    assert_eq!(report.records.len(), 3);
    assert!(report.records.iter().all(|r| r.series.points.len() == 6));
}

#[test]
fn oracle_and_moments_print() {
    let o = colombeau(&["oracle", "--term", "delta"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("even"));
    let o = colombeau(&["oracle", "--formula", "TH1+", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = colombeau(&["moments", "--q", "3", "--variant", "plain"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains('{'));
    let o = colombeau(&["oracle", "--term", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}
