use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2lab")).arg("--out").arg(out).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const ABELIAN: &str = "problem = abelian\nmesh = log 24 0.015625 0.25\nsphere_samples = 24\ntol = 1e-12\n";

#[test]
fn algebra_check_passes_and_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = run(a.path(), &["algebra-check", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
    let report = json(&a.path().join("algebra-check.json"));
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    let o = Command::new(env!("CARGO_BIN_EXE_g2lab"))
        .env("G2LAB_THREADS", "1")
        .arg("--out")
        .arg(b.path())
        .args(["algebra-check", "--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read(a.path().join("algebra-check.json")).unwrap(),
        fs::read(b.path().join("algebra-check.json")).unwrap()
    );
}

#[test]
fn bad_thread_count_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_g2lab"))
        .env("G2LAB_THREADS", "zero")
        .args(["algebra-check"])
        .current_dir(d.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn g2_derive_of_the_model_form() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["g2-derive", "--phi", "euclidean"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&d.path().join("g2-derive.json"));
    for i in 0..7 {
        for j in 0..7 {
            assert_eq!(r["metric"][i][j].as_f64().unwrap(), if i == j { 1.0 } else { 0.0 });
        }
    }
    let psi = r["psi"].as_str().unwrap();
    assert_eq!(psi.lines().count(), 8, "{psi}");
    assert!(psi.starts_with("degree 4\n"));
}

#[test]
fn form_files_and_points_are_read() {
    let d = tempfile::tempdir().unwrap();
    let file = d.path().join("phi.txt");
    fs::write(&file, "degree 3\n1 2 3 2\n1 4 5 1\n1 6 7 1\n2 4 6 1\n2 5 7 -1\n3 4 7 -1\n3 5 6 -1\n").unwrap();
    let o = run(d.path(), &["normalize", "--phi", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&d.path().join("normalize.json"))["residual"].as_f64().unwrap() <= 1e-8);
    let o = run(d.path(), &["g2-derive", "--phi", "cubic", "--at", "0.1,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(d.path(), &["g2-derive", "--phi", "missing.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn instanton_check_models() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["instanton-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = json(&d.path().join("instanton-check.json"));
    assert!(r["defect"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["points"].as_array().unwrap().len(), 200);

    let file = d.path().join("lin.txt");
    let mut text = String::from("rank 2\n0 1\n-1 0\n");
    for _ in 0..6 {
        text.push_str("\n0 0\n0 0\n");
    }
    fs::write(&file, text).unwrap();
    let o = run(d.path(), &["instanton-check", "--model", file.to_str().unwrap(), "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let o = run(d.path(), &["instanton-check", "--model", "flat", "--rank", "3", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn rescale_check_reports_margins_and_covariance() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["rescale-check", "--phi", "linear-perturb", "--lambda", "16", "--points", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = json(&d.path().join("rescale-check.json"));
    assert!(r["c5"]["margins"].as_array().unwrap().iter().all(|m| m.as_f64().unwrap() > 0.0));
    assert!(r["covariance_max_rel_error"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["covariance"].as_array().unwrap().len(), 100);
    let o = run(d.path(), &["rescale-check", "--phi", "linear-perturb", "--lambda", "16", "--C", "0.001"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), &["rescale-check", "--phi", "linear-perturb", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_writes_report_profiles_and_decay_table() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("a.cfg");
    fs::write(&cfg, ABELIAN).unwrap();
    let o = run(d.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = json(&d.path().join("report.json"));
    assert_eq!(r["report"]["status"], "converged");
    assert!(r["exact_profile_error"].as_f64().unwrap() <= 1e-6);
    let profiles = fs::read_to_string(d.path().join("profiles.csv")).unwrap();
    assert!(profiles.starts_with("r,f,u\n"));
    assert_eq!(profiles.lines().count(), 25);
    let decay = fs::read_to_string(d.path().join("decay.csv")).unwrap();
    assert!(decay.starts_with("r,l,coord_sup,cov_sup\n"));

    let o = run(d.path(), &["decay-fit", "--table", d.path().join("decay.csv").to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)));
    assert!(json(&d.path().join("decay-fit.json"))["slope"].is_number());

    // A second run reproduces every artifact byte for byte.
    let e = tempfile::tempdir().unwrap();
    assert_eq!(run(e.path(), &["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(0));
    for f in ["report.json", "profiles.csv", "decay.csv"] {
        assert_eq!(fs::read(d.path().join(f)).unwrap(), fs::read(e.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn solve_rejects_bad_configs_and_failed_preconditions() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    fs::write(&cfg, "problem = abelian\nspeed = 3\n").unwrap();
    let o = run(d.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
    fs::write(&cfg, "lambda = 1\nmesh = log 8 0.015625 0.25\n").unwrap();
    let o = run(d.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));
}

#[test]
fn best_effort_solve_exits_with_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("p.cfg");
    fs::write(&cfg, "mesh = log 12 0.015625 0.25\nsphere_samples = 12\npin_inner = false\nmax_iter = 3\n").unwrap();
    let o = run(d.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let r = json(&d.path().join("report.json"));
    assert!(r["report"]["final_residual"].as_f64().unwrap() < r["report"]["initial_residual"].as_f64().unwrap());
    let profiles = fs::read_to_string(d.path().join("profiles.csv")).unwrap();
    assert!(profiles.starts_with("r,f1,f2,f3,u\n"));
}

#[test]
fn usage_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(d.path(), &["rescale-check", "--phi", "cubic"]).status.code(), Some(1));
}
