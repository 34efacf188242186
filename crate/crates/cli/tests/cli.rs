use std::path::Path;
use std::process::{Command, Output};

use fraclap::solver::GridFunction;
use fraclap::verify::Report;

fn fraclap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclap")).args(args).current_dir(dir).env_remove("FRACLAP_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn kernel_inline_row_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(&["kernel", "green-ball", "--dim", "1", "--s", "0.5", "0", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "target,N,s,regime,x,y,value,flag");
    let fields: Vec<&str> = lines[1].split(',').collect();
    let value: f64 = fields[6].parse().unwrap();
    assert!((value - (2.0 + 3f64.sqrt()).ln() / std::f64::consts::PI).abs() < 1e-15);
    assert!((value - 0.419234).abs() < 1e-4);
    assert_eq!(fields[7], "ok");
}

#[test]
fn kernel_flags_diagonal_rows_and_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(&["kernel", "riesz", "--dim", "2", "--s", "0.5", "1", "2", "1", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().nth(1).unwrap().ends_with(",inf,diagonal"));

    let out = fraclap(&["kernel", "riesz", "--dim", "2", "--s", "0.5", "1", "2", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dimension mismatch"));

    std::fs::write(dir.path().join("empty.txt"), "# nothing\n\n").unwrap();
    let out = fraclap(&["kernel", "poisson-ball", "--dim", "3", "--s", "0.25", "--points", "empty.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "target,N,s,regime,x,y,value,flag\n");

    std::fs::write(dir.path().join("bad.txt"), "0 0.5\n0.1 0.2\n0.1 oops\n").unwrap();
    let out = fraclap(&["kernel", "green-ball", "--dim", "1", "--s", "0.5", "--points", "bad.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = fraclap(&["kernel", "green-ball", "--dim", "1", "--s", "1.5", "0", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = fraclap(&["kernel", "nonsense", "--dim", "1", "--s", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_reads_files_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pts.csv"), "0.1,0.2,0.3,-0.5\n").unwrap();
    let out = fraclap(
        &["kernel", "green-halfspace", "--dim", "2", "--s", "0.5", "--points", "pts.csv", "--format", "json", "-o", "k.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.json")).unwrap()).unwrap();
    assert_eq!(rows[0]["x"], serde_json::json!([0.1, 0.2]));
    assert!(rows[0]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn solve_ball_reproduces_the_getoor_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(&["solve", "ball", "--dim", "1", "--s", "0.5", "--f", "1", "-o", "torsion.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let u = GridFunction::from_text(&std::fs::read_to_string(dir.path().join("torsion.txt")).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for i in 0..u.len() {
        let x = u.node(i)[0];
        if x.abs() <= 0.9 {
            worst = worst.max((u.values()[i] - (1.0 - x * x).sqrt()).abs());
        }
    }
    assert!(worst < 1e-6, "{worst}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("torsion.txt.report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "ok");
    assert_eq!(report["problem"], "ball");
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 2, "{leftovers:?}");
}

#[test]
fn solve_zero_data_and_semilinear_plumbing() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(&["solve", "ball", "--dim", "2", "--s", "0.3", "--f", "0", "--g", "0", "--nodes", "5", "-o", "z.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let u = GridFunction::from_text(&std::fs::read_to_string(dir.path().join("z.txt")).unwrap()).unwrap();
    assert!(u.values().iter().all(|v| *v == 0.0));

    let out = fraclap(&["solve", "halfspace-semilinear", "--dim", "1", "--s", "0.5", "--q", "3", "-o", "p.txt"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.txt.report.json")).unwrap()).unwrap();
    assert_eq!(report["run"]["nonlinearity"], "power(3)");
    assert_eq!(report["q"], 3.0);

    let out = fraclap(&["solve", "halfspace-semilinear", "--dim", "1", "--s", "0.5", "-o", "p.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_reports_quadrature_failure_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(
        &["solve", "ball", "--dim", "1", "--s", "0.75", "--nodes", "7", "--rel-tol", "1e-15", "--abs-tol", "1e-300", "-o", "u.txt"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("u.txt.report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "tolerance-not-met");
    assert!(!report["node_errors"].as_array().unwrap().is_empty());
}

#[test]
fn verify_exit_codes_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let out = fraclap(&["verify", "no-such-check"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("reports").exists());

    let run = |seed: &str, sub: &str| {
        let out = fraclap(&["verify", "green-symmetry", "--seed", seed, "--out-dir", sub], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        std::fs::read_to_string(dir.path().join(sub).join("green-symmetry.json")).unwrap()
    };
    let a = run("7", "a");
    assert_eq!(a, run("7", "b"));
    assert_ne!(a, run("8", "c"));
    assert_eq!(Report::from_json(&a).unwrap().seed, 7);

    let out = fraclap(&["verify", "holder", "--dim", "1", "--s", "0.5", "--out-dir", "h"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("FAIL holder"));
}

#[test]
fn config_file_and_thread_variable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "seed = 5\nformat = \"csv\"\n[params]\ndim = 1\ns = 0.5\n[verify]\nout_dir = \"cfg\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(["verify", "dimension-reduction", "--config", "run.toml", "--seed", "6"])
        .env("FRACLAP_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "N = 1 has no lower dimension: {}", stdout(&out));
    assert!(stdout(&out).contains("ERROR dimension-reduction"));

    let out = fraclap(&["kernel", "green-ball", "--config", "run.toml", "0", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("green-ball,1,"));

    std::fs::write(dir.path().join("bad.toml"), "unknown_key = 1\n").unwrap();
    let out = fraclap(&["verify", "holder", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(["kernel", "riesz", "--dim", "1", "--s", "0.5", "0", "1"])
        .env("FRACLAP_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_names_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let verify = stdout(&fraclap(&["verify", "--help"], dir.path()));
    for id in fraclap::verify::check_ids() {
        assert!(verify.contains(id), "{id}");
    }
    let kernel = stdout(&fraclap(&["kernel", "--help"], dir.path()));
    assert!(kernel.contains("poisson-normalization") && kernel.contains("h-monotonicity"));
    let solve = stdout(&fraclap(&["solve", "--help"], dir.path()));
    assert!(solve.contains("ball-torsion") && solve.contains("liouville"));
}
