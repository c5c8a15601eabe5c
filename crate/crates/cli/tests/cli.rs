//! End-to-end tests of the `siglo` binary: exit codes, file contract,
//! determinism, and the published values of the built-in scenarios.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn siglo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siglo"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn results(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("results.json")).expect("results.json exists");
    serde_json::from_str(&text).expect("results.json parses")
}

#[test]
fn validate_passes_within_budget() {
    let started = Instant::now();
    let out = siglo(&["validate"]);
    let elapsed = started.elapsed().as_secs_f64();
    let table = stdout(&out);
    assert!(
        out.status.success(),
        "validate failed (status {:?}):\n{table}\n{}",
        out.status.code(),
        stderr(&out)
    );
    assert!(elapsed < 600.0, "validate took {elapsed:.0}s, budget is 600s");
    assert_eq!(table.matches("[PASS]").count(), 15, "expected 15 passing checks:\n{table}");
    assert!(!table.contains("[FAIL]"), "unexpected failures:\n{table}");
    assert!(table.contains("15/15 checks passed"), "missing summary:\n{table}");
}

#[test]
fn wrong_reference_constant_fails_validate() {
    let out = siglo(&["validate", "--only", "theta1-recovery", "--theta1", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL] theta1-recovery"), "table:\n{}", stdout(&out));
    assert!(stderr(&out).contains("theta1-recovery"), "stderr lists the failed check");
}

#[test]
fn invalid_configs_are_rejected_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    // Syntax error: serde's message carries the line anchor.
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"name\": \"x\",\n  oops\n}\n").unwrap();
    let out = siglo(&["run", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "stderr: {}", stderr(&out));

    // Well-formed JSON, bad field: still exit 2, naming the problem.
    let bad_dim = dir.path().join("bad_dim.json");
    std::fs::write(
        &bad_dim,
        r#"{ "name": "x", "dimension": 7, "seed": 0,
             "measure": { "plus": { "atoms": [ { "location": [0,0,0,0,0,0,0], "weight": 1.0 } ] } },
             "task": { "type": "solve_k", "k": 1 } }"#,
    )
    .unwrap();
    let out = siglo(&["run", bad_dim.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dimension"), "stderr: {}", stderr(&out));

    // Typo in a field name: unknown fields are config errors, not silence.
    let typo = dir.path().join("typo.json");
    std::fs::write(
        &typo,
        r#"{ "name": "x", "dimension": 1, "seed": 0, "sead": 1,
             "task": { "type": "validate" } }"#,
    )
    .unwrap();
    let out = siglo(&["run", typo.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sead"), "stderr: {}", stderr(&out));
}

#[test]
fn non_dominant_mass_is_refused_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("heavy.json");
    std::fs::write(
        &cfg,
        r#"{ "name": "heavy", "dimension": 1, "seed": 0,
             "measure": {
               "plus":  { "atoms": [ { "location": [0.0], "weight": 1.0 } ] },
               "minus": { "atoms": [ { "location": [2.0], "weight": 2.0 } ] } },
             "task": { "type": "solve_k", "k": 1 } }"#,
    )
    .unwrap();
    let out = siglo(&["run", cfg.to_str().unwrap(), "--output", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(
        msg.contains("m+ = 1") && msg.contains("m- = 2"),
        "message states the masses: {msg}"
    );
    assert!(msg.contains("dominate"), "message states the hypothesis: {msg}");
}

#[test]
fn seeded_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("solve.json");
    std::fs::write(
        &cfg,
        r#"{ "name": "two-blocks", "dimension": 1, "seed": 7,
             "measure": {
               "plus":  { "densities": [ { "lo": [-2.0], "hi": [2.0], "resolution": [400], "uniform": 1.0 } ] },
               "minus": { "densities": [ { "lo": [-0.25], "hi": [0.25], "resolution": [100], "uniform": 4.0 } ] } },
             "task": { "type": "solve_k", "k": 4, "restarts": 3 } }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let run = || {
        let out = siglo(&["run", cfg.to_str().unwrap(), "--output", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    };
    let tracked = ["results.json", "points.csv", "density.csv", "plotdata/trace.csv"];
    run();
    let first: Vec<Vec<u8>> =
        tracked.iter().map(|f| std::fs::read(out_dir.join(f)).unwrap()).collect();
    run();
    for (f, before) in tracked.iter().zip(&first) {
        let after = std::fs::read(out_dir.join(f)).unwrap();
        assert_eq!(&after, before, "{f} changed between identical runs");
    }
}

#[test]
fn fermat_weber_example_reports_the_exact_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = siglo(&["example", "fermat-weber-4.6", "--output", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = results(dir.path());
    assert_eq!(r["results"]["objective"]["value"], -14.0);
    assert_eq!(r["results"]["best"], serde_json::json!([[0.0], [8.0]]));
    assert_eq!(r["results"]["descent_cross_check"]["within_threshold"], true);

    let points = std::fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert_eq!(points, "k,restart,x0\n2,0,0\n2,0,8\n");
}

#[test]
fn nonexistence_example_shows_a_strictly_decreasing_probe() {
    let dir = tempfile::tempdir().unwrap();
    let out = siglo(&["example", "nonexistence-3.2", "--output", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = results(dir.path());
    assert_eq!(r["results"]["no_minimizer_evidence"], true);
    let f0 = r["results"]["f_at_0"]["value"].as_f64().unwrap();
    let f1 = r["results"]["f_at_1"]["value"].as_f64().unwrap();
    assert!((f0 - 1.0).abs() <= 1e-3);
    assert!((f1 - (4.0 / std::f64::consts::PI - 1.0)).abs() <= 1e-3);

    let series = std::fs::read_to_string(dir.path().join("plotdata/f_of_r.csv")).unwrap();
    let values: Vec<f64> = series
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 21);
    assert!(values.windows(2).all(|w| w[1] < w[0]), "f(r) must strictly decrease: {values:?}");
}

#[test]
fn canonical_example_recovers_the_root_two_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = siglo(&["example", "canonical-4.4", "--output", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = results(dir.path());
    let radius = r["results"]["radius"]["value"].as_f64().unwrap();
    assert!(
        (radius - 2.0f64.sqrt()).abs() <= 1e-4,
        "radius {radius} vs {}",
        2.0f64.sqrt()
    );
    let mass = r["results"]["interior_mass"]["value"].as_f64().unwrap();
    assert!((mass - 1.0).abs() <= 1e-3, "interior attraction mass {mass}");
}

#[test]
fn theta_subcommand_recovers_the_line_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = siglo(&[
        "theta", "--n", "1", "--k", "32", "--restarts", "2", "--seed", "0",
        "--output", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = results(dir.path());
    let theta = r["results"]["theta"]["value"].as_f64().unwrap();
    assert!((theta - 0.25).abs() <= 0.005 * 0.25, "theta {theta}");
    assert!(stdout(&out).contains("theta (n = 1, k = 32)"));
}
