//! Black-box tests of the command-line interface: output formats, exit
//! codes, file inputs and determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shadowinv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmpfile(name: &str) -> PathBuf {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join(name);
    // Keep the directory alive for the test process lifetime.
    std::mem::forget(dir);
    path
}

#[test]
fn validate_reports_builtin_dimensions() {
    let out = run(&["validate", "--povm", "pauli6"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "d=2 n=6 D=4 free=2");

    let out = run(&["validate", "--povm", "planar4"]);
    assert_eq!(stdout(&out).trim(), "d=2 n=4 D=3 free=1");

    let out = run(&["validate", "--povm", "triangle3"]);
    assert_eq!(stdout(&out).trim(), "d=2 n=3 D=3 free=0");
}

#[test]
fn validate_accepts_povm_files_and_rejects_incomplete_ones() {
    // Pauli-6 written out as JSON: (1 +- sigma_zeta)/6 in row-major entries.
    let s = 1.0 / 6.0;
    let pauli6 = serde_json::json!({
        "dim": 2,
        "effects": [
            [[s, 0.0], [s, 0.0], [s, 0.0], [s, 0.0]],
            [[s, 0.0], [-s, 0.0], [-s, 0.0], [s, 0.0]],
            [[s, 0.0], [0.0, -s], [0.0, s], [s, 0.0]],
            [[s, 0.0], [0.0, s], [0.0, -s], [s, 0.0]],
            [[2.0*s, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [2.0*s, 0.0]]
        ]
    });
    let path = tmpfile("pauli6.json");
    fs::write(&path, pauli6.to_string()).unwrap();
    let out = run(&["validate", "--povm", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout(&out).trim(), "d=2 n=6 D=4 free=2");

    let incomplete = serde_json::json!({
        "dim": 2,
        "effects": [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]]
    });
    let path = tmpfile("incomplete.json");
    fs::write(&path, incomplete.to_string()).unwrap();
    let out = run(&["validate", "--povm", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("\"valid\":false"), "got: {text}");
}

#[test]
fn bad_arguments_exit_with_code_three() {
    let out = run(&["validate", "--povm", "not-a-povm"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["norm", "--povm", "pauli6", "--h", "nonsense"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["sweep-sphere", "--grid", "0x0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn norm_command_reports_the_planar_optimum() {
    let out = run(&[
        "norm",
        "--povm",
        "planar4",
        "--observable",
        "planar-pauli",
        "--phi",
        "0.9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let opt_line = text
        .lines()
        .find(|l| l.starts_with("norm_opt="))
        .expect("norm_opt line");
    let value: f64 = opt_line.trim_start_matches("norm_opt=").parse().unwrap();
    assert!((value - 2.0).abs() < 1e-4);
    assert!(text.contains("free=1"));
}

#[test]
fn norm_rejects_observables_outside_the_span() {
    let out = run(&["norm", "--povm", "planar4", "--observable", "sigma-z"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn equator_sweep_has_stable_columns_and_optimal_endpoints() {
    let out = run(&["sweep-equator", "--grid", "21"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "phi,norm_opt,p_r_opt,p_i_opt");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    assert!((rows[0][1] - 1.0).abs() < 1e-4);
    assert!((rows[10][1] - 1.0).abs() < 1e-4);
    assert!((rows[20][1] - 1.0).abs() < 1e-4);
    for row in &rows {
        assert!(row[1] <= 1.25 + 1e-4);
    }
}

#[test]
fn sweeps_are_deterministic_given_the_flag_set() {
    let a = run(&["sweep-equator", "--grid", "11", "--seed", "5"]);
    let b = run(&["sweep-equator", "--grid", "11", "--seed", "5"]);
    assert_eq!(stdout(&a), stdout(&b));

    let a = run(&["sweep-sphere", "--grid", "5x6", "--seed", "2"]);
    let b = run(&["sweep-sphere", "--grid", "5x6", "--seed", "2"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn thread_cap_does_not_change_sweep_output() {
    let plain = run(&["sweep-sphere", "--grid", "4x5"]);
    let capped = bin()
        .args(["sweep-sphere", "--grid", "4x5"])
        .env("SHADOWINV_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&plain), stdout(&capped));
}

#[test]
fn scale_table_matches_simple_powers() {
    let out = run(&["scale", "--norm-a", "3", "--norm-b", "2", "--n-max", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n,norm_a_pow,norm_b_pow,ratio,samples_a,samples_b");
    let parse = |line: &str| -> Vec<f64> { line.split(',').map(|v| v.parse().unwrap()).collect() };
    let r2 = parse(rows[2]);
    assert_eq!(r2[0], 2.0);
    assert!((r2[1] - 9.0).abs() < 1e-9);
    assert!((r2[2] - 4.0).abs() < 1e-9);
    assert!((r2[3] - 2.25).abs() < 1e-9);
    // Sample bound column: norm * eps^-2 ln(1/delta) at the defaults.
    let expected = 9.0 / (0.1_f64 * 0.1) * (1.0_f64 / 0.05).ln();
    assert!((r2[4] - expected).abs() < 1e-6);
}

#[test]
fn simulate_is_reproducible_and_supports_exact_mode() {
    let args = [
        "simulate",
        "--povm",
        "pauli6",
        "--observable",
        "bloch",
        "--state-theta",
        "0",
        "--shots",
        "20000",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("violation=false"));

    let exact = run(&[
        "simulate",
        "--povm",
        "pauli6",
        "--observable",
        "bloch",
        "--state-theta",
        "0",
        "--exact",
    ]);
    let text = stdout(&exact);
    assert!(
        text.contains("exact_mean=1.00000000000e0:0.00000000000e0"),
        "got: {text}"
    );
    assert!(!text.contains("empirical_mean"));
}

#[test]
fn simulate_accepts_observable_files() {
    let sx = serde_json::json!({
        "dim": 2,
        "matrix": [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]
    });
    let path = tmpfile("sx.json");
    fs::write(&path, sx.to_string()).unwrap();
    let out = run(&[
        "simulate",
        "--povm",
        "planar4",
        "--observable",
        path.to_str().unwrap(),
        "--exact",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Maximally mixed default state: <sigma_x> = 0, shadow norm 2 at h = 0.
    let text = stdout(&out);
    assert!(text.contains("shadow_norm=2.00000000000e0"), "got: {text}");
}

#[test]
fn csv_output_goes_to_files() {
    let path = tmpfile("scale.csv");
    let out = run(&["scale", "--n-max", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sphere_sweep_pole_row_is_independent_of_phi() {
    let out = run(&["sweep-sphere", "--grid", "3x7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let pole_rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|cols| cols[0].parse::<f64>().unwrap() == 0.0)
        .collect();
    assert_eq!(pole_rows.len(), 7);
    for row in &pole_rows[1..] {
        // Identical except for the phi column.
        assert_eq!(row[2..], pole_rows[0][2..]);
    }
}

#[test]
fn equator_sweep_is_symmetric_about_the_midpoint() {
    let out = run(&["sweep-equator", "--grid", "41"]);
    assert!(out.status.success());
    let rows: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // The x <-> y exchange maps phi to pi - phi and preserves the POVM.
    for i in 0..rows.len() {
        let mirrored = rows[rows.len() - 1 - i];
        assert!((rows[i] - mirrored).abs() < 1e-6, "index {i}");
    }
}

#[test]
fn optimized_parameters_beat_the_particular_solution_empirically() {
    let base = [
        "simulate",
        "--povm",
        "pauli6",
        "--observable",
        "equatorial",
        "--phi",
        "0.7853981633974483",
        "--state-theta",
        "1.5707963267948966",
        "--state-phi",
        "0.7853981633974483",
        "--shots",
        "100000",
        "--seed",
        "7",
    ];
    let second_moment = |text: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with("empirical_second_moment="))
            .unwrap()
            .trim_start_matches("empirical_second_moment=")
            .parse()
            .unwrap()
    };
    let plain = run(&base);
    assert!(plain.status.success());
    let mut optimized_args: Vec<&str> = base.to_vec();
    optimized_args.push("--optimize");
    let optimized = run(&optimized_args);
    assert!(optimized.status.success());
    // Identical outcome stream, reweighted coefficients: 1.375 vs 1.5 in
    // expectation, far beyond the sampling noise at 10^5 shots.
    let gap = second_moment(&stdout(&plain)) - second_moment(&stdout(&optimized));
    assert!(gap > 0.05, "gap {gap}");
}
