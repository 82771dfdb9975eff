//! End-to-end tests driving the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracsolve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_example1_writes_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("solution.csv");
    let out = run(&[
        "solve",
        "--problem",
        "example1",
        "--alpha",
        "0.5",
        "--beta",
        "1.8",
        "--N",
        "32",
        "--M",
        "32",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 33);
    // boundary rows carry exact zeros
    assert!(lines[0].ends_with(",0"));
    assert!(lines[32].ends_with(",0"));
}

#[test]
fn alpha_out_of_range_is_rejected() {
    let out = run(&["solve", "--problem", "example1", "--alpha", "1.5"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("(0, 1]"), "stderr: {}", stderr(&out));
}

#[test]
fn small_n_is_rejected() {
    let out = run(&["solve", "--problem", "example1", "--N", "4"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("N >= 5"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_problem_is_rejected() {
    let out = run(&["solve", "--problem", "example9"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown problem name"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "problem=example1\nwavelength=3\n").unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("unknown configuration key 'wavelength'"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_path = dir.path().join("s.csv");
    std::fs::write(&cfg, "problem=example1\nalpha=0.25\nN=16\nM=8\n").unwrap();
    let out = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--alpha",
        "0.75",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("alpha = 0.75"));
}

#[test]
fn example2_auto_dispatches_to_pcgs() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = run(&[
        "solve",
        "--problem",
        "example2",
        "--alpha",
        "0.9",
        "--beta",
        "1.3",
        "--N",
        "16",
        "--M",
        "16",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("solver = pcgs"));
}

#[test]
fn dense_and_pcgs_solutions_agree() {
    let dir = tempfile::tempdir().unwrap();
    let a_path = dir.path().join("a.csv");
    let b_path = dir.path().join("b.csv");
    for (solver, path) in [("dense", &a_path), ("pcgs", &b_path)] {
        let out = run(&[
            "solve",
            "--problem",
            "example1",
            "--alpha",
            "0.5",
            "--beta",
            "1.8",
            "--N",
            "16",
            "--M",
            "16",
            "--solver",
            solver,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let parse = |p: &Path| -> Vec<(f64, f64)> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| {
                let (x, u) = l.split_once(',').unwrap();
                (x.parse().unwrap(), u.parse().unwrap())
            })
            .collect()
    };
    let a = parse(&a_path);
    let b = parse(&b_path);
    let scale = a.iter().map(|(_, u)| u.abs()).fold(0.0, f64::max);
    for ((xa, ua), (xb, ub)) in a.iter().zip(&b) {
        assert_eq!(xa, xb);
        assert!((ua - ub).abs() <= 1e-9 * scale);
    }
}

#[test]
fn identical_configs_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a_path = dir.path().join("a.csv");
    let b_path = dir.path().join("b.csv");
    for path in [&a_path, &b_path] {
        let out = run(&[
            "solve",
            "--problem",
            "example2",
            "--alpha",
            "0.3",
            "--beta",
            "1.4",
            "--N",
            "16",
            "--M",
            "8",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(&a_path).unwrap(),
        std::fs::read(&b_path).unwrap()
    );
}

#[test]
fn convergence_header_and_order_cells() {
    let out = run(&[
        "convergence",
        "--problem",
        "example1",
        "--alpha",
        "0.5",
        "--beta",
        "1.8",
        "--ladder",
        "8,16",
        "--mode",
        "space-time",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "alpha,beta,h,tau,l2_error,l2_order,max_error,max_order"
    );
    // coarsest row leaves the order cells empty
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[5], "");
    assert_eq!(first[7], "");
    let second: Vec<&str> = lines[2].split(',').collect();
    assert!(!second[5].is_empty());
}

#[test]
fn convergence_single_entry_ladder() {
    let out = run(&[
        "convergence",
        "--problem",
        "example1",
        "--ladder",
        "8",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[5], "");
    assert_eq!(row[7], "");
}

#[test]
fn convergence_rejects_unsorted_ladder() {
    let out = run(&["convergence", "--problem", "example1", "--ladder", "16,8"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("ascending"));
}

#[test]
fn weights_output_matches_closed_forms() {
    let out = run(&["weights", "--alpha", "1.0", "--beta", "2.0", "--k", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,g,omega,a,b");
    let omega: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(omega, vec![1.0, -2.0, 1.0, 0.0, 0.0]);
    let a: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(a[..4], [1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn weights_g_column_matches_binomial_oracle() {
    let out = run(&["weights", "--alpha", "0.5", "--beta", "1.3", "--k", "50"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let g: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let binom = |k: usize| -> f64 {
        let mut v = 1.0;
        for i in 0..k {
            v *= (1.3 - i as f64) / (i as f64 + 1.0);
        }
        if k % 2 == 0 {
            v
        } else {
            -v
        }
    };
    for (k, &gk) in g.iter().enumerate() {
        let want = binom(k);
        assert!(
            (gk - want).abs() <= 1e-13 * want.abs().max(1e-30),
            "k={k}: {gk} vs {want}"
        );
    }
}

#[test]
fn export_writes_both_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "export",
        "--problem",
        "example1",
        "--alpha",
        "0.5",
        "--beta",
        "1.8",
        "--N",
        "8",
        "--M",
        "8",
        "--level",
        "1",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let a = std::fs::read_to_string(dir.path().join("a_matrix.csv")).unwrap();
    let p = std::fs::read_to_string(dir.path().join("preconditioned_a.csv")).unwrap();
    assert_eq!(a.lines().count(), 7);
    assert_eq!(p.lines().count(), 7);
    // round-trippable numbers
    for line in a.lines().chain(p.lines()) {
        for cell in line.split(',') {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v}"), cell);
        }
    }
}

#[test]
fn csv_floats_round_trip() {
    // shortest round-trip formatting survives parse(emit(x)) exactly
    for &v in &[
        0.1,
        1.0 / 3.0,
        2.6670e-4,
        std::f64::consts::PI,
        1.7976931348623157e308,
        5e-324,
    ] {
        let s = format!("{v}");
        let back: f64 = s.parse().unwrap();
        assert_eq!(v, back);
    }
}
