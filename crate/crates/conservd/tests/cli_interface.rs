//! End-to-end checks of the command-line surface: exit-code mapping, config
//! files with flag/environment overrides, and the plot-data round trip.

use std::path::Path;
use std::process::{Command, Output};

fn conservd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conservd"))
        .args(args)
        .env_remove("CONSERVD_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn analyze_exit_codes() {
    let ok = conservd(&[
        "analyze",
        "--registry",
        "brownian",
        "--criterion",
        "g1iii",
        "--samples",
        "30000",
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let violated = conservd(&[
        "analyze",
        "--registry",
        "gim-trutnau-2d",
        "--zero-drift",
        "--criterion",
        "g1i",
        "--auto",
        "--samples",
        "40000",
    ]);
    assert_eq!(violated.status.code(), Some(2), "{}", stdout(&violated));
    assert!(stdout(&violated).contains("witness point"));

    let bad_registry = conservd(&["analyze", "--registry", "nope", "--criterion", "g1i"]);
    assert_eq!(bad_registry.status.code(), Some(64));

    let bad_criterion = conservd(&["analyze", "--registry", "brownian", "--criterion", "zzz"]);
    assert_eq!(bad_criterion.status.code(), Some(64));

    let no_model = conservd(&["analyze", "--criterion", "g1i"]);
    assert_eq!(no_model.status.code(), Some(64));
}

#[test]
fn feller_exit_codes() {
    let ok = conservd(&["feller", "--registry", "gim-trutnau-1d"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let flat = conservd(&["feller", "--A", "1", "--phi", "1"]);
    assert_eq!(flat.status.code(), Some(0));

    let explosive = conservd(&["feller", "--A", "(1+x1^2)^2", "--phi", "1"]);
    assert_eq!(explosive.status.code(), Some(2), "{}", stdout(&explosive));

    // The scale/speed test is one-dimensional.
    let planar = conservd(&["feller", "--registry", "brownian"]);
    assert_eq!(planar.status.code(), Some(64));
}

#[test]
fn simulate_reports_and_never_judges() {
    let out = conservd(&[
        "simulate",
        "--registry",
        "brownian",
        "--paths",
        "5000",
        "--T",
        "1",
        "--dt",
        "0.005",
        "--radii",
        "2,4,8",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    // Escape probabilities decrease along the rung ladder.
    let probs: Vec<f64> = text
        .lines()
        .filter(|l| l.contains("P(sup"))
        .map(|l| {
            l.split(") = ")
                .nth(1)
                .unwrap()
                .split_whitespace()
                .next()
                .unwrap()
                .parse()
                .unwrap()
        })
        .collect();
    assert_eq!(probs.len(), 3);
    assert!(probs.windows(2).all(|w| w[1] <= w[0]), "{probs:?}");

    let bad_radii = conservd(&[
        "simulate",
        "--registry",
        "brownian",
        "--paths",
        "10",
        "--radii",
        "4,2",
    ]);
    assert_eq!(bad_radii.status.code(), Some(64));
}

#[test]
fn config_file_with_flag_and_env_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.conf");
    std::fs::write(
        &config,
        r#"
# one-dimensional run
[model]
registry = gim-trutnau-1d

[plan]
samples = 30000
seed = 11

[criterion]
id = cor13i
C = 3
beta = 1
alpha = 5/6

[output]
json = true
csv = true
"#,
    )
    .unwrap();

    let dir1 = tmp.path().join("a");
    let out = conservd(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir1.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report = std::fs::read_to_string(dir1.join("report.json")).unwrap();
    assert!(report.contains("\"seed\": 11"));

    // A flag overrides the file key.
    let dir2 = tmp.path().join("b");
    let out = conservd(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "12",
        "--out-dir",
        dir2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir2.join("report.json")).unwrap();
    assert!(report.contains("\"seed\": 12"));

    // The environment variable overrides both.
    let dir3 = tmp.path().join("c");
    let out = Command::new(env!("CARGO_BIN_EXE_conservd"))
        .args([
            "analyze",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "12",
            "--out-dir",
            dir3.to_str().unwrap(),
        ])
        .env("CONSERVD_SEED", "13")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir3.join("report.json")).unwrap();
    assert!(report.contains("\"seed\": 13"));
}

#[test]
fn plot_data_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let analyze_dir = tmp.path().join("analyze");
    let out = conservd(&[
        "analyze",
        "--registry",
        "brownian",
        "--criterion",
        "symexamii",
        "--samples",
        "30000",
        "--seed",
        "3",
        "--out-dir",
        analyze_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let plot_dir = tmp.path().join("plot");
    let out = conservd(&[
        "plot-data",
        "--input",
        analyze_dir.join("report.json").to_str().unwrap(),
        "--out-dir",
        plot_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let original = std::fs::read(analyze_dir.join("growth.csv")).unwrap();
    let replotted = std::fs::read(plot_dir.join("growth.csv")).unwrap();
    assert_eq!(original, replotted, "CSV from JSON must match the original");
    assert!(std::str::from_utf8(&original)
        .unwrap()
        .starts_with("n,a_n,b_n,c_n,vol_n,bnorm_n,A_hat_n,log_q_n\n"));

    let garbage = tmp.path().join("garbage.json");
    std::fs::write(&garbage, b"{}").unwrap();
    let out = conservd(&[
        "plot-data",
        "--input",
        garbage.to_str().unwrap(),
        "--out-dir",
        plot_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn examples_subcommand_matches_expectations() {
    let out = conservd(&["examples", "gim-trutnau-1d", "--samples", "60000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("satisfied-up-to-horizon"));
    assert!(text.contains("oracle feller"));

    let out = conservd(&["examples", "unknown-name"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn examples_all_pipelines_match() {
    let out = conservd(&["examples", "all", "--samples", "100000"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("MISMATCH"), "{text}");
    // One block per registry entry.
    assert_eq!(text.matches("example ").count(), 6, "{text}");
}

#[test]
fn analyze_with_decay_verdict() {
    let out = conservd(&[
        "analyze",
        "--registry",
        "brownian",
        "--criterion",
        "g1iii",
        "--samples",
        "30000",
        "--schedule",
        "1,2,4,8",
        "--decay",
        "--decay-T",
        "0.1",
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("criterion decay: satisfied-up-to-horizon"), "{text}");
}

fn read_dir_names(path: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(path)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    names.sort();
    names
}

#[test]
fn analyze_writes_requested_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let out = conservd(&[
        "analyze",
        "--registry",
        "brownian",
        "--criterion",
        "g1iii",
        "--samples",
        "20000",
        "--out-dir",
        dir.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_dir_names(&dir), vec!["report.json"]);
}
