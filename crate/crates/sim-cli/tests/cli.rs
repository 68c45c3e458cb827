//! End-to-end CLI behavior: subcommands, exit codes, output files and the
//! worker-count override.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_converge-sim"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("converge-sim-test-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_tiny_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("experiment.cfg");
    let text = format!(
        "window.side_km = 5\n\
         scenario.base_density_per_km2 = 0.4\n\
         users.lambda = 0.5, 1\n\
         channel.alpha = 3.5\n\
         sim.drops = 5\n\
         sim.time_steps = 2\n\
         output.dir = {}\n\
         {extra}",
        dir.join("out").display()
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_accepts_good_and_rejects_bad_configs() {
    let dir = temp_dir("validate");
    let good = write_tiny_config(&dir, "");
    let status = bin()
        .args(["validate", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert!(status.status.success(), "{status:?}");

    let bad = dir.join("bad.cfg");
    fs::write(&bad, "channel.alpha = 2.0\nbogus.key = 1\n").unwrap();
    let output = bin()
        .args(["validate", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("path_loss_exponent"));
    assert!(stderr.contains("unknown key"));
}

#[test]
fn missing_config_file_is_a_runtime_error() {
    let output = bin()
        .args(["validate", "--config", "/nonexistent/run.cfg"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn run_writes_csv_and_plots() {
    let dir = temp_dir("run");
    let config = write_tiny_config(&dir, "");
    let output = bin()
        .args(["run", "--quiet", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");

    let csv = fs::read_to_string(dir.join("out/results.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("scheme,alpha,")));
    // 3 schemes × 1 alpha × 2 lambdas rows after 3 comment lines + header
    assert_eq!(csv.lines().count(), 4 + 6);
    let svg = fs::read_to_string(dir.join("out/interference.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(dir.join("out/efficiency.svg").exists());
}

#[test]
fn scheme_and_seed_overrides_change_the_grid() {
    let dir = temp_dir("overrides");
    let config = write_tiny_config(&dir, "");
    let output = bin()
        .args([
            "run",
            "--quiet",
            "--schemes",
            "max-sinr",
            "--seed",
            "99",
            "--config",
        ])
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let csv = fs::read_to_string(dir.join("out/results.csv")).unwrap();
    assert!(csv.contains("# master_seed=99"));
    assert!(!csv.contains("interference-min"));

    let output = bin()
        .args(["run", "--quiet", "--schemes", "coverage", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn thread_override_does_not_change_results() {
    let dir_a = temp_dir("threads-a");
    let dir_b = temp_dir("threads-b");
    let config_a = write_tiny_config(&dir_a, "");
    let config_b = write_tiny_config(&dir_b, "");
    let run = |config: &PathBuf, threads: &str| {
        let mut cmd = bin();
        cmd.env("CONVERGE_SIM_THREADS", threads);
        let output = cmd
            .args(["run", "--quiet", "--config"])
            .arg(config)
            .output()
            .unwrap();
        assert!(output.status.success(), "{output:?}");
    };
    run(&config_a, "1");
    run(&config_b, "3");
    let csv_a = fs::read_to_string(dir_a.join("out/results.csv")).unwrap();
    let csv_b = fs::read_to_string(dir_b.join("out/results.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
}

#[test]
fn oracle_subcommand_passes_on_the_default_instances() {
    let dir = temp_dir("oracle");
    let config = write_tiny_config(&dir, "");
    let output = bin()
        .args(["oracle", "--instances", "40", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("40/40"));
}
