//! End-to-end checks of the `ehrx` binary: argument handling, CSV shape,
//! reproducibility, and failure exits.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ehrx_core::{run, ChannelParams, EnergyConfig, PolicyKind, RunOptions};

fn ehrx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehrx"))
        .args(args)
        .output()
        .expect("spawning ehrx")
}

fn ehrx_ok(args: &[&str]) -> String {
    let out = ehrx(args);
    assert!(
        out.status.success(),
        "ehrx {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

/// Splits a CSV document into (comment lines, header, data rows).
fn parse_csv(text: &str) -> (Vec<&str>, &str, Vec<Vec<&str>>) {
    let mut lines = text.lines().peekable();
    let mut comments = Vec::new();
    while lines.peek().is_some_and(|l| l.starts_with('#')) {
        comments.push(lines.next().unwrap());
    }
    let header = lines.next().expect("header row");
    let rows = lines.map(|l| l.split(',').collect()).collect();
    (comments, header, rows)
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sweep_v_emits_sorted_c_cross_v_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        r#"
        [run]
        horizon = 2000
        warmup = 100
        seeds = 2
        [sweep]
        v_values = [50.0, 200.0]
        c_values = [0.5, 1.0, 2.0]
        "#,
    );
    let stdout = ehrx_ok(&["sweep-v", "--config", &cfg]);
    let (comments, header, rows) = parse_csv(&stdout);
    assert!(comments[0].starts_with("# ehrx-csv v1 kind=sweep-v"));
    assert!(comments[1].starts_with("# config: {"));
    assert_eq!(header, "c,v,throughput_mean,throughput_stderr,bound_b_over_v");
    assert_eq!(rows.len(), 6);
    let keys: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(
        keys,
        vec![(0.5, 50.0), (0.5, 200.0), (1.0, 50.0), (1.0, 200.0), (2.0, 50.0), (2.0, 200.0)]
    );
}

#[test]
fn single_point_sweep_equals_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "one.toml",
        r#"
        [run]
        horizon = 30000
        warmup = 500
        seeds = 1
        master_seed = 42
        [sweep]
        v_values = [200.0]
        c_values = [1.0]
        "#,
    );
    let stdout = ehrx_ok(&["sweep-v", "--config", &cfg]);
    let (_, _, rows) = parse_csv(&stdout);
    assert_eq!(rows.len(), 1);
    let mean: f64 = rows[0][2].parse().unwrap();
    let stderr: f64 = rows[0][3].parse().unwrap();

    let params = ChannelParams::uniform(10, 1.0, 0.1, 1.0, 1e-6).unwrap();
    let energy = EnergyConfig {
        tau: 0.01,
        eta: 0.7,
        phi_se: 0.01,
        phi_pi: 0.01,
        decode_cost_c: 1.0,
        decode_cost_offset: 0.5,
        gamma_max: params.default_gamma_max(),
        v: 200.0,
    };
    let opts =
        RunOptions { horizon: 30000, warmup: 500, master_seed: 42, stream: 0, fast_ps: false };
    let direct = run(PolicyKind::Lyapunov, &params, &energy, &opts).unwrap();
    // The emitted float is shortest-round-trip, so parsing recovers the bits.
    assert_eq!(mean, direct.throughput);
    assert_eq!(stderr, 0.0);
}

#[test]
fn sweep_q_zero_probability_row_has_zero_throughput() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "q.toml",
        r#"
        [run]
        horizon = 2000
        warmup = 100
        seeds = 2
        [sweep]
        q_values = [0.0, 0.1]
        c_values = [1.0]
        "#,
    );
    let stdout = ehrx_ok(&["sweep-q", "--config", &cfg]);
    let (comments, header, rows) = parse_csv(&stdout);
    assert_eq!(header, "c,q,throughput_mean,throughput_stderr");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "0");
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert!(rows[1][2].parse::<f64>().unwrap() > 0.0);
    // A busy grid point beats the silent one, so the argmax comment names it.
    assert!(comments.iter().any(|c| *c == "# argmax c=1 q=0.1"));
}

#[test]
fn unwritable_output_fails_before_simulating() {
    let out = ehrx(&["sweep-v", "--out", "/nonexistent-dir/x.csv"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("CSV destination"), "stderr: {stderr}");
}

#[test]
fn run_summary_and_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("run.csv");
    let stdout = ehrx_ok(&[
        "run",
        "--horizon",
        "5000",
        "--warmup",
        "100",
        "--policy",
        "genie",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(stdout.contains("policy            genie"));
    assert!(stdout.contains("throughput"));
    let csv = fs::read_to_string(&out_path).unwrap();
    let (_, header, rows) = parse_csv(&csv);
    assert!(header.starts_with("policy,c,v,seed,stream,horizon,warmup,throughput"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "genie");
    assert_eq!(rows[0][5], "5000");
    let n_cols = header.split(',').count();
    assert_eq!(rows[0].len(), n_cols);
}

#[test]
fn unknown_policy_is_rejected() {
    let out = ehrx(&["run", "--horizon", "1000", "--policy", "oracle"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("expected one of"), "stderr: {stderr}");
}

#[test]
fn validate_lemma_single_transmitter_is_exact() {
    // One transmitter never collides: empirical and closed form are both
    // exactly 1 on every populated bin.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n1.toml", "[channel]\nn = 1\naccess_probs = 0.5\n");
    let stdout = ehrx_ok(&["validate-lemma", "--config", &cfg, "--samples", "100000"]);
    assert!(stdout.contains("max abs deviation over qualified bins: 0.000000"));
    assert!(stdout.trim_end().ends_with("PASS"));
}

#[test]
fn validate_lemma_lists_offenders_on_failure() {
    let out = ehrx(&["validate-lemma", "--samples", "100000", "--tolerance", "1e-9"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("exceed tolerance"), "stderr: {stderr}");
    assert!(stderr.contains("bin ["), "stderr: {stderr}");
}

#[test]
fn sample_budget_floor_is_enforced() {
    let out = ehrx(&["validate-lemma", "--samples", "1000"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least"));
}

#[test]
fn malformed_config_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad_syntax = write_config(dir.path(), "bad.toml", "[channel\nn = 3\n");
    let out = ehrx(&["run", "--config", &bad_syntax]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("parsing config"));

    let unknown_key = write_config(dir.path(), "unk.toml", "[channel]\nmean_gain = 1.0\n");
    let out = ehrx(&["run", "--config", &unknown_key]);
    assert!(!out.status.success());

    let out = ehrx(&["run", "--config", "/no/such/file.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("reading config"));
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.toml",
        "[run]\nhorizon = 999999\nwarmup = 500\nmaster_seed = 1\n",
    );
    let stdout = ehrx_ok(&["run", "--config", &cfg, "--horizon", "4000", "--seed", "7"]);
    assert!(stdout.contains("4000 / 500"));
    // Same flags, no config: seed still decides the trajectory.
    let direct = ehrx_ok(&["run", "--horizon", "4000", "--warmup", "500", "--seed", "7"]);
    assert_eq!(stdout, direct);
}

#[test]
fn warmup_must_fit_inside_horizon() {
    let out = ehrx(&["run", "--horizon", "100", "--warmup", "100"]);
    assert!(!out.status.success());
}
