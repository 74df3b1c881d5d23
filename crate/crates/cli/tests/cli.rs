use std::path::Path;
use std::process::{Command, Output};

use annealed_cli::table::{Format, Table};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_annealed-ldp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path, format: Format) -> Table {
    Table::parse(&std::fs::read_to_string(path).unwrap(), format).unwrap()
}

#[test]
fn phase_csv_columns_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phase.csv");
    let o = run(&[
        "phase", "--atoms", "1,3", "--probs", "0.5,0.5", "--beta", "0:1:0.05", "--B", "0.1", "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# command: phase\n"));
    assert!(text.contains("# version: "));
    assert!(text.contains("# timestamp: "));
    let t = Table::from_csv(&text).unwrap();
    assert_eq!(t.columns, ["beta", "B", "z_star", "psi_an", "magnetization", "susceptibility", "beta_c"]);
    assert_eq!(t.rows.len(), 21);
    let beta_c = t.column("beta_c").unwrap();
    assert!((beta_c[0] - 0.4f64.asinh()).abs() < 1e-15);
    let m = t.column("magnetization").unwrap();
    assert!(m.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn rate_spin_has_one_column_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spin.csv");
    let o = run(&[
        "rate-spin", "--beta", "0.8", "--B", "0", "--m", "-0.95:0.95:0.05", "--method", "contraction,combinatorial",
        "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out, Format::Csv);
    assert_eq!(t.columns, ["beta", "B", "m", "contraction", "combinatorial"]);
    assert_eq!(t.rows.len(), 39);
    for r in &t.rows {
        assert!((r[3] - r[4]).abs() < 1e-6);
    }
}

#[test]
fn deterministic_output_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| {
        vec![
            "rate-edges".to_string(),
            "--beta".into(),
            "0.2,0.8".into(),
            "--B".into(),
            "0,0.3".into(),
            "--y".into(),
            "0.5:3:0.5".into(),
            "--format".into(),
            "json".into(),
            "--deterministic".into(),
            "--output".into(),
            p.to_str().unwrap().to_string(),
        ]
    };
    assert!(bin().args(args(&a)).env("ANNEALED_LDP_THREADS", "1").status().unwrap().success());
    assert!(bin().args(args(&b)).env("ANNEALED_LDP_THREADS", "4").status().unwrap().success());
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let t = read(&a, Format::Json);
    assert_eq!(t.columns, ["beta", "B", "y", "rate", "dual"]);
    assert_eq!(t.rows.len(), 24);
    assert!(!String::from_utf8(ta).unwrap().contains("timestamp"));
}

#[test]
fn json_schema_and_non_finite_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edges.json");
    let o = run(&[
        "rate-edges", "--beta", "0.8", "--y", "-1,1", "--format", "json", "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["metadata"].is_object());
    assert!(v["columns"].is_array());
    assert_eq!(v["rows"][0][3], "inf");
    assert!(v["rows"][1][3].is_number());
}

#[test]
fn oracle_and_degrees_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle.csv");
    let o = run(&[
        "oracle", "--counts", "20,20", "--beta", "0.8", "--B", "0.3", "--quantity", "degree-mgf", "--t", "0,0.5",
        "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out, Format::Csv);
    assert!((t.rows[0][3] - 1.0).abs() < 1e-12);
    let o = run(&[
        "oracle", "--counts", "4,4", "--beta", "0.5", "--quantity", "spin-distribution", "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let t = read(&out, Format::Csv);
    assert_eq!(t.rows.len(), 9);
    assert!((t.column("prob").unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let o = run(&["degrees", "--beta", "0.5", "--B", "0.2", "--w", "1", "--d", "0:200:1", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out, Format::Csv);
    assert!((t.column("pmf").unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn mc_records_seed_and_generator() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc.csv");
    let args = [
        "mc", "--counts", "50,50", "--beta", "0.8", "--B", "0.2", "--sweeps", "3000", "--seed", "9", "--deterministic",
        "--output", out.to_str().unwrap(),
    ];
    assert!(run(&args).status.success());
    let first = std::fs::read_to_string(&out).unwrap();
    assert!(first.contains("# seed: 9\n"));
    assert!(first.contains("# rng: ChaCha8"));
    assert!(run(&args).status.success());
    assert_eq!(first, std::fs::read_to_string(&out).unwrap());
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("p.csv");
    std::fs::write(&cfg, format!("command=phase\nbeta=0.5\nB=0.2\ndeterministic=true\noutput={}\n", out.display())).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "--beta", "0.7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read(&out, Format::Csv);
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0][0], 0.7);
    assert_eq!(t.rows[0][1], 0.2);
    assert!(!std::fs::read_to_string(&out).unwrap().contains("timestamp"));
}

#[test]
fn exit_codes() {
    let o = run(&["phase", "--beta", "0.5", "--unknown"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&o.stderr).trim().lines().count(), 1);
    assert_eq!(run(&["phase", "--beta", "0:1"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["phase", "--beta", "0.5", "--output", "/nonexistent/dir/x.csv"]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/nonexistent/cfg"]).status.code(), Some(2));
    let o = run(&["phase", "--beta", "0.5", "--atoms", "3,1", "--probs", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["phase", "--beta", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let o = bin().args(["phase", "--beta", "0.5"]).env("ANNEALED_LDP_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_runs_selected_criteria() {
    let o = run(&["validate", "--suite", "acceptance", "--criteria", "1,2,4,7,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
    assert_eq!(run(&["validate", "--criteria", "11"]).status.code(), Some(2));
}
