use std::path::Path;
use std::process::{Command, Output};

fn divlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divlab"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("DIVLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn empty_argv_prints_usage_and_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_divlab")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn delta_at_100() {
    let dir = tempfile::tempdir().unwrap();
    let o = divlab(dir.path(), &["delta", "--x", "100"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("D=482"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("delta.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "482");
    assert!((row[2].parse::<f64>().unwrap() - 6.0399).abs() < 1e-3);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("delta.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "delta");
    assert_eq!(manifest["outputs"][0]["path"], "delta.csv");
}

#[test]
fn moment_row_has_deviation_and_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let o = divlab(dir.path(), &["moment", "--k", "2", "--X", "1e6", "--low-cutoff", "64", "--high-cutoff", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("moment.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"relative_deviation") && header.contains(&"constants_cutoff"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let dev: f64 = row[header.iter().position(|h| *h == "relative_deviation").unwrap()].parse().unwrap();
    assert!(dev.abs() < 0.1);
}

#[test]
fn sieve_matches_direct_counts() {
    let dir = tempfile::tempdir().unwrap();
    assert!(divlab(dir.path(), &["sieve", "--lo", "95", "--hi", "100"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("sieve.csv")).unwrap();
    assert_eq!(csv.lines().last().unwrap(), "100,9,482");
}

#[test]
fn budget_overrun_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = divlab(
        dir.path(),
        &["count", "--signature", "2,2", "--ranges", "1:50", "--delta", "0.01", "--max-side-entries", "10"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("max_side_entries"));
}

#[test]
fn bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(divlab(dir.path(), &["delta"]).status.code(), Some(2));
    assert_eq!(divlab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(divlab(dir.path(), &["count", "--signature", "2", "--ranges", "1:5", "--delta", "1"]).status.code(), Some(2));
    assert_eq!(divlab(dir.path(), &["expsum", "--N", "1", "--U", "10"]).status.code(), Some(2));
}

#[test]
fn config_file_fills_in_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# point\nx = 100\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert!(stdout(&divlab(dir.path(), &["--config", c, "delta"])).contains("D=482"));
    assert!(stdout(&divlab(dir.path(), &["--config", c, "delta", "--x", "10"])).contains("D=27"));
    std::fs::write(&cfg, "x = 100\nsamples = 3\n").unwrap();
    let o = divlab(dir.path(), &["--config", c, "delta"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key"));
}

#[test]
fn count_and_mingap_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = divlab(dir.path(), &["count", "--signature", "2,2", "--ranges", "1:12", "--delta", "0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().rsplit(',').collect();
    assert_eq!(row[1], row[2]);
    assert_eq!(row[1], "280");
    let o = divlab(dir.path(), &["mingap", "--signature", "2,2", "--Y", "20"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("\"(2,2)\",20,"));
}

#[test]
fn identical_bytes_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["moment", "--k", "1,2,3", "--A", "2.5", "--X", "3e4,1e5", "--low-cutoff", "64", "--high-cutoff", "64"];
    let mut one = vec!["--threads", "1"];
    one.extend(args);
    let mut four = vec!["--threads", "4"];
    four.extend(args);
    assert!(divlab(a.path(), &one).status.success());
    assert!(divlab(b.path(), &four).status.success());
    let x = std::fs::read(a.path().join("moment.csv")).unwrap();
    let y = std::fs::read(b.path().join("moment.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn expsum_and_constants_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = divlab(dir.path(), &["expsum", "--N", "8", "--U", "50", "--grid", "10"]);
    assert!(o.status.success());
    let grid = std::fs::read_to_string(dir.path().join("expsum_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 11);
    let o = divlab(dir.path(), &["constants", "--low-cutoff", "64", "--high-cutoff", "16"]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("constants.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    assert_eq!(v[0]["cutoff"], 64);
}

#[test]
fn verify_subset_reports_each_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = divlab(dir.path(), &["verify", "--criteria", "2,7", "--compare-threads", "2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.contains("PASS")).count(), 3, "{out}");
}
