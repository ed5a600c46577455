use std::path::Path;
use std::process::{Command, Output};

fn aoi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoi")).args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn statecount_prints_the_table() {
    let out = aoi(&["statecount", "--n", "2..5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "policy,N=2,N=3,N=4,N=5");
    assert_eq!(lines[1], "sbr,10,17,26,37");
    assert_eq!(lines[2], "fsfs,16,65,326,1957");
    assert_eq!(lines[3], "esfs,15,80,606,5904");
}

#[test]
fn analyze_writes_one_column_per_source() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let status =
        aoi(&["analyze", "--policy", "esfs", "--lambdas", "1,2,3,2", "--mus", "3,1,2,4", "--gammas", "1,3", "--out", out]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let (header, rows) = read_csv(&dir.path().join("esfs_cdf.csv"));
    assert_eq!(header, ["x", "source_1", "source_2", "source_3", "source_4"]);
    assert_eq!(rows.len(), 400);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    let last: f64 = rows[399][4].parse().unwrap();
    assert!(last > 0.999);
    let (header, rows) = read_csv(&dir.path().join("esfs_summary.csv"));
    assert_eq!(header, ["metric", "source", "value"]);
    assert!(rows.iter().any(|r| r[0] == "mean" && r[1] == "all"));
    assert!(rows.iter().any(|r| r[0] == "violation@3" && r[1] == "2"));
    assert!(dir.path().join("esfs_pdf.csv").exists());
}

#[test]
fn sweep_over_load() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let status = aoi(&[
        "sweep", "--axis", "rho", "--balanced", "--n", "3", "--mu", "1", "--range", "0.1:12", "--points", "24",
        "--policies", "fsfs,esfs,sbr", "--out", out,
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let (header, rows) = read_csv(&dir.path().join("sweep_rho.csv"));
    assert_eq!(header, ["x", "fsfs", "esfs", "sbr"]);
    assert_eq!(rows.len(), 24);
    let value = |r: &Vec<String>, j: usize| r[j].parse::<f64>().unwrap();
    // Moderate loads: ESFS no worse than FSFS.
    for r in rows.iter().filter(|r| (0.5..=4.0).contains(&value(r, 0))) {
        assert!(value(r, 2) <= value(r, 1) + 1e-12, "{r:?}");
    }
}

#[test]
fn sweep_over_share_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = aoi(&["sweep", "--axis", "rho1", "--rho", "1", "--range", "0.5:0.9", "--points", "3", "--out", out]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(read_csv(&dir.path().join("sweep_rho1.csv")).1.len(), 3);
    let ok = aoi(&[
        "sweep", "--axis", "gamma", "--lambdas", "1,2", "--mus", "3,1", "--range", "0.5:6", "--points", "12", "--out", out,
    ]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let (_, rows) = read_csv(&dir.path().join("sweep_gamma.csv"));
    let theta: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(theta.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn compare_passes_and_fails_by_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let base = ["compare", "--policy", "sbr", "--lambdas", "1,2", "--mus", "3,1", "--horizon", "2e6", "--out", out];
    let ok = aoi(&base);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let (_, rows) = read_csv(&dir.path().join("sbr_compare.csv"));
    assert!(rows.iter().filter(|r| r[0] == "sup_distance").count() == 2);

    let mut strict = base.to_vec();
    strict.extend(["--threshold", "1e-9"]);
    assert_eq!(aoi(&strict).status.code(), Some(aoi_cli::EXIT_THRESHOLD));
}

#[test]
fn simulate_tags_rows_and_records_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let conf = dir.path().join("scenario.conf");
    std::fs::write(&conf, "# two sources\npolicy = fsfs\nlambdas = 1,2\nmus = 3,1\nseed = 5\nhorizon = 1e5\n").unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["simulate", "--config", conf.to_str().unwrap(), "--grid", "0:5:11", "--out", out];
        args.extend_from_slice(extra);
        let o = aoi(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(dir.path().join("fsfs_sim_cdf.csv")).unwrap()
    };
    let first = run(&[]);
    assert_eq!(first, run(&[]));
    assert_ne!(first, run(&["--seed", "6"]));
    let (header, rows) = read_csv(&dir.path().join("fsfs_sim_cdf.csv"));
    assert_eq!(header.last().unwrap(), "origin");
    assert!(rows.iter().all(|r| r.last().unwrap() == "sim"));
    let (_, summary) = read_csv(&dir.path().join("fsfs_sim_summary.csv"));
    assert!(summary.iter().any(|r| r[0] == "seed" && r[2] == "6"));
    let (header, rows) = read_csv(&dir.path().join("fsfs_sim_observer.csv"));
    assert_eq!(header[..2], ["state".to_string(), "occupancy".to_string()]);
    assert_eq!(rows.len(), 11);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(aoi(&["analyze", "--lambdas", "1,2"]).status.code(), Some(2));
    assert_eq!(aoi(&["analyze", "--lambdas", "1,-2", "--mus", "1,1"]).status.code(), Some(2));
    assert_eq!(aoi(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(aoi(&["sweep", "--axis", "rho", "--n", "2", "--range", "1:2", "--points", "1"]).status.code(), Some(2));
    assert_eq!(aoi(&["analyze", "--config", "/nonexistent/file"]).status.code(), Some(2));
}
