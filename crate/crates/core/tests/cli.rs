mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparse_cca::{wishart_sample, GaussianSampler};

fn scca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scca")).args(args).output().expect("binary runs")
}

fn write_matrix(dir: &Path, name: &str, a: &Array2<f64>) -> PathBuf {
    let path = dir.join(name);
    let body: String = a
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rho_of(out: &Output) -> f64 {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let line = text.lines().find(|l| l.starts_with("rho,")).expect("rho row");
    line.rsplit(',').next().unwrap().parse().unwrap()
}

/// Model files for a random triple; returns `[--cov-x, F, --cov-y, F, --cov-xy, F]`.
fn model_files(dir: &Path, seed: u64, n: usize, m: usize) -> Vec<String> {
    let c = wishart_sample::<f64>(seed, n, m, 2 * (n + m)).unwrap();
    let fx = write_matrix(dir, "sx.csv", &c.sigma_x().to_owned());
    let fy = write_matrix(dir, "sy.csv", &c.sigma_y().to_owned());
    let fxy = write_matrix(dir, "sxy.csv", &c.sigma_xy().to_owned());
    ["--cov-x", s(&fx), "--cov-y", s(&fy), "--cov-xy", s(&fxy)].iter().map(|v| v.to_string()).collect()
}

fn rank_deficient_samples(dir: &Path) -> (PathBuf, PathBuf) {
    let truth = wishart_sample::<f64>(2, 8, 8, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = GaussianSampler::new(&truth).sample(&mut rng, 10);
    (write_matrix(dir, "x.csv", &data.x().to_owned()), write_matrix(dir, "y.csv", &data.y().to_owned()))
}

#[test]
fn solve_diagonal_cross_covariance() {
    let dir = tempfile::tempdir().unwrap();
    let eye = write_matrix(dir.path(), "eye.csv", &Array2::eye(3));
    let cross = write_matrix(dir.path(), "xy.csv", &Array2::from_diag(&ndarray::arr1(&[0.2, 0.7, 0.4])));
    let out = scca(&["solve", "--cov-x", s(&eye), "--cov-y", s(&eye), "--cov-xy", s(&cross)]);
    assert_eq!(rho_of(&out), 0.7);
}

#[test]
fn ridge_rescues_rank_deficient_samples() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = rank_deficient_samples(dir.path());
    let plain = scca(&["solve", "--x", s(&x), "--y", s(&y)]);
    assert!((rho_of(&plain) - 1.0).abs() < 1e-8);
    let ridged = scca(&["solve", "--x", s(&x), "--y", s(&y), "--ridge-x", "1e-3", "--ridge-y", "1e-3"]);
    let r = rho_of(&ridged);
    assert!(r.is_finite() && r < 1.0, "{r}");
}

#[test]
fn swapping_inputs_keeps_rho() {
    let dir = tempfile::tempdir().unwrap();
    let truth = wishart_sample::<f64>(6, 3, 2, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = GaussianSampler::new(&truth).sample(&mut rng, 50);
    let x = write_matrix(dir.path(), "x.csv", &data.x().to_owned());
    let y = write_matrix(dir.path(), "y.csv", &data.y().to_owned());
    let a = rho_of(&scca(&["solve", "--x", s(&x), "--y", s(&y)]));
    let b = rho_of(&scca(&["solve", "--x", s(&y), "--y", s(&x)]));
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn greedy_single_pair_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["greedy".to_string(), "--ka".into(), "1".into(), "--kb".into(), "1".into()];
    args.extend(model_files(dir.path(), 3, 4, 4));
    let out = scca(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("0,seed,"));
}

fn solve_count(text: &str) -> usize {
    let line = text.lines().find(|l| l.starts_with("# cca_solves,")).expect("counter line");
    line.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn solve_counts_follow_the_complexity_contract() {
    let dir = tempfile::tempdir().unwrap();
    let model = model_files(dir.path(), 8, 6, 5);
    let run = |mode: &str| {
        let mut args: Vec<&str> = vec!["greedy", "--ka", "4", "--kb", "3", "--mode", mode, "--solve-counts"];
        args.extend(model.iter().map(String::as_str));
        let out = scca(&args);
        assert!(out.status.success());
        solve_count(&String::from_utf8(out.stdout).unwrap())
    };
    assert_eq!(run("approx"), 4 + 3 - 1);
    assert!(run("exact") > 4 + 3 - 1);
}

#[test]
fn pls_variant_full_path_matches_svd() {
    let dir = tempfile::tempdir().unwrap();
    let model = model_files(dir.path(), 12, 5, 3);
    let path = dir.path().join("path.csv");
    let mut args: Vec<&str> = vec!["greedy", "--ka", "5", "--kb", "3", "--variant", "pls", "--out", s(&path)];
    args.extend(model.iter().map(String::as_str));
    assert!(scca(&args).status.success());
    let text = fs::read_to_string(&path).unwrap();
    let last = text.lines().last().unwrap();
    let rho: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
    let c = wishart_sample::<f64>(12, 5, 3, 16).unwrap();
    assert!((rho - top_singular_value(&to_na(c.sigma_xy()))).abs() < 1e-10);
    assert!(dir.path().join("path_weights.csv").exists());
}

#[test]
fn oracle_refuses_beyond_budget() {
    let out = scca(&["oracle", "--wishart", "--n", "20", "--m", "20", "--ka", "5", "--kb", "5"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("240374016"));
}

#[test]
fn ragged_csv_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,0\n0\n").unwrap();
    let out = scca(&["solve", "--cov-x", s(&bad), "--cov-y", s(&bad), "--cov-xy", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv") && err.contains("row 2"), "{err}");
}

#[test]
fn singular_marginal_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_matrix(dir.path(), "z.csv", &Array2::zeros((2, 2)));
    let out = scca(&["solve", "--cov-x", s(&zero), "--cov-y", s(&zero), "--cov-xy", s(&zero)]);
    assert_eq!(out.status.code(), Some(3));
}

fn experiment_bytes(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out_dir = s(dir);
    let mut full = vec!["experiment"];
    full.extend_from_slice(args);
    full.extend(["--out-dir", out_dir]);
    let out = scca(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_string();
    fs::read(file).unwrap()
}

#[test]
fn regularize_experiment_is_reproducible() {
    let args = ["regularize", "--trials", "30", "--samples", "20", "--seed", "9"];
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let a = experiment_bytes(d1.path(), &args);
    let mut threaded = vec!["--threads", "1"];
    threaded.extend_from_slice(&args);
    let b = experiment_bytes(d2.path(), &threaded);
    assert_eq!(a, b);
}

#[test]
fn tradeoff_emits_one_row_per_cardinality_and_mode() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = experiment_bytes(dir.path(), &["tradeoff", "--trials", "5", "--modes", "forward-approx,backward"]);
    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("total_cardinality,method,mode,mean_rho,std_rho,trials"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 13);
    let mut keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[2])).collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), rows.len());
}
