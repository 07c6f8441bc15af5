use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use npfisher::models::{normal_sample, NormalParams};

fn npfisher(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npfisher"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = npfisher(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_normal(dir: &Path, name: &str, sigma: f64, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    normal_sample(NormalParams::new(0.0, sigma).unwrap(), n, seed)
        .unwrap()
        .write(&path, &[])
        .unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn every_subcommand_documents_defaults() {
    for sub in ["density", "fisher", "calibrate", "bench-normal", "sweep-eps", "heatmap", "ising", "replay"] {
        let text = ok(&[sub, "--help"]);
        assert!(text.contains("--out"), "{sub}");
        if sub != "replay" {
            assert!(text.contains("[default:"), "{sub} help lists no defaults");
        }
    }
    let top = ok(&["--help"]);
    assert!(top.contains("bench-normal") && top.contains("--threads"));
}

#[test]
fn malformed_flags_fail_with_usage() {
    let out = npfisher(&["density", "--no-such-flag", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = npfisher(&["bench-normal", "--reps", "many"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = npfisher(&["density", "/nonexistent/samples.txt", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/samples.txt"));
}

#[test]
fn deft_density_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_normal(dir.path(), "x.txt", 1.0, 10_000, 5);
    let out = dir.path().join("o");
    ok(&["density", s(&input), "--method", "deft", "--out", s(&out)]);
    let csv = std::fs::read_to_string(out.join("density.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (x, q) = l.split_once(',').unwrap();
            (x.parse().unwrap(), q.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 100);
    let h = rows[1].0 - rows[0].0;
    let mass: f64 = rows.iter().map(|r| r.1).sum::<f64>() * h;
    assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");

    // Replay reproduces the density byte for byte.
    let again = dir.path().join("r");
    ok(&["replay", s(&out.join("density.manifest")), "--out", s(&again)]);
    assert_eq!(csv, std::fs::read_to_string(again.join("density.csv")).unwrap());
}

#[test]
fn identical_displaced_files_give_zero() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_normal(dir.path(), "c.txt", 1.0, 2_000, 1);
    let p = write_normal(dir.path(), "p.txt", 1.1, 2_000, 2);
    let plus = format!("sigma={}", s(&p));
    let minus = plus.clone();
    let out = dir.path().join("o");
    for method in ["deft", "kde"] {
        let text = ok(&[
            "fisher", "--center", s(&c), "--plus", &plus, "--minus", &minus, "--delta", "sigma=0.1",
            "--method", method, "--out", s(&out),
        ]);
        assert!(text.contains("g[sigma,sigma] = 0.000000e0"), "{text}");
        assert!(text.contains("UNDEFINED"));
    }
}

#[test]
fn fisher_from_normal_files_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let n = 10_000;
    let c = write_normal(dir.path(), "c.txt", 1.0, n, 11);
    let p = write_normal(dir.path(), "p.txt", 1.2, n, 12);
    let m = write_normal(dir.path(), "m.txt", 0.8, n, 13);
    let out = dir.path().join("o");
    ok(&[
        "fisher", "--center", s(&c),
        "--plus", &format!("sigma={}", s(&p)),
        "--minus", &format!("sigma={}", s(&m)),
        "--delta", "sigma=2e-1", "--at", "sigma=1",
        "--scheme", "2a", "--out", s(&out),
    ]);
    let csv = std::fs::read_to_string(out.join("fisher.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..2], ["sigma", "sigma"]);
    let g: f64 = row[2].parse().unwrap();
    assert!((g - 2.0).abs() < 0.5, "g = {g}");
    assert_eq!(row[6], "density_diff");

    let again = dir.path().join("r");
    ok(&["replay", s(&out.join("fisher.manifest")), "--out", s(&again)]);
    assert_eq!(csv, std::fs::read_to_string(again.join("fisher.csv")).unwrap());

    // A modified input is detected on replay.
    write_normal(dir.path(), "c.txt", 1.0, n, 99);
    let res = npfisher(&["replay", s(&out.join("fisher.manifest")), "--out", s(&again)]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn calibrate_normal_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&[
        "calibrate", "--param", "sigma", "--n", "5e3", "--target-eps", "0.1",
        "--initial-delta", "0.01", "--out", s(dir.path()),
    ]);
    assert!(text.contains("delta_sigma ="), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("calibration.csv")).unwrap();
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(last[3] <= 0.1);
}

#[test]
fn experiment_outputs_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let text = ok(&[
        "bench-normal", "--sigmas", "1,2", "--n", "2000", "--reps", "3", "--threads", "2",
        "--out", s(&a),
    ]);
    assert!(text.contains("sigma = 1") && text.contains("KDE"));
    let csv = std::fs::read_to_string(a.join("normal_comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let svg = std::fs::read_to_string(a.join("normal_comparison.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    let manifest = std::fs::read_to_string(a.join("normal_comparison.manifest")).unwrap();
    assert!(manifest.contains("rep.1.2.samples = "));
    assert!(manifest.contains("timestamp = "));

    ok(&["replay", s(&a.join("normal_comparison.manifest")), "--threads", "1", "--out", s(&b)]);
    assert_eq!(csv, std::fs::read_to_string(b.join("normal_comparison.csv")).unwrap());
}

#[test]
fn small_sweeps_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    ok(&["sweep-eps", "--sigmas", "1", "--n", "2000", "--eps-grid", "0.05,0.1", "--reps", "2", "--out", out]);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("eps_sweep.csv")).unwrap().lines().count(),
        3
    );
    let res = npfisher(&["sweep-eps", "--eps-grid", "0.05,-0.1", "--reps", "1", "--out", out]);
    assert_eq!(res.status.code(), Some(1));
    ok(&["heatmap", "--n-grid", "1e3,2e3", "--delta-grid", "0.2,0.3", "--reps", "2", "--out", out]);
    assert_eq!(
        std::fs::read_to_string(dir.path().join("n_delta_heatmap.csv")).unwrap().lines().count(),
        5
    );
    ok(&[
        "ising", "--L", "4", "--segments", "3", "--t-min", "1.5", "--t-max", "3", "--samples", "300",
        "--warmup", "100", "--reps", "1", "--delta-t", "0.1", "--out", out,
    ]);
    let csv = std::fs::read_to_string(dir.path().join("ising_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("T,g_TT_median"));
}

/// The lattice example from the command reference: the `g_TT` maximum sits
/// near the critical temperature.
#[test]
fn ising_peak_near_critical_temperature() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["ising", "--L", "16", "--reps", "5", "--out", s(dir.path())]);
    let csv = std::fs::read_to_string(dir.path().join("ising_sweep.csv")).unwrap();
    let (t_peak, _) = csv
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').take(2).map(|x| x.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .fold((f64::NAN, f64::NEG_INFINITY), |best, r| if r.1 > best.1 { r } else { best });
    assert!((2.07..=2.47).contains(&t_peak), "peak at T = {t_peak}");
}
