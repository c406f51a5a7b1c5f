use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn modeshift(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modeshift"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MODESHIFT_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = modeshift(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn gen_benchmark_config_size() {
    let tmp = TempDir::new().unwrap();
    ok(
        &[
            "gen",
            "--d",
            "100",
            "--k",
            "30",
            "--centroid-std",
            "2",
            "--sigma",
            "1",
            "--sizes",
            "50k",
            "--seed",
            "7",
        ],
        tmp.path(),
    );
    let data = read(tmp.path(), "dataset.csv");
    assert_eq!(data.lines().count(), 23250);
    assert_eq!(data.lines().next().unwrap().split(',').count(), 100);
    let labels = read(tmp.path(), "labels.csv");
    assert_eq!(labels.lines().count(), 23250);
    assert_eq!(labels.lines().next(), Some("1"));
    assert_eq!(labels.lines().last(), Some("30"));
    assert!(tmp.path().join("manifest.json").exists());
}

#[test]
fn gen_single_point_and_determinism() {
    let tmp = TempDir::new().unwrap();
    ok(
        &["gen", "--d", "1", "--k", "1", "--sizes", "1", "--out", "a"],
        tmp.path(),
    );
    assert_eq!(
        read(&tmp.path().join("a"), "dataset.csv").lines().count(),
        1
    );

    let flags = [
        "gen", "--d", "3", "--k", "4", "--sizes", "5", "--seed", "9", "--out",
    ];
    ok(&[&flags[..], &["x"]].concat(), tmp.path());
    ok(&[&flags[..], &["y"]].concat(), tmp.path());
    let (x, y) = (tmp.path().join("x"), tmp.path().join("y"));
    assert_eq!(read(&x, "dataset.csv"), read(&y, "dataset.csv"));
    assert_eq!(read(&x, "labels.csv"), read(&y, "labels.csv"));
}

#[test]
fn gen_unwritable_path_is_input_error() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "blocker", "");
    let out = modeshift(
        &[
            "gen",
            "--d",
            "1",
            "--k",
            "1",
            "--sizes",
            "1",
            "--out",
            "blocker/sub",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_required_flag_is_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = modeshift(&["gen", "--k", "2"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--d"));

    write(tmp.path(), "d.csv", "0\n1\n");
    let out = modeshift(
        &["cluster", "--data", "d.csv", "--algo", "kmeans"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = modeshift(
        &["cluster", "--data", "d.csv", "--algo", "meanshift"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = modeshift(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bandwidth_single_candidate_is_echoed() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "d.csv", "0\n0.5\n1.5\n3\n");
    let out = ok(
        &["bandwidth", "--data", "d.csv", "--candidates", "2.5"],
        tmp.path(),
    );
    assert_eq!(out.trim(), "2.5");
    let scores = read(tmp.path(), "scores.csv");
    assert_eq!(scores.lines().count(), 2);
    assert!(scores.lines().nth(1).unwrap().starts_with("2.5,"));
}

#[test]
fn bandwidth_is_reproducible_and_picks_the_minimum() {
    let tmp = TempDir::new().unwrap();
    ok(
        &[
            "gen",
            "--d",
            "2",
            "--k",
            "3",
            "--sizes",
            "30",
            "--centroid-std",
            "5",
            "--seed",
            "1",
        ],
        tmp.path(),
    );
    let args = |out| {
        vec![
            "bandwidth",
            "--data",
            "dataset.csv",
            "--seed",
            "4",
            "--mc-samples",
            "400",
            "--out",
            out,
        ]
    };
    let w1 = ok(&args("a"), tmp.path());
    let w2 = ok(&args("b"), tmp.path());
    assert_eq!(w1, w2);
    let scores = read(&tmp.path().join("a"), "scores.csv");
    assert_eq!(scores, read(&tmp.path().join("b"), "scores.csv"));

    let rows: Vec<(f64, f64)> = scores
        .lines()
        .skip(1)
        .map(|l| {
            let (w, s) = l.split_once(',').unwrap();
            (w.parse().unwrap(), s.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 20);
    let best = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(w1.trim().parse::<f64>().unwrap(), best.0);
}

#[test]
fn meanshift_separates_two_points() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "d.csv", "0,0\n10,0\n");
    let out = ok(
        &[
            "cluster",
            "--data",
            "d.csv",
            "--algo",
            "meanshift",
            "--w",
            "1",
        ],
        tmp.path(),
    );
    assert!(out.contains("clusters: 2"));
    assert_eq!(read(tmp.path(), "labels.csv"), "1\n2\n");
    assert_eq!(read(tmp.path(), "centroids.csv").lines().count(), 2);
}

#[test]
fn deflation_on_benchmark_config_finds_every_component() {
    let tmp = TempDir::new().unwrap();
    ok(
        &["gen", "--d", "100", "--k", "30", "--seed", "11"],
        tmp.path(),
    );
    let w = 200f64.sqrt().to_string();
    let out = ok(
        &[
            "cluster",
            "--data",
            "dataset.csv",
            "--algo",
            "deflation",
            "--w",
            &w,
            "--out",
            "c",
        ],
        tmp.path(),
    );
    assert!(out.contains("clusters: 30"), "{out}");
    let err = ok(
        &["eval", "--labels", "c/labels.csv", "--truth", "labels.csv"],
        tmp.path(),
    );
    assert_eq!(err.trim(), "0");
}

#[test]
fn eval_reports_error_and_confusion() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "found.csv", "2\n2\n1\n1\n1\n");
    write(tmp.path(), "truth.csv", "1\n1\n2\n2\n1\n");
    let out = ok(
        &["eval", "--labels", "found.csv", "--truth", "truth.csv"],
        tmp.path(),
    );
    assert_eq!(out.trim().parse::<f64>().unwrap(), 0.2);
    assert_eq!(read(tmp.path(), "confusion.csv"), "1,2\n2,0\n");
}

#[test]
fn trace_passes_verification_and_tampering_is_caught() {
    let tmp = TempDir::new().unwrap();
    // Every run stalls at its seed (one inlier, the other points on the
    // sphere) and escapes to ±0.5.
    write(tmp.path(), "d.csv", "-1\n0\n1\n");
    ok(
        &[
            "cluster",
            "--data",
            "d.csv",
            "--algo",
            "meanshift",
            "--w",
            "1",
            "--trace",
        ],
        tmp.path(),
    );
    let trace = read(tmp.path(), "trace.csv");
    assert!(trace.starts_with("seed_index,t,f_value,inlier_count,boundary_escape"));
    assert!(trace.contains("1,1,1.5,2,1,0.25"), "{trace}");
    let out = ok(&["verify-trace", "--trace", "trace.csv"], tmp.path());
    assert!(out.contains("3 boundary escapes"), "{out}");

    write(
        tmp.path(),
        "bad.csv",
        &trace.replace("1,1,1.5,", "1,1,1.75,"),
    );
    let out = modeshift(
        &["verify-trace", "--trace", "bad.csv", "--w", "1"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn deflation_trace_verifies() {
    let tmp = TempDir::new().unwrap();
    ok(
        &[
            "gen",
            "--d",
            "5",
            "--k",
            "4",
            "--sizes",
            "25",
            "--centroid-std",
            "20",
            "--seed",
            "2",
        ],
        tmp.path(),
    );
    ok(
        &[
            "cluster",
            "--data",
            "dataset.csv",
            "--algo",
            "deflation",
            "--w",
            "6",
            "--trace",
            "--out",
            "c",
        ],
        tmp.path(),
    );
    ok(&["verify-trace", "--trace", "c/trace.csv"], tmp.path());
}

#[test]
fn iteration_cap_hit_exits_with_diagnostic() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "d.csv", "0\n1\n2\n3\n");
    let out = modeshift(
        &[
            "cluster",
            "--data",
            "d.csv",
            "--algo",
            "meanshift",
            "--w",
            "1.2",
            "--cap",
            "1",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteration cap"));
    assert!(tmp.path().join("labels.csv").exists());
}

#[test]
fn baselines_recover_separated_blobs() {
    let tmp = TempDir::new().unwrap();
    ok(
        &[
            "gen",
            "--d",
            "4",
            "--k",
            "3",
            "--sizes",
            "30",
            "--centroid-std",
            "30",
            "--seed",
            "5",
        ],
        tmp.path(),
    );
    for algo in ["kmeans", "em"] {
        ok(
            &[
                "cluster",
                "--data",
                "dataset.csv",
                "--algo",
                algo,
                "--k",
                "3",
                "--seed",
                "1",
                "--out",
                algo,
            ],
            tmp.path(),
        );
        let labels = format!("{algo}/labels.csv");
        let err = ok(
            &["eval", "--labels", &labels, "--truth", "labels.csv"],
            tmp.path(),
        );
        assert_eq!(err.trim(), "0", "{algo}");
    }
    ok(
        &[
            "cluster",
            "--data",
            "dataset.csv",
            "--algo",
            "gaussian-ms",
            "--sigma",
            "1",
            "--out",
            "g",
        ],
        tmp.path(),
    );
    let err = ok(
        &["eval", "--labels", "g/labels.csv", "--truth", "labels.csv"],
        tmp.path(),
    );
    assert_eq!(err.trim(), "0");
}

#[test]
fn manifest_rerun_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    ok(
        &[
            "gen",
            "--d",
            "3",
            "--k",
            "3",
            "--sizes",
            "20",
            "--centroid-std",
            "8",
            "--seed",
            "3",
        ],
        tmp.path(),
    );
    ok(
        &[
            "cluster",
            "--data",
            "dataset.csv",
            "--algo",
            "kmeans",
            "--k",
            "3",
            "--seed",
            "8",
            "--out",
            "a",
        ],
        tmp.path(),
    );
    ok(
        &[
            "cluster",
            "--config",
            "a/cluster-manifest.json",
            "--out",
            "b",
        ],
        tmp.path(),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(read(&a, "labels.csv"), read(&b, "labels.csv"));
    assert_eq!(read(&a, "centroids.csv"), read(&b, "centroids.csv"));

    let strip = |text: String| {
        text.lines()
            .filter(|l| !l.contains("seconds") && !l.contains("\"a") && !l.contains("\"b"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(read(&a, "cluster-manifest.json")),
        strip(read(&b, "cluster-manifest.json"))
    );

    // Flags override the config.
    ok(
        &[
            "cluster",
            "--config",
            "a/cluster-manifest.json",
            "--k",
            "2",
            "--out",
            "c",
        ],
        tmp.path(),
    );
    let c = read(&tmp.path().join("c"), "centroids.csv");
    assert_eq!(c.lines().count(), 2);
}

#[test]
fn bench_single_kmeans_trial() {
    let tmp = TempDir::new().unwrap();
    let out = ok(
        &[
            "--jobs",
            "1",
            "bench",
            "--trials",
            "1",
            "--algos",
            "kmeans",
            "--d",
            "5",
            "--k",
            "3",
            "--sizes",
            "20",
            "--centroid-std",
            "10",
        ],
        tmp.path(),
    );
    assert!(out.contains("kmeans"));
    let results = read(tmp.path(), "results.csv");
    let lines: Vec<&str> = results.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("trial,algo,error,seconds"));
    assert!(lines[1].starts_with("0,kmeans,"));
    assert!(tmp.path().join("bench-manifest.json").exists());
}

#[test]
fn bench_failure_is_reported_as_na() {
    let tmp = TempDir::new().unwrap();
    // d = 1, sigma = 1: w = sqrt(2) so neighbouring components overlap and
    // deflation may stall; any failure must surface as an NA row with exit 0.
    let out = modeshift(
        &[
            "bench",
            "--trials",
            "2",
            "--algos",
            "deflation,kmeans",
            "--d",
            "1",
            "--k",
            "6",
            "--sizes",
            "15",
            "--centroid-std",
            "3",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let results = read(tmp.path(), "results.csv");
    assert_eq!(results.lines().count(), 5);
    let na = results.lines().filter(|l| l.contains(",NA,")).count();
    let warned = String::from_utf8_lossy(&out.stderr).contains("run(s) failed");
    assert_eq!(na > 0, warned);
}
