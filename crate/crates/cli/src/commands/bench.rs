use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use modeshift::harness::{median, run_bench, BenchAlgo, BenchConfig, TrialRow};
use modeshift::IntegralMethod;

use super::bandwidth::Method;
use super::gen::MixtureParams;
use super::{
    csv_text, default_out, ensure_dir, float, resolve, write_text, CliResult, Clock, Manifest,
};

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Number of trials [default: 30].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Algorithms to run, comma-separated [default: meanshift,deflation,kmeans,em].
    #[arg(long, value_delimiter = ',')]
    pub algos: Option<Vec<BenchAlgo>>,
    /// Dimension [default: 100].
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of components [default: 30].
    #[arg(long)]
    pub k: Option<usize>,
    /// [default: 2]
    #[arg(long)]
    pub centroid_std: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Component sizes, as for `gen` [default: 50k].
    #[arg(long)]
    pub sizes: Option<String>,
    /// Master seed; per-trial data and algorithm seeds derive from it [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Integral used by mean shift's bandwidth search [default: pairwise].
    #[arg(long, value_enum)]
    pub cv_method: Option<Method>,
    /// Monte Carlo samples per candidate when --cv-method mc [default: 10 M].
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Output directory [default: .].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON parameters or a previous manifest; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BenchParams {
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_algos")]
    algos: Vec<BenchAlgo>,
    #[serde(default = "default_d")]
    d: usize,
    #[serde(default = "default_k")]
    k: usize,
    #[serde(default = "default_centroid_std")]
    centroid_std: f64,
    #[serde(default = "default_sigma")]
    sigma: f64,
    #[serde(default = "default_sizes")]
    sizes: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_cv_method")]
    cv_method: Method,
    #[serde(default)]
    mc_samples: Option<usize>,
    #[serde(default = "default_out")]
    out: PathBuf,
}

fn default_trials() -> usize {
    30
}

fn default_algos() -> Vec<BenchAlgo> {
    BenchAlgo::ALL.to_vec()
}

fn default_d() -> usize {
    100
}

fn default_k() -> usize {
    30
}

fn default_centroid_std() -> f64 {
    2.0
}

fn default_sigma() -> f64 {
    1.0
}

fn default_sizes() -> String {
    "50k".into()
}

fn default_cv_method() -> Method {
    Method::Pairwise
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn results_csv(rows: &[TrialRow]) -> String {
    csv_text(
        "trial,algo,error,seconds,clusters,bandwidth,cap_hits,failure",
        rows.iter().map(|r| {
            vec![
                r.trial.to_string(),
                r.algo.to_string(),
                r.error.map_or("NA".into(), float),
                float(r.seconds),
                r.clusters.map_or("NA".into(), |c| c.to_string()),
                r.bandwidth.map_or("NA".into(), float),
                r.iteration_cap_hits.to_string(),
                r.failure.as_deref().map(quote).unwrap_or_default(),
            ]
        }),
    )
}

fn write_results(path: &Path, rows: &[TrialRow]) -> CliResult {
    write_text(path, &results_csv(rows))
}

pub fn run(args: BenchArgs) -> CliResult {
    let clock = Clock::start();
    let p: BenchParams = resolve(&args, args.config.as_deref())?;
    let mixture = MixtureParams {
        d: p.d,
        k: p.k,
        centroid_std: p.centroid_std,
        sigma: p.sigma,
        sizes: p.sizes.clone(),
    };
    let spec = mixture.spec(p.seed)?;
    let mut cfg = BenchConfig::new(spec.clone(), p.trials, p.seed);
    cfg.algos = p.algos.clone();
    cfg.integral = match p.cv_method {
        Method::Pairwise => IntegralMethod::Pairwise,
        Method::Mc => IntegralMethod::MonteCarlo {
            samples: p.mc_samples.unwrap_or(10 * spec.total()),
            // Each trial substitutes its own algorithm seed.
            seed: 0,
        },
    };

    ensure_dir(&p.out)?;
    let results_path = p.out.join("results.csv");
    let mut done = Vec::new();
    let rows = run_bench(&cfg, |trial_rows| {
        for r in trial_rows {
            let error = r.error.map_or("NA".into(), |e| format!("{e:.6}"));
            eprintln!(
                "trial {:>3} {:<10} error {error:<9} {:>9.3}s",
                r.trial, r.algo, r.seconds
            );
        }
        done.extend_from_slice(trial_rows);
        // Keep partial results on disk so an interrupted run is not lost.
        if let Err(e) = write_results(&results_path, &done) {
            eprintln!("warning: {}", e.message);
        }
    })?;
    write_results(&results_path, &rows)?;

    let failures = rows.iter().filter(|r| r.failure.is_some()).count();
    let cap_hits: usize = rows.iter().map(|r| r.iteration_cap_hits).sum();
    let summary: Vec<_> = p
        .algos
        .iter()
        .map(|&algo| {
            let of_algo: Vec<&TrialRow> = rows.iter().filter(|r| r.algo == algo).collect();
            let mut secs: Vec<f64> = of_algo.iter().map(|r| r.seconds).collect();
            let zero = of_algo.iter().filter(|r| r.error == Some(0.0)).count();
            json!({
                "algo": algo,
                "median_seconds": median(&mut secs),
                "zero_error_trials": zero,
                "failed_trials": of_algo.iter().filter(|r| r.error.is_none()).count(),
            })
        })
        .collect();
    for s in &summary {
        println!(
            "{}: median {:.3}s, zero error in {}/{} trials",
            s["algo"].as_str().unwrap_or_default(),
            s["median_seconds"].as_f64().unwrap_or(f64::NAN),
            s["zero_error_trials"],
            p.trials
        );
    }

    let mut manifest = Manifest::new("bench", &p);
    manifest.seeds = json!({
        "master": p.seed,
        "data": (0..p.trials).map(|t| cfg.data_seed(t)).collect::<Vec<_>>(),
        "algorithm": (0..p.trials).map(|t| cfg.algo_seed(t)).collect::<Vec<_>>(),
    });
    manifest.output(&results_path);
    manifest.results = json!({
        "summary": summary,
        "failed_runs": failures,
        "iteration_cap_hits": cap_hits,
    });
    manifest.write(&p.out.join("bench-manifest.json"), clock)?;
    if failures > 0 {
        eprintln!("warning: {failures} run(s) failed; their error column is NA");
    }
    if cap_hits > 0 {
        eprintln!("warning: {cap_hits} mean-shift run(s) hit the iteration cap");
    }
    Ok(())
}
