use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use modeshift::evaluation::{em_fit, lloyd_kmeans_fit};
use modeshift::io::{format_rows, read_dataset, write_labels};
use modeshift::mean_shift::{default_cap, gaussian_ms_iterates, merge_modes, IterateTrace};
use modeshift::{
    ms_deflation, ms_deflation_traced, ms_full_with, ms_iterates_redux, ClusterAssignment, DataSet,
    DeflationConfig, FullOptions, KMeansInit, ReduxOptions, SeedRule, Termination,
};

use super::bandwidth::{Method, SearchParams};
use super::{
    csv_text, default_out, ensure_dir, float, resolve, write_text, CliError, CliResult, Clock,
    Manifest,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    /// Mean shift from every point, modes merged by proximity.
    Meanshift,
    /// Repeatedly find one mode and remove its bandwidth ball.
    Deflation,
    /// Mean shift with a Gaussian profile, from every point.
    GaussianMs,
    Kmeans,
    /// Spherical Gaussian mixture fitted by EM.
    Em,
}

impl Algo {
    fn is_mean_shift(self) -> bool {
        matches!(self, Self::Meanshift | Self::Deflation | Self::GaussianMs)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algo: Option<Algo>,
    /// Bandwidth for the mean-shift family.
    #[arg(long)]
    pub w: Option<f64>,
    /// Component standard deviation; sets w = sqrt(2 d) sigma when --w is absent.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Choose w by cross validation (exact pairwise scores on the default grid).
    #[arg(long)]
    pub cv: bool,
    /// Number of clusters for kmeans and em.
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed for kmeans/em initialisation, random deflation order and the CV grid [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration cap per mean-shift run [default: 10 M + 100, or 1000 for gaussian-ms].
    #[arg(long)]
    pub cap: Option<usize>,
    /// Iteration cap for kmeans/em [default: 300 / 200].
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stopping tolerance: gaussian-ms step length [default: 1e-8 w], kmeans
    /// centroid shift [default: 0], em relative log-likelihood gain [default: 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Modes closer than this are merged [default: 1e-6 w, or 1e-3 w for gaussian-ms].
    #[arg(long)]
    pub merge_eps: Option<f64>,
    /// Deflation: pick each round's seed at random instead of the lowest index.
    #[arg(long)]
    pub random_order: bool,
    /// Write trace.csv with one row per iterate (meanshift and deflation).
    #[arg(long)]
    pub trace: bool,
    /// Output directory [default: .].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON parameters or a previous manifest; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClusterParams {
    data: PathBuf,
    algo: Algo,
    #[serde(default)]
    w: Option<f64>,
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    cv: bool,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    cap: Option<usize>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    merge_eps: Option<f64>,
    #[serde(default)]
    random_order: bool,
    #[serde(default)]
    trace: bool,
    #[serde(default = "default_out")]
    out: PathBuf,
}

struct Fitted {
    assignment: ClusterAssignment,
    traces: Vec<IterateTrace>,
    details: Value,
}

/// Resolves the mean-shift bandwidth and reports where it came from.
fn bandwidth(p: &ClusterParams, data: &DataSet) -> CliResult<(f64, Value)> {
    if let Some(w) = p.w {
        return Ok((w, json!({ "source": "flag" })));
    }
    if p.cv {
        let search = SearchParams::with_method(Method::Pairwise).search(data, p.seed)?;
        let info = json!({
            "source": "cv",
            "candidates": search.candidates,
            "scores": search.scores,
        });
        return Ok((search.selected_w, info));
    }
    if let Some(sigma) = p.sigma {
        let w = DeflationConfig::new(sigma).bandwidth(data.dim())?;
        return Ok((w, json!({ "source": "sigma" })));
    }
    Err(CliError::usage(format!(
        "--algo {} needs --w, --sigma or --cv",
        p.algo.to_possible_value().unwrap().get_name()
    )))
}

fn required_k(p: &ClusterParams) -> CliResult<usize> {
    p.k.ok_or_else(|| CliError::usage("missing required option --k"))
}

fn fit(p: &ClusterParams, data: &DataSet, w: Option<f64>) -> CliResult<Fitted> {
    let plain = |assignment| Fitted {
        assignment,
        traces: Vec::new(),
        details: Value::Null,
    };
    match p.algo {
        Algo::Meanshift => {
            let w = w.unwrap();
            let cap = p.cap.unwrap_or_else(|| default_cap(data.len()));
            let assignment = ms_full_with(
                data,
                w,
                &FullOptions {
                    merge_eps: p.merge_eps,
                    cap: Some(cap),
                    ..Default::default()
                },
            )?;
            let traces = if p.trace {
                let opts = ReduxOptions::new(cap);
                (0..data.len())
                    .into_par_iter()
                    .map(|s| ms_iterates_redux(data, s, w, &opts).map(|(_, t)| t))
                    .collect::<modeshift::Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            Ok(Fitted {
                assignment,
                traces,
                details: Value::Null,
            })
        }
        Algo::Deflation => {
            let cfg = DeflationConfig {
                seed_rule: if p.random_order {
                    SeedRule::Random(p.seed)
                } else {
                    SeedRule::LowestIndex
                },
                ..DeflationConfig::with_bandwidth(w.unwrap())
            };
            let cap = p.cap.unwrap_or_else(|| default_cap(data.len()));
            if p.trace {
                let (assignment, traces) = ms_deflation_traced(data, &cfg, cap)?;
                Ok(Fitted {
                    assignment,
                    traces,
                    details: Value::Null,
                })
            } else {
                Ok(plain(ms_deflation(data, &cfg, cap)?))
            }
        }
        Algo::GaussianMs => Ok(plain(gaussian_ms(p, data, w.unwrap())?)),
        Algo::Kmeans => {
            let fit = lloyd_kmeans_fit(
                data,
                required_k(p)?,
                &KMeansInit::PlusPlus(p.seed),
                p.max_iter.unwrap_or(300),
                p.tol.unwrap_or(0.0),
            )?;
            Ok(Fitted {
                details: json!({
                    "iterations": fit.iterations,
                    "reseeds": fit.reseeds,
                    "wcss": fit.wcss_history.last(),
                }),
                assignment: fit.assignment,
                traces: Vec::new(),
            })
        }
        Algo::Em => {
            let fit = em_fit(
                data,
                required_k(p)?,
                p.seed,
                p.max_iter.unwrap_or(200),
                p.tol.unwrap_or(1e-10),
            )?;
            Ok(Fitted {
                details: json!({
                    "iterations": fit.iterations,
                    "log_likelihood": fit.log_likelihood.last(),
                    "variance_floored": fit.variance_floored,
                    "weights": fit.weights,
                    "variances": fit.variances,
                }),
                assignment: fit.assignment,
                traces: Vec::new(),
            })
        }
    }
}

fn gaussian_ms(p: &ClusterParams, data: &DataSet, w: f64) -> CliResult<ClusterAssignment> {
    let start = Instant::now();
    let tol = p.tol.unwrap_or(1e-8 * w);
    let cap = p.cap.unwrap_or(1000);
    let runs = (0..data.len())
        .into_par_iter()
        .map(|s| gaussian_ms_iterates(data, s, w, tol, cap))
        .collect::<modeshift::Result<Vec<_>>>()?;
    let cap_hits = runs.iter().filter(|(_, it)| *it >= cap).count();
    let modes: Vec<Vec<f64>> = runs.into_iter().map(|(z, _)| z).collect();
    let (labels, centroids) = merge_modes(&modes, p.merge_eps.unwrap_or(1e-3 * w));
    Ok(ClusterAssignment {
        labels,
        centroids,
        algorithm: "gaussian-ms".into(),
        wall_time: start.elapsed().as_secs_f64(),
        iteration_cap_hits: cap_hits,
    })
}

pub const TRACE_HEADER: &str = "seed_index,t,f_value,inlier_count,boundary_escape,step_sq_norm";

pub fn trace_csv(traces: &[IterateTrace]) -> String {
    csv_text(
        TRACE_HEADER,
        traces.iter().flat_map(|tr| {
            tr.steps.iter().enumerate().map(move |(t, s)| {
                vec![
                    tr.seed_index.to_string(),
                    t.to_string(),
                    float(s.f_value),
                    s.inlier_count.to_string(),
                    u8::from(s.boundary_escape).to_string(),
                    float(s.step_sq_norm),
                ]
            })
        }),
    )
}

pub fn run(args: ClusterArgs) -> CliResult {
    let mut clock = Clock::start();
    let p: ClusterParams = resolve(&args, args.config.as_deref())?;
    if p.trace && !matches!(p.algo, Algo::Meanshift | Algo::Deflation) {
        return Err(CliError::usage(
            "--trace is only available for meanshift and deflation",
        ));
    }
    let data = read_dataset(&p.data)?;
    clock.lap("load");
    let (w, w_info) = if p.algo.is_mean_shift() {
        let (w, info) = bandwidth(&p, &data)?;
        (Some(w), info)
    } else {
        (None, Value::Null)
    };
    clock.lap("bandwidth");
    let fitted = fit(&p, &data, w)?;
    clock.lap("cluster");
    let a = &fitted.assignment;

    ensure_dir(&p.out)?;
    let mut manifest = Manifest::new("cluster", &p);
    let labels_path = p.out.join("labels.csv");
    write_labels(&labels_path, &a.labels)?;
    manifest.output(&labels_path);
    let centroids_path = p.out.join("centroids.csv");
    write_text(
        &centroids_path,
        &format_rows(a.centroids.iter().map(Vec::as_slice)),
    )?;
    manifest.output(&centroids_path);
    if p.trace {
        let trace_path = p.out.join("trace.csv");
        write_text(&trace_path, &trace_csv(&fitted.traces))?;
        manifest.output(&trace_path);
    }
    clock.lap("write");

    manifest.seeds = json!({ "algorithm": p.seed });
    let unconverged = fitted
        .traces
        .iter()
        .filter(|t| t.termination == Termination::IterationCapHit)
        .count();
    manifest.results = json!({
        "clusters": a.n_clusters(),
        "sizes": a.cluster_sizes(),
        "bandwidth": w,
        "bandwidth_selection": w_info,
        "iteration_cap_hits": a.iteration_cap_hits,
        "traced_cap_hits": unconverged,
        "details": fitted.details,
    });
    manifest.write(&p.out.join("cluster-manifest.json"), clock)?;

    println!("clusters: {}", a.n_clusters());
    if let Some(w) = w {
        println!("bandwidth: {}", float(w));
    }
    if a.iteration_cap_hits > 0 {
        return Err(CliError::diagnostic(format!(
            "{} run(s) hit the iteration cap before converging; outputs were written but \
             labels may be unreliable (raise --cap or check the tolerance)",
            a.iteration_cap_hits
        )));
    }
    Ok(())
}
