//! Repeated-trial benchmark on generated mixtures: each trial draws a fresh
//! data set and scores every requested algorithm against the true labels.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bandwidth::{default_candidates, select_bandwidth_with, IntegralMethod};
use crate::cluster::ClusterAssignment;
use crate::deflation::{ms_deflation, DeflationConfig};
use crate::error::{invalid, Error, Result};
use crate::evaluation::{em_gmm_spherical, lloyd_kmeans, score, KMeansInit};
use crate::kernel::KernelKind;
use crate::mean_shift::{default_cap, ms_full_with, FullOptions};
use crate::rng::derive_seed;
use crate::synth::{generate, GmmSpec, LabeledData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchAlgo {
    /// Full mean shift with a cross-validated bandwidth.
    MeanShift,
    /// Deflation with `w = sqrt(2d) sigma`.
    Deflation,
    KMeans,
    Em,
}

impl BenchAlgo {
    pub const ALL: [BenchAlgo; 4] = [Self::MeanShift, Self::Deflation, Self::KMeans, Self::Em];

    pub fn name(self) -> &'static str {
        match self {
            Self::MeanShift => "meanshift",
            Self::Deflation => "deflation",
            Self::KMeans => "kmeans",
            Self::Em => "em",
        }
    }
}

impl fmt::Display for BenchAlgo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Mixture to draw each trial from; its seed is replaced per trial.
    pub spec: GmmSpec,
    pub trials: usize,
    pub master_seed: u64,
    pub algos: Vec<BenchAlgo>,
    /// How `∫ p̂²` is evaluated during bandwidth selection for mean shift.
    /// A Monte Carlo seed is replaced by each trial's algorithm seed.
    pub integral: IntegralMethod,
    pub kmeans_max_iter: usize,
    pub em_max_iter: usize,
}

impl BenchConfig {
    pub fn new(spec: GmmSpec, trials: usize, master_seed: u64) -> Self {
        Self {
            spec,
            trials,
            master_seed,
            algos: BenchAlgo::ALL.to_vec(),
            integral: IntegralMethod::Pairwise,
            kmeans_max_iter: 300,
            em_max_iter: 200,
        }
    }

    pub fn data_seed(&self, trial: usize) -> u64 {
        derive_seed(self.master_seed, 2 * trial as u64)
    }

    pub fn algo_seed(&self, trial: usize) -> u64 {
        derive_seed(self.master_seed, 2 * trial as u64 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub algo: BenchAlgo,
    /// `None` when the algorithm failed.
    pub error: Option<f64>,
    pub seconds: f64,
    pub clusters: Option<usize>,
    pub bandwidth: Option<f64>,
    pub iteration_cap_hits: usize,
    pub failure: Option<String>,
}

fn run_algo(
    cfg: &BenchConfig,
    trial: usize,
    algo: BenchAlgo,
    truth: &LabeledData,
) -> Result<(ClusterAssignment, Option<f64>)> {
    let data = &truth.data;
    let k = truth.components();
    let seed = cfg.algo_seed(trial);
    match algo {
        BenchAlgo::MeanShift => {
            let candidates = default_candidates(data, seed)?;
            let method = match cfg.integral {
                IntegralMethod::MonteCarlo { samples, .. } => {
                    IntegralMethod::MonteCarlo { samples, seed }
                }
                IntegralMethod::Pairwise => IntegralMethod::Pairwise,
            };
            let search =
                select_bandwidth_with(data, KernelKind::Epanechnikov, &candidates, method)?;
            let w = search.selected_w;
            Ok((ms_full_with(data, w, &FullOptions::default())?, Some(w)))
        }
        BenchAlgo::Deflation => {
            let dc = DeflationConfig::new(cfg.spec.component_sigma);
            let w = dc.bandwidth(data.dim())?;
            Ok((ms_deflation(data, &dc, default_cap(data.len()))?, Some(w)))
        }
        BenchAlgo::KMeans => Ok((
            lloyd_kmeans(
                data,
                k,
                &KMeansInit::PlusPlus(seed),
                cfg.kmeans_max_iter,
                0.0,
            )?,
            None,
        )),
        BenchAlgo::Em => Ok((
            em_gmm_spherical(data, k, seed, cfg.em_max_iter, 1e-10)?,
            None,
        )),
    }
}

/// Runs every configured algorithm on trial `trial`, in configuration order.
/// Seconds cover the whole method, including bandwidth selection for mean
/// shift.
pub fn run_trial(cfg: &BenchConfig, trial: usize) -> Result<Vec<TrialRow>> {
    let spec = GmmSpec {
        rng_seed: cfg.data_seed(trial),
        ..cfg.spec.clone()
    };
    let truth = generate(&spec)?;
    Ok(cfg
        .algos
        .iter()
        .map(|&algo| {
            let start = Instant::now();
            let outcome = run_algo(cfg, trial, algo, &truth)
                .and_then(|(a, w)| score(&a, &truth).map(|s| (a, w, s.error_ratio)));
            let seconds = start.elapsed().as_secs_f64();
            match outcome {
                Ok((a, w, error)) => TrialRow {
                    trial,
                    algo,
                    error: Some(error),
                    seconds,
                    clusters: Some(a.n_clusters()),
                    bandwidth: w,
                    iteration_cap_hits: a.iteration_cap_hits,
                    failure: None,
                },
                Err(e) => TrialRow {
                    trial,
                    algo,
                    error: None,
                    seconds,
                    clusters: None,
                    bandwidth: None,
                    iteration_cap_hits: 0,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Trials run one after another so wall times are not distorted by
/// contention; each algorithm may still use the thread pool internally.
pub fn run_bench(
    cfg: &BenchConfig,
    mut progress: impl FnMut(&[TrialRow]),
) -> Result<Vec<TrialRow>> {
    let mut rows = Vec::new();
    for t in 0..cfg.trials {
        let r = run_trial(cfg, t)?;
        progress(&r);
        rows.extend(r);
    }
    Ok(rows)
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
