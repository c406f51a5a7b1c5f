use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::selfconv::SelfConvolution;
use crate::data::{sq_dist, sq_dist_within, DataSet};
use crate::error::{invalid, Result};
use crate::kernel::{KdeModel, KernelKind};
use crate::rng::{self, Rng};

const MEDIAN_PAIRS: usize = 1000;
const GRID_SIZE: usize = 20;
const GRID_LOW: f64 = 0.25;
const GRID_HIGH: f64 = 4.0;

/// How `∫ p̂²` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum IntegralMethod {
    /// Average of `p̂` over `samples` draws from `p̂`.
    MonteCarlo { samples: usize, seed: u64 },
    /// `(1/M²) Σ_{a,b} (K_w * K_w)(x_a - x_b)` over all ordered pairs.
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSearch {
    pub kernel: KernelKind,
    pub candidates: Vec<f64>,
    pub scores: Vec<f64>,
    pub selected_w: f64,
    pub method: IntegralMethod,
}

impl BandwidthSearch {
    pub fn mc_samples(&self) -> Option<usize> {
        match self.method {
            IntegralMethod::MonteCarlo { samples, .. } => Some(samples),
            IntegralMethod::Pairwise => None,
        }
    }

    pub fn rng_seed(&self) -> Option<u64> {
        match self.method {
            IntegralMethod::MonteCarlo { seed, .. } => Some(seed),
            IntegralMethod::Pairwise => None,
        }
    }
}

fn check_model(data: &DataSet, model: &KdeModel) -> Result<()> {
    if model.dim != data.dim() {
        return Err(invalid("model dimension differs from data dimension"));
    }
    if data.len() < 2 {
        return Err(invalid("cross-validation needs at least two points"));
    }
    Ok(())
}

/// Unnormalized `Σ_m profile(z - x_m)`, skipping points outside the
/// Epanechnikov support.
fn profile_sum(data: &DataSet, model: &KdeModel, z: &[f64]) -> f64 {
    match model.kernel {
        KernelKind::Epanechnikov => {
            let w2 = model.bandwidth * model.bandwidth;
            data.points()
                .filter_map(|x| sq_dist_within(x, z, w2))
                .map(|d2| model.profile(d2))
                .sum()
        }
        KernelKind::Gaussian => data.points().map(|x| model.profile(sq_dist(x, z))).sum(),
    }
}

fn mc_with(data: &DataSet, model: &KdeModel, samples: usize, rng: &mut Rng) -> McEstimate {
    let m = data.len();
    let scale = model.ln_scale().exp() / m as f64;
    let mut z = vec![0.0; data.dim()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let centre = data.point(rng.random_range(0..m));
        let u = model.sample_offset(rng);
        for ((zi, ci), ui) in z.iter_mut().zip(centre).zip(&u) {
            *zi = ci + ui;
        }
        let v = scale * profile_sum(data, model, &z);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
    }
}

/// Monte Carlo estimate of `∫ p̂² = E_{z ~ p̂}[p̂(z)]`.
pub fn squared_integral_mc(
    data: &DataSet,
    model: &KdeModel,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_model(data, model)?;
    if samples == 0 {
        return Err(invalid("sample count must be positive"));
    }
    Ok(mc_with(data, model, samples, &mut rng::seeded(seed)))
}

/// Exact `∫ p̂²` from the pairwise kernel self-convolution.
pub fn squared_integral_exact(data: &DataSet, model: &KdeModel) -> Result<f64> {
    let search = pairwise_scores(data, model.kernel, &[model.bandwidth])?;
    Ok(search[0].0)
}

/// `J(w) = ∫ p̂² - (2/M) Σ_m p̂_{-m}(x_m)` with a Monte Carlo `∫ p̂²`.
pub fn lscv_score(data: &DataSet, model: &KdeModel, mc_samples: usize, seed: u64) -> Result<f64> {
    lscv_score_with(
        data,
        model,
        IntegralMethod::MonteCarlo {
            samples: mc_samples,
            seed,
        },
    )
}

pub fn lscv_score_with(data: &DataSet, model: &KdeModel, method: IntegralMethod) -> Result<f64> {
    check_model(data, model)?;
    match method {
        IntegralMethod::MonteCarlo { samples, seed } => {
            let sq = squared_integral_mc(data, model, samples, seed)?.value;
            Ok(sq - 2.0 * super::loo_term(data, model)?)
        }
        IntegralMethod::Pairwise => {
            let (sq, loo) = pairwise_scores(data, model.kernel, &[model.bandwidth])?[0];
            Ok(sq - 2.0 * loo)
        }
    }
}

/// For each bandwidth, `(∫ p̂², (1/M) Σ_m p̂_{-m}(x_m))` from one pass over
/// all pairs.
fn pairwise_scores(data: &DataSet, kernel: KernelKind, ws: &[f64]) -> Result<Vec<(f64, f64)>> {
    let m = data.len();
    let d = data.dim();
    if m < 2 {
        return Err(invalid("cross-validation needs at least two points"));
    }
    let models = ws
        .iter()
        .map(|&w| KdeModel::new(kernel, w, d))
        .collect::<Result<Vec<_>>>()?;
    let conv = match kernel {
        KernelKind::Epanechnikov => Some(SelfConvolution::new(d)),
        KernelKind::Gaussian => None,
    };
    let inv_w2: Vec<f64> = ws.iter().map(|w| 1.0 / (w * w)).collect();
    let inv_w: Vec<f64> = ws.iter().map(|w| 1.0 / w).collect();
    let w_max = ws.iter().cloned().fold(0.0, f64::max);
    let reach = match kernel {
        KernelKind::Epanechnikov => 4.0 * w_max * w_max,
        KernelKind::Gaussian => f64::INFINITY,
    };
    let nw = ws.len();

    // Per-row sums of (self-convolution ratio, kernel profile) over b > a.
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut acc = vec![0.0; 2 * nw];
            let xa = data.point(a);
            for b in a + 1..m {
                let Some(r2) = sq_dist_within(xa, data.point(b), reach) else {
                    continue;
                };
                match &conv {
                    Some(conv) => {
                        let r = r2.sqrt();
                        for j in 0..nw {
                            let s = r * inv_w[j];
                            if s >= 2.0 {
                                continue;
                            }
                            acc[2 * j] += conv.ratio(s);
                            acc[2 * j + 1] += (1.0 - r2 * inv_w2[j]).max(0.0);
                        }
                    }
                    None => {
                        for j in 0..nw {
                            let e = (-0.25 * r2 * inv_w2[j]).exp();
                            acc[2 * j] += e;
                            acc[2 * j + 1] += e * e;
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut totals = vec![0.0; 2 * nw];
    for row in &rows {
        for (t, v) in totals.iter_mut().zip(row) {
            *t += v;
        }
    }

    let mf = m as f64;
    Ok(models
        .iter()
        .enumerate()
        .map(|(j, model)| {
            let w = model.bandwidth;
            // ln of (K_w * K_w)(0)
            let ln_peak = match &conv {
                Some(conv) => conv.ln_peak() - d as f64 * w.ln(),
                None => -0.5 * d as f64 * (4.0 * std::f64::consts::PI * w * w).ln(),
            };
            let sq = ln_peak.exp() * (mf + 2.0 * totals[2 * j]) / (mf * mf);
            let loo = model.ln_scale().exp() * 2.0 * totals[2 * j + 1] / (mf * (mf - 1.0));
            (sq, loo)
        })
        .collect())
}

fn check_candidates(candidates: &[f64]) -> Result<()> {
    if candidates.is_empty() {
        return Err(invalid("candidate list is empty"));
    }
    if candidates.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(invalid("candidate bandwidths must be positive and finite"));
    }
    if candidates.windows(2).any(|p| p[0] >= p[1]) {
        return Err(invalid("candidate bandwidths must be strictly increasing"));
    }
    Ok(())
}

fn finish(
    kernel: KernelKind,
    candidates: &[f64],
    scores: Vec<f64>,
    method: IntegralMethod,
) -> BandwidthSearch {
    // First minimum wins, so ties resolve to the smallest bandwidth.
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    BandwidthSearch {
        kernel,
        candidates: candidates.to_vec(),
        selected_w: candidates[best],
        scores,
        method,
    }
}

/// Epanechnikov LSCV over `candidates` with Monte Carlo `∫ p̂²`.
///
/// Candidate `i` is scored with seed `derive_seed(rng_seed, i)`, so its
/// score equals `lscv_score` called with that seed.
pub fn select_bandwidth(
    data: &DataSet,
    candidates: &[f64],
    mc_samples: usize,
    rng_seed: u64,
) -> Result<BandwidthSearch> {
    select_bandwidth_with(
        data,
        KernelKind::Epanechnikov,
        candidates,
        IntegralMethod::MonteCarlo {
            samples: mc_samples,
            seed: rng_seed,
        },
    )
}

pub fn select_bandwidth_with(
    data: &DataSet,
    kernel: KernelKind,
    candidates: &[f64],
    method: IntegralMethod,
) -> Result<BandwidthSearch> {
    check_candidates(candidates)?;
    let scores = match method {
        IntegralMethod::MonteCarlo { samples, seed } => {
            let models = candidates
                .iter()
                .map(|&w| KdeModel::new(kernel, w, data.dim()))
                .collect::<Result<Vec<_>>>()?;
            models
                .par_iter()
                .enumerate()
                .map(|(i, model)| {
                    lscv_score(data, model, samples, rng::derive_seed(seed, i as u64))
                })
                .collect::<Result<Vec<_>>>()?
        }
        IntegralMethod::Pairwise => pairwise_scores(data, kernel, candidates)?
            .into_iter()
            .map(|(sq, loo)| sq - 2.0 * loo)
            .collect(),
    };
    Ok(finish(kernel, candidates, scores, method))
}

/// Median Euclidean distance over up to 1000 random pairs (all pairs when
/// there are fewer).
pub fn median_pairwise_distance(data: &DataSet, seed: u64) -> Result<f64> {
    let m = data.len();
    if m < 2 {
        return Err(invalid("need at least two points"));
    }
    let mut dists: Vec<f64> = if m * (m - 1) / 2 <= MEDIAN_PAIRS {
        (0..m)
            .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
            .map(|(a, b)| sq_dist(data.point(a), data.point(b)).sqrt())
            .collect()
    } else {
        let mut rng = rng::seeded(seed);
        (0..MEDIAN_PAIRS)
            .map(|_| {
                let a = rng.random_range(0..m);
                let b = (a + rng.random_range(1..m)) % m;
                sq_dist(data.point(a), data.point(b)).sqrt()
            })
            .collect()
    };
    dists.sort_by(f64::total_cmp);
    let n = dists.len();
    Ok(if n % 2 == 1 {
        dists[n / 2]
    } else {
        0.5 * (dists[n / 2 - 1] + dists[n / 2])
    })
}

/// 20 log-spaced bandwidths over `[0.25, 4] x` the median pairwise distance.
pub fn default_candidates(data: &DataSet, seed: u64) -> Result<Vec<f64>> {
    log_spaced_candidates(data, seed, GRID_LOW, GRID_HIGH, GRID_SIZE)
}

/// `count` log-spaced bandwidths over `[low, high] x` the median pairwise
/// distance.
pub fn log_spaced_candidates(
    data: &DataSet,
    seed: u64,
    low: f64,
    high: f64,
    count: usize,
) -> Result<Vec<f64>> {
    if !(low > 0.0 && high >= low && high.is_finite()) || count == 0 {
        return Err(invalid("grid needs 0 < low <= high and a positive count"));
    }
    if count > 1 && high == low {
        return Err(invalid("grid with several points needs low < high"));
    }
    let med = median_pairwise_distance(data, seed)?;
    if med <= 0.0 {
        return Err(invalid("median pairwise distance is zero"));
    }
    let (lo, hi) = (low.ln(), high.ln());
    let steps = (count - 1).max(1) as f64;
    Ok((0..count)
        .map(|i| med * (lo + (hi - lo) * i as f64 / steps).exp())
        .collect())
}
