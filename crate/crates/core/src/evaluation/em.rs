use std::f64::consts::PI;
use std::time::Instant;

use super::kmeans::{lloyd_kmeans_fit, KMeansInit};
use crate::cluster::ClusterAssignment;
use crate::data::{sq_dist, DataSet};
use crate::error::Result;

const VARIANCE_FLOOR_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EmFit {
    pub assignment: ClusterAssignment,
    pub means: Vec<Vec<f64>>,
    /// Per-component `σ_k²`.
    pub variances: Vec<f64>,
    pub weights: Vec<f64>,
    /// Log-likelihood before the first update and after each iteration.
    pub log_likelihood: Vec<f64>,
    /// Some component variance was raised to the floor.
    pub variance_floored: bool,
    pub iterations: usize,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + v.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Mixture of `N(μ_k, σ_k² I)` fitted by EM, started from K-means++ Lloyd
/// output. Stops when the log-likelihood gain is at most
/// `tol * |log-likelihood|` or after `max_iter` iterations. Hard labels take
/// the most responsible component.
pub fn em_fit(data: &DataSet, k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<EmFit> {
    let start = Instant::now();
    let init = lloyd_kmeans_fit(data, k, &KMeansInit::PlusPlus(seed), 100, 0.0)?.assignment;
    let (m, d) = (data.len(), data.dim());
    let df = d as f64;

    let centre = data.mean();
    let scale = data.points().map(|x| sq_dist(x, &centre)).sum::<f64>() / (m as f64 * df);
    let floor = VARIANCE_FLOOR_REL * scale.max(f64::MIN_POSITIVE);
    let mut floored = false;

    let mut means = init.centroids.clone();
    let mut weights = vec![0.0; k];
    let mut variances = vec![0.0; k];
    for (j, idx) in init.members().iter().enumerate() {
        weights[j] = idx.len() as f64 / m as f64;
        let ss: f64 = idx.iter().map(|&i| sq_dist(data.point(i), &means[j])).sum();
        variances[j] = if idx.is_empty() {
            scale
        } else {
            ss / (idx.len() as f64 * df)
        };
        if variances[j] < floor {
            variances[j] = floor;
            floored = true;
        }
    }

    let mut resp = vec![0.0; m * k];
    let e_step =
        |means: &[Vec<f64>], variances: &[f64], weights: &[f64], resp: &mut [f64]| -> f64 {
            let mut ll = 0.0;
            for (i, x) in data.points().enumerate() {
                let row = &mut resp[i * k..(i + 1) * k];
                for j in 0..k {
                    row[j] = weights[j].ln()
                        - 0.5 * df * (2.0 * PI * variances[j]).ln()
                        - sq_dist(x, &means[j]) / (2.0 * variances[j]);
                }
                let lse = log_sum_exp(row);
                ll += lse;
                row.iter_mut().for_each(|r| *r = (*r - lse).exp());
            }
            ll
        };

    let mut history = vec![e_step(&means, &variances, &weights, &mut resp)];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        for j in 0..k {
            let nk: f64 = (0..m).map(|i| resp[i * k + j]).sum();
            weights[j] = nk / m as f64;
            if nk <= 0.0 {
                continue;
            }
            let mut mu = vec![0.0; d];
            for (i, x) in data.points().enumerate() {
                let r = resp[i * k + j];
                mu.iter_mut().zip(x).for_each(|(a, b)| *a += r * b);
            }
            mu.iter_mut().for_each(|a| *a /= nk);
            let ss: f64 = data
                .points()
                .enumerate()
                .map(|(i, x)| resp[i * k + j] * sq_dist(x, &mu))
                .sum();
            variances[j] = ss / (nk * df);
            if variances[j] < floor {
                variances[j] = floor;
                floored = true;
            }
            means[j] = mu;
        }
        let ll = e_step(&means, &variances, &weights, &mut resp);
        let prev = *history.last().unwrap();
        history.push(ll);
        if ll - prev <= tol * ll.abs() {
            break;
        }
    }

    let labels: Vec<usize> = (0..m)
        .map(|i| {
            let row = &resp[i * k..(i + 1) * k];
            let mut best = 0;
            for j in 1..k {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    Ok(EmFit {
        assignment: ClusterAssignment {
            labels,
            centroids: means.clone(),
            algorithm: "em".into(),
            wall_time: start.elapsed().as_secs_f64(),
            iteration_cap_hits: 0,
        },
        means,
        variances,
        weights,
        log_likelihood: history,
        variance_floored: floored,
        iterations,
    })
}

pub fn em_gmm_spherical(
    data: &DataSet,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterAssignment> {
    em_fit(data, k, seed, max_iter, tol).map(|f| f.assignment)
}
