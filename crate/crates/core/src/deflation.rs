//! Mean shift deflation: find one mode, claim its bandwidth ball as a
//! cluster, repeat on the unclaimed points.
//!
//! Designed for mixtures of well-separated spherical Gaussians
//! `N(mu_k, sigma^2 I)`. With `w^2 = 2 d sigma^2`, a ball centred on a
//! component mean holds nearly every point of that component (see
//! [`chi2_tail_bound`]) and none of any other.

use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterAssignment;
use crate::data::DataSet;
use crate::error::{invalid, Error, Result};
use crate::mean_shift::{ms_iterates_redux, BoundaryRule, IterateTrace, ReduxOptions, Termination};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SeedRule {
    #[default]
    LowestIndex,
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeflationConfig {
    /// Component standard deviation.
    pub sigma: f64,
    /// Used instead of `sqrt(2 d) sigma` when set (e.g. a cross-validated value).
    pub bandwidth_override: Option<f64>,
    pub seed_rule: SeedRule,
}

impl DeflationConfig {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            bandwidth_override: None,
            seed_rule: SeedRule::LowestIndex,
        }
    }

    pub fn with_bandwidth(w: f64) -> Self {
        Self {
            sigma: f64::NAN,
            bandwidth_override: Some(w),
            seed_rule: SeedRule::LowestIndex,
        }
    }

    pub fn bandwidth(&self, d: usize) -> Result<f64> {
        match self.bandwidth_override {
            Some(w) if w > 0.0 && w.is_finite() => Ok(w),
            Some(w) => Err(invalid(format!(
                "bandwidth override must be positive, got {w}"
            ))),
            None if self.sigma > 0.0 && self.sigma.is_finite() => {
                Ok((2.0 * d as f64).sqrt() * self.sigma)
            }
            None => Err(invalid(format!(
                "sigma must be positive, got {}",
                self.sigma
            ))),
        }
    }
}

/// Runs deflation clustering. The number of clusters is discovered.
///
/// Iterates always run over the full data set; only the claiming step is
/// restricted to unclaimed points, and a point keeps the first cluster that
/// claims it.
pub fn ms_deflation(
    data: &DataSet,
    cfg: &DeflationConfig,
    cap: usize,
) -> Result<ClusterAssignment> {
    deflate(data, cfg, cap, false).map(|(a, _)| a)
}

/// [`ms_deflation`] that also returns the iterate trace of every round.
pub fn ms_deflation_traced(
    data: &DataSet,
    cfg: &DeflationConfig,
    cap: usize,
) -> Result<(ClusterAssignment, Vec<IterateTrace>)> {
    deflate(data, cfg, cap, true)
}

fn deflate(
    data: &DataSet,
    cfg: &DeflationConfig,
    cap: usize,
    trace: bool,
) -> Result<(ClusterAssignment, Vec<IterateTrace>)> {
    let start = Instant::now();
    let w = cfg.bandwidth(data.dim())?;
    let m = data.len();
    let (mut picker, boundary_rule) = match cfg.seed_rule {
        SeedRule::LowestIndex => (None, BoundaryRule::LowestIndex),
        SeedRule::Random(s) => (
            Some(rng::stream(s, 0)),
            BoundaryRule::Random(rng::derive_seed(s, 1)),
        ),
    };
    let opts = ReduxOptions {
        cap,
        boundary_rule,
        tau: None,
        trace,
    };

    const UNCLAIMED: usize = usize::MAX;
    let mut labels = vec![UNCLAIMED; m];
    // Unclaimed indices, kept ascending for the lowest-index rule.
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut centroids = Vec::new();
    let mut cap_hits = 0;
    let mut traces = Vec::new();

    while !remaining.is_empty() {
        let seed = match &mut picker {
            None => remaining[0],
            Some(r) => remaining[r.random_range(0..remaining.len())],
        };
        let (mode, round_trace) = ms_iterates_redux(data, seed, w, &opts)?;
        if trace {
            traces.push(round_trace);
        }
        if mode.termination == Termination::IterationCapHit {
            cap_hits += 1;
        }
        let k = centroids.len();
        let mut claimed = 0;
        for &i in &mode.inlier_indices {
            if labels[i] == UNCLAIMED {
                labels[i] = k;
                claimed += 1;
            }
        }
        if claimed == 0 {
            return Err(Error::AlgorithmStall { round: k, seed });
        }
        remaining.retain(|&i| labels[i] == UNCLAIMED);
        centroids.push(mode.mode);
    }

    let assignment = ClusterAssignment {
        labels,
        centroids,
        algorithm: "deflation".into(),
        wall_time: start.elapsed().as_secs_f64(),
        iteration_cap_hits: cap_hits,
    };
    Ok((assignment, traces))
}

/// Chernoff bound `Pr(Y > gamma d) <= (gamma e^(1 - gamma))^(d/2)` for `Y ~ chi^2(d)`.
pub fn chi2_tail_bound(gamma: f64, d: usize) -> Result<f64> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma must exceed 1, got {gamma}")));
    }
    if d == 0 {
        return Err(invalid("degrees of freedom must be positive"));
    }
    Ok((0.5 * d as f64 * (gamma.ln() + 1.0 - gamma)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_groups() {
        let data = DataSet::from_scalars(&[0.0, 0.1, 0.2, 10.0, 10.1]).unwrap();
        // w² = 0.045: the ball around 0.1 holds the whole first group.
        let a = ms_deflation(&data, &DeflationConfig::new(0.15), 100).unwrap();
        assert_eq!(a.cluster_sizes(), vec![3, 2]);
        assert_eq!(a.labels, vec![0, 0, 0, 1, 1]);
        assert!((a.centroids[0][0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn narrow_ball_splits_group() {
        // w² = 0.02: the first mode is 0.05 and 0.2 lies at squared distance
        // 0.0225, so 0.2 seeds a round of its own at 0.15.
        let data = DataSet::from_scalars(&[0.0, 0.1, 0.2, 10.0, 10.1]).unwrap();
        let a = ms_deflation(&data, &DeflationConfig::new(0.1), 100).unwrap();
        assert_eq!(a.labels, vec![0, 0, 1, 2, 2]);
        assert!((a.centroids[0][0] - 0.05).abs() < 1e-15);
        assert!((a.centroids[1][0] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn traced_matches_untraced() {
        let data = DataSet::from_scalars(&[0.0, 0.1, 0.2, 10.0, 10.1]).unwrap();
        let cfg = DeflationConfig::new(0.1);
        let plain = ms_deflation(&data, &cfg, 100).unwrap();
        let (a, traces) = ms_deflation_traced(&data, &cfg, 100).unwrap();
        assert_eq!(a.labels, plain.labels);
        assert_eq!(traces.len(), 3);
        let seeds: Vec<usize> = traces.iter().map(|t| t.seed_index).collect();
        assert_eq!(seeds, vec![0, 2, 3]);
    }

    #[test]
    fn single_point() {
        let data = DataSet::from_scalars(&[4.0]).unwrap();
        let a = ms_deflation(&data, &DeflationConfig::new(1.0), 10).unwrap();
        assert_eq!(a.labels, vec![0]);
    }

    #[test]
    fn random_seed_rule_partitions() {
        let xs: Vec<f64> = (0..40)
            .map(|i| (i / 10) as f64 * 5.0 + (i % 10) as f64 * 0.01)
            .collect();
        let data = DataSet::from_scalars(&xs).unwrap();
        let cfg = DeflationConfig {
            seed_rule: SeedRule::Random(3),
            ..DeflationConfig::new(0.2)
        };
        let a = ms_deflation(&data, &cfg, 100).unwrap();
        assert_eq!(a.n_clusters(), 4);
        assert!(a.cluster_sizes().iter().all(|&s| s == 10));
    }

    #[test]
    fn tail_bound_values() {
        let e = std::f64::consts::E;
        assert!((chi2_tail_bound(2.0, 2).unwrap() - 2.0 / e).abs() < 1e-15);
        let b = chi2_tail_bound(2.0, 100).unwrap();
        assert!((b - (2.0 / e).powi(50)).abs() < 1e-20);
        assert!((b - 2.1e-7).abs() < 0.1e-7);
        assert!(chi2_tail_bound(1.0 + 1e-9, 10).unwrap() > 1.0 - 1e-12);
        assert!(chi2_tail_bound(1.0, 3).is_err());
        assert!(chi2_tail_bound(0.5, 3).is_err());
    }

    #[test]
    fn tail_bound_decreases_in_d() {
        let mut prev = 1.0;
        for d in 1..200 {
            let b = chi2_tail_bound(1.7, d).unwrap();
            assert!(b < prev && b > 0.0);
            prev = b;
        }
    }
}
