//! Spherical Gaussian mixture generator.
//!
//! Centroids are drawn first, `μ_k ~ N(0, s²I)`, then `sizes[k]` points from
//! `N(μ_k, σ²I)` for each component in order, all from one ChaCha8 stream
//! with standard normals transformed by `mean + scale * n`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{sq_dist, DataSet};
use crate::error::{invalid, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmSpec {
    pub dim: usize,
    pub centroid_std: f64,
    pub component_sigma: f64,
    /// Points per component; the number of components is `sizes.len()`.
    pub sizes: Vec<usize>,
    pub rng_seed: u64,
}

impl GmmSpec {
    /// `d = 100`, 30 components of sizes `50 k`, `μ_k ~ N(0, 4I)`, `σ = 1`.
    pub fn benchmark(rng_seed: u64) -> Self {
        Self {
            dim: 100,
            centroid_std: 2.0,
            component_sigma: 1.0,
            sizes: linear_sizes(30, 50),
            rng_seed,
        }
    }

    pub fn components(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(invalid("component sizes must be positive"));
        }
        for (name, v) in [
            ("centroid std", self.centroid_std),
            ("sigma", self.component_sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `[step, 2 step, ..., k step]`
pub fn linear_sizes(k: usize, step: usize) -> Vec<usize> {
    (1..=k).map(|i| i * step).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub data: DataSet,
    /// Component of each point, 1-based.
    pub true_labels: Vec<usize>,
    pub true_centroids: Vec<Vec<f64>>,
}

impl LabeledData {
    pub fn components(&self) -> usize {
        self.true_centroids.len()
    }
}

pub fn generate(spec: &GmmSpec) -> Result<LabeledData> {
    spec.validate()?;
    let d = spec.dim;
    let mut rng = rng::seeded(spec.rng_seed);
    let mut normal = |mean: f64, scale: f64| -> f64 {
        let n: f64 = StandardNormal.sample(&mut rng);
        mean + scale * n
    };
    let centroids: Vec<Vec<f64>> = (0..spec.components())
        .map(|_| (0..d).map(|_| normal(0.0, spec.centroid_std)).collect())
        .collect();
    let mut values = Vec::with_capacity(spec.total() * d);
    let mut labels = Vec::with_capacity(spec.total());
    for (k, (&size, mu)) in spec.sizes.iter().zip(&centroids).enumerate() {
        for _ in 0..size {
            values.extend(mu.iter().map(|&c| normal(c, spec.component_sigma)));
            labels.push(k + 1);
        }
    }
    Ok(LabeledData {
        data: DataSet::from_flat(labels.len(), d, values)?,
        true_labels: labels,
        true_centroids: centroids,
    })
}

/// Minimum pairwise centroid distance and whether it is at most `2√d σ`.
/// A single component gives `(∞, false)`.
pub fn separation_stats(labeled: &LabeledData, sigma: f64) -> (f64, bool) {
    let c = &labeled.true_centroids;
    let mut min = f64::INFINITY;
    for a in 0..c.len() {
        for b in a + 1..c.len() {
            min = min.min(sq_dist(&c[a], &c[b]).sqrt());
        }
    }
    let d = labeled.data.dim() as f64;
    (min, min <= 2.0 * d.sqrt() * sigma)
}
