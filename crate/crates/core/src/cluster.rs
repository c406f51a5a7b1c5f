use serde::{Deserialize, Serialize};

/// Hard clustering output shared by every algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Zero-based cluster index per point (files use one-based labels).
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub algorithm: String,
    /// Seconds spent inside the algorithm.
    pub wall_time: f64,
    /// Runs that stopped at their iteration cap (mean-shift family only).
    pub iteration_cap_hits: usize,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        self.centroids.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Index sets per cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centroids.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}
