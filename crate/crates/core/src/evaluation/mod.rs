//! Baselines and scoring: Lloyd's K-means, spherical-covariance EM, and
//! clustering error under the best one-to-one label alignment.

mod em;
mod hungarian;
mod kmeans;

pub use em::{em_fit, em_gmm_spherical, EmFit};
pub use hungarian::{max_count_matching, min_cost_assignment};
pub use kmeans::{lloyd_kmeans, lloyd_kmeans_fit, wcss, KMeansFit, KMeansInit};

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterAssignment;
use crate::error::{invalid, Result};
use crate::synth::LabeledData;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    /// True cluster matched to each found cluster (0-based), if any.
    pub permutation: Vec<Option<usize>>,
    /// Points outside the matched cells, over all points.
    pub error_ratio: f64,
    /// `confusion[found][true]`
    pub confusion: Vec<Vec<u64>>,
}

/// Aligns found clusters (rows) to true clusters (columns) maximizing the
/// matched counts.
pub fn hungarian_align(confusion: &[Vec<u64>]) -> Result<AlignmentResult> {
    let permutation = max_count_matching(confusion)?;
    let total: u64 = confusion.iter().flatten().sum();
    let matched: u64 = permutation
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| confusion[i][j]))
        .sum();
    let error_ratio = if total == 0 {
        0.0
    } else {
        (total - matched) as f64 / total as f64
    };
    Ok(AlignmentResult {
        permutation,
        error_ratio,
        confusion: confusion.to_vec(),
    })
}

/// `found` and `truth` are 0-based labels below `n_found` and `n_true`.
pub fn confusion_matrix(
    found: &[usize],
    n_found: usize,
    truth: &[usize],
    n_true: usize,
) -> Result<Vec<Vec<u64>>> {
    if found.len() != truth.len() {
        return Err(invalid(format!(
            "label counts differ: {} found, {} true",
            found.len(),
            truth.len()
        )));
    }
    let mut c = vec![vec![0u64; n_true]; n_found];
    for (&f, &t) in found.iter().zip(truth) {
        if f >= n_found || t >= n_true {
            return Err(invalid(format!("label out of range: found {f}, true {t}")));
        }
        c[f][t] += 1;
    }
    Ok(c)
}

/// Clustering error of 0-based label sequences.
pub fn score_labels(found: &[usize], truth: &[usize]) -> Result<AlignmentResult> {
    let n_found = found.iter().max().map_or(0, |m| m + 1);
    let n_true = truth.iter().max().map_or(0, |m| m + 1);
    hungarian_align(&confusion_matrix(found, n_found, truth, n_true)?)
}

pub fn score(assignment: &ClusterAssignment, truth: &LabeledData) -> Result<AlignmentResult> {
    let truth0: Vec<usize> = truth.true_labels.iter().map(|l| l - 1).collect();
    let c = confusion_matrix(
        &assignment.labels,
        assignment.n_clusters(),
        &truth0,
        truth.components(),
    )?;
    hungarian_align(&c)
}
