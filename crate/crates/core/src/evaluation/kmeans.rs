use std::time::Instant;

use rand::Rng as _;

use crate::cluster::ClusterAssignment;
use crate::data::{sq_dist, DataSet};
use crate::error::{invalid, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub enum KMeansInit {
    /// D²-weighted seeding from the given RNG seed.
    PlusPlus(u64),
    Given(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: ClusterAssignment,
    /// Within-cluster sum of squares after each centroid update.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
    /// Empty clusters re-seeded at the worst-fit point.
    pub reseeds: usize,
}

pub fn wcss(data: &DataSet, labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    data.points()
        .zip(labels)
        .map(|(x, &l)| sq_dist(x, &centroids[l]))
        .sum()
}

fn plus_plus(data: &DataSet, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = data.len();
    let mut rng = rng::seeded(seed);
    let mut centroids = vec![data.point(rng.random_range(0..m)).to_vec()];
    let mut nearest: Vec<f64> = data.points().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        let c = data.point(pick).to_vec();
        for (n, x) in nearest.iter_mut().zip(data.points()) {
            *n = n.min(sq_dist(x, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest centroid per point, ties to the lower index. Returns whether any
/// label changed.
fn assign(data: &DataSet, centroids: &[Vec<f64>], labels: &mut [usize]) -> bool {
    let mut changed = false;
    for (i, x) in data.points().enumerate() {
        let (mut best, mut best_d) = (0, f64::INFINITY);
        for (j, c) in centroids.iter().enumerate() {
            let d = sq_dist(x, c);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        changed |= labels[i] != best;
        labels[i] = best;
    }
    changed
}

/// Lloyd iterations until no centroid moves more than `tol` (Euclidean) or
/// `max_iter` rounds. A cluster left empty is re-seeded at the point
/// farthest from its current centroid.
pub fn lloyd_kmeans_fit(
    data: &DataSet,
    k: usize,
    init: &KMeansInit,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansFit> {
    let m = data.len();
    if k == 0 || k > m {
        return Err(invalid(format!("k must be in 1..={m}, got {k}")));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(invalid("tolerance must be non-negative"));
    }
    let start = Instant::now();
    let mut centroids = match init {
        KMeansInit::PlusPlus(seed) => plus_plus(data, k, *seed),
        KMeansInit::Given(c) => {
            if c.len() != k {
                return Err(invalid(format!(
                    "expected {k} initial centroids, got {}",
                    c.len()
                )));
            }
            for row in c {
                data.check_query(row)?;
            }
            c.clone()
        }
    };
    let mut labels = vec![usize::MAX; m];
    let mut history = Vec::new();
    let mut reseeds = 0;
    let mut iterations = 0;
    assign(data, &centroids, &mut labels);
    while iterations < max_iter {
        iterations += 1;
        let mut members = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(i);
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            if members[j].is_empty() {
                continue;
            }
            let c = data.mean_of(&members[j]);
            shift = shift.max(sq_dist(&c, &centroids[j]));
            centroids[j] = c;
        }
        for j in 0..k {
            if !members[j].is_empty() {
                continue;
            }
            let (mut far, mut far_d) = (0, -1.0);
            for (i, x) in data.points().enumerate() {
                let di = sq_dist(x, &centroids[labels[i]]);
                if di > far_d {
                    far = i;
                    far_d = di;
                }
            }
            centroids[j] = data.point(far).to_vec();
            labels[far] = j;
            reseeds += 1;
            shift = f64::INFINITY;
        }
        history.push(wcss(data, &labels, &centroids));
        let changed = assign(data, &centroids, &mut labels);
        if shift.sqrt() <= tol || !changed {
            break;
        }
    }
    // Centroids are the means of the final assignment.
    let members = {
        let mut mm = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            mm[l].push(i);
        }
        mm
    };
    for (j, idx) in members.iter().enumerate() {
        if !idx.is_empty() {
            centroids[j] = data.mean_of(idx);
        }
    }
    Ok(KMeansFit {
        assignment: ClusterAssignment {
            labels,
            centroids,
            algorithm: "kmeans".into(),
            wall_time: start.elapsed().as_secs_f64(),
            iteration_cap_hits: 0,
        },
        wcss_history: history,
        iterations,
        reseeds,
    })
}

pub fn lloyd_kmeans(
    data: &DataSet,
    k: usize,
    init: &KMeansInit,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterAssignment> {
    lloyd_kmeans_fit(data, k, init, max_iter, tol).map(|f| f.assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_singletons() {
        let data = DataSet::from_scalars(&[0.0, 100.0]).unwrap();
        let a = lloyd_kmeans(&data, 2, &KMeansInit::PlusPlus(1), 100, 0.0).unwrap();
        assert_ne!(a.labels[0], a.labels[1]);
        assert_eq!(wcss(&data, &a.labels, &a.centroids), 0.0);
    }

    #[test]
    fn one_cluster_is_global_mean() {
        let data = DataSet::from_rows(&[[0.0, 1.0], [2.0, 3.0], [4.0, -1.0]]).unwrap();
        let a = lloyd_kmeans(&data, 1, &KMeansInit::PlusPlus(3), 10, 0.0).unwrap();
        assert_eq!(a.centroids[0], data.mean());
    }

    #[test]
    fn empty_cluster_reseeds() {
        // Second centroid starts far from everything and captures no point.
        let data = DataSet::from_scalars(&[0.0, 0.1, 5.0, 5.2]).unwrap();
        let init = KMeansInit::Given(vec![vec![2.5], vec![1000.0]]);
        let fit = lloyd_kmeans_fit(&data, 2, &init, 50, 0.0).unwrap();
        assert!(fit.reseeds >= 1);
        assert_eq!(
            fit.assignment
                .cluster_sizes()
                .iter()
                .filter(|&&s| s > 0)
                .count(),
            2
        );
        assert!(fit.wcss_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn rejects_bad_k() {
        let data = DataSet::from_scalars(&[0.0]).unwrap();
        assert!(lloyd_kmeans(&data, 2, &KMeansInit::PlusPlus(0), 10, 0.0).is_err());
        assert!(lloyd_kmeans(&data, 0, &KMeansInit::PlusPlus(0), 10, 0.0).is_err());
    }
}
