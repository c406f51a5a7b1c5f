use std::collections::HashMap;
use std::sync::RwLock;
use std::time::Instant;

use rayon::prelude::*;

use super::redux::{Runner, Shortcut, Termination};
use super::{default_cap, BoundaryRule};
use crate::cluster::ClusterAssignment;
use crate::data::{sq_dist, DataSet};
use crate::density::EpanechnikovLoss;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullOptions {
    /// Modes closer than this are merged (single linkage). `None` = `1e-6 w`.
    pub merge_eps: Option<f64>,
    /// Per-seed iteration cap. `None` = `10 M + 100`.
    pub cap: Option<usize>,
    pub tau: Option<f64>,
    /// Reuse the outcome of any averaged set already seen by another seed.
    /// Exact: with the lowest-index boundary rule the rest of a run is a
    /// function of the current averaged set.
    pub memoize: bool,
}

impl Default for FullOptions {
    fn default() -> Self {
        Self {
            merge_eps: None,
            cap: None,
            tau: None,
            memoize: true,
        }
    }
}

/// Mean shift clustering: run the iterates from every point and group
/// points by terminal mode.
pub fn ms_full(data: &DataSet, w: f64, merge_eps: f64, cap: usize) -> Result<ClusterAssignment> {
    ms_full_with(
        data,
        w,
        &FullOptions {
            merge_eps: Some(merge_eps),
            cap: Some(cap),
            ..Default::default()
        },
    )
}

type Memo = RwLock<HashMap<Vec<usize>, (usize, usize)>>;

pub fn ms_full_with(data: &DataSet, w: f64, opts: &FullOptions) -> Result<ClusterAssignment> {
    let start = Instant::now();
    let mut loss = EpanechnikovLoss::new(data, w)?;
    if let Some(tau) = opts.tau {
        loss = loss.with_tau(tau)?;
    }
    let merge_eps = opts.merge_eps.unwrap_or(1e-6 * w);
    if merge_eps.is_nan() || merge_eps < 0.0 {
        return Err(invalid("merge_eps must be non-negative"));
    }
    let cap = opts.cap.unwrap_or_else(|| default_cap(data.len()));

    // Memo value: (index into `terminals`, iterations remaining).
    let memo: Memo = RwLock::new(HashMap::new());
    let terminals: RwLock<Vec<(Vec<f64>, Termination)>> = RwLock::new(Vec::new());

    let per_seed: Vec<(Vec<f64>, Termination)> = (0..data.len())
        .into_par_iter()
        .map(|seed| {
            let mut runner = Runner::new(loss, BoundaryRule::LowestIndex, false, seed);
            if opts.memoize {
                runner = runner.remember_states();
            }
            let out = runner.run(data.point(seed).to_vec(), None, cap, |set| {
                if !opts.memoize {
                    return None;
                }
                let memo = memo.read().unwrap();
                memo.get(set).map(|&(id, remaining)| {
                    let (mode, termination) = terminals.read().unwrap()[id].clone();
                    Shortcut {
                        mode,
                        remaining,
                        termination,
                    }
                })
            });
            if opts.memoize && !runner.visited.is_empty() {
                let id = {
                    let mut t = terminals.write().unwrap();
                    t.push((out.mode.clone(), out.termination));
                    t.len() - 1
                };
                let mut memo = memo.write().unwrap();
                for (k, set) in runner.visited.drain(..).enumerate() {
                    let remaining = out.iterations.saturating_sub(k + 1);
                    memo.entry(set).or_insert((id, remaining));
                }
            }
            (out.mode, out.termination)
        })
        .collect();

    let cap_hits = per_seed
        .iter()
        .filter(|(_, t)| *t == Termination::IterationCapHit)
        .count();
    let modes: Vec<Vec<f64>> = per_seed.into_iter().map(|(m, _)| m).collect();
    let (labels, centroids) = merge_modes(&modes, merge_eps);
    Ok(ClusterAssignment {
        labels,
        centroids,
        algorithm: "meanshift".into(),
        wall_time: start.elapsed().as_secs_f64(),
        iteration_cap_hits: cap_hits,
    })
}

/// Groups terminal modes: identical vectors first, then single-linkage
/// union of distinct modes within `eps`. Clusters are numbered by first
/// appearance; each centroid is the mode of its first member.
pub fn merge_modes(modes: &[Vec<f64>], eps: f64) -> (Vec<usize>, Vec<Vec<f64>>) {
    let key = |m: &[f64]| m.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
    let mut unique_index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut unique: Vec<&[f64]> = Vec::new();
    let unique_of: Vec<usize> = modes
        .iter()
        .map(|m| {
            *unique_index.entry(key(m)).or_insert_with(|| {
                unique.push(m);
                unique.len() - 1
            })
        })
        .collect();

    let mut parent: Vec<usize> = (0..unique.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let eps2 = eps * eps;
    for a in 0..unique.len() {
        for b in a + 1..unique.len() {
            if sq_dist(unique[a], unique[b]) <= eps2 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }

    let mut label_of_root: HashMap<usize, usize> = HashMap::new();
    let mut centroids = Vec::new();
    let labels = unique_of
        .iter()
        .map(|&u| {
            let root = find(&mut parent, u);
            *label_of_root.entry(root).or_insert_with(|| {
                centroids.push(unique[u].to_vec());
                centroids.len() - 1
            })
        })
        .collect();
    (labels, centroids)
}
