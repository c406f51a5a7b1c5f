use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::{sq_dist, DataSet};
use crate::density::{EpanechnikovLoss, NeighborSplit, StationarityReport};
use crate::error::{invalid, Result};
use crate::rng::{self, Rng};

/// How to pick the boundary point used to escape a non-smooth fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundaryRule {
    #[default]
    LowestIndex,
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    IterationCapHit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateStep {
    pub z: Vec<f64>,
    /// `|I(z)|` at this iterate.
    pub inlier_count: usize,
    pub f_value: f64,
    /// True when this iterate was produced by the boundary-escape update.
    pub boundary_escape: bool,
    /// `||z_t - z_{t-1}||^2` (0 for the starting point).
    pub step_sq_norm: f64,
}

/// Per-iteration record of one run. `steps[0]` is the seed point; every
/// later entry is a genuine move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub seed_index: usize,
    pub steps: Vec<IterateStep>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: Vec<f64>,
    /// `I(mode)`, ascending; `mode` is their mean.
    pub inlier_indices: Vec<usize>,
    pub iterations: usize,
    pub termination: Termination,
    pub certificate: StationarityReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduxOptions {
    pub cap: usize,
    pub boundary_rule: BoundaryRule,
    /// Absolute boundary tolerance; `None` means `1e-12 w^2`.
    pub tau: Option<f64>,
    /// Record an [`IterateTrace`]; evaluating `f` per step costs one extra scan.
    pub trace: bool,
}

impl ReduxOptions {
    pub fn new(cap: usize) -> Self {
        Self {
            cap,
            boundary_rule: BoundaryRule::LowestIndex,
            tau: None,
            trace: true,
        }
    }
}

/// Runs the corrected Epanechnikov mean shift iterates from `data[seed]`.
///
/// Each step replaces `z` by the mean of its inliers. A fixed point is
/// detected when the inlier set of the current iterate equals the set it
/// was averaged from. At a fixed point with no boundary points the iterate
/// is a certified local minimum of `f` and is returned; otherwise one
/// boundary point is added to the average, which strictly decreases `f`
/// by `w^2 / (|I| + 1)`.
pub fn ms_iterates_redux(
    data: &DataSet,
    seed: usize,
    w: f64,
    opts: &ReduxOptions,
) -> Result<(ModeResult, IterateTrace)> {
    if seed >= data.len() {
        return Err(invalid(format!(
            "seed index {seed} out of range for M={}",
            data.len()
        )));
    }
    if opts.cap == 0 {
        return Err(invalid("iteration cap must be positive"));
    }
    let mut loss = EpanechnikovLoss::new(data, w)?;
    if let Some(tau) = opts.tau {
        loss = loss.with_tau(tau)?;
    }
    let mut run = Runner::new(loss, opts.boundary_rule, opts.trace, seed);
    let outcome = run.run(data.point(seed).to_vec(), None, opts.cap, |_| None);
    let certificate = loss.stationarity_report(&outcome.mode)?;
    let trace = IterateTrace {
        seed_index: seed,
        steps: run.steps,
        termination: outcome.termination,
    };
    Ok((
        ModeResult {
            mode: outcome.mode,
            inlier_indices: outcome.inliers,
            iterations: outcome.iterations,
            termination: outcome.termination,
            certificate,
        },
        trace,
    ))
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub mode: Vec<f64>,
    /// Empty when the run was short-circuited by a memoized state.
    pub inliers: Vec<usize>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Known result of continuing the iteration from some state.
#[derive(Debug, Clone)]
pub(crate) struct Shortcut {
    pub mode: Vec<f64>,
    pub remaining: usize,
    pub termination: Termination,
}

/// The iterate loop, shared by single runs and the memoized all-seeds driver.
pub(crate) struct Runner<'a> {
    loss: EpanechnikovLoss<'a>,
    rng: Option<Rng>,
    record: bool,
    memo: bool,
    pub steps: Vec<IterateStep>,
    /// Averaged sets in visiting order; set `k` was formed in iteration `k + 1`.
    pub visited: Vec<Vec<usize>>,
}

impl<'a> Runner<'a> {
    pub fn new(loss: EpanechnikovLoss<'a>, rule: BoundaryRule, record: bool, seed: usize) -> Self {
        let rng = match rule {
            BoundaryRule::LowestIndex => None,
            BoundaryRule::Random(s) => Some(rng::stream(s, seed as u64)),
        };
        Self {
            loss,
            rng,
            record,
            memo: false,
            steps: Vec::new(),
            visited: Vec::new(),
        }
    }

    /// Keep every averaged set in `visited` so callers can memoize them.
    pub fn remember_states(mut self) -> Self {
        self.memo = true;
        self
    }

    fn push_step(&mut self, z: &[f64], prev: Option<&[f64]>, split: &NeighborSplit, escape: bool) {
        if !self.record {
            return;
        }
        self.steps.push(IterateStep {
            z: z.to_vec(),
            inlier_count: split.inliers.len(),
            f_value: self.loss.value_unchecked(z),
            boundary_escape: escape,
            step_sq_norm: prev.map_or(0.0, |p| sq_dist(p, z)),
        });
    }

    /// Iterates from `z` (optionally known to be the mean of `from_set`).
    /// `lookup` may short-circuit once a visited set's outcome is known.
    pub fn run(
        &mut self,
        mut z: Vec<f64>,
        mut from_set: Option<Vec<usize>>,
        cap: usize,
        mut lookup: impl FnMut(&[usize]) -> Option<Shortcut>,
    ) -> Outcome {
        let data = self.loss.data();
        let mut split = self.loss.split_unchecked(&z);
        self.push_step(&z, None, &split, false);
        let mut t = 0;
        loop {
            t += 1;
            if t > cap {
                return Outcome {
                    inliers: split.inliers,
                    mode: z,
                    iterations: cap,
                    termination: Termination::IterationCapHit,
                };
            }
            // The seed point is not the mean of any set yet, so the first
            // fixed-point test compares vectors.
            let fixed = match &from_set {
                Some(s) => *s == split.inliers,
                None => data.mean_of(&split.inliers) == z,
            };
            let escape = if !fixed {
                let next_set = std::mem::take(&mut split.inliers);
                z = self.advance(next_set, &mut from_set);
                false
            } else if split.boundary.is_empty() {
                return Outcome {
                    mode: z,
                    inliers: split.inliers,
                    iterations: t,
                    termination: Termination::Converged,
                };
            } else {
                let j = self.pick_boundary(&split.boundary);
                let mut next_set = std::mem::take(&mut split.inliers);
                let pos = next_set.binary_search(&j).unwrap_err();
                next_set.insert(pos, j);
                z = self.advance(next_set, &mut from_set);
                true
            };
            let set = from_set.as_ref().expect("set after advance");
            if let Some(done) = lookup(set) {
                return Outcome {
                    mode: done.mode,
                    inliers: Vec::new(),
                    iterations: t + done.remaining,
                    termination: done.termination,
                };
            }
            split = self.loss.split_unchecked(&z);
            if self.record {
                let prev = self.steps.last().map(|s| s.z.clone());
                self.push_step(&z, prev.as_deref(), &split, escape);
            }
        }
    }

    fn advance(&mut self, set: Vec<usize>, from_set: &mut Option<Vec<usize>>) -> Vec<f64> {
        let next = self.loss.data().mean_of(&set);
        if self.memo {
            self.visited.push(set.clone());
        }
        *from_set = Some(set);
        next
    }

    fn pick_boundary(&mut self, boundary: &[usize]) -> usize {
        match &mut self.rng {
            None => boundary[0],
            Some(r) => boundary[r.random_range(0..boundary.len())],
        }
    }
}
