//! Brute-force step-size bound for the finite-termination argument.
//!
//! Every iterate after the seed is the mean of a set of data points that
//! fits in a closed ball of radius `w`. `lambda` is the smallest squared
//! distance between the means of two such sets (with distinct means), so
//! every genuine move of the iterates has squared length at least `lambda`
//! and the number of moves is bounded by `(f(z0) - f(zT)) / lambda`.

use serde::{Deserialize, Serialize};

use crate::data::{sq_dist, DataSet};
use crate::density::check_bandwidth;
use crate::error::{Error, Result};

pub const MAX_ORACLE_POINTS: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminationBound {
    /// `+inf` when fewer than two admissible sets have distinct means.
    pub lambda: f64,
    pub admissible_sets: usize,
    /// Pairs of distinct admissible sets whose means coincide.
    pub degenerate_pairs: usize,
}

impl TerminationBound {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_pairs > 0
    }

    /// Upper bound on the number of moves for a total decrease `decrease`.
    pub fn max_moves(&self, decrease: f64) -> f64 {
        if self.lambda.is_infinite() {
            0.0
        } else {
            decrease / self.lambda
        }
    }
}

/// Enumerates all non-empty subsets that may fit in a radius-`w` ball
/// (a superset of the sets the iterates can average) and returns the
/// minimum squared distance between distinct means.
pub fn termination_bound_oracle(data: &DataSet, w: f64) -> Result<TerminationBound> {
    check_bandwidth(w)?;
    let m = data.len();
    if m > MAX_ORACLE_POINTS {
        return Err(Error::UnsupportedSize(format!(
            "termination oracle enumerates 2^M subsets; M={m} exceeds {MAX_ORACLE_POINTS}"
        )));
    }
    let pair: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| sq_dist(data.point(i), data.point(j)))
                .collect()
        })
        .collect();

    let mut means: Vec<Vec<f64>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    extend(data, &pair, w, 0, &mut stack, &mut means);

    // Sweep over means sorted by the first coordinate.
    means.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let scale = means.iter().flatten().fold(w, |s, v| s.max(v.abs()));
    let same = 1e-24 * scale * scale;
    let mut best = f64::INFINITY;
    let mut degenerate = 0;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            let gap = means[j][0] - means[i][0];
            if gap * gap > best && gap * gap > same {
                break;
            }
            let dist = sq_dist(&means[i], &means[j]);
            if dist <= same {
                degenerate += 1;
            } else if dist < best {
                best = dist;
            }
        }
    }
    Ok(TerminationBound {
        lambda: best,
        admissible_sets: means.len(),
        degenerate_pairs: degenerate,
    })
}

/// Depth-first enumeration in increasing index order; a set that cannot
/// fit prunes all of its supersets.
fn extend(
    data: &DataSet,
    pair: &[Vec<f64>],
    w: f64,
    next: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<f64>>,
) {
    for i in next..data.len() {
        stack.push(i);
        if may_fit_ball(data, pair, stack, w) {
            out.push(data.mean_of(stack));
            extend(data, pair, w, i + 1, stack, out);
        }
        stack.pop();
    }
}

/// Whether the minimum enclosing ball of the indexed points may have
/// radius `<= w`. Never returns false for a set that fits; may return true
/// for a borderline set that does not.
fn may_fit_ball(data: &DataSet, pair: &[Vec<f64>], set: &[usize], w: f64) -> bool {
    let w2 = w * w;
    let slack = 1.0 + 1e-9;
    let diam2 = set
        .iter()
        .flat_map(|&a| set.iter().map(move |&b| pair[a][b]))
        .fold(0.0f64, f64::max);
    if diam2 > 4.0 * w2 * slack {
        return false;
    }
    let d = data.dim() as f64;
    // Jung's theorem: r <= diam * sqrt(d / (2(d+1))).
    if diam2 * d / (2.0 * (d + 1.0)) <= w2 {
        return true;
    }
    // Frank-Wolfe on the dual max_a Σ a_i ||x_i||^2 - ||Σ a_i x_i||^2 over
    // the simplex: the dual value bounds r^2 from below, and the farthest
    // point from the current center bounds it from above.
    let k = set.len();
    let mut alpha = vec![1.0 / k as f64; k];
    let dim = data.dim();
    for it in 0..20_000 {
        let mut center = vec![0.0; dim];
        for (a, &i) in alpha.iter().zip(set) {
            for (c, x) in center.iter_mut().zip(data.point(i)) {
                *c += a * x;
            }
        }
        let dists: Vec<f64> = set
            .iter()
            .map(|&i| sq_dist(data.point(i), &center))
            .collect();
        let dual: f64 = alpha.iter().zip(&dists).map(|(a, r)| a * r).sum();
        let (far, &upper) = dists
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty set");
        if upper <= w2 * slack {
            return true;
        }
        if dual > w2 * slack {
            return false;
        }
        let step = 2.0 / (it as f64 + 3.0);
        alpha.iter_mut().for_each(|a| *a *= 1.0 - step);
        alpha[far] += step;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_small_bandwidth() {
        let data = DataSet::from_scalars(&[0.0, 1.0]).unwrap();
        let b = termination_bound_oracle(&data, 0.4).unwrap();
        assert_eq!(b.admissible_sets, 2);
        assert_eq!(b.lambda, 1.0);
        assert!(!b.is_degenerate());
    }

    #[test]
    fn single_point_has_no_pairs() {
        let data = DataSet::from_scalars(&[3.0]).unwrap();
        let b = termination_bound_oracle(&data, 1.0).unwrap();
        assert!(b.lambda.is_infinite());
        assert_eq!(b.max_moves(5.0), 0.0);
    }

    #[test]
    fn too_many_points() {
        let data = DataSet::from_scalars(&[0.0; 16]).unwrap();
        assert!(matches!(
            termination_bound_oracle(&data, 1.0),
            Err(Error::UnsupportedSize(_))
        ));
    }

    #[test]
    fn equilateral_triangle_needs_circumradius() {
        // Side 1: circumradius 1/sqrt(3) ~ 0.577 > 0.5 = diam / 2.
        let h = 3f64.sqrt() / 2.0;
        let data = DataSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap();
        let fits = termination_bound_oracle(&data, 0.58).unwrap();
        let tight = termination_bound_oracle(&data, 0.56).unwrap();
        assert_eq!(fits.admissible_sets, 7);
        assert_eq!(tight.admissible_sets, 6);
    }

    #[test]
    fn duplicate_points_are_degenerate() {
        let data = DataSet::from_scalars(&[0.0, 0.0]).unwrap();
        assert!(termination_bound_oracle(&data, 1.0)
            .unwrap()
            .is_degenerate());
    }
}
