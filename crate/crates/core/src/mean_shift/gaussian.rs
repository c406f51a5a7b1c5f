use crate::data::{sq_dist, DataSet};
use crate::density::check_bandwidth;
use crate::error::{invalid, Result};

/// Gaussian-profile mean shift from `data[seed]`:
/// `z <- Σ g_m x_m / Σ g_m` with `g_m = exp(-||z - x_m||^2 / (2 w^2))`.
///
/// Stops once a step moves less than `tol` or after `cap` updates. Returns
/// the final iterate and the number of updates performed. Unlike the
/// Epanechnikov iterates this only approaches a mode.
pub fn gaussian_ms_iterates(
    data: &DataSet,
    seed: usize,
    w: f64,
    tol: f64,
    cap: usize,
) -> Result<(Vec<f64>, usize)> {
    check_bandwidth(w)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(invalid("tol must be positive"));
    }
    if seed >= data.len() {
        return Err(invalid(format!("seed index {seed} out of range")));
    }
    let d = data.dim();
    let inv = 1.0 / (2.0 * w * w);
    let mut z = data.point(seed).to_vec();
    let mut d2 = vec![0.0; data.len()];
    let mut next = vec![0.0; d];
    for it in 1..=cap {
        // Shift exponents by the smallest distance so the weights never all underflow.
        let mut nearest = f64::INFINITY;
        for (slot, x) in d2.iter_mut().zip(data.points()) {
            *slot = sq_dist(x, &z);
            nearest = nearest.min(*slot);
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        let mut total = 0.0;
        for (&dist, x) in d2.iter().zip(data.points()) {
            let g = (-(dist - nearest) * inv).exp();
            total += g;
            for (n, xk) in next.iter_mut().zip(x) {
                *n += g * xk;
            }
        }
        next.iter_mut().for_each(|v| *v /= total);
        let moved = sq_dist(&next, &z).sqrt();
        std::mem::swap(&mut z, &mut next);
        if moved <= tol {
            return Ok((z, it));
        }
    }
    Ok((z, cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mean_shift::{ms_iterates_redux, ReduxOptions};

    #[test]
    fn single_point_one_iteration() {
        let data = DataSet::from_scalars(&[2.0]).unwrap();
        assert_eq!(
            gaussian_ms_iterates(&data, 0, 0.5, 1e-10, 100).unwrap(),
            (vec![2.0], 1)
        );
    }

    #[test]
    fn symmetric_midpoint_is_fixed() {
        let data = DataSet::from_scalars(&[-1.5, 0.0, 1.5]).unwrap();
        let (z, it) = gaussian_ms_iterates(&data, 1, 1.0, 1e-12, 100).unwrap();
        assert_eq!(z, vec![0.0]);
        assert_eq!(it, 1);
    }

    #[test]
    fn slower_than_epanechnikov() {
        let data = DataSet::from_scalars(&[0.0, 0.4, 2.0]).unwrap();
        let (_, gauss) = gaussian_ms_iterates(&data, 0, 1.0, 1e-10, 10_000).unwrap();
        let (m, _) = ms_iterates_redux(&data, 0, 1.0, &ReduxOptions::new(100)).unwrap();
        assert_eq!(m.iterations, 2);
        assert!(gauss > m.iterations, "gaussian took {gauss}");
    }
}
