//! The Epanechnikov loss `f(z) = Σ_m min(||x_m - z||^2, w^2)` and its
//! non-smooth calculus.
//!
//! Local minima of `f` are exactly the modes of the Epanechnikov KDE. `f`
//! is smooth except on the spheres of radius `w` around the data points;
//! there, optimality is decided through one-sided directional derivatives.

use serde::{Deserialize, Serialize};

use crate::data::{sq_dist, sq_norm, DataSet};
use crate::error::{invalid, Error, Result};

/// Relative boundary tolerance: `tau = DEFAULT_TAU_REL * w^2`.
pub const DEFAULT_TAU_REL: f64 = 1e-12;

/// `min(||z||^2, w^2)`.
pub fn eval_phi(z: &[f64], w: f64) -> Result<f64> {
    check_bandwidth(w)?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(invalid("phi: non-finite input"));
    }
    Ok(sq_norm(z).min(w * w))
}

pub(crate) fn check_bandwidth(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "bandwidth must be positive and finite, got {w}"
        )))
    }
}

/// Inliers strictly inside the bandwidth ball and points on its boundary band.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NeighborSplit {
    /// `{i : ||x_i - z||^2 < w^2 - tau}`, ascending.
    pub inliers: Vec<usize>,
    /// `{j : | ||x_j - z||^2 - w^2 | <= tau}`, ascending.
    pub boundary: Vec<usize>,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    LocalMin,
    NonSmoothNotStationary,
    SmoothNotStationary,
    /// Smooth point with no inliers: `f = M w^2`, the global maximum.
    EmptyInlierGlobalMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub is_smooth_point: bool,
    /// `Σ_{i∈I} 2(z - x_i)`; at non-smooth points this is the smooth part only.
    pub gradient: Vec<f64>,
    /// A direction with strictly negative directional derivative, if one exists.
    pub descent_direction: Option<Vec<f64>>,
    pub is_local_minimum: bool,
    pub certificate: Certificate,
}

/// Gradient of `f` at a smooth point, with the Hessian `2|I| * Identity`
/// reported as its scalar factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub vector: Vec<f64>,
    pub hessian_scale: f64,
}

/// The loss `f` over a borrowed data set at a fixed bandwidth.
#[derive(Debug, Clone, Copy)]
pub struct EpanechnikovLoss<'a> {
    data: &'a DataSet,
    w: f64,
    tau: f64,
}

impl<'a> EpanechnikovLoss<'a> {
    pub fn new(data: &'a DataSet, w: f64) -> Result<Self> {
        check_bandwidth(w)?;
        Ok(Self {
            data,
            w,
            tau: DEFAULT_TAU_REL * w * w,
        })
    }

    /// Overrides the absolute boundary tolerance; must satisfy `tau < 0.01 w^2`.
    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau < 0.01 * self.w * self.w) {
            return Err(invalid(format!("tau must lie in [0, 0.01 w^2), got {tau}")));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn data(&self) -> &'a DataSet {
        self.data
    }

    pub fn bandwidth(&self) -> f64 {
        self.w
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn value(&self, z: &[f64]) -> Result<f64> {
        self.data.check_query(z)?;
        Ok(self.value_unchecked(z))
    }

    pub(crate) fn value_unchecked(&self, z: &[f64]) -> f64 {
        let w2 = self.w * self.w;
        self.data.points().map(|x| sq_dist(x, z).min(w2)).sum()
    }

    pub fn split(&self, z: &[f64]) -> Result<NeighborSplit> {
        self.data.check_query(z)?;
        Ok(self.split_unchecked(z))
    }

    pub(crate) fn split_unchecked(&self, z: &[f64]) -> NeighborSplit {
        let w2 = self.w * self.w;
        let inner = w2 - self.tau;
        let outer = w2 + self.tau;
        let mut split = NeighborSplit {
            tau: self.tau,
            ..Default::default()
        };
        for (i, x) in self.data.points().enumerate() {
            if let Some(d2) = crate::data::sq_dist_within(x, z, outer) {
                if d2 < inner {
                    split.inliers.push(i);
                } else {
                    split.boundary.push(i);
                }
            }
        }
        split
    }

    /// `Σ_{i∈I} 2(z - x_i)`.
    fn smooth_part(&self, z: &[f64], inliers: &[usize]) -> Vec<f64> {
        let mut g = vec![0.0; z.len()];
        for &i in inliers {
            for ((gk, zk), xk) in g.iter_mut().zip(z).zip(self.data.point(i)) {
                *gk += 2.0 * (zk - xk);
            }
        }
        g
    }

    /// Gradient at a smooth point. Fails with [`Error::NonSmoothPoint`]
    /// naming the lowest boundary index otherwise.
    pub fn gradient(&self, z: &[f64]) -> Result<Gradient> {
        let split = self.split(z)?;
        if let Some(&index) = split.boundary.first() {
            return Err(Error::NonSmoothPoint { index });
        }
        Ok(Gradient {
            vector: self.smooth_part(z, &split.inliers),
            hessian_scale: 2.0 * split.inliers.len() as f64,
        })
    }

    /// One-sided directional derivative `f'(z; delta)`.
    ///
    /// Boundary points contribute `2(z - x_j)ᵀδ` only when `δ` moves `z`
    /// toward them, i.e. when that product is negative.
    pub fn directional_derivative(&self, z: &[f64], delta: &[f64]) -> Result<f64> {
        self.data.check_query(z)?;
        self.data.check_query(delta)?;
        if sq_norm(delta) == 0.0 {
            return Err(invalid("direction must be non-zero"));
        }
        let split = self.split_unchecked(z);
        Ok(self.directional_with_split(z, delta, &split))
    }

    fn directional_with_split(&self, z: &[f64], delta: &[f64], split: &NeighborSplit) -> f64 {
        let term = |i: usize| -> f64 {
            2.0 * z
                .iter()
                .zip(self.data.point(i))
                .zip(delta)
                .map(|((zk, xk), dk)| (zk - xk) * dk)
                .sum::<f64>()
        };
        let smooth: f64 = split.inliers.iter().map(|&i| term(i)).sum();
        let kink: f64 = split
            .boundary
            .iter()
            .map(|&j| term(j))
            .filter(|v| *v < 0.0)
            .sum();
        smooth + kink
    }

    /// Classifies `z` as a certified local minimum or exhibits a descent
    /// direction.
    pub fn stationarity_report(&self, z: &[f64]) -> Result<StationarityReport> {
        let split = self.split(z)?;
        let gradient = self.smooth_part(z, &split.inliers);

        if !split.boundary.is_empty() {
            // Either the smooth part already descends, or stepping toward a
            // boundary point does (its kink term is then strictly negative).
            let direction: Vec<f64> = if sq_norm(&gradient) > 0.0 {
                gradient.iter().map(|g| -0.5 * g).collect()
            } else {
                let j = split.boundary[0];
                z.iter()
                    .zip(self.data.point(j))
                    .map(|(zk, xk)| xk - zk)
                    .collect()
            };
            return Ok(StationarityReport {
                is_smooth_point: false,
                gradient,
                descent_direction: Some(direction),
                is_local_minimum: false,
                certificate: Certificate::NonSmoothNotStationary,
            });
        }

        if split.inliers.is_empty() {
            return Ok(StationarityReport {
                is_smooth_point: true,
                gradient,
                descent_direction: None,
                is_local_minimum: false,
                certificate: Certificate::EmptyInlierGlobalMax,
            });
        }

        let mean = self.data.mean_of(&split.inliers);
        if is_same_point(z, &mean, self.w) {
            Ok(StationarityReport {
                is_smooth_point: true,
                gradient,
                descent_direction: None,
                is_local_minimum: true,
                certificate: Certificate::LocalMin,
            })
        } else {
            let direction = gradient.iter().map(|g| -g).collect();
            Ok(StationarityReport {
                is_smooth_point: true,
                gradient,
                descent_direction: Some(direction),
                is_local_minimum: false,
                certificate: Certificate::SmoothNotStationary,
            })
        }
    }

    /// Verifies that a report's descent direction really descends.
    pub fn descent_is_strict(&self, z: &[f64], report: &StationarityReport) -> Result<bool> {
        match &report.descent_direction {
            Some(delta) => Ok(self.directional_derivative(z, delta)? < 0.0),
            None => Ok(true),
        }
    }
}

/// Gradient-zero test: `z` equals the inlier mean up to a few ulps of the
/// coordinate scale.
fn is_same_point(z: &[f64], mean: &[f64], w: f64) -> bool {
    let scale = w + z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    z.iter().zip(mean).all(|(a, b)| (a - b).abs() <= tol)
}

// Free-function forms matching the operation names.

pub fn eval_f(data: &DataSet, z: &[f64], w: f64) -> Result<f64> {
    EpanechnikovLoss::new(data, w)?.value(z)
}

pub fn classify_neighbors(data: &DataSet, z: &[f64], w: f64, tau: f64) -> Result<NeighborSplit> {
    EpanechnikovLoss::new(data, w)?.with_tau(tau)?.split(z)
}

pub fn gradient(data: &DataSet, z: &[f64], w: f64) -> Result<Gradient> {
    EpanechnikovLoss::new(data, w)?.gradient(z)
}

pub fn directional_derivative(data: &DataSet, z: &[f64], delta: &[f64], w: f64) -> Result<f64> {
    EpanechnikovLoss::new(data, w)?.directional_derivative(z, delta)
}

pub fn stationarity_report(
    data: &DataSet,
    z: &[f64],
    w: f64,
    tau: f64,
) -> Result<StationarityReport> {
    EpanechnikovLoss::new(data, w)?
        .with_tau(tau)?
        .stationarity_report(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(xs: &[f64]) -> DataSet {
        DataSet::from_scalars(xs).unwrap()
    }

    #[test]
    fn phi_branches() {
        assert_eq!(eval_phi(&[0.0], 1.0).unwrap(), 0.0);
        assert_eq!(eval_phi(&[0.5], 1.0).unwrap(), 0.25);
        assert_eq!(eval_phi(&[2.0], 1.0).unwrap(), 1.0);
        assert!(eval_phi(&[f64::INFINITY], 1.0).is_err());
        assert!(eval_phi(&[0.0], 0.0).is_err());
    }

    #[test]
    fn f_examples() {
        assert_eq!(eval_f(&ds(&[-1.0, 1.0]), &[0.0], 1.0).unwrap(), 2.0);
        let v = eval_f(&ds(&[0.0, 0.4, 2.0]), &[0.2], 1.0).unwrap();
        assert!((v - 1.08).abs() < 1e-15);
        assert_eq!(eval_f(&ds(&[3.25]), &[3.25], 0.7).unwrap(), 0.0);
        assert!(matches!(
            eval_f(&ds(&[1.0]), &[0.0, 0.0], 1.0),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn classify_examples() {
        let s = classify_neighbors(&ds(&[-1.0, 0.0, 1.0]), &[0.0], 1.0, 0.0).unwrap();
        assert_eq!(s.inliers, vec![1]);
        assert_eq!(s.boundary, vec![0, 2]);
        let s = classify_neighbors(&ds(&[0.0, 0.4, 2.0]), &[0.2], 1.0, 0.0).unwrap();
        assert_eq!(s.inliers, vec![0, 1]);
        assert!(s.boundary.is_empty());
        let s = classify_neighbors(&ds(&[4.0]), &[4.0], 0.3, 0.0).unwrap();
        assert_eq!(s.inliers, vec![0]);
        assert!(classify_neighbors(&ds(&[0.0]), &[0.0], 1.0, 0.02).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = gradient(&ds(&[0.0, 0.5]), &[0.4], 1.0).unwrap();
        assert!((g.vector[0] - 0.6).abs() < 1e-15);
        assert_eq!(g.hessian_scale, 4.0);
        assert_eq!(
            gradient(&ds(&[2.5]), &[2.5], 1.0).unwrap().vector,
            vec![0.0]
        );
        assert_eq!(
            gradient(&ds(&[0.0, 3.0]), &[0.0], 1.0).unwrap().vector,
            vec![0.0]
        );
        assert_eq!(
            gradient(&ds(&[-1.0, 0.0, 1.0]), &[0.0], 1.0),
            Err(Error::NonSmoothPoint { index: 0 })
        );
    }

    #[test]
    fn directional_examples() {
        let data = ds(&[1.0]);
        assert_eq!(
            directional_derivative(&data, &[0.0], &[1.0], 1.0).unwrap(),
            -2.0
        );
        assert_eq!(
            directional_derivative(&data, &[0.0], &[-1.0], 1.0).unwrap(),
            0.0
        );
        assert!(directional_derivative(&data, &[0.0], &[0.0], 1.0).is_err());
        // smooth point: equals gradient . delta
        let data = ds(&[0.0, 0.5, 3.0]);
        let g = gradient(&data, &[0.4], 1.0).unwrap().vector[0];
        let dd = directional_derivative(&data, &[0.4], &[-2.0], 1.0).unwrap();
        assert!((dd - g * -2.0).abs() < 1e-15);
    }

    #[test]
    fn stationarity_examples() {
        let data = ds(&[-1.0, 0.0, 1.0]);
        let r = stationarity_report(&data, &[0.0], 1.0, 0.0).unwrap();
        assert_eq!(r.certificate, Certificate::NonSmoothNotStationary);
        assert_eq!(r.descent_direction, Some(vec![-1.0]));
        let dd = directional_derivative(&data, &[0.0], &[-1.0], 1.0).unwrap();
        assert_eq!(dd, -2.0);

        let r = stationarity_report(&ds(&[0.0, 0.4]), &[0.2], 1.0, 0.0).unwrap();
        assert_eq!(r.certificate, Certificate::LocalMin);
        assert!(r.is_local_minimum);

        let r = stationarity_report(&ds(&[0.0]), &[5.0], 1.0, 0.0).unwrap();
        assert_eq!(r.certificate, Certificate::EmptyInlierGlobalMax);
        assert_eq!(eval_f(&ds(&[0.0]), &[5.0], 1.0).unwrap(), 1.0);

        let r = stationarity_report(&ds(&[0.0, 0.4]), &[0.1], 1.0, 0.0).unwrap();
        assert_eq!(r.certificate, Certificate::SmoothNotStationary);
        assert!(r.descent_direction.unwrap()[0] > 0.0);
    }

    #[test]
    fn nonsmooth_with_nonzero_smooth_part_descends() {
        // z = 0: inlier 0.25, boundary at 1.0 (distance exactly 1).
        let data = ds(&[0.25, 1.0]);
        let loss = EpanechnikovLoss::new(&data, 1.0)
            .unwrap()
            .with_tau(0.0)
            .unwrap();
        let r = loss.stationarity_report(&[0.0]).unwrap();
        assert_eq!(r.certificate, Certificate::NonSmoothNotStationary);
        assert!(loss.descent_is_strict(&[0.0], &r).unwrap());
    }
}
