//! Kernel families and their normalizing constants.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    /// `c / w^d * [1 - ||z||^2 / w^2]_+`
    Epanechnikov,
    /// `c / w^d * exp(-||z||^2 / (2 w^2))`
    Gaussian,
}

/// `ln Γ(d/2 + 1)` for a positive integer `d`, by exact recursion.
fn ln_gamma_half_plus_one(d: usize) -> f64 {
    // Γ(x + 1) = x Γ(x); bottoms out at Γ(1) = 1 or Γ(3/2) = √π / 2.
    let mut x = d as f64 / 2.0;
    let mut acc = 0.0;
    while x > 1.0 {
        acc += x.ln();
        x -= 1.0;
    }
    if d % 2 == 1 {
        // x == 0.5 here
        acc += 0.5 * std::f64::consts::PI.ln() - std::f64::consts::LN_2;
    } else {
        acc += x.ln(); // x == 1
    }
    acc
}

/// Natural log of the volume of the unit ball in `R^d`.
pub fn ln_unit_ball_volume(d: usize) -> f64 {
    0.5 * d as f64 * std::f64::consts::PI.ln() - ln_gamma_half_plus_one(d)
}

pub fn unit_ball_volume(d: usize) -> f64 {
    ln_unit_ball_volume(d).exp()
}

/// A kernel density model: kernel family, bandwidth and normalizing constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeModel {
    pub kernel: KernelKind,
    pub bandwidth: f64,
    pub dim: usize,
    /// `ln c`, where `c` makes the unit-bandwidth kernel integrate to one.
    pub ln_norm_const: f64,
}

impl KdeModel {
    pub fn new(kernel: KernelKind, bandwidth: f64, dim: usize) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(invalid(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let ln_norm_const = match kernel {
            KernelKind::Epanechnikov => ((dim as f64 + 2.0) / 2.0).ln() - ln_unit_ball_volume(dim),
            KernelKind::Gaussian => -0.5 * dim as f64 * (2.0 * std::f64::consts::PI).ln(),
        };
        Ok(Self {
            kernel,
            bandwidth,
            dim,
            ln_norm_const,
        })
    }

    pub fn epanechnikov(bandwidth: f64, dim: usize) -> Result<Self> {
        Self::new(KernelKind::Epanechnikov, bandwidth, dim)
    }

    pub fn gaussian(bandwidth: f64, dim: usize) -> Result<Self> {
        Self::new(KernelKind::Gaussian, bandwidth, dim)
    }

    pub fn norm_const(&self) -> f64 {
        self.ln_norm_const.exp()
    }

    /// `ln(c / w^d)`, the log of the kernel's peak scale.
    pub fn ln_scale(&self) -> f64 {
        self.ln_norm_const - self.dim as f64 * self.bandwidth.ln()
    }

    /// Kernel shape without the `c / w^d` factor, as a function of `||u||^2`.
    #[inline]
    pub fn profile(&self, sq_norm: f64) -> f64 {
        let r = sq_norm / (self.bandwidth * self.bandwidth);
        match self.kernel {
            KernelKind::Epanechnikov => (1.0 - r).max(0.0),
            KernelKind::Gaussian => (-0.5 * r).exp(),
        }
    }

    /// `K(u)` for an offset with squared norm `sq_norm`.
    #[inline]
    pub fn value(&self, sq_norm: f64) -> f64 {
        self.ln_scale().exp() * self.profile(sq_norm)
    }

    /// Draws an offset `u` with density `K(u)`.
    pub fn sample_offset(&self, rng: &mut Rng) -> Vec<f64> {
        let d = self.dim;
        let mut u: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        match self.kernel {
            KernelKind::Gaussian => {
                u.iter_mut().for_each(|v| *v *= self.bandwidth);
            }
            KernelKind::Epanechnikov => {
                // Uniform direction; radius from the uniform-ball law r = U^(1/d),
                // accepted with probability 1 - r^2.
                let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                let r = loop {
                    let r = rng.random::<f64>().powf(1.0 / d as f64);
                    if rng.random::<f64>() < 1.0 - r * r {
                        break r;
                    }
                };
                let s = self.bandwidth * r / norm;
                u.iter_mut().for_each(|v| *v *= s);
            }
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-13);
        // V_d = V_{d-2} * 2π / d
        for d in 3..60 {
            let ratio = (ln_unit_ball_volume(d) - ln_unit_ball_volume(d - 2)).exp();
            assert!((ratio - 2.0 * std::f64::consts::PI / d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn epanechnikov_constant_one_dim() {
        let m = KdeModel::epanechnikov(1.0, 1).unwrap();
        assert!((m.norm_const() - 0.75).abs() < 1e-15);
        assert!((m.value(0.0) - 0.75).abs() < 1e-15);
        assert_eq!(m.value(1.0), 0.0);
    }

    #[test]
    fn rejects_bad_bandwidth() {
        assert!(KdeModel::gaussian(0.0, 2).is_err());
        assert!(KdeModel::gaussian(f64::NAN, 2).is_err());
    }

    #[test]
    fn epanechnikov_samples_have_expected_radius_moment() {
        // For the Epanechnikov kernel in d dims, E||u||^2 = w^2 d / (d + 4).
        let mut rng = crate::rng::seeded(5);
        for d in [1usize, 3, 10] {
            let m = KdeModel::epanechnikov(2.0, d).unwrap();
            let n = 40_000;
            let mean: f64 = (0..n)
                .map(|_| m.sample_offset(&mut rng).iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                / n as f64;
            let want = 4.0 * d as f64 / (d as f64 + 4.0);
            assert!((mean - want).abs() < 0.03 * want, "d={d}: {mean} vs {want}");
        }
    }
}
