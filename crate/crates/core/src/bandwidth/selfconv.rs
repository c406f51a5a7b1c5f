//! Self-convolution of the Epanechnikov kernel.
//!
//! For the unit-bandwidth kernel `K1(u) = c (1 - ||u||^2)_+` in `R^d`,
//! `κ(s) = ∫ K1(u) K1(u - s e1) du` depends only on the centre distance
//! `s ∈ [0, 2)`. Splitting `u = (t, v)` and integrating `v ∈ R^(d-1)` in
//! polar form leaves a one-dimensional integral over `t`, evaluated here
//! with composite Simpson after substituting `t = cos θ`. At bandwidth `w`,
//! `(K_w * K_w)(r) = κ(r / w) / w^d`.

use crate::kernel::ln_unit_ball_volume;

const TABLE_INTERVALS: usize = 4096;
const SIMPSON_INTERVALS: usize = 2048;

#[derive(Debug, Clone)]
pub struct SelfConvolution {
    dim: usize,
    /// `ln κ(0)`; closed form `2(d+2) / ((d+4) V_d)`.
    ln_peak: f64,
    /// `κ(s) / κ(0)` on a uniform grid over `[0, 2]`.
    ratio: Vec<f64>,
}

impl SelfConvolution {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let d = dim as f64;
        let ln_peak = (2.0 * (d + 2.0) / (d + 4.0)).ln() - ln_unit_ball_volume(dim);
        let q0 = radial_integral(dim, 0.0);
        let ratio = (0..=TABLE_INTERVALS)
            .map(|k| {
                let s = 2.0 * k as f64 / TABLE_INTERVALS as f64;
                if k == TABLE_INTERVALS {
                    0.0
                } else {
                    radial_integral(dim, s) / q0
                }
            })
            .collect();
        Self {
            dim,
            ln_peak,
            ratio,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ln_peak(&self) -> f64 {
        self.ln_peak
    }

    /// `κ(s) / κ(0)`, linearly interpolated; zero for `s >= 2`.
    #[inline]
    pub fn ratio(&self, s: f64) -> f64 {
        if s >= 2.0 {
            return 0.0;
        }
        let x = s * (TABLE_INTERVALS as f64 / 2.0);
        let k = x as usize;
        let frac = x - k as f64;
        self.ratio[k] + frac * (self.ratio[k + 1] - self.ratio[k])
    }

    /// `κ(s)` for the unit-bandwidth kernel.
    pub fn unit(&self, s: f64) -> f64 {
        self.ln_peak.exp() * self.ratio(s)
    }

    /// `(K_w * K_w)(r)` for a centre distance `r`.
    pub fn at(&self, r: f64, w: f64) -> f64 {
        (self.ln_peak - self.dim as f64 * w.ln()).exp() * self.ratio(r / w)
    }
}

/// `∫ (1 - t^2 - ρ^2)_+ (1 - (t-s)^2 - ρ^2)_+` over `R^d`, up to the
/// constant factor `c^2 * area(S^(d-2))`, which cancels in ratios.
fn radial_integral(dim: usize, s: f64) -> f64 {
    // By symmetry about t = s/2 integrate t ∈ [s/2, 1] (where a <= b) and
    // double. With t = cos θ: a = sin^2 θ, dt = sin θ dθ.
    let theta_max = (s / 2.0).acos();
    let h = theta_max / SIMPSON_INTERVALS as f64;
    let integrand = |theta: f64| -> f64 {
        let (sin, cos) = theta.sin_cos();
        let a = sin * sin;
        let b = 1.0 - (cos - s) * (cos - s);
        let g = if dim == 1 {
            a * b
        } else {
            // ∫_0^√a (a-ρ²)(b-ρ²) ρ^(n-1) dρ with n = d-1, rearranged so that
            // both terms are non-negative for a <= b.
            let n = (dim - 1) as f64;
            2.0 * a.powf(n / 2.0 + 1.0) / (n + 2.0) * (b / n - a / (n + 4.0))
        };
        g * sin
    };
    let mut acc = integrand(0.0) + integrand(theta_max);
    for k in 1..SIMPSON_INTERVALS {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(k as f64 * h);
    }
    2.0 * acc * h / 3.0
}
