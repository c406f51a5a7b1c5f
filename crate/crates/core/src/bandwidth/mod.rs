//! Least-squares cross-validated bandwidth selection.
//!
//! The score for a bandwidth `w` is
//! `J(w) = ∫ p̂² - (2/M) Σ_m p̂_{-m}(x_m)`, the integrated squared error of
//! the KDE minus its constant `∫ p²` term. Two estimators of `∫ p̂²` are
//! provided: Monte Carlo sampling from `p̂`, and an exact pairwise sum over
//! the kernel self-convolution (closed form for the Gaussian kernel, a
//! tabulated radial quadrature for the Epanechnikov kernel).

mod kde;
mod lscv;
mod selfconv;

pub use kde::{kde_value, loo_term};
pub use lscv::{
    default_candidates, log_spaced_candidates, lscv_score, lscv_score_with,
    median_pairwise_distance, select_bandwidth, select_bandwidth_with, squared_integral_exact,
    squared_integral_mc, BandwidthSearch, IntegralMethod, McEstimate,
};
pub use selfconv::SelfConvolution;
