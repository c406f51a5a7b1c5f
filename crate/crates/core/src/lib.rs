//! Mode-seeking clustering with the Epanechnikov kernel.
//!
//! Mean shift with this kernel is a fixed-point iteration on
//! `f(z) = Σ_m min(||x_m - z||², w²)`, a piecewise quadratic whose local
//! minima are the density modes. The plain iteration can stall at a
//! non-smooth point that is not a minimum; [`ms_iterates_redux`] detects the
//! stall and steps past it by adding one boundary point to the average, which
//! makes every run terminate at a certified local minimum in finitely many
//! steps.
//!
//! Beyond the core iteration the crate provides full and deflation
//! clustering, cross-validated bandwidth selection, a Gaussian-mixture
//! generator, K-means and EM baselines, and label-alignment scoring.

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod bandwidth;
pub mod cluster;
pub mod data;
pub mod deflation;
pub mod density;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod mean_shift;
pub mod rng;
pub mod synth;

pub use bandwidth::{select_bandwidth, select_bandwidth_with, BandwidthSearch, IntegralMethod};
pub use cluster::ClusterAssignment;
pub use data::DataSet;
pub use deflation::{
    chi2_tail_bound, ms_deflation, ms_deflation_traced, DeflationConfig, SeedRule,
};
pub use density::{
    classify_neighbors, directional_derivative, eval_f, gradient, stationarity_report, Certificate,
    EpanechnikovLoss, NeighborSplit, StationarityReport,
};
pub use error::{Error, Result};
pub use evaluation::{hungarian_align, lloyd_kmeans, score, AlignmentResult, KMeansInit};
pub use kernel::{KdeModel, KernelKind};
pub use mean_shift::{
    ms_full, ms_full_with, ms_iterates_redux, BoundaryRule, FullOptions, ModeResult, ReduxOptions,
    Termination,
};
pub use synth::{generate, GmmSpec, LabeledData};
