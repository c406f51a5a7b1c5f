//! Shared fixtures for the criterion benches.

use modeshift::synth::{generate, linear_sizes, GmmSpec, LabeledData};

/// A scaled-down version of the benchmark mixture: `k` components of sizes
/// `step, 2 step, ...` in dimension `d`.
pub fn mixture(d: usize, k: usize, step: usize, seed: u64) -> LabeledData {
    let spec = GmmSpec {
        dim: d,
        centroid_std: 2.0,
        component_sigma: 1.0,
        sizes: linear_sizes(k, step),
        rng_seed: seed,
    };
    generate(&spec).expect("valid mixture spec")
}
