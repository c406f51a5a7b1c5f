//! Epanechnikov mean shift: the corrected iterates, the all-seeds
//! clustering procedure, a Gaussian-profile comparison variant and the
//! finite-termination oracle.

mod full;
mod gaussian;
mod oracle;
mod redux;

pub use full::{merge_modes, ms_full, ms_full_with, FullOptions};
pub use gaussian::gaussian_ms_iterates;
pub use oracle::{termination_bound_oracle, TerminationBound};
pub use redux::{
    ms_iterates_redux, BoundaryRule, IterateStep, IterateTrace, ModeResult, ReduxOptions,
    Termination,
};

/// Default iteration cap `10 M + 100`.
pub fn default_cap(m: usize) -> usize {
    10 * m + 100
}
