use crate::data::{sq_dist, DataSet};
use crate::error::{invalid, Result};
use crate::kernel::KdeModel;

/// `p̂(z) = (1/M) Σ_m K(z - x_m)`, or the leave-one-out average over the
/// other `M - 1` points when `exclude` is set.
pub fn kde_value(
    data: &DataSet,
    model: &KdeModel,
    z: &[f64],
    exclude: Option<usize>,
) -> Result<f64> {
    data.check_query(z)?;
    if model.dim != data.dim() {
        return Err(invalid("model dimension differs from data dimension"));
    }
    let m = data.len();
    if let Some(e) = exclude {
        if m < 2 {
            return Err(invalid("leave-one-out needs at least two points"));
        }
        if e >= m {
            return Err(invalid(format!("exclude index {e} out of range")));
        }
    }
    let sum: f64 = data
        .points()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(_, x)| model.profile(sq_dist(x, z)))
        .sum();
    let n = if exclude.is_some() { m - 1 } else { m };
    Ok(model.ln_scale().exp() * sum / n as f64)
}

/// `(1/M) Σ_m p̂_{-m}(x_m)`, using each pair once.
pub fn loo_term(data: &DataSet, model: &KdeModel) -> Result<f64> {
    let m = data.len();
    if m < 2 {
        return Err(invalid("leave-one-out needs at least two points"));
    }
    let mut pairs = 0.0;
    for a in 0..m {
        let xa = data.point(a);
        for b in a + 1..m {
            pairs += model.profile(sq_dist(xa, data.point(b)));
        }
    }
    Ok(model.ln_scale().exp() * 2.0 * pairs / (m as f64 * (m as f64 - 1.0)))
}
