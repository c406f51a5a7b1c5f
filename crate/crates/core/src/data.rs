//! The shared, read-only point collection.

use crate::error::{invalid, Error, Result};

/// An immutable collection of `M` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    values: Vec<f64>,
    m: usize,
    d: usize,
}

impl DataSet {
    /// Builds a data set from a flat row-major buffer of `m * d` values.
    pub fn from_flat(m: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || d == 0 {
            return Err(invalid(format!(
                "data set must be non-empty (M={m}, d={d})"
            )));
        }
        if values.len() != m * d {
            return Err(invalid(format!(
                "buffer holds {} values, expected {m} x {d}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite coordinate at point {}, dim {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { values, m, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(invalid(format!(
                    "row {i} has {} coordinates, expected {d}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(rows.len(), d, values)
    }

    /// One-dimensional convenience constructor.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::from_flat(xs.len(), 1, xs.to_vec())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    /// Always false; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Checks that `z` is a finite vector of the data dimension.
    pub fn check_query(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(invalid("query vector has non-finite coordinates"));
        }
        Ok(())
    }

    /// Arithmetic mean of the indexed points, summed in the order given.
    pub fn mean_of(&self, indices: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.d];
        for &i in indices {
            for (a, x) in acc.iter_mut().zip(self.point(i)) {
                *a += x;
            }
        }
        let n = indices.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    pub fn mean(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.m).collect();
        self.mean_of(&all)
    }
}

/// Squared Euclidean distance with a fixed summation order.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let t = x[k] - y[k];
            acc[k] += t * t;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let t = x - y;
        tail += t * t;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Squared distance if it does not exceed `limit`, otherwise `None`.
///
/// The partial sums are formed exactly like [`sq_dist`], and rounding is
/// monotone, so `None` is returned only when `sq_dist(a, b) > limit`; when
/// `Some` is returned the value is bit-identical to `sq_dist(a, b)`.
#[inline]
pub fn sq_dist_within(a: &[f64], b: &[f64], limit: f64) -> Option<f64> {
    const BLOCK: usize = 16;
    let d = a.len();
    let full = d - d % 4;
    let mut acc = [0.0f64; 4];
    let mut start = 0;
    while start < full {
        let end = (start + BLOCK).min(full);
        for (x, y) in a[start..end]
            .chunks_exact(4)
            .zip(b[start..end].chunks_exact(4))
        {
            for k in 0..4 {
                let t = x[k] - y[k];
                acc[k] += t * t;
            }
        }
        start = end;
        if end < d && (acc[0] + acc[1]) + (acc[2] + acc[3]) > limit {
            return None;
        }
    }
    let mut tail = 0.0;
    for (x, y) in a[full..].iter().zip(&b[full..]) {
        let t = x - y;
        tail += t * t;
    }
    let total = (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
    (total <= limit).then_some(total)
}

pub(crate) fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(DataSet::from_flat(0, 1, vec![]).is_err());
        assert!(DataSet::from_scalars(&[1.0, f64::NAN]).is_err());
        assert!(DataSet::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn within_matches_full_distance() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64 * 0.11).cos()).collect();
        let full = sq_dist(&a, &b);
        assert_eq!(sq_dist_within(&a, &b, full), Some(full));
        assert_eq!(sq_dist_within(&a, &b, full * 0.999), None);
        assert_eq!(sq_dist_within(&a, &b, f64::INFINITY), Some(full));
    }

    #[test]
    fn mean_of_subset() {
        let ds = DataSet::from_scalars(&[0.0, 0.4, 2.0]).unwrap();
        assert_eq!(ds.mean_of(&[0, 1]), vec![0.2]);
        assert_eq!(ds.point(2), &[2.0]);
    }
}
