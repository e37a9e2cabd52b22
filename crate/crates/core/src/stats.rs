//! Robust location and scale.

use crate::{Error, Result};

/// Consistency factor that makes the MAD estimate the standard deviation
/// of a normal sample.
pub const MAD_SCALE: f64 = 1.4826;

/// Median of a sample. Even lengths return the midpoint of the two central
/// order statistics.
pub fn median(z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyInput("median of an empty sample"));
    }
    let mut buf = z.to_vec();
    Ok(median_in_place(&mut buf))
}

/// Scaled median absolute deviation: `1.4826 * median(|z - median(z)|)`.
pub fn mad(z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyInput("MAD of an empty sample"));
    }
    let mut buf = z.to_vec();
    Ok(median_and_mad_in_place(&mut buf).1)
}

/// Computes `(median, mad)` reusing `buf` as scratch space. `buf` must be
/// non-empty; its contents are clobbered.
pub(crate) fn median_and_mad_in_place(buf: &mut [f64]) -> (f64, f64) {
    let med = median_in_place(buf);
    for v in buf.iter_mut() {
        *v = (*v - med).abs();
    }
    (med, MAD_SCALE * median_in_place(buf))
}

fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    debug_assert!(n > 0);
    let mid = n / 2;
    let (lower, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}
