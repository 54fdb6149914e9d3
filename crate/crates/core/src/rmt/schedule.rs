//! Smoothing-variance schedules δ(n).

use crate::error::{invalid, Result};

/// 5R²d/(log(n/(KR²)) − 21d) when the denominator is positive, else `None`.
///
/// `n` is taken as `f64` so that sizes far beyond anything samplable (the
/// denominator is only positive for n > KR²e^{21d}) can be evaluated.
pub fn delta_schedule(n: f64, d_n: f64, r: f64, k: f64) -> Option<f64> {
    if !(n >= 1.0 && d_n >= 1.0 && r > 0.0 && k > 0.0) {
        return None;
    }
    let denom = (n / (k * r * r)).ln() - 21.0 * d_n;
    (denom > 0.0).then(|| 5.0 * r * r * d_n / denom)
}

/// scale·d/log n: the same decay rate as [`delta_schedule`] at sizes where
/// that schedule is undefined.
pub fn practical_schedule(n: f64, d_n: f64, scale: f64) -> Result<f64> {
    if !(n >= 3.0) {
        return Err(invalid(format!("practical schedule needs n >= 3, got {n}")));
    }
    if !(d_n > 0.0) || !(scale > 0.0) {
        return Err(invalid("d_n and scale must be positive"));
    }
    Ok(scale * d_n / n.ln())
}
