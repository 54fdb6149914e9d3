//! Standard normal tail functions that stay accurate (in relative terms) far
//! into both tails.

use libm::erfc;

/// `ln √(2π)`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Beyond this point `erfc` is abandoned in favour of the Mills-ratio
/// continued fraction, which is evaluated in log form and never underflows.
const CF_SWITCH: f64 = 8.0;

/// `log φ(x)` for the standard normal density.
#[inline]
pub fn log_gaussian_density(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Mills ratio `Φc(x)/φ(x)` by backward evaluation of
/// `1/(x + 1/(x + 2/(x + 3/(x + …))))`. Accurate to rounding for `x ≥ 8`.
fn mills_ratio(x: f64) -> f64 {
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + k as f64 / tail;
    }
    1.0 / tail
}

/// `∫ₓ^∞ φ(u) du`.
pub fn gaussian_upper_tail(x: f64) -> f64 {
    if x < CF_SWITCH {
        0.5 * erfc(x / std::f64::consts::SQRT_2)
    } else {
        log_upper_tail(x).exp()
    }
}

/// `∫_{-∞}^x φ(u) du`.
pub fn gaussian_lower_tail(x: f64) -> f64 {
    gaussian_upper_tail(-x)
}

/// `log ∫ₓ^∞ φ(u) du`, finite for every finite `x`.
pub fn log_upper_tail(x: f64) -> f64 {
    if x < CF_SWITCH {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        log_gaussian_density(x) + mills_ratio(x).ln()
    }
}

/// `log ∫_{-∞}^x φ(u) du`.
pub fn log_lower_tail(x: f64) -> f64 {
    log_upper_tail(-x)
}
