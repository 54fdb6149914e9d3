//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The panel with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol·|value|)`. Callers with sharply peaked
//! integrands pass breakpoints so the initial panels already resolve the peak.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::NumericsError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadConfig {
    /// Absolute and relative tolerance both set to `tol`.
    pub fn new(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: tol,
            max_subdivisions: 2000,
        }
    }

    /// Pure relative tolerance; the absolute floor sits at the underflow limit.
    pub fn relative(tol: f64) -> Self {
        Self {
            abs_tol: f64::MIN_POSITIVE,
            rel_tol: tol,
            max_subdivisions: 2000,
        }
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self::new(super::DEFAULT_QUAD_TOL)
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// ∫|f| estimate; sets the rounding floor of the error estimate.
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by position for determinism.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn check(x: f64, v: f64) -> Result<f64, NumericsError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::IntegrandFailure { at: x, value: v })
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, NumericsError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = check(center, f(center))?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let f1 = check(x1, f(x1))?;
        let f2 = check(x2, f(x2))?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        magnitude: res_abs,
    })
}

/// Integrate `f` over `[a, b]` with absolute and relative tolerance `tol`.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult, NumericsError> {
    if !(a < b) {
        return Err(NumericsError::InvalidArgument(format!(
            "need a < b, got [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    integrate(f, &[a, b], &QuadConfig::new(tol))
}

/// Integrate `f` from the first to the last breakpoint, starting from one
/// panel per pair of consecutive breakpoints.
///
/// Breakpoints are sorted and de-duplicated; a degenerate interval integrates
/// to zero.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult, NumericsError> {
    let mut pts: Vec<f64> = breaks.to_vec();
    if pts.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::InvalidArgument("non-finite breakpoint".into()));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Ok(QuadResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        });
    }

    let mut heap = BinaryHeap::with_capacity(pts.len() * 4);
    let mut evaluations = 0usize;
    for w in pts.windows(2) {
        heap.push(gauss_kronrod(&f, w[0], w[1])?);
        evaluations += 15;
    }

    let totals = |heap: &BinaryHeap<Panel>| -> (f64, f64, f64) {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        panels.iter().fold((0.0, 0.0, 0.0), |(v, e, m), p| {
            (v + p.value, e + p.error, m + p.magnitude)
        })
    };
    // Below twice the summed per-panel rounding floor no tolerance is
    // attainable, so that floor caps the target.
    let target = |value: f64, magnitude: f64| {
        cfg.target(value).max(100.0 * f64::EPSILON * magnitude)
    };

    let (mut value, mut error, mut magnitude) = totals(&heap);
    let mut subdivisions = 0usize;
    while error > target(value, magnitude) {
        if subdivisions >= cfg.max_subdivisions {
            return Err(NumericsError::QuadBudgetExceeded {
                best: QuadResult {
                    value,
                    abs_error_estimate: error,
                    evaluations,
                },
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split any further in floating point.
            heap.push(Panel { error: 0.0, ..worst });
            (value, error, magnitude) = totals(&heap);
            if heap.iter().all(|p| p.error == 0.0) {
                break;
            }
            continue;
        }
        let left = gauss_kronrod(&f, worst.a, mid)?;
        let right = gauss_kronrod(&f, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions.is_multiple_of(64) {
            // refresh running sums to keep cancellation from drifting
            (value, error, magnitude) = totals(&heap);
        }
    }
    let (value, error, _) = totals(&heap);
    Ok(QuadResult {
        value,
        abs_error_estimate: error,
        evaluations,
    })
}

/// Like [`integrate`], but a budget overrun yields the best estimate together
/// with `false` instead of an error.
pub(crate) fn integrate_best_effort<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<(QuadResult, bool), NumericsError> {
    match integrate(f, breaks, cfg) {
        Ok(r) => Ok((r, true)),
        Err(NumericsError::QuadBudgetExceeded { best }) => Ok((best, false)),
        Err(e) => Err(e),
    }
}
