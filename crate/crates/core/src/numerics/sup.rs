//! Bounded supremum search: a coarse grid followed by golden-section
//! refinement of the most promising brackets.
//!
//! The objectives this crate maximises are smooth but may have long flat
//! shoulders, so no unimodality is assumed on the whole interval.

use serde::{Deserialize, Serialize};

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub argmax: f64,
    pub value: f64,
    pub bracket_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupConfig {
    /// Number of grid nodes including both endpoints (at least 256).
    pub grid_points: usize,
    /// How many of the best grid brackets get refined.
    pub refine_brackets: usize,
    /// Final bracket width.
    pub tol: f64,
}

impl SupConfig {
    pub fn new(tol: f64) -> Self {
        Self {
            grid_points: 257,
            refine_brackets: 3,
            tol,
        }
    }
}

impl Default for SupConfig {
    fn default() -> Self {
        Self::new(super::DEFAULT_SUP_TOL)
    }
}

/// Maximise `g` over `[a, b]` with the default grid.
pub fn sup_search<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<SupResult, NumericsError> {
    sup_search_with(g, a, b, &SupConfig::new(tol))
}

pub fn sup_search_with<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    b: f64,
    cfg: &SupConfig,
) -> Result<SupResult, NumericsError> {
    let checked = |x: f64| {
        let v = g(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericsError::EvaluationFailure { at: x, value: v })
        }
    };
    validate(a, b, cfg)?;
    let nodes = grid(a, b, cfg.grid_points);
    let values = nodes.iter().map(|&x| checked(x)).collect::<Result<Vec<_>, _>>()?;
    refine_on_grid(checked, &nodes, &values, cfg)
}

pub(crate) fn validate(a: f64, b: f64, cfg: &SupConfig) -> Result<(), NumericsError> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(NumericsError::InvalidArgument(format!(
            "need finite a < b, got [{a}, {b}]"
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "tol must be > 0, got {}",
            cfg.tol
        )));
    }
    if cfg.grid_points < 3 {
        return Err(NumericsError::InvalidArgument("grid needs at least 3 points".into()));
    }
    Ok(())
}

/// Uniform grid with exact endpoints.
pub(crate) fn grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    let h = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|k| if k + 1 == points { b } else { a + h * k as f64 })
        .collect()
}

/// Refine the best `cfg.refine_brackets` grid nodes. `values[k]` must equal
/// `g(nodes[k])`; `-inf` is accepted there as "below everything".
pub(crate) fn refine_on_grid<G>(
    g: G,
    nodes: &[f64],
    values: &[f64],
    cfg: &SupConfig,
) -> Result<SupResult, NumericsError>
where
    G: Fn(f64) -> Result<f64, NumericsError>,
{
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    // Stable sort keeps the smallest index first among ties.
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let mut best = SupResult {
        argmax: nodes[order[0]],
        value: values[order[0]],
        bracket_width: nodes[1] - nodes[0],
    };
    let mut refined: Vec<usize> = Vec::new();
    for &k in order.iter() {
        if refined.len() >= cfg.refine_brackets {
            break;
        }
        // skip nodes inside an already refined bracket
        if refined.iter().any(|&r| r.abs_diff(k) <= 1) {
            continue;
        }
        refined.push(k);
        let lo = nodes[k.saturating_sub(1)];
        let hi = nodes[(k + 1).min(nodes.len() - 1)];
        let r = golden_section_max(&g, lo, hi, cfg.tol)?;
        let candidate = if r.value > values[k] {
            r
        } else {
            SupResult {
                argmax: nodes[k],
                value: values[k],
                bracket_width: r.bracket_width,
            }
        };
        if candidate.value > best.value
            || (candidate.value == best.value && best.bracket_width > cfg.tol)
        {
            best = candidate;
        }
    }
    Ok(best)
}

/// Golden-section maximisation on `[lo, hi]` down to width `tol`.
pub fn golden_section_max<G>(g: G, lo: f64, hi: f64, tol: f64) -> Result<SupResult, NumericsError>
where
    G: Fn(f64) -> Result<f64, NumericsError>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    while b - a > tol {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            if !(c > a && c < d) {
                break;
            }
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            if !(d > c && d < b) {
                break;
            }
            gd = g(d)?;
        }
    }
    let (argmax, value) = if gc >= gd { (c, gc) } else { (d, gd) };
    Ok(SupResult {
        argmax,
        value,
        bracket_width: b - a,
    })
}
