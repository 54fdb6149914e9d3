//! Bobkov–Götze functionals of a smoothed measure and the tail inequalities
//! used to bound them.
//!
//! For μ_δ with distribution function F, density p and median m,
//!
//! ```text
//! D₁ = sup_{x > m} (1 − F(x)) · log(1/(1 − F(x))) · ∫ₘˣ 1/p
//! D₀ = sup_{x < m} F(x) · log(1/F(x)) · ∫ₓᵐ 1/p
//! ```
//!
//! and the optimal log-Sobolev constant c satisfies
//! (D₀ + D₁)/150 ≤ c ≤ 468·(D₀ + D₁).
//!
//! D₁ is evaluated on a uniform grid over `[m, x_max]`. The inner integral is
//! accumulated panel by panel (panels in parallel, prefix sums in a fixed
//! order) so that each grid value costs one tail evaluation. The best grid
//! brackets are then refined by golden section. D₀ is D₁ of the reflected
//! measure.
//!
//! Beyond the support the objective does not vanish: it settles towards δ/2.
//! The truncation point therefore only needs to clear the peak, and the
//! window is doubled whenever the maximiser lands in its last bracket.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::SmoothedMeasure;
use crate::numerics::{
    grid, integrate, log_add_exp, log_upper_tail, refine_on_grid, NumericsError, QuadConfig,
    SupConfig, DEFAULT_SUP_TOL, LN_SQRT_2PI,
};

/// Numerical settings for [`bg_functionals_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgConfig {
    /// Target accuracy of the reported functionals.
    pub tol: f64,
    /// Relative tolerance of each panel integral of 1/p.
    pub quad_rel_tol: f64,
    /// Final bracket width of the sup refinement.
    pub sup_tol: f64,
    pub grid_points: usize,
    /// Tail level ε in x_max = max supp + √(2δ log(1/ε)) + √δ. Defaults to
    /// `tol · 1e-3`.
    pub tail_epsilon: Option<f64>,
    /// How many times the window may be doubled.
    pub max_extensions: usize,
    /// Subdivision budget of each panel integral.
    pub max_subdivisions: usize,
}

impl BgConfig {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            quad_rel_tol: (tol * 1e-2).clamp(1e-13, 1e-6),
            sup_tol: DEFAULT_SUP_TOL,
            grid_points: 257,
            tail_epsilon: None,
            max_extensions: 6,
            max_subdivisions: 200,
        }
    }

    pub fn tail_epsilon(&self) -> f64 {
        self.tail_epsilon.unwrap_or(self.tol * 1e-3)
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.quad_rel_tol > 0.0) || !(self.sup_tol > 0.0) {
            return Err(invalid("tolerances must be positive"));
        }
        let eps = self.tail_epsilon();
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("tail epsilon must lie in (0, 1), got {eps}")));
        }
        if self.grid_points < 3 {
            return Err(invalid("sup grid needs at least 3 points"));
        }
        Ok(())
    }
}

impl Default for BgConfig {
    fn default() -> Self {
        Self::new(1e-8)
    }
}

/// Result of a Bobkov–Götze evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgReport {
    pub delta: f64,
    pub d0: f64,
    pub d1: f64,
    pub log_d0: f64,
    pub log_d1: f64,
    pub median: f64,
    /// 468·(D₀ + D₁)
    pub c_upper: f64,
    /// (D₀ + D₁)/150
    pub c_lower: f64,
    pub log_c_upper: f64,
    pub argmax_d0: f64,
    pub argmax_d1: f64,
    pub truncation_x_min: f64,
    pub truncation_x_max: f64,
    pub tolerances: BgConfig,
    /// False when some panel integral or the window search ran out of budget.
    pub converged: bool,
}

struct OneSided {
    log_value: f64,
    argmax: f64,
    x_max: f64,
    converged: bool,
    reason: Option<String>,
}

/// [`bg_functionals_with`] using [`BgConfig::new(tol)`](BgConfig::new).
pub fn bg_functionals(m: &SmoothedMeasure, tol: f64) -> Result<BgReport> {
    bg_functionals_with(m, &BgConfig::new(tol))
}

/// D₀, D₁ and the induced sandwich on the log-Sobolev constant of μ_δ.
///
/// Returns [`Error::BudgetExceeded`] with the best report so far when a panel
/// integral misses its tolerance or the maximiser keeps escaping the window.
pub fn bg_functionals_with(m: &SmoothedMeasure, cfg: &BgConfig) -> Result<BgReport> {
    cfg.validate()?;
    let median = m.median();
    let upper = one_sided(m, median, cfg)?;
    let reflected = m.reflect();
    let lower = one_sided(&reflected, -median, cfg)?;

    let log_sum = log_add_exp(lower.log_value, upper.log_value);
    let (d0, d1) = (lower.log_value.exp(), upper.log_value.exp());
    let total = d0 + d1;
    let report = BgReport {
        delta: m.delta(),
        d0,
        d1,
        log_d0: lower.log_value,
        log_d1: upper.log_value,
        median,
        c_upper: 468.0 * total,
        c_lower: total / 150.0,
        log_c_upper: 468f64.ln() + log_sum,
        argmax_d0: -lower.argmax,
        argmax_d1: upper.argmax,
        truncation_x_min: -lower.x_max,
        truncation_x_max: upper.x_max,
        tolerances: *cfg,
        converged: upper.converged && lower.converged,
    };
    if let Some(reason) = upper.reason.or(lower.reason) {
        return Err(Error::BudgetExceeded {
            reason,
            partial: Box::new(report),
        });
    }
    Ok(report)
}

/// log of (1 − F(x))·log(1/(1 − F(x)))·I given log(1 − F(x)) and log I.
fn log_objective(log_sf: f64, log_integral: f64) -> f64 {
    if !(log_sf < 0.0) || log_integral == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    log_sf + (-log_sf).ln() + log_integral
}

fn one_sided(m: &SmoothedMeasure, median: f64, cfg: &BgConfig) -> Result<OneSided> {
    let (_, hi) = m.support_hull();
    let delta = m.delta();
    let reach = (2.0 * delta * (1.0 / cfg.tail_epsilon()).ln()).sqrt() + m.sd();
    let mut x_max = hi.max(median) + reach;
    let quad = QuadConfig::relative(cfg.quad_rel_tol).with_max_subdivisions(cfg.max_subdivisions);
    let sup_cfg = SupConfig {
        grid_points: cfg.grid_points,
        refine_brackets: 3,
        tol: cfg.sup_tol,
    };

    let mut extensions = 0;
    loop {
        let nodes = grid(median, x_max, cfg.grid_points);
        let panels: Vec<std::result::Result<(f64, bool), NumericsError>> = nodes
            .par_windows(2)
            .map(|w| m.log_integral_inverse_density(w[0], w[1], &quad))
            .collect();
        let mut converged = true;
        let mut log_cum = Vec::with_capacity(nodes.len());
        log_cum.push(f64::NEG_INFINITY);
        for p in panels {
            let (v, ok) = p?;
            converged &= ok;
            let last = *log_cum.last().expect("non-empty");
            log_cum.push(log_add_exp(last, v));
        }
        let values: Vec<f64> = nodes
            .par_iter()
            .zip(log_cum.par_iter())
            .map(|(&x, &li)| log_objective(m.log_sf(x), li))
            .collect();

        let h = (x_max - median) / (cfg.grid_points - 1) as f64;
        let refine_ok = Cell::new(true);
        let objective = |x: f64| -> std::result::Result<f64, NumericsError> {
            if !(x > median) {
                return Ok(f64::NEG_INFINITY);
            }
            let mut k = (((x - median) / h).floor() as usize).min(nodes.len() - 2);
            while k > 0 && nodes[k] > x {
                k -= 1;
            }
            let (part, ok) = m.log_integral_inverse_density(nodes[k], x, &quad)?;
            if !ok {
                refine_ok.set(false);
            }
            Ok(log_objective(m.log_sf(x), log_add_exp(log_cum[k], part)))
        };
        let best = refine_on_grid(objective, &nodes, &values, &sup_cfg)?;
        converged &= refine_ok.get();

        let escaped = best.argmax > nodes[nodes.len() - 2];
        if escaped && extensions < cfg.max_extensions {
            extensions += 1;
            x_max = median + 2.0 * (x_max - median);
            continue;
        }
        let reason = if escaped {
            Some(format!(
                "maximiser still in the last bracket after {extensions} window extensions"
            ))
        } else if !converged {
            Some("an integral of 1/p did not reach its tolerance".to_string())
        } else {
            None
        };
        return Ok(OneSided {
            log_value: best.value,
            argmax: best.argmax,
            x_max,
            converged: reason.is_none(),
            reason,
        });
    }
}

/// One inequality `lhs ≤ rhs` evaluated numerically, in both linear and log
/// form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub log_lhs: f64,
    pub log_rhs: f64,
    /// rhs − lhs
    pub slack: f64,
}

/// rhs − lhs, or an infinity of the sign of log_rhs − log_lhs when both
/// sides overflow.
fn signed_difference(lhs: f64, rhs: f64, log_lhs: f64, log_rhs: f64) -> f64 {
    let d = rhs - lhs;
    if d.is_nan() {
        if log_rhs == log_lhs {
            0.0
        } else {
            f64::INFINITY.copysign(log_rhs - log_lhs)
        }
    } else {
        d
    }
}

impl InequalityCheck {
    fn from_logs(name: &str, log_lhs: f64, log_rhs: f64) -> Self {
        let (lhs, rhs) = (log_lhs.exp(), log_rhs.exp());
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            log_lhs,
            log_rhs,
            slack: signed_difference(lhs, rhs, log_lhs, log_rhs),
        }
    }

    /// 1 − lhs/rhs, computed from the logs.
    pub fn relative_slack(&self) -> f64 {
        if self.log_lhs == f64::NEG_INFINITY {
            return if self.log_rhs == f64::NEG_INFINITY { 0.0 } else { 1.0 };
        }
        -(self.log_lhs - self.log_rhs).exp_m1()
    }

    /// Holds up to `tol`, absolutely or relative to the larger side.
    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol || self.relative_slack() >= -tol
    }
}

/// The three tail inequalities for μ_δ at a point `x ≥ R`, for μ supported
/// in `[−R, R]`:
///
/// 1. `∫ₓ^∞ p ≤ (4/3)·δ/(x − R + √δ)·p(x)`
/// 2. `√δ/(√(2π)(x + R + √δ))·exp(−(x + R)²/2δ) ≤ ∫ₓ^∞ p`
/// 3. `∫_Rˣ 1/p ≤ 2δ(x − R)/(((x − R)² + δ)·p(x))`
pub fn verify_tail_lemmas(m: &SmoothedMeasure, x: f64, tol: f64) -> Result<[InequalityCheck; 3]> {
    let r = m.radius();
    if !m.base().is_centered() {
        return Err(invalid("tail inequalities need the support inside [-R, R]"));
    }
    if !(x >= r) || !x.is_finite() {
        return Err(invalid(format!("tail inequalities need x >= R = {r}, got {x}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let delta = m.delta();
    let sd = m.sd();
    let log_p = m.log_density(x);
    let log_sf = m.log_sf(x);

    let upper_tail = InequalityCheck::from_logs(
        "tail_upper",
        log_sf,
        (4.0 / 3.0 * delta / (x - r + sd)).ln() + log_p,
    );
    let z = (x + r) / sd;
    let lower_tail = InequalityCheck::from_logs(
        "tail_lower",
        sd.ln() - LN_SQRT_2PI - (x + r + sd).ln() - 0.5 * z * z,
        log_sf,
    );
    let quad = QuadConfig::relative((tol * 1e-2).clamp(1e-13, 1e-6)).with_max_subdivisions(400);
    let (log_inv, _) = m.log_integral_inverse_density(r, x, &quad)?;
    let d = x - r;
    let log_rhs = if d > 0.0 {
        (2.0 * delta * d / (d * d + delta)).ln() - log_p
    } else {
        f64::NEG_INFINITY
    };
    let inverse = InequalityCheck::from_logs("inverse_density", log_inv, log_rhs);
    Ok([upper_tail, lower_tail, inverse])
}

/// The two standard-Gaussian inequalities for `x ≥ 0`:
///
/// 1. `e^{−x²/2}/(x + 1) ≤ ∫ₓ^∞ e^{−u²/2} du`
/// 2. `∫₀ˣ e^{u²/2} du ≤ 2x/(x² + 1)·e^{x²/2}`
///
/// Both are compared in log form so that large `x` is safe.
pub fn verify_gaussian_lemma(x: f64) -> Result<[InequalityCheck; 2]> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("Gaussian inequalities need x >= 0, got {x}")));
    }
    let half_sq = 0.5 * x * x;
    let tail = InequalityCheck::from_logs(
        "gaussian_tail",
        -half_sq - (x + 1.0).ln(),
        LN_SQRT_2PI + log_upper_tail(x),
    );
    let growth = if x == 0.0 {
        InequalityCheck::from_logs("gaussian_growth", f64::NEG_INFINITY, f64::NEG_INFINITY)
    } else {
        // ∫₀ˣ e^{(u² − x²)/2} du, integrand peaked at u = x with width 1/x
        let w = (1.0 / x).min(x);
        let mut breaks = vec![0.0, x];
        for k in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let p = x - k * w;
            if p > 0.0 {
                breaks.push(p);
            }
        }
        let j = integrate(
            |u| (-0.5 * (x - u) * (x + u)).exp(),
            &breaks,
            &QuadConfig::relative(1e-14),
        )?;
        InequalityCheck::from_logs(
            "gaussian_growth",
            half_sq + j.value.ln(),
            half_sq + (2.0 * x / (x * x + 1.0)).ln(),
        )
    };
    Ok([tail, growth])
}
