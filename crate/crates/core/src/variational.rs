//! Entropy and energy of explicit test functions under a smoothed measure.
//!
//! For any f with ∫f² dμ_δ > 0 and finite energy, the ratio
//! Ent(f²)/∫(f′)² dμ_δ is a lower bound on the optimal log-Sobolev constant
//! of μ_δ. Everything is integrated by adaptive quadrature in t against
//! p_δ(t), with breakpoints at the kinks of f and on the kernel scale around
//! every atom.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measures::{SmoothedMeasure, TAIL_SIGMAS};
use crate::numerics::{integrate_best_effort, QuadConfig};

/// Values of u below this are treated as `tiny` inside u·log u.
const TINY: f64 = 1e-300;

/// Shape of a test function before scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// 0 for x ≤ lo, 1 for x ≥ hi, linear in between.
    Step { lo: f64, hi: f64 },
    /// e^{αx}
    Exponential { alpha: f64 },
    /// Piecewise linear through `knots` (sorted by x), constant outside.
    Table { knots: Vec<(f64, f64)> },
}

/// `amplitude · shape(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub shape: Shape,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl TestFunction {
    pub fn step(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("step needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self {
            shape: Shape::Step { lo, hi },
            amplitude: 1.0,
        })
    }

    /// The ramp from 0 at x = 0 to 1 at x = δ/R with slope R/δ.
    pub fn example_step(r: f64, delta: f64) -> Result<Self> {
        if !(r > 0.0) || !(delta > 0.0) {
            return Err(invalid("example step needs R > 0 and delta > 0"));
        }
        Self::step(0.0, delta / r)
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(invalid(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self {
            shape: Shape::Exponential { alpha },
            amplitude: 1.0,
        })
    }

    pub fn table(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() || knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(invalid("table needs at least one finite knot"));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("table knots must have distinct x"));
        }
        Ok(Self {
            shape: Shape::Table { knots },
            amplitude: 1.0,
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::table(vec![(0.0, c)])
    }

    pub fn scaled(mut self, lambda: f64) -> Self {
        self.amplitude *= lambda;
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        self.amplitude
            * match &self.shape {
                Shape::Step { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
                Shape::Exponential { alpha } => (alpha * x).exp(),
                Shape::Table { knots } => table_value(knots, x),
            }
    }

    /// Almost-everywhere derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        self.amplitude
            * match &self.shape {
                Shape::Step { lo, hi } => {
                    if x > *lo && x < *hi {
                        1.0 / (hi - lo)
                    } else {
                        0.0
                    }
                }
                Shape::Exponential { alpha } => alpha * (alpha * x).exp(),
                Shape::Table { knots } => knots
                    .windows(2)
                    .find(|w| x > w[0].0 && x < w[1].0)
                    .map_or(0.0, |w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)),
            }
    }

    fn kinks(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Step { lo, hi } => vec![*lo, *hi],
            Shape::Exponential { .. } => Vec::new(),
            Shape::Table { knots } => knots.iter().map(|k| k.0).collect(),
        }
    }

    /// Intervals on which f′ is a non-zero constant, with that constant.
    fn linear_pieces(&self) -> Option<Vec<(f64, f64, f64)>> {
        match &self.shape {
            Shape::Step { lo, hi } => Some(vec![(*lo, *hi, self.amplitude / (hi - lo))]),
            Shape::Exponential { .. } => None,
            Shape::Table { knots } => Some(
                knots
                    .windows(2)
                    .map(|w| (w[0].0, w[1].0, self.amplitude * (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
                    .filter(|p| p.2 != 0.0)
                    .collect(),
            ),
        }
    }

    /// Extra reach of the integration window needed by exponential tilts:
    /// under a Gaussian of variance δ, e^{2αx} moves the bulk by 2αδ.
    fn tilt(&self, delta: f64) -> f64 {
        match &self.shape {
            Shape::Exponential { alpha } => 2.0 * alpha.abs() * delta,
            _ => 0.0,
        }
    }
}

fn table_value(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x);
    let (x0, y0) = knots[i - 1];
    let (x1, y1) = knots[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

/// Entropy, energy and their ratio for one test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub entropy: f64,
    pub energy: f64,
    pub ratio: f64,
    pub entropy_error: f64,
    pub energy_error: f64,
}

struct Integrator<'a> {
    m: &'a SmoothedMeasure,
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    cfg: QuadConfig,
}

impl<'a> Integrator<'a> {
    fn new(f: &TestFunction, m: &'a SmoothedMeasure, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        let (a, b) = m.support_hull();
        let reach = TAIL_SIGMAS * m.sd() + f.tilt(m.delta());
        let (lo, hi) = (a - reach, b + reach);
        let mut breaks = vec![lo, hi];
        breaks.extend(m.feature_points());
        breaks.extend(f.kinks());
        // a tilted bulk sits 2αδ away from the atoms
        if f.tilt(m.delta()) > 0.0 {
            let t = f.tilt(m.delta());
            breaks.extend(m.feature_points().iter().flat_map(|&c| [c - t, c + t]));
        }
        breaks.retain(|&x| x >= lo && x <= hi);
        Ok(Self {
            m,
            lo,
            hi,
            breaks,
            cfg: QuadConfig::relative(tol).with_max_subdivisions(2000),
        })
    }

    /// ∫ g(t) p_δ(t) dt over the window.
    fn against_density<G: Fn(f64) -> f64>(&self, g: G) -> Result<Estimate> {
        let (r, _) = integrate_best_effort(
            |t| {
                let v = g(t);
                if v == 0.0 {
                    0.0
                } else {
                    v * self.m.log_density(t).exp()
                }
            },
            &self.breaks,
            &self.cfg,
        )?;
        Ok(Estimate {
            value: r.value,
            abs_error: r.abs_error_estimate,
        })
    }

    /// μ_δ([a, b]) by quadrature of p_δ.
    fn mass(&self, a: f64, b: f64) -> Result<Estimate> {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if !(a < b) {
            return Ok(Estimate {
                value: 0.0,
                abs_error: 0.0,
            });
        }
        let (log_mass, _) = self
            .m
            .log_mass_between(a, b, &self.cfg)
            .map_err(Error::from)?;
        Ok(Estimate {
            value: log_mass.exp(),
            abs_error: log_mass.exp() * self.cfg.rel_tol,
        })
    }
}

/// u·log u with 0·log 0 = 0 exactly.
fn u_log_u(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        let v = u.max(TINY);
        v * v.ln()
    }
}

/// Ent_{μ_δ}(f²) = ∫ f² log(f²/∫f² dμ_δ) dμ_δ, clamped at 0.
pub fn entropy(f: &TestFunction, m: &SmoothedMeasure, tol: f64) -> Result<Estimate> {
    let int = Integrator::new(f, m, tol)?;
    let z = int.against_density(|t| f.value(t).powi(2))?;
    if !(z.value > 0.0) {
        return Err(Error::DegenerateFunction("∫f² dμ vanishes".into()));
    }
    // ∫ z·φ(f²/z) dμ with φ(u) = u log u
    let e = int.against_density(|t| z.value * u_log_u(f.value(t).powi(2) / z.value))?;
    Ok(Estimate {
        value: e.value.max(0.0),
        abs_error: e.abs_error + z.abs_error * (1.0 + z.value.ln().abs()),
    })
}

/// ∫ (f′)² dμ_δ.
pub fn energy(f: &TestFunction, m: &SmoothedMeasure, tol: f64) -> Result<Estimate> {
    let int = Integrator::new(f, m, tol)?;
    match f.linear_pieces() {
        Some(pieces) => {
            let mut total = Estimate {
                value: 0.0,
                abs_error: 0.0,
            };
            for (a, b, slope) in pieces {
                let mass = int.mass(a, b)?;
                total.value += slope * slope * mass.value;
                total.abs_error += slope * slope * mass.abs_error;
            }
            Ok(total)
        }
        None => int.against_density(|t| f.derivative(t).powi(2)),
    }
}

/// Ent(f²)/E(f, f): a lower bound on the optimal log-Sobolev constant.
pub fn ratio_lower_bound(f: &TestFunction, m: &SmoothedMeasure, tol: f64) -> Result<RatioEstimate> {
    let en = energy(f, m, tol)?;
    if !(en.value > 0.0) {
        return Err(Error::DegenerateFunction("energy vanishes".into()));
    }
    let ent = entropy(f, m, tol)?;
    Ok(RatioEstimate {
        entropy: ent.value,
        energy: en.value,
        ratio: ent.value / en.value,
        entropy_error: ent.abs_error,
        energy_error: en.abs_error,
    })
}

/// One-parameter family of test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFamily {
    /// e^{αx}, parameter α.
    Exponential,
    /// Ramp from 0 at t to 1 at t + width, parameter t.
    ShiftedStep { width: f64 },
}

impl TestFamily {
    pub fn member(&self, param: f64) -> Result<TestFunction> {
        match *self {
            TestFamily::Exponential => TestFunction::exponential(param),
            TestFamily::ShiftedStep { width } => TestFunction::step(param, param + width),
        }
    }
}

/// Best member of a parametric family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedRatio {
    pub param: f64,
    pub estimate: RatioEstimate,
    /// Every grid point with its ratio, `None` where the member is degenerate.
    pub grid: Vec<(f64, Option<f64>)>,
}

/// Grid search for the largest ratio. Ties go to the smallest parameter.
pub fn optimize_ratio(
    family: TestFamily,
    m: &SmoothedMeasure,
    params: &[f64],
    tol: f64,
) -> Result<OptimizedRatio> {
    if params.is_empty() {
        return Err(invalid("empty parameter grid"));
    }
    let results: Vec<Result<Option<RatioEstimate>>> = params
        .par_iter()
        .map(|&p| {
            let f = family.member(p)?;
            match ratio_lower_bound(&f, m, tol) {
                Ok(r) => Ok(Some(r)),
                Err(Error::DegenerateFunction(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut grid = Vec::with_capacity(params.len());
    let mut best: Option<(f64, RatioEstimate)> = None;
    for (&p, r) in params.iter().zip(results) {
        let r = r?;
        grid.push((p, r.as_ref().map(|e| e.ratio)));
        if let Some(est) = r {
            let better = match &best {
                None => true,
                Some((bp, be)) => est.ratio > be.ratio || (est.ratio == be.ratio && p < *bp),
            };
            if better {
                best = Some((p, est));
            }
        }
    }
    let (param, estimate) = best.ok_or(Error::NoValidCandidate)?;
    Ok(OptimizedRatio {
        param,
        estimate,
        grid,
    })
}
