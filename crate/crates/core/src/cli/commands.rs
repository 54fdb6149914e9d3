//! Execution of resolved configurations.

use rayon::prelude::*;
use serde::Serialize;

use super::args::Estimator;
use super::config::{Command, FamilySpec, RunConfig};
use super::output::{Cell, Outcome};
use crate::bg::{bg_functionals_with, verify_gaussian_lemma, verify_tail_lemmas, BgConfig, BgReport, InequalityCheck};
use crate::bounds::{cgw_chain, thm_1d_bound, thm_nd_bound, two_point_bounds, uniform_density_bound, BoundValue};
use crate::error::{Error, Result};
use crate::measures::{Measure1D, MeasureSpec};
use crate::numerics::least_squares_line;
use crate::rmt::{concentration_experiment, EnsembleConfig, LipschitzFn, TrialRecord};
use crate::variational::{optimize_ratio, ratio_lower_bound, RatioEstimate, TestFunction};

/// Threshold below which an inequality's slack counts as a violation.
pub const HOLD_TOL: f64 = 1e-8;

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Bound { r, delta, n, a } => bound(r, delta, n, a),
        Command::Bg { measure, delta, numerics } => bg(measure, delta, numerics),
        Command::Lower { measure, delta, family, params, tol } => lower(measure, delta, family, params, *tol),
        Command::Lemmas { measure, delta, x, tol } => lemmas(measure, delta, x.as_deref(), *tol),
        Command::GaussianLemmas { x } => gaussian_lemmas(x),
        Command::Rmt { ensemble, trials, seed, statistic, eps, lsi_constant } => {
            rmt(ensemble, *trials, *seed, statistic, eps, *lsi_constant)
        }
        Command::Sweep { measure, deltas, estimator, n, numerics } => sweep(measure, deltas, *estimator, *n, numerics),
    }
}

/// Drops cells whose preconditions do not hold.
fn applicable<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::InvalidArgument(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Serialize)]
struct BoundRow {
    #[serde(rename = "R")]
    r: f64,
    delta: f64,
    n: Option<u32>,
    a: Option<f64>,
    bound_name: &'static str,
    log_value: f64,
    value: Option<f64>,
}

fn bound(rs: &[f64], deltas: &[f64], ns: &[u32], avals: &[f64]) -> Result<Outcome> {
    let cells: Vec<(f64, f64)> = rs.iter().flat_map(|&r| deltas.iter().map(move |&d| (r, d))).collect();
    let per_cell: Vec<Result<Vec<BoundRow>>> = cells
        .par_iter()
        .map(|&(r, delta)| {
            let mut rows = Vec::new();
            let mut push = |name, n, a, v: BoundValue| {
                rows.push(BoundRow { r, delta, n, a, bound_name: name, log_value: v.log_value, value: v.value })
            };
            if let Some(b) = applicable(thm_1d_bound(r, delta))? {
                push("thm_1d_general", None, None, b.general);
                if let Some(s) = b.small_delta {
                    push("thm_1d_small_delta", None, None, s);
                }
            }
            if let Some(tp) = applicable(two_point_bounds(r, delta))? {
                push("two_point_lower", None, None, tp.lower);
                push("two_point_upper", None, None, tp.upper);
            }
            for &a in avals {
                if let Some(v) = applicable(uniform_density_bound(r, a, delta))? {
                    push("uniform_density", None, Some(a), v);
                }
            }
            for &n in ns {
                if let Some(v) = applicable(thm_nd_bound(r, delta, n))? {
                    push("thm_nd", Some(n), None, v);
                }
                if let Some(c) = applicable(cgw_chain(r, delta, n))? {
                    push("cgw_lsi_chain", Some(n), None, c.lsi_bound_chain);
                    push("cgw_c_p", Some(n), None, c.c_p_relaxed);
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for cell in per_cell {
        rows.extend(cell?);
    }
    let table = rows
        .iter()
        .map(|b| {
            vec![
                b.r.into(),
                b.delta.into(),
                b.n.map_or(Cell::Empty, |n| Cell::Int(n.into())),
                b.a.map_or(Cell::Empty, Cell::Num),
                b.bound_name.into(),
                b.log_value.into(),
                b.value.into(),
            ]
        })
        .collect();
    Outcome::new(vec!["R", "delta", "n", "a", "bound_name", "log_value", "value"], table, &rows)
}

/// Report or, on budget overrun, the partial report.
fn bg_cell(m: &Measure1D, delta: f64, cfg: &BgConfig) -> Result<BgReport> {
    match bg_functionals_with(&m.smooth(delta)?, cfg) {
        Err(Error::BudgetExceeded { partial, .. }) => Ok(*partial),
        other => other,
    }
}

fn bg(spec: &MeasureSpec, deltas: &[f64], cfg: &BgConfig) -> Result<Outcome> {
    let m = Measure1D::from_spec(spec)?;
    let reports: Vec<BgReport> = deltas
        .par_iter()
        .map(|&d| bg_cell(&m, d, cfg))
        .collect::<Result<_>>()?;
    let table = reports
        .iter()
        .map(|b| {
            vec![
                b.delta.into(),
                b.d0.into(),
                b.d1.into(),
                b.log_d0.into(),
                b.log_d1.into(),
                b.median.into(),
                b.c_lower.into(),
                b.c_upper.into(),
                b.log_c_upper.into(),
                b.argmax_d0.into(),
                b.argmax_d1.into(),
                b.truncation_x_min.into(),
                b.truncation_x_max.into(),
                b.converged.into(),
            ]
        })
        .collect();
    let mut out = Outcome::new(
        vec![
            "delta", "d0", "d1", "log_d0", "log_d1", "median", "c_lower", "c_upper", "log_c_upper",
            "argmax_d0", "argmax_d1", "x_min", "x_max", "converged",
        ],
        table,
        &reports,
    )?;
    out.partial = reports.iter().any(|r| !r.converged);
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
struct LowerRow {
    delta: f64,
    family: &'static str,
    param: f64,
    width: Option<f64>,
    #[serde(flatten)]
    estimate: RatioEstimate,
    grid: Vec<(f64, Option<f64>)>,
}

fn lower(spec: &MeasureSpec, deltas: &[f64], family: &FamilySpec, params: &[f64], tol: f64) -> Result<Outcome> {
    let m = Measure1D::from_spec(spec)?;
    let rows: Vec<LowerRow> = deltas
        .par_iter()
        .map(|&delta| -> Result<LowerRow> {
            let fam = family.family(m.radius(), delta);
            let best = optimize_ratio(fam, &m.smooth(delta)?, params, tol)?;
            let (name, width) = match fam {
                crate::variational::TestFamily::Exponential => ("exp", None),
                crate::variational::TestFamily::ShiftedStep { width } => ("step", Some(width)),
            };
            Ok(LowerRow { delta, family: name, param: best.param, width, estimate: best.estimate, grid: best.grid })
        })
        .collect::<Result<_>>()?;
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.delta.into(),
                r.family.into(),
                r.param.into(),
                r.width.map_or(Cell::Empty, Cell::Num),
                r.estimate.entropy.into(),
                r.estimate.energy.into(),
                r.estimate.ratio.into(),
                r.estimate.entropy_error.into(),
                r.estimate.energy_error.into(),
            ]
        })
        .collect();
    Outcome::new(
        vec!["delta", "family", "param", "width", "entropy", "energy", "ratio", "entropy_error", "energy_error"],
        table,
        &rows,
    )
}

#[derive(Debug, Clone, Serialize)]
struct LemmaRow {
    delta: Option<f64>,
    x: f64,
    #[serde(flatten)]
    check: InequalityCheck,
    relative_slack: f64,
    holds: bool,
}

impl LemmaRow {
    fn new(delta: Option<f64>, x: f64, check: InequalityCheck) -> Self {
        Self { delta, x, relative_slack: check.relative_slack(), holds: check.holds(HOLD_TOL), check }
    }
}

fn lemma_outcome(rows: Vec<LemmaRow>) -> Result<Outcome> {
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.delta.map_or(Cell::Empty, Cell::Num),
                r.x.into(),
                r.check.name.as_str().into(),
                r.check.lhs.into(),
                r.check.rhs.into(),
                r.check.log_lhs.into(),
                r.check.log_rhs.into(),
                r.check.slack.into(),
                r.relative_slack.into(),
                r.holds.into(),
            ]
        })
        .collect();
    Outcome::new(
        vec!["delta", "x", "name", "lhs", "rhs", "log_lhs", "log_rhs", "slack", "relative_slack", "holds"],
        table,
        &rows,
    )
}

fn lemmas(spec: &MeasureSpec, deltas: &[f64], xs: Option<&[f64]>, tol: f64) -> Result<Outcome> {
    let m = Measure1D::from_spec(spec)?;
    let r = m.radius();
    let cells: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| {
            let points: Vec<f64> = match xs {
                Some(xs) => xs.to_vec(),
                None => (0..25).map(|i| r + 6.0 * d.sqrt() * i as f64 / 24.0).collect(),
            };
            points.into_iter().map(move |x| (d, x))
        })
        .collect();
    let per_cell: Vec<Result<[InequalityCheck; 3]>> = cells
        .par_iter()
        .map(|&(d, x)| verify_tail_lemmas(&m.smooth(d)?, x, tol))
        .collect();
    let mut rows = Vec::new();
    for (&(d, x), checks) in cells.iter().zip(per_cell) {
        rows.extend(checks?.into_iter().map(|c| LemmaRow::new(Some(d), x, c)));
    }
    lemma_outcome(rows)
}

fn gaussian_lemmas(xs: &[f64]) -> Result<Outcome> {
    let per_x: Vec<Result<[InequalityCheck; 2]>> = xs.par_iter().map(|&x| verify_gaussian_lemma(x)).collect();
    let mut rows = Vec::new();
    for (&x, checks) in xs.iter().zip(per_x) {
        rows.extend(checks?.into_iter().map(|c| LemmaRow::new(None, x, c)));
    }
    lemma_outcome(rows)
}

fn rmt(
    ensemble: &EnsembleConfig,
    trials: usize,
    seed: u64,
    statistic: &LipschitzFn,
    eps: &[f64],
    lsi_constant: Option<f64>,
) -> Result<Outcome> {
    let exp = ensemble.resolve()?;
    let mut summary = concentration_experiment(&exp, statistic, trials, seed, eps, lsi_constant)?;
    // records go to the table; the summary keeps only aggregates
    let records: Vec<TrialRecord> = std::mem::take(&mut summary.records);
    let table = records
        .iter()
        .map(|r| {
            vec![
                r.trial.into(),
                r.seed.into(),
                r.statistic.into(),
                r.raw_statistic.into(),
                r.ks_distance.into(),
            ]
        })
        .collect();
    Outcome::new(vec!["trial", "seed", "statistic", "raw_statistic", "ks_distance"], table, &records)?
        .with_extra("summary", &summary)
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    delta: f64,
    inv_delta: f64,
    log_estimate: f64,
    estimate: Option<f64>,
    converged: bool,
}

/// Least-squares fits of the log estimate against 1/δ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthFit {
    /// d log c / d(1/δ)
    pub slope: f64,
    pub intercept: f64,
    /// Slope after removing the δ^{3/2} prefactor: fit of log c − 1.5·log δ.
    pub adjusted_slope: f64,
    pub adjusted_intercept: f64,
}

pub fn growth_fit(deltas: &[f64], log_estimates: &[f64]) -> Result<GrowthFit> {
    let inv: Vec<f64> = deltas.iter().map(|d| 1.0 / d).collect();
    let (slope, intercept) = least_squares_line(&inv, log_estimates)?;
    let adjusted: Vec<f64> = deltas.iter().zip(log_estimates).map(|(d, l)| l - 1.5 * d.ln()).collect();
    let (adjusted_slope, adjusted_intercept) = least_squares_line(&inv, &adjusted)?;
    Ok(GrowthFit { slope, intercept, adjusted_slope, adjusted_intercept })
}

fn sweep(spec: &MeasureSpec, deltas: &[f64], estimator: Estimator, n: u32, cfg: &BgConfig) -> Result<Outcome> {
    let m = Measure1D::from_spec(spec)?;
    let r = m.radius();
    let rows: Vec<SweepRow> = deltas
        .par_iter()
        .map(|&delta| -> Result<SweepRow> {
            let (log_estimate, converged) = match estimator {
                Estimator::Bg => {
                    let b = bg_cell(&m, delta, cfg)?;
                    (b.log_c_upper, b.converged)
                }
                Estimator::Lower => {
                    let f = TestFunction::example_step(r, delta)?;
                    (ratio_lower_bound(&f, &m.smooth(delta)?, cfg.tol)?.ratio.ln(), true)
                }
                Estimator::Nd => (thm_nd_bound(r, delta, n)?.log_value, true),
            };
            let v = BoundValue::from_log(log_estimate);
            Ok(SweepRow { delta, inv_delta: 1.0 / delta, log_estimate, estimate: v.value, converged })
        })
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = rows.iter().map(|r| r.log_estimate).collect();
    let fit = if deltas.len() >= 2 { Some(growth_fit(deltas, &logs)?) } else { None };
    let table = rows
        .iter()
        .map(|r| {
            vec![r.delta.into(), r.inv_delta.into(), r.log_estimate.into(), r.estimate.into(), r.converged.into()]
        })
        .collect();
    let mut out = Outcome::new(vec!["delta", "inv_delta", "log_estimate", "estimate", "converged"], table, &rows)?
        .with_extra("fit", &fit)?;
    out.partial = rows.iter().any(|r| !r.converged);
    Ok(out)
}
