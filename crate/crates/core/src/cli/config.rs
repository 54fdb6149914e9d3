//! Resolved run configurations.
//!
//! A [`RunConfig`] holds everything a run depends on, with measure and
//! ensemble files inlined, so that the copy embedded in every output file is
//! enough to repeat the run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::args::{
    BgArgs, BgTuning, BoundArgs, CliCommand, Estimator, FamilyArg, Format, LemmasArgs, LowerArgs, RmtArgs,
    StatArg, SweepArgs,
};
use crate::bg::BgConfig;
use crate::error::{invalid, Result};
use crate::measures::{Measure1D, MeasureSpec};
use crate::rmt::{EnsembleConfig, LipschitzFn};
use crate::variational::TestFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub format: Format,
    #[serde(flatten)]
    pub command: Command,
}

impl RunConfig {
    pub fn seed(&self) -> Option<u64> {
        match &self.command {
            Command::Rmt { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Bound { .. } => "bound",
            Command::Bg { .. } => "bg",
            Command::Lower { .. } => "lower",
            Command::Lemmas { .. } => "lemmas",
            Command::GaussianLemmas { .. } => "lemmas",
            Command::Rmt { .. } => "rmt",
            Command::Sweep { .. } => "sweep",
        }
    }

    /// Checks the invariants that hold for every resolved configuration.
    pub fn validate(&self) -> Result<()> {
        match &self.command {
            Command::Bound { r, delta, n, a } => {
                nonempty("R", r)?;
                positive("delta", delta)?;
                positive("R", r)?;
                if n.is_empty() || n.contains(&0) {
                    return Err(invalid("n must be a nonempty list of positive integers"));
                }
                positive("a", a)
            }
            Command::Bg { measure, delta, numerics } | Command::Sweep { measure, deltas: delta, numerics, .. } => {
                Measure1D::from_spec(measure)?;
                positive("delta", delta)?;
                positive_scalar("tol", numerics.tol)?;
                if numerics.grid_points < 3 {
                    return Err(invalid("sup grid needs at least 3 points"));
                }
                if let Some(eps) = numerics.tail_epsilon {
                    if !(eps > 0.0 && eps < 1.0) {
                        return Err(invalid(format!("tail epsilon must lie in (0, 1), got {eps}")));
                    }
                }
                Ok(())
            }
            Command::Lower { measure, delta, params, tol, family } => {
                Measure1D::from_spec(measure)?;
                positive("delta", delta)?;
                nonempty("params", params)?;
                if let FamilySpec::Step { width: Some(w) } = family {
                    positive_scalar("width", *w)?;
                }
                positive_scalar("tol", *tol)
            }
            Command::Lemmas { measure, delta, x, tol } => {
                Measure1D::from_spec(measure)?;
                positive("delta", delta)?;
                if let Some(x) = x {
                    nonempty("x", x)?;
                }
                positive_scalar("tol", *tol)
            }
            Command::GaussianLemmas { x } => nonempty("x", x),
            Command::Rmt { ensemble, trials, eps, .. } => {
                ensemble.resolve()?;
                if *trials < 2 {
                    return Err(invalid("need at least two trials"));
                }
                positive("eps", eps)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Bound {
        #[serde(rename = "R")]
        r: Vec<f64>,
        delta: Vec<f64>,
        n: Vec<u32>,
        a: Vec<f64>,
    },
    Bg {
        measure: MeasureSpec,
        delta: Vec<f64>,
        numerics: BgConfig,
    },
    Lower {
        measure: MeasureSpec,
        delta: Vec<f64>,
        family: FamilySpec,
        params: Vec<f64>,
        tol: f64,
    },
    Lemmas {
        measure: MeasureSpec,
        delta: Vec<f64>,
        /// `None`: 25 points on [R, R + 6√δ] for each δ.
        x: Option<Vec<f64>>,
        tol: f64,
    },
    GaussianLemmas {
        x: Vec<f64>,
    },
    Rmt {
        ensemble: EnsembleConfig,
        trials: usize,
        seed: u64,
        statistic: LipschitzFn,
        eps: Vec<f64>,
        lsi_constant: Option<f64>,
    },
    Sweep {
        measure: MeasureSpec,
        deltas: Vec<f64>,
        estimator: Estimator,
        n: u32,
        numerics: BgConfig,
    },
}

/// Test-function family as recorded in a configuration; the step width may
/// be left to default to δ/R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Exponential,
    Step { width: Option<f64> },
}

impl FamilySpec {
    pub fn family(&self, r: f64, delta: f64) -> TestFamily {
        match *self {
            FamilySpec::Exponential => TestFamily::Exponential,
            FamilySpec::Step { width } => TestFamily::ShiftedStep {
                width: width.unwrap_or(delta / r),
            },
        }
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(invalid(format!("{name} grid is empty")));
    }
    Ok(())
}

fn positive_scalar(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn positive(name: &str, v: &[f64]) -> Result<()> {
    v.iter().try_for_each(|&x| positive_scalar(name, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Parses `a,b,c` or `start:stop:count`.
pub fn parse_grid(s: &str, spacing: Spacing) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(invalid(format!("grid `{s}` is not start:stop:count")));
        }
        let start = parse_f64(parts[0])?;
        let stop = parse_f64(parts[1])?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad grid count `{}`", parts[2])))?;
        if count == 0 {
            return Err(invalid("grid count must be positive"));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let last = (count - 1) as f64;
        return match spacing {
            Spacing::Linear => Ok((0..count)
                .map(|i| if i + 1 == count { stop } else { start + (stop - start) * i as f64 / last })
                .collect()),
            Spacing::Geometric => {
                if !(start > 0.0 && stop > 0.0) {
                    return Err(invalid(format!("geometric grid `{s}` needs positive endpoints")));
                }
                let ratio = (stop / start).ln();
                Ok((0..count)
                    .map(|i| if i + 1 == count { stop } else { start * (ratio * i as f64 / last).exp() })
                    .collect())
            }
        };
    }
    let v: Vec<f64> = s.split(',').map(parse_f64).collect::<Result<_>>()?;
    nonempty("list", &v)?;
    Ok(v)
}

fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    let v: f64 = s.parse().map_err(|_| invalid(format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(format!("`{s}` is not finite")));
    }
    Ok(v)
}

fn parse_dims(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| invalid(format!("bad dimension `{p}`"))))
        .collect()
}

fn bg_config(t: &BgTuning) -> BgConfig {
    BgConfig {
        grid_points: t.grid_points,
        max_extensions: t.max_extensions,
        max_subdivisions: t.max_subdivisions,
        tail_epsilon: t.tail_epsilon,
        ..BgConfig::new(t.tol)
    }
}

fn read_measure(path: &Path) -> Result<MeasureSpec> {
    let spec: MeasureSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Measure1D::from_spec(&spec)?;
    Ok(spec)
}

/// Resolves parsed arguments into a configuration. `None` for `replay`.
pub fn resolve(command: &CliCommand, format: Format) -> Result<Option<RunConfig>> {
    let command = match command {
        CliCommand::Bound(BoundArgs { r, delta, n, a }) => Command::Bound {
            r: parse_grid(r, Spacing::Linear)?,
            delta: parse_grid(delta, Spacing::Geometric)?,
            n: parse_dims(n)?,
            a: match a {
                Some(a) => parse_grid(a, Spacing::Linear)?,
                None => Vec::new(),
            },
        },
        CliCommand::Bg(BgArgs { measure, delta, numerics }) => Command::Bg {
            measure: read_measure(measure)?,
            delta: parse_grid(delta, Spacing::Geometric)?,
            numerics: bg_config(numerics),
        },
        CliCommand::Lower(LowerArgs { measure, delta, family, params, width, tol }) => {
            let (family, default_params) = match family {
                FamilyArg::Exp => (FamilySpec::Exponential, "0.25,0.5,1"),
                FamilyArg::Step => (FamilySpec::Step { width: *width }, "0"),
            };
            Command::Lower {
                measure: read_measure(measure)?,
                delta: parse_grid(delta, Spacing::Geometric)?,
                family,
                params: parse_grid(params.as_deref().unwrap_or(default_params), Spacing::Linear)?,
                tol: *tol,
            }
        }
        CliCommand::Lemmas(LemmasArgs { gaussian: true, x, .. }) => Command::GaussianLemmas {
            x: parse_grid(x.as_deref().unwrap_or("0:40:81"), Spacing::Linear)?,
        },
        CliCommand::Lemmas(LemmasArgs { measure, delta, x, tol, .. }) => Command::Lemmas {
            measure: read_measure(measure.as_deref().ok_or_else(|| invalid("--measure is required"))?)?,
            delta: parse_grid(
                delta.as_deref().ok_or_else(|| invalid("--delta is required"))?,
                Spacing::Geometric,
            )?,
            x: x.as_deref().map(|x| parse_grid(x, Spacing::Linear)).transpose()?,
            tol: *tol,
        },
        CliCommand::Rmt(RmtArgs { ensemble, trials, seed, stat, eps, lsi_constant }) => Command::Rmt {
            ensemble: serde_json::from_str(&std::fs::read_to_string(ensemble)?)?,
            trials: *trials,
            seed: *seed,
            statistic: match stat {
                StatArg::Identity => LipschitzFn::Identity,
                StatArg::Abs => LipschitzFn::Abs,
            },
            eps: match eps {
                Some(e) => parse_grid(e, Spacing::Geometric)?,
                None => Vec::new(),
            },
            lsi_constant: *lsi_constant,
        },
        CliCommand::Sweep(SweepArgs { measure, deltas, estimator, n, numerics }) => Command::Sweep {
            measure: read_measure(measure)?,
            deltas: parse_grid(deltas, Spacing::Geometric)?,
            estimator: *estimator,
            n: *n,
            numerics: bg_config(numerics),
        },
        CliCommand::Replay(_) => return Ok(None),
    };
    let cfg = RunConfig { format, command };
    cfg.validate()?;
    Ok(Some(cfg))
}

/// Reads a configuration from a JSON output file (its `config` field) or a
/// bare configuration.
pub fn read_config(path: &Path) -> Result<RunConfig> {
    let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    let cfg: RunConfig = serde_json::from_value(value)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1, 2,3.5", Spacing::Linear).unwrap(), vec![1.0, 2.0, 3.5]);
        assert_eq!(parse_grid("0:1:5", Spacing::Linear).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = parse_grid("0.05:0.5:10", Spacing::Geometric).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!((g[0], g[9]), (0.05, 0.5));
        let r = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
        assert!(parse_grid("0:1:5", Spacing::Geometric).is_err());
        assert!(parse_grid("1:2", Spacing::Linear).is_err());
        assert!(parse_grid("", Spacing::Linear).is_err());
        assert!(parse_grid("1,x", Spacing::Linear).is_err());
        assert!(parse_grid("1:2:0", Spacing::Linear).is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig {
            format: Format::Csv,
            command: Command::Lower {
                measure: Measure1D::two_point(1.0).unwrap().to_spec().unwrap(),
                delta: vec![0.5],
                family: FamilySpec::Step { width: None },
                params: vec![0.0],
                tol: 1e-8,
            },
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn validation() {
        let bad = RunConfig {
            format: Format::Json,
            command: Command::Bound { r: vec![1.0], delta: vec![-1.0], n: vec![1], a: vec![] },
        };
        assert!(bad.validate().is_err());
        let empty = RunConfig {
            format: Format::Json,
            command: Command::GaussianLemmas { x: vec![] },
        };
        assert!(empty.validate().is_err());
    }
}
