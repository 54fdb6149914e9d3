//! Monte Carlo concentration experiments on smoothed ensembles.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{sample_matrix, smooth_matrix, truncate_entries, EnsembleSpec, EntryLaw, PartitionSpec};
use super::schedule::{delta_schedule, practical_schedule};
use super::spectral::{lipschitz_statistic, semicircle_distance, LipschitzFn, SpectralSample};
use crate::bounds::{ensemble_lsi_constant, guionnet_tail, BoundValue};
use crate::error::{invalid, Result};

/// How the smoothing variance δ is chosen for a given matrix size.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaPolicy {
    #[default]
    None,
    Fixed { delta: f64 },
    /// scale·d_n/log n
    Practical { scale: f64 },
    /// 5R²d_n/(log(n/(KR²)) − 21d_n); an error where it is undefined.
    Schedule {
        #[serde(rename = "K", default = "default_k")]
        k: f64,
    },
}

fn default_k() -> f64 {
    289.0
}

impl DeltaPolicy {
    pub fn resolve(&self, n: usize, d_n: usize, law: &EntryLaw) -> Result<f64> {
        match *self {
            DeltaPolicy::None => Ok(0.0),
            DeltaPolicy::Fixed { delta } => {
                if !(delta >= 0.0) || !delta.is_finite() {
                    return Err(invalid(format!("delta must be non-negative, got {delta}")));
                }
                Ok(delta)
            }
            DeltaPolicy::Practical { scale } => practical_schedule(n as f64, d_n as f64, scale),
            DeltaPolicy::Schedule { k } => {
                let r = law
                    .support_radius()
                    .ok_or_else(|| invalid("the delta schedule needs a bounded entry law"))?;
                delta_schedule(n as f64, d_n as f64, r, k).ok_or_else(|| {
                    invalid(format!("delta schedule is undefined at n = {n}, d_n = {d_n}"))
                })
            }
        }
    }
}

/// JSON ensemble description.
///
/// ```json
/// {"n": 200, "entry_law": {"kind": "two_point", "R": 1.0},
///  "partition": {"kind": "replicated_blocks", "d_n": 2},
///  "delta": {"kind": "practical", "scale": 0.5}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub entry_law: EntryLaw,
    #[serde(default = "independent")]
    pub partition: PartitionSpec,
    #[serde(default)]
    pub delta: DeltaPolicy,
    /// Entries deviating from their mean by more than this are replaced by
    /// the mean before smoothing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

fn independent() -> PartitionSpec {
    PartitionSpec::Independent
}

impl EnsembleConfig {
    pub fn resolve(&self) -> Result<Experiment> {
        let ensemble = EnsembleSpec::from_partition_spec(self.n, self.entry_law, &self.partition)?;
        let delta = self.delta.resolve(self.n, ensemble.d_n, &self.entry_law)?;
        if let Some(c) = self.cutoff {
            if !(c >= 0.0) {
                return Err(invalid(format!("cutoff must be non-negative, got {c}")));
            }
        }
        Ok(Experiment {
            ensemble,
            delta,
            cutoff: self.cutoff,
        })
    }
}

/// A fully resolved sampling pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub ensemble: EnsembleSpec,
    pub delta: f64,
    pub cutoff: Option<f64>,
}

impl Experiment {
    /// σ of the limiting semicircle: entry variance plus smoothing variance.
    pub fn semicircle_sigma(&self) -> f64 {
        (self.ensemble.entry_law.variance() + self.delta).sqrt()
    }

    /// Y before smoothing (after the cutoff, if any).
    pub fn raw_matrix(&self, seed: u64, trial: u64) -> Result<DMatrix<f64>> {
        let y = sample_matrix(&self.ensemble, seed, trial);
        match self.cutoff {
            Some(c) => {
                let n = self.ensemble.n();
                let means = DMatrix::from_element(n, n, self.ensemble.entry_law.mean());
                truncate_entries(&y, &means, c)
            }
            None => Ok(y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    /// ∫f dμ_X̃ for the smoothed matrix.
    pub statistic: f64,
    /// ∫f dμ_X for the same draw before smoothing.
    pub raw_statistic: f64,
    pub ks_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub epsilon: f64,
    /// Fraction of trials with |statistic − mean| ≥ ε.
    pub empirical: f64,
    /// 2·exp(−n²ε²/(4c·Lip²)) when an LSI constant c is supplied.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub n: usize,
    pub d_n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    /// True when blocks share one draw (maximal intra-block dependence).
    pub replicated_blocks: bool,
    pub mean: f64,
    pub std: f64,
    pub mean_ks_distance: f64,
    pub tails: Vec<TailRow>,
    /// K·R²·exp(21d_n + 5R²d_n/δ) with K = 289, when δ > 0 and the entry law
    /// is bounded.
    pub ensemble_lsi_constant: Option<BoundValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<TrialRecord>,
}

/// Run `trials` independent sample → smooth → spectrum → statistic pipelines.
/// Trials run in parallel; results are ordered by trial index.
pub fn concentration_experiment(
    exp: &Experiment,
    f: &LipschitzFn,
    trials: usize,
    seed: u64,
    epsilons: &[f64],
    lsi_constant: Option<f64>,
) -> Result<ConcentrationSummary> {
    if trials < 2 {
        return Err(invalid("need at least two trials"));
    }
    f.validate()?;
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(invalid("tail levels must be positive"));
    }
    let sigma = exp.semicircle_sigma();
    let records: Vec<TrialRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<TrialRecord> {
            let y = exp.raw_matrix(seed, trial)?;
            let raw = SpectralSample::wigner(&y)?;
            let raw_statistic = lipschitz_statistic(&raw, f);
            let smoothed = if exp.delta > 0.0 {
                SpectralSample::wigner(&smooth_matrix(&y, exp.delta, seed, trial)?)?
            } else {
                raw
            };
            Ok(TrialRecord {
                trial,
                seed,
                statistic: lipschitz_statistic(&smoothed, f),
                raw_statistic,
                ks_distance: semicircle_distance(&smoothed, sigma)?,
            })
        })
        .collect::<Result<_>>()?;

    let t = trials as f64;
    let mean = records.iter().map(|r| r.statistic).sum::<f64>() / t;
    let var = records.iter().map(|r| (r.statistic - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let mean_ks_distance = records.iter().map(|r| r.ks_distance).sum::<f64>() / t;
    let n = exp.ensemble.n();
    let tails = epsilons
        .iter()
        .map(|&eps| -> Result<TailRow> {
            let hits = records.iter().filter(|r| (r.statistic - mean).abs() >= eps).count();
            let reference = match lsi_constant {
                Some(c) if f.lipschitz() > 0.0 => Some(guionnet_tail(n as u64, eps, c, f.lipschitz())?),
                _ => None,
            };
            Ok(TailRow {
                epsilon: eps,
                empirical: hits as f64 / t,
                reference,
            })
        })
        .collect::<Result<_>>()?;
    let ensemble_lsi_constant = match exp.ensemble.entry_law.support_radius() {
        Some(r) if exp.delta > 0.0 => Some(ensemble_lsi_constant(r, exp.ensemble.d_n as f64, exp.delta, 289.0)?),
        _ => None,
    };
    Ok(ConcentrationSummary {
        n,
        d_n: exp.ensemble.d_n,
        delta: exp.delta,
        trials,
        seed,
        replicated_blocks: exp.ensemble.mode == super::ensemble::BlockMode::Replicated,
        mean,
        std: var.sqrt(),
        mean_ks_distance,
        tails,
        ensemble_lsi_constant,
        records,
    })
}
