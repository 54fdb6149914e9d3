//! Random real symmetric matrices with dependent entries.
//!
//! Upper-triangular entries (diagonal included) are split into blocks of at
//! most d_n entries; blocks are independent of one another, entries within a
//! block may be dependent. Matrices are optionally truncated entrywise,
//! smoothed by an independent Gaussian matrix of variance δ, scaled by 1/√n
//! and diagonalised.
//!
//! Randomness is counter-based: every block of every trial draws from its own
//! ChaCha stream keyed by (seed, trial, block), so changing the number of
//! trials never reshuffles earlier ones.

mod ensemble;
mod experiment;
mod schedule;
mod spectral;

pub use ensemble::{
    ceil_sqrt_log, sample_matrix, smooth_matrix, truncate_entries, BlockMode, BlockRule, BlockSize,
    EnsembleSpec, EntryLaw, Layout, Partition, PartitionSpec,
};
pub use experiment::{
    concentration_experiment, ConcentrationSummary, DeltaPolicy, EnsembleConfig, Experiment,
    TailRow, TrialRecord,
};
pub use schedule::{delta_schedule, practical_schedule};
pub use spectral::{
    hw_check, lipschitz_statistic, perturbation_bound_check, semicircle_cdf, semicircle_distance,
    HwCheck, LipschitzFn, PerturbationCheck, SpectralSample,
};
