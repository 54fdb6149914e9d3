//! Random real symmetric matrices whose upper-triangular entries are grouped
//! into mutually independent dependence blocks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// RNG domain for matrix entries.
const DOMAIN_ENTRIES: u64 = 0;
/// RNG domain for the Gaussian smoothing noise.
const DOMAIN_SMOOTHING: u64 = 1;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for (seed, trial, domain, index). Streams never depend
/// on how many trials or blocks are drawn elsewhere.
pub(crate) fn stream_rng(seed: u64, trial: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let key = mix(mix(mix(seed) ^ trial) ^ domain);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Marginal law of every entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryLaw {
    /// ±R with probability ½ each.
    TwoPoint {
        #[serde(rename = "R")]
        r: f64,
    },
    /// Uniform on [−R, R].
    Uniform {
        #[serde(rename = "R")]
        r: f64,
    },
    /// Centred normal; unbounded, so only usable through the cutoff path for
    /// bounded-support statements.
    Gaussian { sigma: f64 },
}

impl EntryLaw {
    pub fn validate(&self) -> Result<()> {
        let p = match *self {
            EntryLaw::TwoPoint { r } | EntryLaw::Uniform { r } => r,
            EntryLaw::Gaussian { sigma } => sigma,
        };
        if !(p > 0.0) || !p.is_finite() {
            return Err(invalid(format!("entry law parameter must be positive, got {p}")));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EntryLaw::TwoPoint { r } => {
                if rng.random::<bool>() {
                    r
                } else {
                    -r
                }
            }
            EntryLaw::Uniform { r } => rng.random_range(-r..=r),
            EntryLaw::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
        }
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn variance(&self) -> f64 {
        match *self {
            EntryLaw::TwoPoint { r } => r * r,
            EntryLaw::Uniform { r } => r * r / 3.0,
            EntryLaw::Gaussian { sigma } => sigma * sigma,
        }
    }

    /// R such that the support lies in [−R, R]; `None` when unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            EntryLaw::TwoPoint { r } | EntryLaw::Uniform { r } => Some(r),
            EntryLaw::Gaussian { .. } => None,
        }
    }
}

/// Block size rule for generated partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockSize {
    Fixed(usize),
    Rule(BlockRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRule {
    /// ⌈√(log n)⌉
    CeilSqrtLog,
}

impl BlockSize {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            BlockSize::Fixed(d) => d,
            BlockSize::Rule(BlockRule::CeilSqrtLog) => ceil_sqrt_log(n),
        }
    }
}

/// ⌈√(log n)⌉, at least 1.
pub fn ceil_sqrt_log(n: usize) -> usize {
    ((n as f64).ln().max(0.0).sqrt().ceil() as usize).max(1)
}

/// How upper-triangular positions (enumerated row by row) are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Consecutive positions (row-major over the upper triangle) share a
    /// block. Replicating such blocks correlates neighbours within a row,
    /// which shifts the limiting spectral law away from the semicircle.
    Contiguous,
    /// Positions k, k + B, k + 2B, … share a block, so a block's entries are
    /// spread over distant rows.
    #[default]
    Strided,
}

/// JSON description of a partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionSpec {
    /// Every entry its own block, drawn independently.
    Independent,
    /// Blocks of at most `d_n` entries that all share a single draw.
    ReplicatedBlocks {
        d_n: BlockSize,
        #[serde(default)]
        layout: Layout,
    },
}

/// Joint law inside a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    /// Entries of a block are independent.
    Independent,
    /// All entries of a block equal one draw (maximal dependence).
    Replicated,
}

/// Disjoint blocks covering {(i, j) : 0 ≤ i ≤ j < n}.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<(usize, usize)>>,
}

impl Partition {
    /// Validates that the blocks are non-empty, disjoint, upper-triangular and
    /// cover every position.
    pub fn new(n: usize, blocks: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix size must be positive"));
        }
        let mut seen = vec![false; n * (n + 1) / 2];
        for b in &blocks {
            if b.is_empty() {
                return Err(invalid("empty dependence block"));
            }
            for &(i, j) in b {
                if !(i <= j && j < n) {
                    return Err(invalid(format!("({i}, {j}) is not an upper-triangular index of a {n}x{n} matrix")));
                }
                let k = upper_index(n, i, j);
                if seen[k] {
                    return Err(invalid(format!("({i}, {j}) appears in two blocks")));
                }
                seen[k] = true;
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            let (i, j) = upper_position(n, k);
            return Err(invalid(format!("({i}, {j}) is not covered by any block")));
        }
        Ok(Self { n, blocks })
    }

    pub fn singletons(n: usize) -> Result<Self> {
        Self::grouped(n, 1, Layout::Contiguous)
    }

    /// Blocks of size at most `d` laid out by `layout`.
    pub fn grouped(n: usize, d: usize, layout: Layout) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("matrix size and block size must be positive"));
        }
        let total = n * (n + 1) / 2;
        let positions: Vec<(usize, usize)> = (0..total).map(|k| upper_position(n, k)).collect();
        let blocks = match layout {
            Layout::Contiguous => positions.chunks(d).map(<[_]>::to_vec).collect(),
            Layout::Strided => {
                let count = total.div_ceil(d);
                (0..count)
                    .map(|b| positions.iter().skip(b).step_by(count).copied().collect())
                    .collect()
            }
        };
        Self::new(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<(usize, usize)>] {
        &self.blocks
    }

    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Row-major index of (i, j), i ≤ j, among upper-triangular positions.
fn upper_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + j
}

fn upper_position(n: usize, k: usize) -> (usize, usize) {
    let mut i = 0;
    let mut start = 0;
    while start + (n - i) <= k {
        start += n - i;
        i += 1;
    }
    (i, i + (k - start))
}

/// A resolved ensemble: size, entry law, partition and block law.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub entry_law: EntryLaw,
    pub partition: Partition,
    pub mode: BlockMode,
    /// Declared bound on block sizes.
    pub d_n: usize,
}

impl EnsembleSpec {
    pub fn new(entry_law: EntryLaw, partition: Partition, mode: BlockMode, d_n: usize) -> Result<Self> {
        entry_law.validate()?;
        if partition.max_block_size() > d_n {
            return Err(invalid(format!(
                "block of size {} exceeds d_n = {d_n}",
                partition.max_block_size()
            )));
        }
        Ok(Self {
            entry_law,
            partition,
            mode,
            d_n,
        })
    }

    pub fn from_partition_spec(n: usize, entry_law: EntryLaw, spec: &PartitionSpec) -> Result<Self> {
        match *spec {
            PartitionSpec::Independent => {
                Self::new(entry_law, Partition::singletons(n)?, BlockMode::Independent, 1)
            }
            PartitionSpec::ReplicatedBlocks { d_n, layout } => {
                let d = d_n.resolve(n);
                Self::new(entry_law, Partition::grouped(n, d, layout)?, BlockMode::Replicated, d)
            }
        }
    }

    pub fn n(&self) -> usize {
        self.partition.n
    }
}

/// Draw Y_n. Block k uses its own stream, so blocks are independent.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64, trial: u64) -> DMatrix<f64> {
    let n = spec.n();
    let mut y = DMatrix::zeros(n, n);
    for (k, block) in spec.partition.blocks.iter().enumerate() {
        let mut rng = stream_rng(seed, trial, DOMAIN_ENTRIES, k as u64);
        let shared = spec.entry_law.sample(&mut rng);
        for (idx, &(i, j)) in block.iter().enumerate() {
            let v = match spec.mode {
                BlockMode::Replicated => shared,
                BlockMode::Independent if idx == 0 => shared,
                BlockMode::Independent => spec.entry_law.sample(&mut rng),
            };
            y[(i, j)] = v;
            y[(j, i)] = v;
        }
    }
    y
}

fn check_symmetric(y: &DMatrix<f64>) -> Result<()> {
    if !y.is_square() {
        return Err(invalid("matrix must be square"));
    }
    let n = y.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if y[(i, j)] != y[(j, i)] {
                return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Ỹ = Y + √δ·G with G symmetric and independent standard normal entries on
/// and above the diagonal.
pub fn smooth_matrix(y: &DMatrix<f64>, delta: f64, seed: u64, trial: u64) -> Result<DMatrix<f64>> {
    check_symmetric(y)?;
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be non-negative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(y.clone());
    }
    let n = y.nrows();
    let s = delta.sqrt();
    let mut rng = stream_rng(seed, trial, DOMAIN_SMOOTHING, 0);
    let mut out = y.clone();
    for i in 0..n {
        for j in i..n {
            let g: f64 = StandardNormal.sample(&mut rng);
            out[(i, j)] += s * g;
            if i != j {
                out[(j, i)] = out[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Replace every entry whose deviation from its mean exceeds `c` by the mean.
/// `c = ∞` leaves Y unchanged.
pub fn truncate_entries(y: &DMatrix<f64>, means: &DMatrix<f64>, c: f64) -> Result<DMatrix<f64>> {
    if y.shape() != means.shape() {
        return Err(invalid("matrix and means have different shapes"));
    }
    if !(c >= 0.0) {
        return Err(invalid(format!("cutoff must be non-negative, got {c}")));
    }
    Ok(y.zip_map(means, |v, m| if (v - m).abs() <= c { v } else { m }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm1(n: usize) -> EnsembleSpec {
        EnsembleSpec::from_partition_spec(n, EntryLaw::TwoPoint { r: 1.0 }, &PartitionSpec::Independent)
            .unwrap()
    }

    #[test]
    fn independent_two_point_entries() {
        let y = sample_matrix(&pm1(4), 7, 0);
        assert_eq!(y, y.transpose());
        assert!(y.iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn replicated_block_entries_agree() {
        let n = 3;
        let mut blocks = vec![vec![(0, 0), (0, 1), (1, 2)]];
        blocks.extend([(0, 2), (1, 1), (2, 2)].iter().map(|&p| vec![p]));
        let part = Partition::new(n, blocks).unwrap();
        let spec = EnsembleSpec::new(EntryLaw::Uniform { r: 1.0 }, part, BlockMode::Replicated, 3).unwrap();
        for trial in 0..20 {
            let y = sample_matrix(&spec, 11, trial);
            assert_eq!(y[(0, 0)], y[(0, 1)]);
            assert_eq!(y[(0, 1)], y[(1, 2)]);
            assert_eq!(y[(2, 1)], y[(1, 2)]);
        }
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let spec = pm1(9);
        assert_eq!(sample_matrix(&spec, 3, 5), sample_matrix(&spec, 3, 5));
        assert_ne!(sample_matrix(&spec, 3, 5), sample_matrix(&spec, 3, 6));
    }

    #[test]
    fn partitions_are_validated() {
        assert!(Partition::new(2, vec![vec![(0, 0)], vec![(0, 1)]]).is_err());
        assert!(Partition::new(2, vec![vec![(0, 0), (1, 1)], vec![(0, 1), (1, 1)]]).is_err());
        assert!(Partition::new(2, vec![vec![(0, 0)], vec![(1, 0)], vec![(1, 1)]]).is_err());
        let part = Partition::grouped(5, 3, Layout::Strided).unwrap();
        assert!(part.max_block_size() <= 3);
        assert!(EnsembleSpec::new(EntryLaw::TwoPoint { r: 1.0 }, part, BlockMode::Replicated, 2).is_err());
    }

    #[test]
    fn upper_indexing_roundtrips() {
        let n = 7;
        for k in 0..n * (n + 1) / 2 {
            let (i, j) = upper_position(n, k);
            assert_eq!(upper_index(n, i, j), k);
        }
    }

    #[test]
    fn smoothing() {
        let y = sample_matrix(&pm1(6), 1, 0);
        assert_eq!(smooth_matrix(&y, 0.0, 1, 0).unwrap(), y);
        let s = smooth_matrix(&y, 0.3, 1, 0).unwrap();
        assert_eq!(s, s.transpose());
        assert_ne!(s, y);
    }

    #[test]
    fn truncation() {
        let y = DMatrix::from_row_slice(2, 2, &[0.5, -3.0, -3.0, 1.2]);
        let zeros = DMatrix::zeros(2, 2);
        assert_eq!(truncate_entries(&y, &zeros, f64::INFINITY).unwrap(), y);
        assert_eq!(truncate_entries(&y, &zeros, 0.0).unwrap(), zeros);
        let t = truncate_entries(&y, &zeros, 1.0).unwrap();
        assert_eq!(t, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]));
        let b = sample_matrix(&pm1(5), 2, 0);
        assert_eq!(truncate_entries(&b, &DMatrix::zeros(5, 5), 1.0).unwrap(), b);
    }

    #[test]
    fn block_size_rule() {
        assert_eq!(ceil_sqrt_log(50), 2);
        assert_eq!(ceil_sqrt_log(200), 3);
        assert_eq!(ceil_sqrt_log(1), 1);
    }

    #[test]
    fn partition_spec_json() {
        let p: PartitionSpec = serde_json::from_str(r#"{"kind": "replicated_blocks", "d_n": 2}"#).unwrap();
        assert_eq!(p, PartitionSpec::ReplicatedBlocks { d_n: BlockSize::Fixed(2), layout: Layout::Strided });
        let q: PartitionSpec =
            serde_json::from_str(r#"{"kind": "replicated_blocks", "d_n": "ceil_sqrt_log", "layout": "contiguous"}"#).unwrap();
        assert_eq!(q, PartitionSpec::ReplicatedBlocks { d_n: BlockSize::Rule(BlockRule::CeilSqrtLog), layout: Layout::Contiguous });
    }
}
