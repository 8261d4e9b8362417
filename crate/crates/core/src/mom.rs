//! Median-of-means over blocks.
//!
//! The dataset indices `{0..n-1}` are split into `K` disjoint blocks of equal
//! size `floor(n/K)` (remainder indices are dropped, keeping block means
//! identically weighted). `MOM_K` of a vector of values is the lower median
//! of the `K` block means: the mean of rank `ceil(K/2)` in ascending order.
//! The lower-median convention guarantees the returned value is realized by
//! an actual block, whose index is reported for the median-block gradient
//! step; ties go to the lowest block index.

use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::rng;
use crate::scalar::Real;

/// How indices are assigned to blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionStrategy {
    /// Indices `0..K*floor(n/K)` in order.
    Contiguous,
    /// A seeded uniform permutation is applied first.
    Shuffled,
}

/// `K` disjoint equal-size index blocks over `{0..n-1}`, stored as one flat
/// index list chunked into blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    order: Vec<usize>,
    block_size: usize,
    n: usize,
}

impl BlockPartition {
    pub fn k(&self) -> usize {
        self.order.len() / self.block_size
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self, k: usize) -> &[usize] {
        &self.order[k * self.block_size..(k + 1) * self.block_size]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[usize]> {
        self.order.chunks_exact(self.block_size)
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }
}

/// Splits `{0..n-1}` into `k` equal-size blocks.
///
/// Deterministic given `(n, k, seed, strategy)`; the seed only matters for
/// [`PartitionStrategy::Shuffled`].
pub fn partition(
    n: usize,
    k: usize,
    seed: u64,
    strategy: PartitionStrategy,
) -> Result<BlockPartition> {
    if k == 0 || k > n {
        return Err(Error::argument(format!(
            "block count k={k} must satisfy 1 <= k <= n={n}"
        )));
    }
    let m = n / k;
    let order: Vec<usize> = match strategy {
        PartitionStrategy::Contiguous => (0..k * m).collect(),
        PartitionStrategy::Shuffled => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng::chacha(seed));
            perm.truncate(k * m);
            perm
        }
    };
    Ok(BlockPartition {
        order,
        block_size: m,
        n,
    })
}

/// A MOM value together with the block that realizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomValue<F> {
    /// The lower median of the block means.
    pub value: F,
    /// Lowest block index whose mean equals `value`.
    pub median_block: usize,
}

/// Block means of `values` in fixed index order (plain left-to-right sums).
fn block_means<F: Real>(values: &[F], p: &BlockPartition) -> Vec<F> {
    p.blocks()
        .map(|b| {
            let mut s = F::zero();
            for &i in b {
                s += values[i];
            }
            s / F::from64(b.len() as f64)
        })
        .collect()
}

/// MOM of a vector of per-observation values under the given partition.
pub fn mom<F: Real>(values: &[F], p: &BlockPartition) -> Result<MomValue<F>> {
    if values.len() != p.n() {
        return Err(Error::argument(format!(
            "values length {} does not match partition over n={}",
            values.len(),
            p.n()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite value in MOM input"));
    }
    let means = block_means(values, p);
    Ok(lower_median(&means))
}

/// Lower median (rank `ceil(K/2)`) of block means; ties to lowest index.
fn lower_median<F: Real>(means: &[F]) -> MomValue<F> {
    let k = means.len();
    let mut sorted: Vec<F> = means.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let median = sorted[k.div_ceil(2) - 1];
    let median_block = means
        .iter()
        .position(|&m| m == median)
        .expect("median value is one of the means");
    MomValue {
        value: means[median_block],
        median_block,
    }
}

/// MOM of the incremental risks `loss(<x_i, t>, y_i) - loss(<x_i, t2>, y_i)`.
pub fn mom_increment<F: Real>(
    data: &Dataset<F>,
    t: &[F],
    t2: &[F],
    loss: &LossSpec<F>,
    p: &BlockPartition,
) -> Result<MomValue<F>> {
    if t.len() != data.dim() || t2.len() != data.dim() {
        return Err(Error::argument(format!(
            "parameter dimension mismatch: data has d={}, got {} and {}",
            data.dim(),
            t.len(),
            t2.len()
        )));
    }
    let mut values = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let u = data.margin(i, t);
        let u2 = data.margin(i, t2);
        values.push(loss.value(u, data.y[i])? - loss.value(u2, data.y[i])?);
    }
    mom(&values, p)
}

/// MOM of the plain risks `loss(<x_i, t>, y_i)`.
pub fn mom_plain_risk<F: Real>(
    data: &Dataset<F>,
    t: &[F],
    loss: &LossSpec<F>,
    p: &BlockPartition,
) -> Result<MomValue<F>> {
    if t.len() != data.dim() {
        return Err(Error::argument("parameter dimension mismatch"));
    }
    let mut values = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        values.push(loss.value(data.margin(i, t), data.y[i])?);
    }
    mom(&values, p)
}
