//! Optimal V-Opt histograms (minimum sum of squared errors with `B` buckets).
//!
//! [`vopt_linear_space`] runs the classic `E[i, b] = min_j E[j, b-1] + e(j, i)`
//! recurrence one budget layer at a time with two rows, and alongside the rows
//! tracks for every prefix ending right of the midpoint the bucket that covers
//! the first element past the midpoint: its start, its end, and its layer.
//! That single bucket splits the problem into a left part and a right part of
//! at most half the length each, which are solved again from scratch.

use crate::error::{Result, SynopsisError};
use crate::scalar::Scalar;

/// Prefix sums of `x` and `x^2` for O(1) bucket errors.
#[derive(Debug, Clone)]
pub struct PrefixSums<T> {
    cum: Vec<T>,
    cum2: Vec<T>,
}

impl<T: Scalar> PrefixSums<T> {
    pub fn new(values: &[T]) -> Self {
        let mut cum = Vec::with_capacity(values.len() + 1);
        let mut cum2 = Vec::with_capacity(values.len() + 1);
        let (mut s, mut s2) = (T::zero(), T::zero());
        cum.push(s);
        cum2.push(s2);
        for &x in values {
            s = s + x;
            s2 = s2 + x * x;
            cum.push(s);
            cum2.push(s2);
        }
        Self { cum, cum2 }
    }

    pub fn len(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Squared error of replacing `x[j..i]` by its mean.
    pub fn bucket_error(&self, j: usize, i: usize) -> Result<T> {
        if j >= i || i > self.len() {
            return Err(SynopsisError::InvalidBucket { start: j, end: i });
        }
        Ok(self.sse(j, i))
    }

    #[inline]
    fn sse(&self, j: usize, i: usize) -> T {
        if i - j == 1 {
            return T::zero();
        }
        let s = self.cum[i] - self.cum[j];
        let s2 = self.cum2[i] - self.cum2[j];
        let e = s2 - s * s / T::of_int((i - j) as i64);
        // cancellation can leave tiny negatives
        if e < T::zero() {
            T::zero()
        } else {
            e
        }
    }

    pub fn mean(&self, j: usize, i: usize) -> T {
        (self.cum[i] - self.cum[j]) / T::of_int((i - j) as i64)
    }
}

/// Piecewise constant representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    /// Bucket `k` covers `boundaries[k]..boundaries[k + 1]`; first is 0, last is `n`.
    pub boundaries: Vec<usize>,
    /// Bucket means.
    pub reps: Vec<T>,
    pub sse: T,
}

impl<T: Scalar> Histogram<T> {
    fn from_boundaries(sums: &PrefixSums<T>, boundaries: Vec<usize>) -> Self {
        let mut reps = Vec::with_capacity(boundaries.len().saturating_sub(1));
        let mut sse = T::zero();
        for w in boundaries.windows(2) {
            reps.push(sums.mean(w[0], w[1]));
            sse = sse + sums.sse(w[0], w[1]);
        }
        Self {
            boundaries,
            reps,
            sse,
        }
    }

    pub fn buckets(&self) -> usize {
        self.reps.len()
    }

    /// `l2` error, the square root of [`Histogram::sse`].
    pub fn l2_error(&self) -> T {
        self.sse.sqrt()
    }

    /// The histogram expanded back to one value per point.
    pub fn expand(&self) -> Vec<T> {
        self.boundaries
            .windows(2)
            .zip(&self.reps)
            .flat_map(|(w, &r)| std::iter::repeat_n(r, w[1] - w[0]))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VoptStats {
    /// `(i, j)` candidate evaluations over all passes, recursive ones included.
    pub cell_evaluations: u64,
    /// Candidate evaluations of the first, full-length pass.
    pub top_level_evaluations: u64,
    /// Largest number of row and crossing-array cells held at once.
    pub peak_cells: usize,
    /// Number of DP passes run.
    pub passes: u64,
}

fn check_input<T: Scalar>(values: &[T], buckets: usize) -> Result<()> {
    if values.is_empty() {
        return Err(SynopsisError::Empty);
    }
    if buckets < 1 {
        return Err(SynopsisError::InvalidBudget("a histogram needs at least one bucket".into()));
    }
    if let Some(index) = values.iter().position(|x| !x.is_finite()) {
        return Err(SynopsisError::NonFinite { index });
    }
    Ok(())
}

/// Optimal histogram with at most `buckets` buckets in O(n) space.
pub fn vopt_linear_space<T: Scalar>(values: &[T], buckets: usize) -> Result<Histogram<T>> {
    vopt_linear_space_with_stats(values, buckets).map(|(h, _)| h)
}

pub fn vopt_linear_space_with_stats<T: Scalar>(
    values: &[T],
    buckets: usize,
) -> Result<(Histogram<T>, VoptStats)> {
    check_input(values, buckets)?;
    let sums = PrefixSums::new(values);
    let mut stats = VoptStats::default();
    let mut boundaries = vec![0];
    split_range(&sums, 0, values.len(), buckets, &mut boundaries, &mut stats);
    Ok((Histogram::from_boundaries(&sums, boundaries), stats))
}

/// Emits the right ends of the optimal buckets of `lo..hi`, left to right.
fn split_range<T: Scalar>(
    sums: &PrefixSums<T>,
    lo: usize,
    hi: usize,
    buckets: usize,
    boundaries: &mut Vec<usize>,
    stats: &mut VoptStats,
) {
    let len = hi - lo;
    if len == 0 {
        return;
    }
    let buckets = buckets.min(len);
    if buckets == 1 {
        boundaries.push(hi);
        return;
    }
    let crossing = crossing_bucket(sums, lo, len, buckets, stats);
    // local 1-based positions back to global half-open offsets
    let (start, end) = (lo + crossing.start - 1, lo + crossing.end);
    split_range(sums, lo, start, crossing.layer - 1, boundaries, stats);
    boundaries.push(end);
    split_range(sums, end, hi, buckets - crossing.layer, boundaries, stats);
}

/// The bucket of the optimal solution covering local position `mid + 1`.
struct Crossing {
    /// First local position of the bucket (1-based).
    start: usize,
    /// Last local position of the bucket (1-based, inclusive).
    end: usize,
    /// Budget layer at which the bucket was appended.
    layer: usize,
}

fn crossing_bucket<T: Scalar>(
    sums: &PrefixSums<T>,
    lo: usize,
    len: usize,
    buckets: usize,
    stats: &mut VoptStats,
) -> Crossing {
    let mid = len / 2;
    let e = |j: usize, i: usize| sums.sse(lo + j, lo + i);
    stats.passes += 1;
    stats.peak_cells = stats.peak_cells.max(8 * (len + 1));

    // layer 1: the single bucket [1, i]
    let mut prev: Vec<T> = (0..=len).map(|i| if i == 0 { T::zero() } else { e(0, i) }).collect();
    let mut cur = vec![T::zero(); len + 1];
    let mut start: Vec<usize> = (0..=len).map(|i| usize::from(i > mid)).collect();
    let mut end: Vec<usize> = (0..=len).map(|i| if i > mid { i } else { 0 }).collect();
    let mut layer: Vec<usize> = (0..=len).map(|i| usize::from(i > mid)).collect();
    let (mut new_start, mut new_end, mut new_layer) = (start.clone(), end.clone(), layer.clone());
    let mut evaluations = len as u64;

    for b in 2..=buckets {
        cur[0] = T::zero();
        for i in 1..=len {
            let (mut best, mut arg) = (prev[0] + e(0, i), 0);
            for j in 1..i {
                let val = prev[j] + e(j, i);
                if val < best {
                    best = val;
                    arg = j;
                }
            }
            evaluations += i as u64;
            cur[i] = best;
            if i > mid {
                if arg <= mid {
                    new_start[i] = arg + 1;
                    new_end[i] = i;
                    new_layer[i] = b;
                } else {
                    new_start[i] = start[arg];
                    new_end[i] = end[arg];
                    new_layer[i] = layer[arg];
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut start, &mut new_start);
        std::mem::swap(&mut end, &mut new_end);
        std::mem::swap(&mut layer, &mut new_layer);
    }

    if stats.passes == 1 {
        stats.top_level_evaluations = evaluations;
    }
    stats.cell_evaluations += evaluations;
    Crossing {
        start: start[len],
        end: end[len],
        layer: layer[len],
    }
}

/// Cell cap for the full-table reference.
pub const FULL_TABLE_CELL_CAP: usize = 50_000_000;

/// Reference solver storing the whole `(buckets + 1) x (n + 1)` table.
/// Returns the histogram and the table of accumulated errors `E[b][i]`.
pub fn vopt_full_table<T: Scalar>(values: &[T], buckets: usize) -> Result<(Histogram<T>, Vec<Vec<T>>)> {
    check_input(values, buckets)?;
    let n = values.len();
    let buckets = buckets.min(n);
    let cells = (buckets + 1) * (n + 1);
    if cells > FULL_TABLE_CELL_CAP {
        return Err(SynopsisError::InstanceTooLarge {
            what: "full-table V-Opt",
            detail: format!("{cells} cells exceed the cap of {FULL_TABLE_CELL_CAP}"),
        });
    }
    let sums = PrefixSums::new(values);
    let mut table = vec![vec![T::infinity(); n + 1]; buckets + 1];
    let mut from = vec![vec![0usize; n + 1]; buckets + 1];
    table[0][0] = T::zero();
    for b in 1..=buckets {
        table[b][0] = T::zero();
        for i in 1..=n {
            let (mut best, mut arg) = (T::infinity(), 0);
            for j in 0..i {
                let val = table[b - 1][j] + sums.sse(j, i);
                if val < best {
                    best = val;
                    arg = j;
                }
            }
            table[b][i] = best;
            from[b][i] = arg;
        }
    }
    let mut cuts = vec![n];
    let (mut i, mut b) = (n, buckets);
    while i > 0 {
        i = from[b][i];
        b -= 1;
        cuts.push(i);
    }
    cuts.reverse();
    Ok((Histogram::from_boundaries(&sums, cuts), table))
}
