//! Non-normalized Haar transform and error-tree navigation.
//!
//! Coefficients use the heap layout: index 0 holds the overall average, index 1
//! the root difference, and node `i >= 1` has children `2i` and `2i + 1`. The
//! solvers extend this numbering to the leaves, so that leaf `j` sits at heap
//! index `n + j`; with that convention every internal node `i >= 1` has exactly
//! the children `2i` and `2i + 1`, and an index `>= n` is a data point.

use std::ops::{Deref, Range};

use crate::error::{Result, SynopsisError};
use crate::scalar::Scalar;

/// Input series with per-point weights, normalized so that they sum to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    values: Vec<T>,
    weights: Vec<T>,
    weighted: bool,
}

impl<T: Scalar> Signal<T> {
    /// An unweighted signal. The length must be a power of two, at least 2.
    pub fn new(values: Vec<T>) -> Result<Self> {
        check_power_of_two(values.len())?;
        check_finite(&values)?;
        let weights = vec![T::one(); values.len()];
        Ok(Self {
            values,
            weights,
            weighted: false,
        })
    }

    /// A weighted signal. Weights must be positive; they are rescaled to sum to `n`.
    pub fn with_weights(values: Vec<T>, weights: Vec<T>) -> Result<Self> {
        check_power_of_two(values.len())?;
        check_finite(&values)?;
        if weights.len() != values.len() {
            return Err(SynopsisError::LengthMismatch {
                expected: values.len(),
                actual: weights.len(),
            });
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > T::zero()) {
                return Err(SynopsisError::InvalidWeight {
                    index,
                    value: w.as_f64(),
                });
            }
        }
        let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
        let scale = T::of_int(values.len() as i64) / total;
        let weights = weights.into_iter().map(|w| w * scale).collect();
        Ok(Self {
            values,
            weights,
            weighted: true,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Whether explicit weights were supplied (unit weights otherwise).
    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    /// `max_i |x_i|`.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn min_weight(&self) -> T {
        self.weights
            .iter()
            .fold(T::infinity(), |acc, &w| acc.min(w))
    }

    pub fn transform(&self) -> CoefficientVector<T> {
        forward(&self.values).expect("signal length validated at construction")
    }
}

fn check_power_of_two(len: usize) -> Result<()> {
    if len < 2 || !len.is_power_of_two() {
        return Err(SynopsisError::NotPowerOfTwo { len });
    }
    Ok(())
}

fn check_finite<T: Scalar>(values: &[T]) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(SynopsisError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Haar coefficients in heap order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T>(Vec<T>);

impl<T: Scalar> CoefficientVector<T> {
    pub fn from_vec(coeffs: Vec<T>) -> Result<Self> {
        check_power_of_two(coeffs.len())?;
        Ok(Self(coeffs))
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    /// Sparse-to-dense: a length-`n` vector holding `picks` and zeros elsewhere.
    pub fn from_picks(n: usize, picks: &[(usize, T)]) -> Result<Self> {
        check_power_of_two(n)?;
        let mut coeffs = vec![T::zero(); n];
        for &(index, value) in picks {
            if index >= n {
                return Err(SynopsisError::IndexOutOfRange { index, size: n });
            }
            coeffs[index] = value;
        }
        Ok(Self(coeffs))
    }
}

impl<T> Deref for CoefficientVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Pairwise average/half-difference cascade.
pub fn forward<T: Scalar>(values: &[T]) -> Result<CoefficientVector<T>> {
    let n = values.len();
    check_power_of_two(n)?;
    let two = T::of(2.0);
    let mut coeffs = vec![T::zero(); n];
    let mut averages = values.to_vec();
    let mut len = n;
    while len > 1 {
        let half = len / 2;
        for p in 0..half {
            let (a, b) = (averages[2 * p], averages[2 * p + 1]);
            coeffs[half + p] = (a - b) / two;
            averages[p] = (a + b) / two;
        }
        len = half;
    }
    coeffs[0] = averages[0];
    Ok(CoefficientVector(coeffs))
}

/// Reconstruct the series: each leaf is the signed sum of the coefficients on its path.
pub fn inverse<T: Scalar>(coeffs: &[T]) -> Result<Vec<T>> {
    let n = coeffs.len();
    check_power_of_two(n)?;
    let mut out = vec![T::zero(); n];
    out[0] = coeffs[0];
    let mut len = 1;
    while len < n {
        // expand in place from the back so the parents are still readable
        for p in (0..len).rev() {
            let (avg, diff) = (out[p], coeffs[len + p]);
            out[2 * p] = avg + diff;
            out[2 * p + 1] = avg - diff;
        }
        len *= 2;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Root-to-leaf path of leaf `j`: `log2(n) + 1` coefficient indices with the
/// sign each contributes to that leaf. Index 0 comes first and is always `+`.
pub fn leaf_path(j: usize, n: usize) -> Result<Vec<(usize, Sign)>> {
    check_power_of_two(n)?;
    if j >= n {
        return Err(SynopsisError::IndexOutOfRange { index: j, size: n });
    }
    let mut path = Vec::with_capacity(n.trailing_zeros() as usize + 1);
    path.push((0, Sign::Plus));
    let (mut node, mut local, mut size) = (1, j, n);
    while node < n {
        let half = size / 2;
        let sign = if local < half { Sign::Plus } else { Sign::Minus };
        path.push((node, sign));
        if sign == Sign::Minus {
            local -= half;
        }
        node = 2 * node + usize::from(sign == Sign::Minus);
        size = half;
    }
    Ok(path)
}

/// A coefficient node of the error tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub index: usize,
    /// `log2` of the support size; data points are level 0.
    pub level: u32,
    pub support: Range<usize>,
}

impl TreeNode {
    /// Node `index` of an `n`-point tree, `0 <= index < n`.
    pub fn new(index: usize, n: usize) -> Result<Self> {
        check_power_of_two(n)?;
        if index >= n {
            return Err(SynopsisError::IndexOutOfRange { index, size: n });
        }
        Ok(Self {
            index,
            level: support_len(index, n).trailing_zeros(),
            support: support(index, n),
        })
    }

    /// Left and right halves of the support. `None` for the average node 0,
    /// whose single child is node 1 and whose sign is `+` everywhere.
    pub fn halves(&self) -> Option<(Range<usize>, Range<usize>)> {
        if self.index == 0 {
            return None;
        }
        let mid = self.support.start + self.support.len() / 2;
        Some((self.support.start..mid, mid..self.support.end))
    }
}

/// Number of data points under heap index `h` (leaves are `n..2n`).
#[inline]
pub fn support_len(h: usize, n: usize) -> usize {
    if h == 0 {
        n
    } else {
        n >> h.ilog2()
    }
}

/// Leaf interval of heap index `h`.
pub fn support(h: usize, n: usize) -> Range<usize> {
    if h == 0 {
        return 0..n;
    }
    let depth = h.ilog2();
    let len = n >> depth;
    let start = (h - (1 << depth)) * len;
    start..start + len
}

/// Number of coefficients in the subtree rooted at heap index `h`, itself included.
#[inline]
pub fn subtree_coefficients(h: usize, n: usize) -> usize {
    if h == 0 {
        n
    } else {
        support_len(h, n) - 1
    }
}
