//! Optimal restricted B-term synopsis.
//!
//! The subtree dynamic program never stores a table indexed by the set of
//! chosen ancestors. A node is evaluated once per incoming value `v` (the signed
//! sum of the ancestors kept above it) and returns an error profile indexed by
//! budget; the caller consumes the two child profiles and drops them. Evaluation
//! is left-before-right post-order, so at any time each level of the recursion
//! holds at most its own output plus one finished child profile.
//!
//! The coefficients themselves are recovered by recomputation: solving a node
//! for a given `(v, b)` fixes whether its coefficient is kept and how the
//! remaining budget splits, after which the two children are solved
//! independently for their own `(v, b)`. Only that split is remembered per level.

use std::mem;

use crate::haar::{subtree_coefficients, CoefficientVector, Signal};
use crate::metrics::{AbsSum, Combine, MaxCombine, Metric, SquareSum, SumCombine};
use crate::scalar::Scalar;

/// Accumulated subtree error indexed by budget `b`, meaning "at most `b`
/// coefficients kept in the subtree". Nonincreasing in `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProfile<T>(Vec<T>);

impl<T: Scalar> ErrorProfile<T> {
    pub fn entries(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry for budget `b`; budgets past the end reuse the last entry.
    pub fn at(&self, b: usize) -> T {
        self.0[b.min(self.0.len() - 1)]
    }

    /// Smallest budget reaching the minimum, and that minimum.
    pub fn best(&self) -> (usize, T) {
        let last = *self.0.last().expect("profiles are never empty");
        let b = self.0.iter().position(|&e| e <= last).unwrap_or(0);
        (b, last)
    }
}

/// Instrumentation of one solver instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Evaluations of a (node, incoming value) pair, data points included.
    pub node_visits: u64,
    /// Largest number of profile or table entries alive at once.
    pub peak_live_entries: usize,
    /// Candidate split evaluations inside the min-plus (or min-max) convolutions.
    pub minplus_ops: u64,
    live: usize,
}

impl Stats {
    #[inline]
    pub(crate) fn alloc(&mut self, entries: usize) {
        self.live += entries;
        self.peak_live_entries = self.peak_live_entries.max(self.live);
    }

    #[inline]
    pub(crate) fn free(&mut self, entries: usize) {
        self.live -= entries;
    }

    /// Fold in the counters of an independent evaluation.
    pub fn merge(&mut self, other: &Stats) {
        self.node_visits += other.node_visits;
        self.minplus_ops += other.minplus_ops;
        self.peak_live_entries = self.peak_live_entries.max(other.peak_live_entries);
    }
}

/// Kept coefficients and the error they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct SynopsisSolution<T> {
    /// `(coefficient index, value)`, left subtrees before right subtrees.
    pub picks: Vec<(usize, T)>,
    pub error: T,
}

impl<T: Scalar> SynopsisSolution<T> {
    pub fn budget_used(&self) -> usize {
        self.picks.len()
    }
}

/// How the best budget split of a min-max convolution is located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitSearch {
    /// Scan every split. Exact for every metric.
    #[default]
    Linear,
    /// Binary search for the crossing of the two monotone profiles. Only
    /// used for `l_inf`; `l_k` metrics always scan.
    Binary,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RestrictedOptions {
    pub split_search: SplitSearch,
}

/// `out[b] = min(out[b], min_{i + j = b} left[i] (+) right[j])`, returning the
/// number of pairs combined. A running minimum over `out` afterwards turns
/// this into "at most `b`".
#[inline]
pub(crate) fn min_convolve<T: Scalar, C: Combine>(left: &[T], right: &[T], out: &mut [T]) -> u64 {
    let mut ops = 0;
    for (i, &l) in left.iter().enumerate().take(out.len()) {
        let span = right.len().min(out.len() - i);
        ops += span;
        for (o, &r) in out[i..i + span].iter_mut().zip(&right[..span]) {
            let val = C::combine(l, r);
            *o = if val < *o { val } else { *o };
        }
    }
    ops as u64
}

/// Running minimum, in place.
#[inline]
pub(crate) fn prefix_min<T: Scalar>(out: &mut [T]) {
    for b in 1..out.len() {
        if out[b - 1] < out[b] {
            out[b] = out[b - 1];
        }
    }
}

#[inline(always)]
fn lesser<T: PartialOrd>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}

/// Two reusable child buffers per tree depth.
#[derive(Default)]
struct Frame<T> {
    left: Vec<T>,
    right: Vec<T>,
}

pub struct RestrictedSolver<'a, T> {
    signal: &'a Signal<T>,
    coeffs: CoefficientVector<T>,
    metric: Metric,
    budget: usize,
    binary: bool,
    frames: Vec<Frame<T>>,
    stats: Stats,
}

impl<'a, T: Scalar> RestrictedSolver<'a, T> {
    pub fn new(signal: &'a Signal<T>, metric: Metric, budget: usize) -> Self {
        Self::with_options(signal, metric, budget, RestrictedOptions::default())
    }

    pub fn with_options(
        signal: &'a Signal<T>,
        metric: Metric,
        budget: usize,
        options: RestrictedOptions,
    ) -> Self {
        let n = signal.len();
        let depths = n.trailing_zeros() as usize + 1;
        // frame d holds the child profiles of a node at depth d
        let frames = (0..depths)
            .map(|d| {
                let child = if d == 0 { 1 } else { 1 << d };
                let len = budget.min(subtree_coefficients(child, n)) + 1;
                Frame {
                    left: vec![T::zero(); len],
                    right: vec![T::zero(); len],
                }
            })
            .collect();
        Self {
            signal,
            coeffs: signal.transform(),
            metric,
            budget,
            binary: options.split_search == SplitSearch::Binary && metric == Metric::LInf,
            frames,
            stats: Stats::default(),
        }
    }

    pub fn coefficients(&self) -> &CoefficientVector<T> {
        &self.coeffs
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = Stats::default();
    }

    /// Profile of heap node `node` (data points are `n..2n`) when the chosen
    /// ancestors contribute `v` to its support.
    pub fn solve_subtree(&mut self, node: usize, v: T) -> ErrorProfile<T> {
        let n = self.signal.len();
        assert!(node < 2 * n, "node {node} outside a tree of {n} points");
        let len = if node >= n {
            1
        } else {
            self.budget.min(subtree_coefficients(node, n)) + 1
        };
        let mut out = vec![T::zero(); len];
        self.stats.alloc(len);
        match self.metric {
            Metric::Lk(1) => self.solve_into::<AbsSum>(node, v, &mut out),
            Metric::Lk(2) => self.solve_into::<SquareSum>(node, v, &mut out),
            Metric::Lk(_) => self.solve_into::<SumCombine>(node, v, &mut out),
            Metric::LInf => self.solve_into::<MaxCombine>(node, v, &mut out),
        }
        self.stats.free(len);
        ErrorProfile(out)
    }

    /// Optimal error over synopses of at most `budget` coefficients, and the
    /// smallest budget achieving it.
    pub fn error(&mut self) -> (T, usize) {
        let (b, acc) = self.solve_subtree(0, T::zero()).best();
        (self.metric.finalize(acc), b)
    }

    /// Optimal synopsis by recomputation, left subtree picks emitted first.
    pub fn extract(&mut self) -> SynopsisSolution<T> {
        let mut picks = Vec::new();
        let acc = match self.metric {
            Metric::Lk(1) => self.extract_root::<AbsSum>(&mut picks),
            Metric::Lk(2) => self.extract_root::<SquareSum>(&mut picks),
            Metric::Lk(_) => self.extract_root::<SumCombine>(&mut picks),
            Metric::LInf => self.extract_root::<MaxCombine>(&mut picks),
        };
        SynopsisSolution {
            picks,
            error: self.metric.finalize(acc),
        }
    }

    /// Solves node 1 for both choices at node 0, picks the smallest optimal
    /// budget, and recurses. Returns the optimal accumulated error.
    fn extract_root<C: Combine>(&mut self, picks: &mut Vec<(usize, T)>) -> T {
        let c = self.coeffs[0];
        let len = self.budget.min(self.signal.len()) + 1;
        let mut frame = mem::take(&mut self.frames[0]);
        let width = frame.left.len();
        self.stats.node_visits += 1;
        self.stats.alloc(2 * width);
        self.solve_into::<C>(1, T::zero(), &mut frame.right);
        if len > 1 {
            self.solve_into::<C>(1, c, &mut frame.left);
        }
        let (exclude, include) = (&frame.right, &frame.left);
        let mut best = (exclude[0], 0, false);
        for b in 1..len {
            let exc = exclude[b.min(width - 1)];
            let inc = include[(b - 1).min(width - 1)];
            let val = if inc < exc { inc } else { exc };
            if val < best.0 {
                best = (val, b, inc < exc);
            }
        }
        self.stats.minplus_ops += 2 * len as u64;
        self.stats.free(2 * width);
        self.frames[0] = frame;

        let (acc, b, keep) = best;
        if keep {
            picks.push((0, c));
            self.extract_node::<C>(1, c, (b - 1).min(width - 1), picks);
        } else {
            self.extract_node::<C>(1, T::zero(), b.min(width - 1), picks);
        }
        acc
    }

    #[inline(always)]
    fn leaf<C: Combine>(&self, j: usize, v: T) -> T {
        C::leaf(self.metric, self.signal.values()[j], v, self.signal.weights()[j])
    }

    /// `[exclude, best]` profile of a node over data points `j, j + 1`.
    #[inline(always)]
    fn pair<C: Combine>(&self, j: usize, v: T, c: T) -> [T; 2] {
        let (x, w) = (&self.signal.values()[j..j + 2], &self.signal.weights()[j..j + 2]);
        let m = self.metric;
        let exclude = C::combine(C::leaf(m, x[0], v, w[0]), C::leaf(m, x[1], v, w[1]));
        let include = C::combine(C::leaf(m, x[0], v + c, w[0]), C::leaf(m, x[1], v - c, w[1]));
        [exclude, lesser(include, exclude)]
    }

    fn solve_into<C: Combine>(&mut self, h: usize, v: T, out: &mut [T]) {
        self.stats.node_visits += 1;
        let n = self.signal.len();
        if h >= n {
            out[0] = self.leaf::<C>(h - n, v);
            return;
        }
        let c = self.coeffs[h];
        if h == 0 {
            return self.solve_root::<C>(v, c, out);
        }
        if 2 * h < n && 4 * h >= n {
            return self.solve_quad::<C>(h, v, c, out);
        }
        if 2 * h >= n {
            // both children are data points; evaluate them in place
            self.stats.node_visits += 4;
            self.stats.alloc(2);
            self.stats.free(2);
            let p = self.pair::<C>(2 * h - n, v, c);
            out[0] = p[0];
            self.stats.minplus_ops += 1;
            if out.len() > 1 {
                out[1] = p[1];
                self.stats.minplus_ops += 1;
            }
            return;
        }

        let depth = h.ilog2() as usize + 1;
        let mut frame = mem::take(&mut self.frames[depth]);
        let width = frame.left.len();
        out.fill(T::infinity());

        // coefficient kept: children see v + c and v - c
        self.solve_children::<C>(h, v + c, v - c, &mut frame);
        if self.binary {
            for b in 1..out.len() {
                let (val, _) = self.best_split::<C>(&frame.left, &frame.right, b - 1);
                out[b] = val;
            }
        } else {
            self.convolve_into::<C>(&frame.left, &frame.right, &mut out[1..]);
        }
        self.stats.free(2 * width);

        // coefficient dropped
        self.solve_children::<C>(h, v, v, &mut frame);
        if self.binary {
            for (b, slot) in out.iter_mut().enumerate() {
                let (val, _) = self.best_split::<C>(&frame.left, &frame.right, b);
                if val < *slot {
                    *slot = val;
                }
            }
        } else {
            self.convolve_into::<C>(&frame.left, &frame.right, out);
            prefix_min(out);
        }
        self.stats.free(2 * width);
        self.frames[depth] = frame;
    }

    /// A node over four data points, with the work of its two leaf-parent
    /// children done in place. Counters match the general recursion.
    fn solve_quad<C: Combine>(&mut self, h: usize, v: T, c: T, out: &mut [T]) {
        let n = self.signal.len();
        let j = 4 * h - n;
        let (ca, cb) = (self.coeffs[2 * h], self.coeffs[2 * h + 1]);
        let child = out.len().min(2);
        // per option: two leaf-parent children, each with two data points
        self.stats.node_visits += 20;
        self.stats.alloc(2 * child + 2);
        self.stats.free(2 * child + 2);

        let x: [T; 4] = self.signal.values()[j..j + 4].try_into().expect("four points");
        let w: [T; 4] = self.signal.weights()[j..j + 4].try_into().expect("four points");
        let m = self.metric;
        // e[o][i][k]: point k, node coefficient kept (o), child coefficient kept (i)
        let base = [[v, v, v, v], [v + c, v + c, v - c, v - c]];
        let step = [ca, -ca, cb, -cb];
        let mut e = [[[T::zero(); 4]; 2]; 2];
        for o in 0..2 {
            for k in 0..4 {
                e[o][0][k] = C::leaf(m, x[k], base[o][k], w[k]);
                e[o][1][k] = C::leaf(m, x[k], base[o][k] + step[k], w[k]);
            }
        }
        let profile = |e: &[[T; 4]; 2], k: usize| {
            let exclude = C::combine(e[0][k], e[0][k + 1]);
            [exclude, lesser(C::combine(e[1][k], e[1][k + 1]), exclude)]
        };
        let (ea, eb) = (profile(&e[0], 0), profile(&e[0], 2));
        out[0] = C::combine(ea[0], eb[0]);
        let mut ops = 2 * child as u64 + 1;
        if out.len() > 1 {
            let (ia, ib) = (profile(&e[1], 0), profile(&e[1], 2));
            ops += 2 * child as u64 + 7;
            let inc = [
                C::combine(ia[0], ib[0]),
                lesser(C::combine(ia[0], ib[1]), C::combine(ia[1], ib[0])),
                C::combine(ia[1], ib[1]),
            ];
            let exc = [
                lesser(C::combine(ea[0], eb[1]), C::combine(ea[1], eb[0])),
                C::combine(ea[1], eb[1]),
            ];
            out[1] = lesser(lesser(inc[0], exc[0]), out[0]);
            if out.len() > 2 {
                out[2] = lesser(lesser(inc[1], exc[1]), out[1]);
            }
            if out.len() > 3 {
                out[3] = lesser(inc[2], out[2]);
            }
        }
        self.stats.minplus_ops += ops;
    }

    fn solve_children<C: Combine>(&mut self, h: usize, vl: T, vr: T, frame: &mut Frame<T>) {
        self.stats.alloc(frame.left.len());
        self.solve_into::<C>(2 * h, vl, &mut frame.left);
        self.stats.alloc(frame.right.len());
        self.solve_into::<C>(2 * h + 1, vr, &mut frame.right);
    }

    /// Node 0 has the single child node 1 and adds its value to every point.
    fn solve_root<C: Combine>(&mut self, v: T, c: T, out: &mut [T]) {
        let mut frame = mem::take(&mut self.frames[0]);
        let width = frame.left.len();
        out.fill(T::infinity());
        if out.len() > 1 {
            self.stats.alloc(width);
            self.solve_into::<C>(1, v + c, &mut frame.left);
            for b in 1..out.len() {
                out[b] = frame.left[(b - 1).min(width - 1)];
            }
            self.stats.free(width);
        }
        self.stats.alloc(width);
        self.solve_into::<C>(1, v, &mut frame.left);
        for (b, slot) in out.iter_mut().enumerate() {
            *slot = slot.min(frame.left[b.min(width - 1)]);
        }
        self.stats.free(width);
        self.stats.minplus_ops += 2 * out.len() as u64;
        self.frames[0] = frame;
    }

    #[inline]
    fn convolve_into<C: Combine>(&mut self, left: &[T], right: &[T], out: &mut [T]) {
        self.stats.minplus_ops += min_convolve::<T, C>(left, right, out);
    }

    /// Best `(value, left budget)` for a combined budget of at most `target`.
    /// Ties go to the smaller left budget.
    #[inline]
    fn best_split<C: Combine>(&mut self, left: &[T], right: &[T], target: usize) -> (T, usize) {
        let target = target.min(left.len() + right.len() - 2);
        let lo = target.saturating_sub(right.len() - 1);
        let hi = target.min(left.len() - 1);
        if self.binary {
            return self.crossing_split(left, right, target, lo, hi);
        }
        self.stats.minplus_ops += (hi - lo + 1) as u64;
        let mut best = (C::combine(left[lo], right[target - lo]), lo);
        for b in lo + 1..=hi {
            let val = C::combine(left[b], right[target - b]);
            if val < best.0 {
                best = (val, b);
            }
        }
        best
    }

    /// Min-max split by binary search: `left[b]` falls and `right[target - b]`
    /// rises with `b`, so the maximum of the two is unimodal.
    fn crossing_split(&mut self, left: &[T], right: &[T], target: usize, lo: usize, hi: usize) -> (T, usize) {
        let mut probes = 0u64;
        // first b with left[b] <= right[target - b]
        let (mut a, mut z) = (lo, hi + 1);
        while a < z {
            probes += 1;
            let mid = (a + z) / 2;
            if left[mid] <= right[target - mid] {
                z = mid;
            } else {
                a = mid + 1;
            }
        }
        let cross = a;
        let mut first_at_most = |value: T, end: usize| {
            let (mut a, mut z) = (lo, end);
            while a < z {
                probes += 1;
                let mid = (a + z) / 2;
                if left[mid] <= value {
                    z = mid;
                } else {
                    a = mid + 1;
                }
            }
            a
        };
        let result = if cross > hi {
            let value = left[hi];
            (value, first_at_most(value, hi))
        } else if cross == lo {
            (right[target - lo], lo)
        } else {
            let before = left[cross - 1];
            let at = right[target - cross];
            if at < before {
                (at, cross)
            } else {
                (before, first_at_most(before, cross - 1))
            }
        };
        self.stats.minplus_ops += probes.max(1);
        result
    }

    fn extract_node<C: Combine>(&mut self, h: usize, v: T, b: usize, picks: &mut Vec<(usize, T)>) {
        let n = self.signal.len();
        if b == 0 || h >= n {
            return;
        }
        let c = self.coeffs[h];
        if 2 * h >= n {
            let (l, r) = (2 * h - n, 2 * h + 1 - n);
            let exclude = C::combine(self.leaf::<C>(l, v), self.leaf::<C>(r, v));
            let include = C::combine(self.leaf::<C>(l, v + c), self.leaf::<C>(r, v - c));
            if include < exclude {
                picks.push((h, c));
            }
            return;
        }

        let depth = h.ilog2() as usize + 1;
        let mut frame = mem::take(&mut self.frames[depth]);
        self.solve_children::<C>(h, v + c, v - c, &mut frame);
        let inc_target = (b - 1).min(frame.left.len() + frame.right.len() - 2);
        let (include, inc_split) = self.best_split::<C>(&frame.left, &frame.right, inc_target);
        self.solve_children::<C>(h, v, v, &mut frame);
        let exc_target = b.min(frame.left.len() + frame.right.len() - 2);
        let (exclude, exc_split) = self.best_split::<C>(&frame.left, &frame.right, exc_target);
        let width = frame.left.len() + frame.right.len();
        self.stats.free(2 * width);
        self.frames[depth] = frame;

        if include < exclude {
            picks.push((h, c));
            self.extract_node::<C>(2 * h, v + c, inc_split, picks);
            self.extract_node::<C>(2 * h + 1, v - c, inc_target - inc_split, picks);
        } else {
            self.extract_node::<C>(2 * h, v, exc_split, picks);
            self.extract_node::<C>(2 * h + 1, v, exc_target - exc_split, picks);
        }
    }
}

/// Optimal restricted error with at most `budget` coefficients, and the
/// smallest budget achieving it.
pub fn restricted_error<T: Scalar>(signal: &Signal<T>, metric: Metric, budget: usize) -> (T, usize) {
    RestrictedSolver::new(signal, metric, budget).error()
}

/// Optimal restricted synopsis with at most `budget` coefficients.
pub fn extract_restricted<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    budget: usize,
) -> SynopsisSolution<T> {
    RestrictedSolver::new(signal, metric, budget).extract()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig(x: &[f64]) -> Signal<f64> {
        Signal::new(x.to_vec()).unwrap()
    }

    /// Exhaustive minimum over coefficient subsets, written against the
    /// transform and the metric only.
    fn exhaustive(signal: &Signal<f64>, metric: Metric, budget: usize) -> f64 {
        let n = signal.len();
        let coeffs = signal.transform();
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize <= budget)
            .map(|mask| {
                let picks: Vec<_> = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| (i, coeffs[i]))
                    .collect();
                metric.evaluate_synopsis(signal, &picks).unwrap()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn single_coefficient_examples() {
        let x = sig(&[1.0, 2.0, 3.0, 7.0]);
        let (e, b) = restricted_error(&x, Metric::L1, 1);
        assert!((e - 7.5).abs() < 1e-12);
        assert_eq!(b, 1);
        let s = extract_restricted(&x, Metric::L1, 1);
        assert_eq!(s.picks, vec![(0, 3.25)]);
        assert!((s.error - 7.5).abs() < 1e-12);

        let (e, _) = restricted_error(&x, Metric::LInf, 1);
        assert!((e - 3.75).abs() < 1e-12);
    }

    #[test]
    fn weighted_single_coefficient() {
        let x = Signal::with_weights(vec![1.0, 2.0, 3.0, 7.0], vec![0.5, 0.5, 1.5, 1.5]).unwrap();
        let (e, _): (f64, _) = restricted_error(&x, Metric::L2, 1);
        assert!((e - 5.78).abs() < 0.01, "{e}");
    }

    #[test]
    fn empty_and_full_budgets() {
        let x = sig(&[1.0, 2.0, 3.0, 7.0]);
        for metric in [Metric::L1, Metric::L2, Metric::LInf] {
            let (e, b) = restricted_error(&x, metric, 0);
            assert!((e - metric.norm(&x)).abs() < 1e-12);
            assert_eq!(b, 0);
            let s = extract_restricted(&x, metric, 4);
            assert!(s.error < 1e-12);
            assert_eq!(s.picks.len(), 4);
            assert!(extract_restricted(&x, metric, 0).picks.is_empty());
            assert!(restricted_error(&x, metric, 100).0 < 1e-12);
        }
    }

    #[test]
    fn constant_signal_keeps_the_average() {
        let x = sig(&[2.5; 8]);
        let s = extract_restricted(&x, Metric::L2, 1);
        assert_eq!(s.picks, vec![(0, 2.5)]);
        assert_eq!(s.error, 0.0);
    }

    #[test]
    fn full_budget_profile_reaches_zero() {
        let x = sig(&[4.0, -1.0, 2.0, 0.5, 3.0, 3.0, -2.0, 1.0]);
        let mut solver = RestrictedSolver::new(&x, Metric::L1, 8);
        let p = solver.solve_subtree(0, 0.0);
        assert_eq!(p.len(), 9);
        assert!(p.at(8) < 1e-12);
        assert!(p.entries().windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = [2, 4, 8][rng.gen_range(0..3)];
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let s = sig(&x);
            for metric in [Metric::L1, Metric::L2, Metric::Lk(3), Metric::LInf] {
                for b in 0..=n {
                    let (e, _) = restricted_error(&s, metric, b);
                    let want = exhaustive(&s, metric, b);
                    assert!((e - want).abs() < 1e-9, "{metric} b={b}: {e} vs {want}");
                    let sol = extract_restricted(&s, metric, b);
                    assert!(sol.picks.len() <= b);
                    let re = metric.evaluate_synopsis(&s, &sol.picks).unwrap();
                    assert!((re - sol.error).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn binary_split_search_agrees_with_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = 1 << rng.gen_range(2..=6);
            // coarse values produce many ties
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
            let s = sig(&x);
            for b in [1, 2, 3, 5, n] {
                let opts = RestrictedOptions { split_search: SplitSearch::Binary };
                let mut fast = RestrictedSolver::with_options(&s, Metric::LInf, b, opts);
                let mut slow = RestrictedSolver::new(&s, Metric::LInf, b);
                assert_eq!(fast.solve_subtree(0, 0.0), slow.solve_subtree(0, 0.0));
                assert_eq!(fast.extract(), slow.extract());
                if b == n && n >= 32 {
                    assert!(fast.stats().minplus_ops < slow.stats().minplus_ops);
                }
            }
        }
    }

    #[test]
    fn picks_are_ordered_left_before_right() {
        let x = sig(&[9.0, -3.0, 4.0, 4.0, -7.0, 2.0, 8.0, 1.0]);
        let s = extract_restricted(&x, Metric::L1, 5);
        // pre-order over heap indices: every pick is visited before any pick
        // in a later sibling subtree
        let key = |i: usize| {
            if i == 0 {
                return (0, 0);
            }
            let r = crate::haar::support(i, 8);
            (r.start, usize::MAX - r.len())
        };
        assert!(s.picks.windows(2).all(|w| key(w[0].0) <= key(w[1].0)));
    }

    #[test]
    fn single_precision_solve() {
        let x = Signal::new(vec![1.0f32, 2.0, 3.0, 7.0]).unwrap();
        let (e, _) = restricted_error(&x, Metric::L1, 1);
        assert!((e - 7.5).abs() < 1e-5);
    }
}
