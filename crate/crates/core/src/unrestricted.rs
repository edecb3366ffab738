//! Near-optimal unrestricted synopsis over a quantized value grid.
//!
//! Kept coefficients may take any value on the grid `{m * delta}`; every node
//! tabulates its subtree error for each incoming ancestor sum on the grid and
//! each budget. Incoming sums are carried as integer grid offsets, so they are
//! exact. Sums that leave the grid's range are infeasible.
//!
//! With `delta = eps * M / n^(1/k)` and range `2 n^(1/k) M`, rounding any
//! synopsis onto the grid costs at most `delta * n^(1/k)` per rounded
//! coefficient on a root-to-leaf path, which gives the additive `eps * M`
//! guarantee.

use crate::error::{Result, SynopsisError};
use crate::haar::{subtree_coefficients, Signal};
use crate::metrics::{Combine, MaxCombine, Metric, SumCombine};
use crate::restricted::{min_convolve, prefix_min, Stats, SynopsisSolution};
use crate::scalar::Scalar;

/// Largest grid accepted unless configured otherwise.
pub const DEFAULT_GRID_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    /// Refuse grids with more incoming-value points than this.
    pub cap: usize,
    /// Widen the range of incoming ancestor sums beyond the coefficient range.
    pub range_multiplier: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            cap: DEFAULT_GRID_CAP,
            range_multiplier: 1.0,
        }
    }
}

/// Symmetric grid `{m * delta : |m| <= steps}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueGrid<T> {
    pub delta: T,
    /// Largest admissible coefficient magnitude, `V`.
    pub half_range: T,
    /// Coefficient values are `m * delta` with `|m| <= steps`.
    pub steps: i64,
    /// Incoming ancestor sums are `m * delta` with `|m| <= value_steps`.
    pub value_steps: i64,
}

impl<T: Scalar> ValueGrid<T> {
    /// Number of coefficient values, `|R|`.
    pub fn count(&self) -> usize {
        (2 * self.steps + 1) as usize
    }

    /// Number of tabulated incoming values.
    pub fn value_count(&self) -> usize {
        (2 * self.value_steps + 1) as usize
    }

    pub fn point(&self, m: i64) -> T {
        T::of_int(m) * self.delta
    }

    /// Grid offset of the point nearest to `x` (not clamped to the range).
    pub fn nearest(&self, x: T) -> i64 {
        if self.delta == T::zero() {
            return 0;
        }
        (x / self.delta).round().to_i64().unwrap_or(0)
    }

    pub fn contains(&self, m: i64) -> bool {
        m.abs() <= self.value_steps
    }
}

/// Grid for additive error `eps * M`, `M = max |x_i|`.
///
/// Weighted signals use `delta * min w` and `V / min w`. An all-zero signal
/// gets the single point `{0}`.
pub fn build_grid<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    epsilon: f64,
    config: GridConfig,
) -> Result<ValueGrid<T>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(SynopsisError::InvalidEpsilon(epsilon));
    }
    let m = signal.max_abs();
    if m == T::zero() {
        return Ok(ValueGrid {
            delta: T::zero(),
            half_range: T::zero(),
            steps: 0,
            value_steps: 0,
        });
    }
    let root: T = metric.root_of(signal.len());
    let min_w = signal.min_weight();
    let delta = T::of(epsilon) * m * min_w / root;
    let half_range = T::of(2.0) * root * m / min_w;
    let ratio = (half_range / delta).as_f64();
    let steps_f = (ratio + 1e-9).floor();
    let value_steps_f = (ratio * config.range_multiplier.max(1.0) + 1e-9).floor();
    let too_large = |steps: f64| SynopsisError::GridTooLarge {
        count: if steps < 1e15 { 2 * steps as usize + 1 } else { usize::MAX },
        cap: config.cap,
    };
    if 2.0 * value_steps_f + 1.0 > config.cap as f64 {
        return Err(too_large(value_steps_f));
    }
    Ok(ValueGrid {
        delta,
        half_range,
        steps: steps_f as i64,
        value_steps: value_steps_f as i64,
    })
}

/// Subtree errors indexed by incoming grid value and budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueBudgetTable<T> {
    offset: i64,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> ValueBudgetTable<T> {
    fn new(value_steps: i64, width: usize) -> Self {
        let rows = (2 * value_steps + 1) as usize;
        Self {
            offset: value_steps,
            width,
            data: vec![T::infinity(); rows * width],
        }
    }

    /// Number of budget columns, `min(B, coefficients in subtree) + 1`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn entries(&self) -> usize {
        self.data.len()
    }

    /// Errors for incoming value `m * delta`, indexed by budget.
    pub fn row(&self, m: i64) -> &[T] {
        let start = (m + self.offset) as usize * self.width;
        &self.data[start..start + self.width]
    }

    fn row_mut(&mut self, m: i64) -> &mut [T] {
        let start = (m + self.offset) as usize * self.width;
        &mut self.data[start..start + self.width]
    }

    /// Accumulated error for incoming value `m * delta` and at most `b` coefficients.
    pub fn get(&self, m: i64, b: usize) -> T {
        self.row(m)[b.min(self.width - 1)]
    }
}

pub struct UnrestrictedSolver<'a, T> {
    signal: &'a Signal<T>,
    metric: Metric,
    budget: usize,
    grid: ValueGrid<T>,
    stats: Stats,
}

impl<'a, T: Scalar> UnrestrictedSolver<'a, T> {
    pub fn new(signal: &'a Signal<T>, metric: Metric, budget: usize, grid: ValueGrid<T>) -> Self {
        Self {
            signal,
            metric,
            budget,
            grid,
            stats: Stats::default(),
        }
    }

    pub fn grid(&self) -> &ValueGrid<T> {
        &self.grid
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    /// Table of heap node `node` (data points are `n..2n`), built post-order
    /// from its children's tables, which are released before returning.
    pub fn solve_node(&mut self, node: usize) -> ValueBudgetTable<T> {
        let table = match self.metric {
            Metric::Lk(_) => self.table::<SumCombine>(node),
            Metric::LInf => self.table::<MaxCombine>(node),
        };
        self.stats.free(table.entries());
        table
    }

    /// Accumulated root errors for budgets `0..=min(B, n)`.
    fn root_profile<C: Combine>(&mut self) -> Vec<T> {
        let child = self.table::<C>(1);
        let len = self.budget.min(self.signal.len()) + 1;
        let mut out = vec![T::infinity(); len];
        self.stats.alloc(len);
        for (b, slot) in out.iter_mut().enumerate() {
            *slot = child.get(0, b);
            if b > 0 {
                for r in 1..=self.grid.steps.min(self.grid.value_steps) {
                    *slot = slot.min(child.get(r, b - 1)).min(child.get(-r, b - 1));
                }
            }
        }
        self.stats.minplus_ops += (len * self.grid.count()) as u64;
        self.stats.free(child.entries() + len);
        out
    }

    /// Best achievable error with at most `budget` grid-valued coefficients.
    pub fn error(&mut self) -> T {
        if self.grid.steps == 0 && self.grid.delta == T::zero() {
            return T::zero();
        }
        let profile = match self.metric {
            Metric::Lk(_) => self.root_profile::<SumCombine>(),
            Metric::LInf => self.root_profile::<MaxCombine>(),
        };
        self.metric.finalize(*profile.last().expect("nonempty"))
    }

    /// Best synopsis, recovered by recomputing each subtree for its fixed
    /// incoming value and budget.
    pub fn extract(&mut self) -> SynopsisSolution<T> {
        if self.grid.delta == T::zero() {
            // all-zero signal
            return SynopsisSolution {
                picks: Vec::new(),
                error: T::zero(),
            };
        }
        match self.metric {
            Metric::Lk(_) => self.extract_all::<SumCombine>(),
            Metric::LInf => self.extract_all::<MaxCombine>(),
        }
    }

    fn extract_all<C: Combine>(&mut self) -> SynopsisSolution<T> {
        let b = self.budget.min(self.signal.len());
        let mut picks = Vec::new();
        let acc = self.extract_root::<C>(b, &mut picks);
        SynopsisSolution {
            picks,
            error: self.metric.finalize(acc),
        }
    }

    /// Chooses the value of coefficient 0 from the table of node 1 and
    /// recurses. Returns the optimal accumulated error.
    fn extract_root<C: Combine>(&mut self, b: usize, picks: &mut Vec<(usize, T)>) -> T {
        let k = self.grid.value_steps;
        let child = self.table::<C>(1);
        let mut best = (child.get(0, b), 0i64);
        if b > 0 {
            for r in (1..=self.grid.steps.min(k)).flat_map(|a| [-a, a]) {
                let val = child.get(r, b - 1);
                if val < best.0 {
                    best = (val, r);
                }
            }
        }
        self.stats.minplus_ops += self.grid.count() as u64;
        let width = child.width();
        self.stats.free(child.entries());
        drop(child);
        let (acc, r) = best;
        if r == 0 {
            self.extract_node::<C>(1, 0, b.min(width - 1), picks);
        } else {
            picks.push((0, self.grid.point(r)));
            self.extract_node::<C>(1, r, (b - 1).min(width - 1), picks);
        }
        acc
    }

    fn width(&self, h: usize) -> usize {
        let n = self.signal.len();
        if h >= n {
            1
        } else {
            self.budget.min(subtree_coefficients(h, n)) + 1
        }
    }

    /// Builds the table of `h`; the returned table is counted as live.
    fn table<C: Combine>(&mut self, h: usize) -> ValueBudgetTable<T> {
        self.stats.node_visits += 1;
        let n = self.signal.len();
        let k = self.grid.value_steps;
        if h >= n {
            let j = h - n;
            let (x, w) = (self.signal.values()[j], self.signal.weights()[j]);
            let mut table = ValueBudgetTable::new(k, 1);
            for m in -k..=k {
                table.row_mut(m)[0] = self.metric.leaf_error(x, self.grid.point(m), w);
            }
            self.stats.alloc(table.entries());
            return table;
        }
        let left = self.table::<C>(2 * h);
        let right = self.table::<C>(2 * h + 1);
        let mut out = ValueBudgetTable::new(k, self.width(h));
        self.stats.alloc(out.entries());
        let mut ops = 0u64;
        if 2 * h >= n {
            // both children are data points: one value per incoming offset
            let (ld, rd) = (&left.data, &right.data);
            for m in -k..=k {
                let at = |d: &[T], m: i64| d[(m + k) as usize];
                let row = out.row_mut(m);
                row[0] = C::combine(at(ld, m), at(rd, m));
                if row.len() > 1 {
                    let reach = self.grid.steps.min(k - m.abs());
                    let mut best = row[0];
                    for a in 1..=reach {
                        let up = C::combine(at(ld, m + a), at(rd, m - a));
                        let down = C::combine(at(ld, m - a), at(rd, m + a));
                        let val = if up < down { up } else { down };
                        best = if val < best { val } else { best };
                    }
                    row[1] = best;
                    ops += 2 * reach as u64;
                }
                ops += 1;
            }
            self.stats.minplus_ops += ops;
            self.stats.free(left.entries() + right.entries());
            return out;
        }
        for m in -k..=k {
            let row = out.row_mut(m);
            ops += min_convolve::<T, C>(left.row(m), right.row(m), row);
            // kept coefficient r: children see m + r and m - r
            let reach = self.grid.steps.min(k - m.abs());
            for r in (1..=reach).flat_map(|a| [-a, a]) {
                ops += min_convolve::<T, C>(left.row(m + r), right.row(m - r), &mut row[1..]);
            }
            prefix_min(row);
        }
        self.stats.minplus_ops += ops;
        self.stats.free(left.entries() + right.entries());
        out
    }

    fn extract_node<C: Combine>(&mut self, h: usize, m: i64, b: usize, picks: &mut Vec<(usize, T)>) {
        let n = self.signal.len();
        if b == 0 || h >= n {
            return;
        }
        let k = self.grid.value_steps;
        let coefficient_values = (1..=self.grid.steps).flat_map(|a| [-a, a]);
        let left = self.table::<C>(2 * h);
        let right = self.table::<C>(2 * h + 1);
        let mut ops = 0u64;
        let exc_target = b.min(left.width() + right.width() - 2);
        let (val, split) = best_split::<T, C>(left.row(m), right.row(m), exc_target, &mut ops);
        // (value, coefficient offset, left budget, total child budget)
        let mut best = (val, 0i64, split, exc_target);
        let inc_target = (b - 1).min(left.width() + right.width() - 2);
        for r in coefficient_values {
            let (ml, mr) = (m + r, m - r);
            if ml.abs() > k || mr.abs() > k {
                continue;
            }
            let (val, split) = best_split::<T, C>(left.row(ml), right.row(mr), inc_target, &mut ops);
            if val < best.0 {
                best = (val, r, split, inc_target);
            }
        }
        self.stats.minplus_ops += ops;
        self.stats.free(left.entries() + right.entries());
        drop((left, right));

        let (_, r, split, total) = best;
        if r != 0 {
            picks.push((h, self.grid.point(r)));
        }
        self.extract_node::<C>(2 * h, m + r, split, picks);
        self.extract_node::<C>(2 * h + 1, m - r, total - split, picks);
    }
}

/// Smallest-left-budget minimizer of `left[b'] (+) right[target - b']`, with
/// `target` clamped to the combined width.
#[inline]
fn best_split<T: Scalar, C: Combine>(left: &[T], right: &[T], target: usize, ops: &mut u64) -> (T, usize) {
    let target = target.min(left.len() + right.len() - 2);
    let lo = target.saturating_sub(right.len() - 1);
    let hi = target.min(left.len() - 1);
    *ops += (hi - lo + 1) as u64;
    let mut best = (C::combine(left[lo], right[target - lo]), lo);
    for b in lo + 1..=hi {
        let val = C::combine(left[b], right[target - b]);
        if val < best.0 {
            best = (val, b);
        }
    }
    best
}

/// Near-optimal synopsis with at most `budget` coefficients and additive error
/// `epsilon * max |x_i|`, using the default grid configuration.
pub fn unrestricted_synopsis<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    budget: usize,
    epsilon: f64,
) -> Result<SynopsisSolution<T>> {
    unrestricted_synopsis_with(signal, metric, budget, epsilon, GridConfig::default())
}

pub fn unrestricted_synopsis_with<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    budget: usize,
    epsilon: f64,
    config: GridConfig,
) -> Result<SynopsisSolution<T>> {
    let grid = build_grid(signal, metric, epsilon, config)?;
    Ok(UnrestrictedSolver::new(signal, metric, budget, grid).extract())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> Signal<f64> {
        Signal::new(vec![1.0, 2.0, 3.0, 7.0]).unwrap()
    }

    #[test]
    fn grid_sizes() {
        let g = build_grid(&example(), Metric::L1, 0.5, GridConfig::default()).unwrap();
        assert_eq!(g.delta, 0.875);
        assert_eq!(g.half_range, 56.0);
        assert_eq!(g.count(), 129);

        let g = build_grid(&example(), Metric::LInf, 1.0, GridConfig::default()).unwrap();
        assert_eq!((g.delta, g.half_range, g.count()), (7.0, 14.0, 5));

        let zero = Signal::new(vec![0.0; 4]).unwrap();
        let g = build_grid(&zero, Metric::L2, 0.1, GridConfig::default()).unwrap();
        assert_eq!(g.count(), 1);
        assert_eq!(g.point(0), 0.0);
    }

    #[test]
    fn grid_cap_and_epsilon_validation() {
        let small = GridConfig { cap: 100, ..GridConfig::default() };
        assert!(matches!(
            build_grid(&example(), Metric::L1, 0.5, small),
            Err(SynopsisError::GridTooLarge { count: 129, cap: 100 })
        ));
        assert!(build_grid(&example(), Metric::L1, 0.0, GridConfig::default()).is_err());
        assert!(build_grid(&example(), Metric::L1, f64::NAN, GridConfig::default()).is_err());
    }

    #[test]
    fn range_multiplier_widens_incoming_values_only() {
        let wide = GridConfig { range_multiplier: 2.0, ..GridConfig::default() };
        let g = build_grid(&example(), Metric::LInf, 1.0, wide).unwrap();
        assert_eq!(g.count(), 5);
        assert_eq!(g.value_count(), 9);
    }

    #[test]
    fn leaf_table_is_pointwise_error() {
        let x = example();
        let grid = build_grid(&x, Metric::L1, 1.0, GridConfig::default()).unwrap();
        let mut solver = UnrestrictedSolver::new(&x, Metric::L1, 1, grid);
        let t = solver.solve_node(4 + 3);
        assert_eq!(t.width(), 1);
        for m in [-3, 0, 2] {
            assert_eq!(t.get(m, 0), (7.0 - grid.point(m)).abs());
        }
    }

    #[test]
    fn l1_single_value_beats_restricted() {
        let s = unrestricted_synopsis(&example(), Metric::L1, 1, 0.1).unwrap();
        assert!(s.error >= 7.0 - 1e-9 && s.error <= 7.7, "{}", s.error);
        assert_eq!(s.picks.len(), 1);
        let (index, value) = s.picks[0];
        assert_eq!(index, 0);
        assert!((2.0 - 0.175..=3.0 + 0.175).contains(&value), "{value}");
    }

    #[test]
    fn linf_single_value_beats_restricted() {
        let s = unrestricted_synopsis(&example(), Metric::LInf, 1, 0.1).unwrap();
        assert!(s.error >= 3.0 - 1e-9 && s.error <= 3.7, "{}", s.error);
    }

    #[test]
    fn weighted_l2_example() {
        let x = Signal::with_weights(vec![1.0, 2.0, 3.0, 7.0], vec![0.5, 0.5, 1.5, 1.5]).unwrap();
        let eps = 0.01;
        let s = unrestricted_synopsis(&x, Metric::L2, 1, eps).unwrap();
        let g = build_grid(&x, Metric::L2, eps, GridConfig::default()).unwrap();
        assert!(s.error <= 4.87 + eps * 7.0 + g.delta * 2.0, "{}", s.error);
        assert!(s.error < 5.78);
    }

    #[test]
    fn zero_budget_and_zero_signal() {
        let s = unrestricted_synopsis(&example(), Metric::L2, 0, 0.5).unwrap();
        assert!(s.picks.is_empty());
        assert!((s.error - Metric::L2.norm(&example())).abs() < 1e-12);

        let zero = Signal::new(vec![0.0; 8]).unwrap();
        let s = unrestricted_synopsis(&zero, Metric::L1, 3, 0.5).unwrap();
        assert!(s.picks.is_empty());
        assert_eq!(s.error, 0.0);
    }

    #[test]
    fn picks_reproduce_reported_error() {
        let x: Signal<f64> = Signal::new(vec![3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, -6.0]).unwrap();
        for metric in [Metric::L1, Metric::L2, Metric::LInf] {
            for b in 0..=3 {
                let s = unrestricted_synopsis(&x, metric, b, 1.0).unwrap();
                assert!(s.picks.len() <= b);
                let e = metric.evaluate_synopsis(&x, &s.picks).unwrap();
                assert!((e - s.error).abs() < 1e-9, "{metric} b={b}: {e} vs {}", s.error);
            }
        }
    }

    #[test]
    fn grid_too_large_propagates() {
        let tight = GridConfig { cap: 9, ..GridConfig::default() };
        assert!(unrestricted_synopsis_with(&example(), Metric::L1, 1, 0.1, tight).is_err());
    }
}
