//! Extended-wavelet allocation.
//!
//! Every coefficient index carries one value per dimension. Storing the index
//! with a subset of `j` of its dimensions costs `h + j` units (a shared header
//! plus one unit per value) and earns the sum of the `j` largest benefits of
//! that index. Choosing at most one size per index under a total budget `B` is
//! a multiple-choice knapsack.
//!
//! The knapsack keeps one profit row over space `0..=B` and, for every space
//! at or past the half-way threshold, the item at which its best solution
//! crossed that threshold. The crossing item splits the item list and the
//! budget into two halves that are solved again independently.

use crate::error::{Result, SynopsisError};
use crate::haar::{forward, support_len};
use crate::scalar::Scalar;

/// Per-dimension benefits of one coefficient index, sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCoefficient<T> {
    pub index: usize,
    /// Dimension tag of each sorted benefit.
    pub dims: Vec<usize>,
    pub benefits: Vec<T>,
    /// Coefficient value per sorted entry, when known.
    pub values: Vec<T>,
    prefix: Vec<T>,
}

impl<T: Scalar> MultiCoefficient<T> {
    /// From raw per-dimension benefits (dimension `d` = position `d`).
    pub fn from_benefits(index: usize, benefits: Vec<T>) -> Self {
        Self::build(index, benefits.into_iter().map(|b| (b, T::zero())).collect(), false)
    }

    fn build(index: usize, mut entries: Vec<(T, T)>, with_values: bool) -> Self {
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by(|&a, &b| {
            entries[b]
                .0
                .partial_cmp(&entries[a].0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let sorted: Vec<(T, T)> = order.iter().map(|&d| entries[d]).collect();
        entries.clear();
        let mut prefix = Vec::with_capacity(sorted.len() + 1);
        prefix.push(T::zero());
        for (b, _) in &sorted {
            prefix.push(*prefix.last().expect("nonempty") + *b);
        }
        Self {
            index,
            dims: order,
            benefits: sorted.iter().map(|e| e.0).collect(),
            values: if with_values {
                sorted.iter().map(|e| e.1).collect()
            } else {
                Vec::new()
            },
            prefix,
        }
    }

    pub fn dimensions(&self) -> usize {
        self.benefits.len()
    }

    /// Sum of the `j` largest benefits.
    pub fn profit(&self, j: usize) -> T {
        self.prefix[j.min(self.benefits.len())]
    }
}

/// Transforms each column of an `n x M` data matrix (one row per point).
pub fn coefficients_from_data<T: Scalar>(rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let dims = matrix_width(rows)?;
    let mut out = vec![vec![T::zero(); dims]; rows.len()];
    for d in 0..dims {
        let column: Vec<T> = rows.iter().map(|r| r[d]).collect();
        for (i, c) in forward(&column)?.iter().enumerate() {
            out[i][d] = *c;
        }
    }
    Ok(out)
}

fn matrix_width<T>(rows: &[Vec<T>]) -> Result<usize> {
    let dims = rows.first().map(Vec::len).ok_or(SynopsisError::Empty)?;
    if dims == 0 {
        return Err(SynopsisError::Empty);
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != dims) {
        return Err(SynopsisError::LengthMismatch {
            expected: dims,
            actual: bad.len(),
        });
    }
    Ok(dims)
}

/// Benefit lists from an `n x M` matrix of non-normalized Haar coefficients in
/// heap order. The benefit of a value is its energy under orthonormal scaling,
/// `c^2 * |support|`.
pub fn compute_benefits<T: Scalar>(coeffs: &[Vec<T>]) -> Result<Vec<MultiCoefficient<T>>> {
    matrix_width(coeffs)?;
    let n = coeffs.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(SynopsisError::NotPowerOfTwo { len: n });
    }
    Ok(coeffs
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let scale = T::of_int(support_len(i, n) as i64);
            let entries = row.iter().map(|&c| (c * c * scale, c)).collect();
            MultiCoefficient::build(i, entries, true)
        })
        .collect())
}

/// A candidate: item `item` (position in the item list) stored with `size` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItemSizePair<T> {
    pub item: usize,
    pub size: usize,
    pub profit: T,
    pub cost: usize,
}

/// How many items are kept per size `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateRule {
    /// The `ceil(B / j)` most profitable items of each size.
    TopBudgetOverSize,
    /// The `floor((B - h - j) / (h + 1)) + 1` most profitable items of size
    /// `j`. An optimum using a size-`j` item outside this set would also have
    /// to use every item inside it, which does not fit in `B`.
    #[default]
    Exchange,
}

impl CandidateRule {
    fn keep(self, budget: usize, header: usize, size: usize) -> usize {
        match self {
            CandidateRule::TopBudgetOverSize => budget.div_ceil(size),
            CandidateRule::Exchange => (budget - header - size) / (header + 1) + 1,
        }
    }
}

/// Candidate item-size pairs sorted by `(item, size)`. Pairs that cannot fit
/// or earn nothing are dropped.
pub fn build_candidates<T: Scalar>(
    items: &[MultiCoefficient<T>],
    budget: usize,
    header: usize,
    rule: CandidateRule,
) -> Vec<ItemSizePair<T>> {
    let dims = items.iter().map(MultiCoefficient::dimensions).max().unwrap_or(0);
    let mut pairs = Vec::new();
    let mut ranked: Vec<usize> = Vec::with_capacity(items.len());
    for size in 1..=dims {
        let cost = header + size;
        if cost > budget {
            break;
        }
        ranked.clear();
        ranked.extend((0..items.len()).filter(|&i| {
            items[i].dimensions() >= size && items[i].profit(size) > T::zero()
        }));
        ranked.sort_by(|&a, &b| {
            items[b]
                .profit(size)
                .partial_cmp(&items[a].profit(size))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let keep = rule.keep(budget, header, size).min(items.len());
        pairs.extend(ranked.iter().take(keep).map(|&item| ItemSizePair {
            item,
            size,
            profit: items[item].profit(size),
            cost,
        }));
    }
    pairs.sort_by_key(|p| (p.item, p.size));
    pairs
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationEntry<T> {
    /// Coefficient index.
    pub index: usize,
    /// Stored dimensions, most beneficial first.
    pub dims: Vec<usize>,
    /// Stored values, parallel to `dims` (empty when benefits were given directly).
    pub values: Vec<T>,
    pub profit: T,
    pub cost: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedAllocation<T> {
    pub entries: Vec<AllocationEntry<T>>,
    pub profit: T,
    pub cost: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtendedStats {
    pub candidates: usize,
    /// Profit-row cell updates over all passes.
    pub cell_updates: u64,
    pub passes: u64,
    /// Largest number of row, crossing and candidate entries held at once.
    pub peak_live_entries: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExtendedOptions {
    pub rule: CandidateRule,
}

/// Where a solution first reached the threshold: the candidate taken and
/// the space used before it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Crossing {
    pair: usize,
    before: usize,
}

/// Profit-maximizing allocation of total cost at most `budget`.
pub fn solve_extended<T: Scalar>(
    items: &[MultiCoefficient<T>],
    budget: usize,
    header: usize,
) -> ExtendedAllocation<T> {
    solve_extended_with(items, budget, header, ExtendedOptions::default()).0
}

pub fn solve_extended_with<T: Scalar>(
    items: &[MultiCoefficient<T>],
    budget: usize,
    header: usize,
    options: ExtendedOptions,
) -> (ExtendedAllocation<T>, ExtendedStats) {
    let pairs = build_candidates(items, budget, header, options.rule);
    let mut solver = Knapsack {
        pairs: &pairs,
        stats: ExtendedStats {
            candidates: pairs.len(),
            ..ExtendedStats::default()
        },
    };
    let chosen = solver.solve(budget);
    let entries: Vec<_> = chosen
        .into_iter()
        .map(|p| {
            let item = &items[p.item];
            AllocationEntry {
                index: item.index,
                dims: item.dims[..p.size].to_vec(),
                values: item.values.get(..p.size).map(<[T]>::to_vec).unwrap_or_default(),
                profit: p.profit,
                cost: p.cost,
            }
        })
        .collect();
    let allocation = ExtendedAllocation {
        profit: entries.iter().fold(T::zero(), |acc, e| acc + e.profit),
        cost: entries.iter().map(|e| e.cost).sum(),
        entries,
    };
    (allocation, solver.stats)
}

struct Knapsack<'a, T> {
    pairs: &'a [ItemSizePair<T>],
    stats: ExtendedStats,
}

impl<T: Scalar> Knapsack<'_, T> {
    fn solve(&mut self, budget: usize) -> Vec<ItemSizePair<T>> {
        let mut chosen = Vec::new();
        if budget == 0 || self.pairs.is_empty() {
            return chosen;
        }
        let threshold = budget.div_ceil(2);
        let (profit, crossing) = self.pass(0..self.pairs.len(), budget, threshold);
        // smallest space achieving the best profit
        let best = profit.iter().fold(T::neg_infinity(), |a, &p| a.max(p));
        let space = profit.iter().position(|&p| p == best).unwrap_or(0);
        if space == 0 {
            return chosen;
        }
        if space >= threshold {
            let c = crossing[space].expect("every solution at or past the threshold crossed it");
            self.emit(0..self.pairs.len(), c, space, &mut chosen);
        } else {
            self.extract(0..self.pairs.len(), space, &mut chosen);
        }
        chosen
    }

    /// Appends the pairs of a best solution over `range` of exact cost `space`.
    fn extract(&mut self, range: std::ops::Range<usize>, space: usize, chosen: &mut Vec<ItemSizePair<T>>) {
        if space == 0 {
            return;
        }
        let (_, crossing) = self.pass(range.clone(), space, space.div_ceil(2));
        let c = crossing[space].expect("space is reachable within the range");
        self.emit(range, c, space, chosen);
    }

    fn emit(&mut self, range: std::ops::Range<usize>, c: Crossing, space: usize, chosen: &mut Vec<ItemSizePair<T>>) {
        let pair = self.pairs[c.pair];
        let first = self.pairs[range.start..c.pair]
            .iter()
            .rposition(|p| p.item != pair.item)
            .map_or(range.start, |k| range.start + k + 1);
        let last = self.pairs[c.pair..range.end]
            .iter()
            .position(|p| p.item != pair.item)
            .map_or(range.end, |k| c.pair + k);
        self.extract(range.start..first, c.before, chosen);
        chosen.push(pair);
        self.extract(last..range.end, space - c.before - pair.cost, chosen);
    }

    /// Exact-cost profit row over `range` for spaces `0..=cap`, with the
    /// crossing record of every space `>= threshold`.
    fn pass(
        &mut self,
        range: std::ops::Range<usize>,
        cap: usize,
        threshold: usize,
    ) -> (Vec<T>, Vec<Option<Crossing>>) {
        self.stats.passes += 1;
        let live = 4 * (cap + 1) + self.pairs.len();
        self.stats.peak_live_entries = self.stats.peak_live_entries.max(live);

        let mut profit = vec![T::neg_infinity(); cap + 1];
        profit[0] = T::zero();
        let mut crossing: Vec<Option<Crossing>> = vec![None; cap + 1];
        let (mut next_profit, mut next_crossing) = (profit.clone(), crossing.clone());

        let mut k = range.start;
        while k < range.end {
            let item = self.pairs[k].item;
            let group_end = self.pairs[k..range.end]
                .iter()
                .position(|p| p.item != item)
                .map_or(range.end, |g| k + g);
            next_profit.copy_from_slice(&profit);
            next_crossing.copy_from_slice(&crossing);
            for idx in k..group_end {
                let p = self.pairs[idx];
                if p.cost > cap {
                    continue;
                }
                for z in p.cost..=cap {
                    let from = z - p.cost;
                    if profit[from] == T::neg_infinity() {
                        continue;
                    }
                    let candidate = profit[from] + p.profit;
                    if candidate > next_profit[z] {
                        next_profit[z] = candidate;
                        next_crossing[z] = match crossing[from] {
                            Some(c) => Some(c),
                            None if from < threshold && z >= threshold => Some(Crossing { pair: idx, before: from }),
                            None => None,
                        };
                    }
                }
                self.stats.cell_updates += (cap + 1 - p.cost) as u64;
            }
            std::mem::swap(&mut profit, &mut next_profit);
            std::mem::swap(&mut crossing, &mut next_crossing);
            k = group_end;
        }
        (profit, crossing)
    }
}
