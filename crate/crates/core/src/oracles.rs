//! Exhaustive reference solvers for small instances.
//!
//! These enumerate the feasible solutions directly and only rely on the
//! transform and the error metrics, never on the dynamic programs they check.

use crate::error::{Result, SynopsisError};
use crate::extended::MultiCoefficient;
use crate::haar::{leaf_path, Signal};
use crate::metrics::Metric;
use crate::scalar::Scalar;
use crate::unrestricted::ValueGrid;

pub const MAX_RESTRICTED_LEN: usize = 20;
pub const MAX_HISTOGRAM_LEN: usize = 14;
pub const MAX_EXTENDED_ITEMS: usize = 8;
/// Upper bound on the number of assignments any oracle enumerates.
pub const MAX_ENUMERATION: f64 = 4.0e6;

fn too_large(what: &'static str, detail: String) -> SynopsisError {
    SynopsisError::InstanceTooLarge { what, detail }
}

/// Best restricted synopsis with at most `budget` coefficients: the error and
/// the kept coefficient indices.
pub fn brute_restricted<T: Scalar>(signal: &Signal<T>, metric: Metric, budget: usize) -> Result<(T, Vec<usize>)> {
    let profile = brute_restricted_profile(signal, metric)?;
    Ok(profile[budget.min(signal.len())].clone())
}

/// For every budget `0..=n`, the best restricted error and subset.
pub fn brute_restricted_profile<T: Scalar>(signal: &Signal<T>, metric: Metric) -> Result<Vec<(T, Vec<usize>)>> {
    let n = signal.len();
    if n > MAX_RESTRICTED_LEN {
        return Err(too_large("restricted oracle", format!("n = {n} > {MAX_RESTRICTED_LEN}")));
    }
    let coeffs = signal.transform();
    let mut best: Vec<(T, u32)> = vec![(T::infinity(), 0); n + 1];
    let mut picks = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << n) {
        picks.clear();
        picks.extend((0..n).filter(|i| mask >> i & 1 == 1).map(|i| (i, coeffs[i])));
        let e = metric.evaluate_synopsis(signal, &picks)?;
        let size = picks.len();
        if e < best[size].0 {
            best[size] = (e, mask);
        }
    }
    let mut out: Vec<(T, Vec<usize>)> = Vec::with_capacity(n + 1);
    for (e, mask) in best {
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        match out.last() {
            Some(prev) if prev.0 <= e => out.push(prev.clone()),
            _ => out.push((e, subset)),
        }
    }
    Ok(out)
}

/// Best synopsis of at most `budget` coefficients valued `m * delta`,
/// `0 < |m| <= grid.steps`, such that every partial ancestor sum along every
/// root-to-leaf path stays within `grid.value_steps` grid steps.
pub fn brute_unrestricted_on_grid<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    budget: usize,
    grid: &ValueGrid<T>,
) -> Result<(T, Vec<(usize, T)>)> {
    enumerate_grid(signal, metric, budget, grid, Some(grid.value_steps))
}

/// As [`brute_unrestricted_on_grid`] without the partial-sum range limit.
pub fn brute_unrestricted_unconstrained<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    budget: usize,
    grid: &ValueGrid<T>,
) -> Result<(T, Vec<(usize, T)>)> {
    enumerate_grid(signal, metric, budget, grid, None)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn enumerate_grid<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    budget: usize,
    grid: &ValueGrid<T>,
    limit: Option<i64>,
) -> Result<(T, Vec<(usize, T)>)> {
    let n = signal.len();
    let budget = budget.min(n);
    let nonzero = (grid.count() - 1) as f64;
    let total: f64 = (0..=budget).map(|s| binomial(n, s) * nonzero.powi(s as i32)).sum();
    if total > MAX_ENUMERATION {
        return Err(too_large("grid oracle", format!("{total:.3e} assignments")));
    }
    let paths: Vec<Vec<(usize, i64)>> = (0..n)
        .map(|j| Ok(leaf_path(j, n)?.into_iter().map(|(h, s)| (h, s.as_i64())).collect()))
        .collect::<Result<_>>()?;
    let values: Vec<i64> = (1..=grid.steps).flat_map(|a| [-a, a]).collect();

    let mut best = (metric.norm(signal), Vec::new());
    let mut offsets = vec![0i64; n];
    let mut chosen: Vec<usize> = Vec::new();
    let mut approx = vec![T::zero(); n];
    // subsets in lexicographic order, each with every value assignment
    let mut stack: Vec<usize> = Vec::new();
    loop {
        // assignments for the current subset
        if !chosen.is_empty() {
            let mut digits = vec![0usize; chosen.len()];
            'assign: loop {
                for (d, &h) in digits.iter().zip(&chosen) {
                    offsets[h] = values[*d];
                }
                if let Some(e) = evaluate_offsets(signal, metric, grid, &paths, &offsets, limit, &mut approx) {
                    if e < best.0 {
                        let picks = chosen.iter().map(|&h| (h, grid.point(offsets[h]))).collect();
                        best = (e, picks);
                    }
                }
                for d in digits.iter_mut() {
                    *d += 1;
                    if *d < values.len() {
                        continue 'assign;
                    }
                    *d = 0;
                }
                break;
            }
            for &h in &chosen {
                offsets[h] = 0;
            }
        }
        // next subset of size <= budget
        let next = stack.last().map_or(0, |&h| h + 1);
        if stack.len() < budget && next < n && !values.is_empty() {
            stack.push(next);
        } else {
            loop {
                match stack.pop() {
                    None => return Ok(best),
                    Some(h) if h + 1 < n => {
                        stack.push(h + 1);
                        break;
                    }
                    Some(_) => {}
                }
            }
        }
        chosen.clone_from(&stack);
    }
}

/// Error of the synopsis with integer offsets, or `None` when a partial sum
/// leaves the allowed range.
fn evaluate_offsets<T: Scalar>(
    signal: &Signal<T>,
    metric: Metric,
    grid: &ValueGrid<T>,
    paths: &[Vec<(usize, i64)>],
    offsets: &[i64],
    limit: Option<i64>,
    approx: &mut [T],
) -> Option<T> {
    for (j, path) in paths.iter().enumerate() {
        let mut sum = 0i64;
        for &(h, sign) in path {
            sum += sign * offsets[h];
            if limit.is_some_and(|k| sum.abs() > k) {
                return None;
            }
        }
        approx[j] = grid.point(sum);
    }
    metric.evaluate(signal, approx).ok()
}

/// Best histogram with at most `buckets` buckets: squared error and 0-based
/// boundaries (first 0, last `n`).
pub fn brute_histogram<T: Scalar>(values: &[T], buckets: usize) -> Result<(T, Vec<usize>)> {
    let n = values.len();
    if n == 0 {
        return Err(SynopsisError::Empty);
    }
    if n > MAX_HISTOGRAM_LEN {
        return Err(too_large("histogram oracle", format!("n = {n} > {MAX_HISTOGRAM_LEN}")));
    }
    if buckets == 0 {
        return Err(SynopsisError::InvalidBudget("at least one bucket is required".into()));
    }
    let sse = |a: usize, b: usize| {
        let len = T::of_int((b - a) as i64);
        let mean = values[a..b].iter().fold(T::zero(), |s, &x| s + x) / len;
        values[a..b].iter().fold(T::zero(), |s, &x| s + (x - mean) * (x - mean))
    };
    let mut best = (T::infinity(), Vec::new());
    // bit i set: a boundary after position i
    for cuts in 0u32..(1u32 << (n - 1)) {
        if cuts.count_ones() as usize + 1 > buckets {
            continue;
        }
        let mut bounds = vec![0];
        bounds.extend((0..n - 1).filter(|i| cuts >> i & 1 == 1).map(|i| i + 1));
        bounds.push(n);
        let e = bounds.windows(2).fold(T::zero(), |s, w| s + sse(w[0], w[1]));
        if e < best.0 {
            best = (e, bounds);
        }
    }
    Ok(best)
}

/// Best extended allocation: profit and the number of stored dimensions per item.
pub fn brute_extended<T: Scalar>(items: &[MultiCoefficient<T>], budget: usize, header: usize) -> Result<(T, Vec<usize>)> {
    let n = items.len();
    let total: f64 = items.iter().map(|it| (it.dimensions() + 1) as f64).product();
    if n > MAX_EXTENDED_ITEMS || total > MAX_ENUMERATION {
        return Err(too_large("extended oracle", format!("{n} items, {total:.3e} assignments")));
    }
    let mut sizes = vec![0usize; n];
    let mut best = (T::zero(), sizes.clone());
    'outer: loop {
        let cost: usize = sizes.iter().filter(|&&j| j > 0).map(|&j| header + j).sum();
        if cost <= budget {
            let profit = items.iter().zip(&sizes).fold(T::zero(), |s, (it, &j)| s + it.profit(j));
            if profit > best.0 {
                best = (profit, sizes.clone());
            }
        }
        for (j, it) in sizes.iter_mut().zip(items) {
            *j += 1;
            if *j <= it.dimensions() {
                continue 'outer;
            }
            *j = 0;
        }
        return Ok(best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Signal<f64> {
        Signal::new(vec![1.0, 2.0, 3.0, 7.0]).unwrap()
    }

    #[test]
    fn restricted_examples() {
        let w = Signal::with_weights(vec![1.0, 2.0, 3.0, 7.0], vec![0.5, 0.5, 1.5, 1.5]).unwrap();
        let (e, s): (f64, _) = brute_restricted(&w, Metric::L2, 1).unwrap();
        assert!((e - 5.78).abs() < 0.01, "{e}");
        assert_eq!(s.len(), 1);
        assert!(brute_restricted(&x(), Metric::L2, 4).unwrap().0 < 1e-12);
        assert_eq!(brute_restricted(&x(), Metric::LInf, 1).unwrap().0, 3.75);
        let long = Signal::new(vec![0.0; 32]).unwrap();
        assert!(brute_restricted(&long, Metric::L1, 1).is_err());
    }

    #[test]
    fn restricted_profile_is_monotone() {
        let p = brute_restricted_profile(&x(), Metric::L1).unwrap();
        assert_eq!(p.len(), 5);
        assert!(p.windows(2).all(|w| w[1].0 <= w[0].0));
        assert_eq!(p[0].0, 13.0);
    }

    fn unit_grid(steps: i64) -> ValueGrid<f64> {
        ValueGrid {
            delta: 1.0,
            half_range: steps as f64,
            steps,
            value_steps: steps,
        }
    }

    #[test]
    fn grid_examples() {
        let zero = unit_grid(0);
        assert_eq!(brute_unrestricted_on_grid(&x(), Metric::L1, 2, &zero).unwrap().0, 13.0);
        let g = unit_grid(14);
        let (e, picks) = brute_unrestricted_on_grid(&x(), Metric::L1, 1, &g).unwrap();
        assert_eq!(e, 7.0);
        assert_eq!(picks.len(), 1);
        assert_eq!(picks[0].0, 0);
        assert!((2.0..=3.0).contains(&picks[0].1));
        assert_eq!(brute_unrestricted_on_grid(&x(), Metric::L1, 0, &g).unwrap().0, 13.0);
    }

    #[test]
    fn range_limit_only_removes_options() {
        let g = ValueGrid {
            delta: 1.0,
            half_range: 4.0,
            steps: 4,
            value_steps: 4,
        };
        let s = Signal::new(vec![8.0, 8.0, -3.0, 0.0]).unwrap();
        let a = brute_unrestricted_on_grid(&s, Metric::L2, 2, &g).unwrap().0;
        let b = brute_unrestricted_unconstrained(&s, Metric::L2, 2, &g).unwrap().0;
        assert!(b <= a);
        let big = Signal::new(vec![1.0; 16]).unwrap();
        assert!(brute_unrestricted_on_grid(&big, Metric::L1, 8, &unit_grid(20)).is_err());
    }

    #[test]
    fn histogram_examples() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(brute_histogram(&v, 2).unwrap(), (1.0, vec![0, 2, 4]));
        assert_eq!(brute_histogram(&v, 4).unwrap().0, 0.0);
        assert_eq!(brute_histogram(&v, 1).unwrap().0, 5.0);
        assert!(brute_histogram(&[0.0; 15], 2).is_err());
    }

    #[test]
    fn extended_examples() {
        let items = vec![
            MultiCoefficient::from_benefits(0, vec![10.0, 1.0]),
            MultiCoefficient::from_benefits(1, vec![6.0, 5.0]),
        ];
        assert_eq!(brute_extended(&items, 4, 1).unwrap(), (16.0, vec![1, 1]));
        assert_eq!(brute_extended(&items, 0, 1).unwrap().0, 0.0);
        let single: Vec<_> = [3.0, 9.0, 1.0, 4.0]
            .iter()
            .enumerate()
            .map(|(i, &b)| MultiCoefficient::from_benefits(i, vec![b]))
            .collect();
        assert_eq!(brute_extended(&single, 2, 0).unwrap().0, 13.0);
    }
}
