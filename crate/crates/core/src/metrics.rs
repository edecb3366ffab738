//! Weighted `l_k` and `l_inf` error semantics shared by every solver.
//!
//! Errors are accumulated in the power domain: for `l_k` the accumulator is
//! `sum_j (w_j |e_j|)^k`, for `l_inf` it is `max_j w_j |e_j|`. Both have
//! identity 0, and [`Metric::finalize`] maps an accumulator back to a norm.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SynopsisError};
use crate::haar::{inverse, CoefficientVector, Signal};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Weighted `l_k`, `k >= 1`.
    Lk(u32),
    /// Weighted `l_inf`: `max_j w_j |x_j - y_j|`.
    LInf,
}

impl Metric {
    pub const L1: Metric = Metric::Lk(1);
    pub const L2: Metric = Metric::Lk(2);

    pub fn lk(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(SynopsisError::InvalidMetric("order k must be >= 1".into()));
        }
        Ok(Metric::Lk(k))
    }

    /// The exponent `k` as a float; `l_inf` reports infinity.
    pub fn order(self) -> f64 {
        match self {
            Metric::Lk(k) => f64::from(k),
            Metric::LInf => f64::INFINITY,
        }
    }

    /// `n^(1/k)`, with `n^(1/inf) = 1`.
    pub fn root_of<T: Scalar>(self, n: usize) -> T {
        match self {
            Metric::Lk(k) => T::of((n as f64).powf(1.0 / f64::from(k))),
            Metric::LInf => T::one(),
        }
    }

    #[inline]
    pub fn leaf_error<T: Scalar>(self, x: T, v: T, weight: T) -> T {
        let e = weight * (x - v).abs();
        match self {
            Metric::Lk(1) | Metric::LInf => e,
            Metric::Lk(2) => e * e,
            Metric::Lk(k) => e.powi(k as i32),
        }
    }

    #[inline]
    pub fn combine<T: Scalar>(self, a: T, b: T) -> T {
        match self {
            Metric::Lk(_) => a + b,
            Metric::LInf => a.max(b),
        }
    }

    pub fn finalize<T: Scalar>(self, acc: T) -> T {
        match self {
            Metric::Lk(1) | Metric::LInf => acc,
            Metric::Lk(2) => acc.sqrt(),
            Metric::Lk(k) => acc.powf(T::one() / T::of(f64::from(k))),
        }
    }

    /// Accumulated (not finalized) error of approximating `signal` by `approx`.
    pub fn accumulate<T: Scalar>(self, signal: &Signal<T>, approx: &[T]) -> T {
        signal
            .values()
            .iter()
            .zip(signal.weights())
            .zip(approx)
            .fold(T::zero(), |acc, ((&x, &w), &y)| {
                self.combine(acc, self.leaf_error(x, y, w))
            })
    }

    /// Error norm of approximating `signal` by the series `approx`.
    pub fn evaluate<T: Scalar>(self, signal: &Signal<T>, approx: &[T]) -> Result<T> {
        if approx.len() != signal.len() {
            return Err(SynopsisError::LengthMismatch {
                expected: signal.len(),
                actual: approx.len(),
            });
        }
        Ok(self.finalize(self.accumulate(signal, approx)))
    }

    /// Error norm of the sparse synopsis `picks` (coefficient index, value).
    pub fn evaluate_synopsis<T: Scalar>(self, signal: &Signal<T>, picks: &[(usize, T)]) -> Result<T> {
        let coeffs = CoefficientVector::from_picks(signal.len(), picks)?;
        let approx = inverse(&coeffs)?;
        self.evaluate(signal, &approx)
    }

    /// Error of the empty synopsis, i.e. the weighted norm of the signal.
    pub fn norm<T: Scalar>(self, signal: &Signal<T>) -> T {
        self.finalize(self.accumulate(signal, &vec![T::zero(); signal.len()]))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Lk(k) => write!(f, "l{k}"),
            Metric::LInf => f.write_str("linf"),
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let lower = s.trim().to_ascii_lowercase();
        if matches!(lower.as_str(), "linf" | "inf" | "max") {
            return Ok(Metric::LInf);
        }
        let digits = lower.strip_prefix('l').unwrap_or(&lower);
        match digits.parse::<u32>() {
            Ok(k) if k >= 1 => Ok(Metric::Lk(k)),
            _ => Err(format!("unknown metric '{s}', expected l1, l2, ..., or linf")),
        }
    }
}

/// Monomorphized accumulator combination for the inner DP loops.
pub(crate) trait Combine: Copy {
    fn combine<T: Scalar>(a: T, b: T) -> T;

    #[inline(always)]
    fn leaf<T: Scalar>(metric: Metric, x: T, v: T, w: T) -> T {
        metric.leaf_error(x, v, w)
    }
}

#[derive(Clone, Copy)]
pub(crate) struct SumCombine;

#[derive(Clone, Copy)]
pub(crate) struct MaxCombine;

/// `l_1` with the leaf error inlined.
#[derive(Clone, Copy)]
pub(crate) struct AbsSum;

/// `l_2` with the leaf error inlined.
#[derive(Clone, Copy)]
pub(crate) struct SquareSum;

impl Combine for SumCombine {
    #[inline(always)]
    fn combine<T: Scalar>(a: T, b: T) -> T {
        a + b
    }
}

impl Combine for MaxCombine {
    #[inline(always)]
    fn combine<T: Scalar>(a: T, b: T) -> T {
        if a < b {
            b
        } else {
            a
        }
    }

    #[inline(always)]
    fn leaf<T: Scalar>(_: Metric, x: T, v: T, w: T) -> T {
        w * (x - v).abs()
    }
}

impl Combine for AbsSum {
    #[inline(always)]
    fn combine<T: Scalar>(a: T, b: T) -> T {
        a + b
    }

    #[inline(always)]
    fn leaf<T: Scalar>(_: Metric, x: T, v: T, w: T) -> T {
        w * (x - v).abs()
    }
}

impl Combine for SquareSum {
    #[inline(always)]
    fn combine<T: Scalar>(a: T, b: T) -> T {
        a + b
    }

    #[inline(always)]
    fn leaf<T: Scalar>(_: Metric, x: T, v: T, w: T) -> T {
        let e = w * (x - v);
        e * e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn weighted_example() -> Signal<f64> {
        Signal::with_weights(vec![1.0, 2.0, 3.0, 7.0], vec![0.5, 0.5, 1.5, 1.5]).unwrap()
    }

    #[test]
    fn leaf_errors() {
        assert_eq!(Metric::L1.leaf_error(7.0, 3.25, 1.0), 3.75);
        assert_eq!(Metric::L2.leaf_error(4.0, 4.0, 2.0), 0.0);
        assert_relative_eq!(Metric::L2.leaf_error(7.0, 4.65, 1.5), 12.4256, epsilon = 1e-4);
        assert_eq!(Metric::LInf.leaf_error(1.0, 4.0, 0.5), 1.5);
        assert_eq!(Metric::Lk(3).leaf_error(3.0, 1.0, 1.0), 8.0);
    }

    #[test]
    fn combine_and_finalize() {
        let acc: f64 = [12.4256, 3.3306, 1.7556, 6.1256]
            .into_iter()
            .fold(0.0, |a, b| Metric::L2.combine(a, b));
        assert_relative_eq!(acc, 23.6374, epsilon = 1e-9);
        assert!((Metric::L2.finalize(acc) - 4.87).abs() < 0.01);
        assert_eq!(Metric::LInf.combine(3.75, 2.25), 3.75);
        assert_eq!(Metric::L1.combine(4.0, 0.0), 4.0);
        assert_eq!(Metric::L2.finalize(0.0), 0.0);
        assert_eq!(Metric::L1.finalize(7.0), 7.0);
    }

    #[test]
    fn weighted_example_synopsis() {
        let s = weighted_example();
        let e = Metric::L2.evaluate_synopsis(&s, &[(0, 4.65)]).unwrap();
        assert!((e - 4.87).abs() < 0.01, "{e}");
    }

    #[test]
    fn evaluation_matches_direct_norm() {
        let s = weighted_example();
        let picks = [(0, 3.0), (3, -1.0)];
        let approx = [3.0, 3.0, 2.0, 4.0];
        for metric in [Metric::L1, Metric::L2, Metric::Lk(3), Metric::LInf] {
            let direct = match metric {
                Metric::LInf => s
                    .values()
                    .iter()
                    .zip(s.weights())
                    .zip(approx)
                    .map(|((x, w), y)| w * (x - y).abs())
                    .fold(0.0, f64::max),
                Metric::Lk(k) => s
                    .values()
                    .iter()
                    .zip(s.weights())
                    .zip(approx)
                    .map(|((x, w), y)| (w * (x - y).abs()).powi(k as i32))
                    .sum::<f64>()
                    .powf(1.0 / k as f64),
            };
            let e = metric.evaluate_synopsis(&s, &picks).unwrap();
            assert!((e - direct).abs() < 1e-9, "{metric}: {e} vs {direct}");
        }
    }

    #[test]
    fn full_transform_has_zero_error() {
        let s = weighted_example();
        let picks: Vec<_> = s.transform().iter().copied().enumerate().collect();
        for metric in [Metric::L1, Metric::L2, Metric::LInf] {
            assert!(metric.evaluate_synopsis(&s, &picks).unwrap() < 1e-12);
        }
    }

    #[test]
    fn parse_metrics() {
        assert_eq!("l1".parse::<Metric>().unwrap(), Metric::L1);
        assert_eq!("L3".parse::<Metric>().unwrap(), Metric::Lk(3));
        assert_eq!("linf".parse::<Metric>().unwrap(), Metric::LInf);
        assert!("l0".parse::<Metric>().is_err());
        assert!("abc".parse::<Metric>().is_err());
        assert_eq!(Metric::Lk(4).to_string(), "l4");
    }
}
