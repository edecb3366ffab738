use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavesyn::oracles::{brute_unrestricted_on_grid, brute_unrestricted_unconstrained};
use wavesyn::{
    build_grid, restricted_error, unrestricted_synopsis, GridConfig, Metric, Signal, UnrestrictedSolver, ValueGrid,
};

const METRICS: [Metric; 3] = [Metric::L1, Metric::L2, Metric::LInf];

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Signal<f64> {
    Signal::new((0..n).map(|_| rng.gen_range(-10.0..10.0)).collect()).unwrap()
}

fn small_grid(rng: &mut ChaCha8Rng) -> ValueGrid<f64> {
    let steps = rng.gen_range(1..=4);
    ValueGrid {
        delta: rng.gen_range(0.5..4.0),
        half_range: 0.0,
        steps,
        value_steps: steps * rng.gen_range(1..=3),
    }
}

#[test]
fn dp_matches_grid_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..40 {
        let n = if trial % 2 == 0 { 4 } else { 8 };
        let s = random_signal(&mut rng, n);
        let grid = small_grid(&mut rng);
        let b = rng.gen_range(0..=3);
        for metric in METRICS {
            let sol = UnrestrictedSolver::new(&s, metric, b, grid).extract();
            let (brute, _) = brute_unrestricted_on_grid(&s, metric, b, &grid).unwrap();
            assert!((sol.error - brute).abs() < 1e-9, "{metric} n={n} b={b}: {} vs {brute}", sol.error);
            assert!(sol.picks.len() <= b);
            let re = metric.evaluate_synopsis(&s, &sol.picks).unwrap();
            assert!((re - sol.error).abs() < 1e-9);
        }
    }
}

#[test]
fn range_limit_is_a_restriction() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let s = random_signal(&mut rng, 4);
        let grid = small_grid(&mut rng);
        for metric in METRICS {
            let limited = brute_unrestricted_on_grid(&s, metric, 2, &grid).unwrap().0;
            let free = brute_unrestricted_unconstrained(&s, metric, 2, &grid).unwrap().0;
            assert!(free <= limited);
        }
    }
}

#[test]
fn additive_guarantee_over_restricted_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let s = random_signal(&mut rng, 8);
        let m = s.max_abs();
        for metric in METRICS {
            for eps in [1.0, 0.5] {
                let b = rng.gen_range(1..=3);
                let grid = build_grid(&s, metric, eps, GridConfig::default()).unwrap();
                let sol = UnrestrictedSolver::new(&s, metric, b, grid).extract();
                let (restricted, _) = restricted_error(&s, metric, b);
                let slack = eps * m + grid.delta * metric.root_of::<f64>(8);
                assert!(sol.error <= restricted + slack, "{metric} eps={eps}");
            }
        }
    }
}

#[test]
fn halving_epsilon_never_hurts() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..10 {
        let s = random_signal(&mut rng, 8);
        for metric in METRICS {
            let coarse = unrestricted_synopsis(&s, metric, 2, 2.0).unwrap().error;
            let fine = unrestricted_synopsis(&s, metric, 2, 1.0).unwrap().error;
            assert!(fine <= coarse + 1e-12, "{metric}: {fine} > {coarse}");
        }
    }
}

#[test]
fn live_tables_stay_per_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for n in [8, 32, 128] {
        let s = random_signal(&mut rng, n);
        let b = 4;
        let grid = build_grid(&s, Metric::LInf, 1.0, GridConfig::default()).unwrap();
        let mut solver = UnrestrictedSolver::new(&s, Metric::LInf, b, grid);
        solver.extract();
        let levels = n.ilog2() as usize + 2;
        let bound = 3 * grid.value_count() * (b + 1) * levels;
        assert!(solver.stats().peak_live_entries <= bound);
        assert!(solver.stats().peak_live_entries < grid.value_count() * (b + 1) * n);
    }
}

#[test]
fn example_beats_restricted_choice() {
    let s = Signal::new(vec![1.0, 2.0, 3.0, 7.0]).unwrap();
    let l1 = unrestricted_synopsis(&s, Metric::L1, 1, 0.1).unwrap();
    assert!(l1.error < 7.5, "{}", l1.error);
    let linf = unrestricted_synopsis(&s, Metric::LInf, 1, 0.1).unwrap();
    assert!(linf.error <= 3.7, "{}", linf.error);
}
