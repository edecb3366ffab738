use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavesyn::oracles::brute_restricted_profile;
use wavesyn::{extract_restricted, restricted_error, Metric, RestrictedSolver, Signal};

const METRICS: [Metric; 4] = [Metric::L1, Metric::L2, Metric::Lk(3), Metric::LInf];

fn random_signal(rng: &mut ChaCha8Rng, n: usize, weighted: bool) -> Signal<f64> {
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
    if weighted {
        let w = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
        Signal::with_weights(x, w).unwrap()
    } else {
        Signal::new(x).unwrap()
    }
}

/// Number of (node, incoming value) pairs when nothing is shared: every node
/// sees one value per subset of its ancestors.
fn ancestor_subsets(n: usize) -> u64 {
    1 + (1..2 * n).map(|h| 1u64 << (h.ilog2() + 1)).sum::<u64>()
}

#[test]
fn node_visits_count_every_ancestor_subset() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 4, 8, 16, 32] {
        let s = random_signal(&mut rng, n, false);
        for b in [1, 3, n] {
            for metric in [Metric::L2, Metric::LInf] {
                let mut solver = RestrictedSolver::new(&s, metric, b);
                solver.solve_subtree(0, 0.0);
                assert_eq!(solver.stats().node_visits, ancestor_subsets(n), "n={n} b={b}");
            }
        }
    }
}

#[test]
fn root_profile_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [2, 4, 8] {
        for trial in 0..15 {
            let s = random_signal(&mut rng, n, trial % 2 == 1);
            for metric in METRICS {
                let mut solver = RestrictedSolver::new(&s, metric, n);
                let profile = solver.solve_subtree(0, 0.0);
                let brute = brute_restricted_profile(&s, metric).unwrap();
                for (b, (expected, _)) in brute.iter().enumerate() {
                    let got = metric.finalize(profile.at(b));
                    assert!((got - expected).abs() < 1e-9, "{metric} n={n} b={b}: {got} vs {expected}");
                }
            }
        }
    }
}

#[test]
fn extraction_reproduces_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for n in [4, 16, 64] {
        let s = random_signal(&mut rng, n, true);
        for metric in METRICS {
            for b in [0, 1, 2, 5, n / 2, n] {
                let (err, used) = restricted_error(&s, metric, b);
                let sol = extract_restricted(&s, metric, b);
                assert!((sol.error - err).abs() < 1e-9);
                assert_eq!(sol.picks.len(), used);
                let re = metric.evaluate_synopsis(&s, &sol.picks).unwrap();
                assert!((re - err).abs() < 1e-9 * err.max(1.0), "{metric} n={n} b={b}");
                let coeffs = s.transform();
                assert!(sol.picks.iter().all(|&(i, c)| c == coeffs[i]));
            }
        }
    }
}

#[test]
fn working_set_stays_within_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for (n, b) in [(256, 4), (1024, 16), (4096, 8)] {
        let s = random_signal(&mut rng, n, false);
        let mut solver = RestrictedSolver::new(&s, Metric::L2, b);
        solver.extract();
        let bound = 4 * b * (n / b).ilog2() as usize + 4 * b;
        assert!(solver.stats().peak_live_entries <= bound);
    }
}

#[test]
fn work_grows_quadratically() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let ops: Vec<u64> = [256, 512, 1024, 2048]
        .into_iter()
        .map(|n| {
            let s = random_signal(&mut rng, n, false);
            let mut solver = RestrictedSolver::new(&s, Metric::L2, 16);
            solver.error();
            solver.stats().minplus_ops
        })
        .collect();
    for w in ops.windows(2) {
        let ratio = w[1] as f64 / w[0] as f64;
        assert!((3.0..=6.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let x: Vec<f64> = (0..32).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let s64 = Signal::new(x.clone()).unwrap();
    let s32 = Signal::new(x.iter().map(|&v| v as f32).collect()).unwrap();
    for metric in [Metric::L1, Metric::L2, Metric::LInf] {
        let (a, _) = restricted_error(&s64, metric, 6);
        let (b, _) = restricted_error(&s32, metric, 6);
        assert!((a - f64::from(b)).abs() < 1e-3 * a.max(1.0));
    }
}

proptest! {
    #[test]
    fn error_never_increases_with_budget(x in prop::collection::vec(-50.0f64..50.0, 16), k in 1u32..4) {
        let s = Signal::new(x).unwrap();
        let metric = Metric::Lk(k);
        let mut solver = RestrictedSolver::new(&s, metric, 16);
        let profile = solver.solve_subtree(0, 0.0);
        prop_assert!(profile.entries().windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(profile.at(16) < 1e-9);
        prop_assert!((metric.finalize(profile.at(0)) - metric.norm(&s)).abs() < 1e-9);
    }

    #[test]
    fn dp_agrees_with_brute_force(x in prop::collection::vec(-9i32..10, 8), b in 0usize..=8) {
        // integer data makes exact ties common
        let s = Signal::new(x.into_iter().map(f64::from).collect()).unwrap();
        for metric in [Metric::L1, Metric::LInf] {
            let (err, _) = restricted_error(&s, metric, b);
            let brute = wavesyn::oracles::brute_restricted(&s, metric, b).unwrap().0;
            prop_assert!((err - brute).abs() < 1e-9);
        }
    }
}
