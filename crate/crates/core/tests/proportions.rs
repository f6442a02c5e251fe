use coherence_core::experiments::{
    exact_proportion, f_density, mc_pure_proportion, mc_rank_proportion, sweep, SweepConfig, SweepRow,
};
use coherence_core::io::{format_state, parse_state, StateFile};
use coherence_core::states::{haar_pure, random_density, SampleStream};
use proptest::prelude::*;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (left, right) = (simpson(f, a, m), simpson(f, m, b));
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson(f, a, m, left, tol / 2.0, depth - 1) + adaptive_simpson(f, m, b, right, tol / 2.0, depth - 1)
}

/// `int_{n-1}^inf f(x) dx`, mapped to a finite interval by `x = (n-1)(1/u - 1)`.
fn tail_integral(n: usize) -> f64 {
    let m = (n - 1) as f64;
    let g = move |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let x = m * (1.0 / u - 1.0);
        f_density(n, x).unwrap() * m / (u * u)
    };
    let whole = simpson(&g, 0.0, 0.5);
    adaptive_simpson(&g, 0.0, 0.5, whole, 1e-14, 40)
}

#[test]
fn density_tail_matches_exact_proportion() {
    for n in 2..=10 {
        let tail = tail_integral(n);
        let want = 0.5f64.powi(n as i32 - 1);
        assert!((tail - want).abs() <= 1e-10, "n = {n}: {tail} vs {want}");
        // The n events |x_j|^2 > 1/2 are disjoint and equally likely.
        assert!((1.0 - n as f64 * tail - exact_proportion(n).unwrap()).abs() <= 1e-9);
    }
    assert!(exact_proportion(19).unwrap() > 0.9999);
}

#[test]
fn density_integrates_to_one() {
    for n in [2usize, 5, 9] {
        let m = (n - 1) as f64;
        let g = move |u: f64| if u == 0.0 { 0.0 } else { f_density(n, m * (1.0 / u - 1.0)).unwrap() * m / (u * u) };
        let whole = simpson(&g, 0.0, 1.0);
        let total = adaptive_simpson(&g, 0.0, 1.0, whole, 1e-14, 40);
        assert!((total - 1.0).abs() < 1e-10, "n = {n}: {total}");
    }
}

#[test]
fn monte_carlo_tracks_exact_proportion() {
    for n in 2..=8 {
        let r = mc_pure_proportion(n, 20_000, 42).unwrap();
        assert!(!r.flagged(), "{r:?}");
        assert_eq!(r.hits as f64 / r.samples as f64, r.estimate);
    }
    assert_eq!(mc_pure_proportion(2, 10_000, 1).unwrap().hits, 0);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    mc_pure_proportion(6, 3000, 9).unwrap(),
                    mc_rank_proportion(5, 2, 200, 9, 1e-6).unwrap(),
                )
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn sweep_rank_one_uses_exact_reference() {
    let config = SweepConfig {
        dims: 2..=6,
        ranks: 1..=1,
        samples: 10_000,
        seed: 42,
        classification_tol: 1e-6,
    };
    let rows = sweep(&config).unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let SweepRow::Report(r) = row else { panic!("unexpected skip") };
        assert_eq!(r.exact, Some(exact_proportion(r.dim).unwrap()));
        assert!(!r.flagged(), "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn state_files_round_trip(seed in any::<u64>(), n in 1usize..=6, pure in any::<bool>()) {
        let mut rng = SampleStream::new(seed);
        let state = if pure {
            StateFile::Pure(haar_pure(n, &mut rng).unwrap())
        } else {
            StateFile::Density(random_density(n, 1 + rng.below(n), &mut rng).unwrap())
        };
        let text = format_state(&state);
        prop_assert_eq!(parse_state(&text).unwrap(), state);
    }
}
