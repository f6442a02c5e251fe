use coherence_core::states::{haar_pure, random_density, SampleStream};

const N: usize = 20_000;

/// Kolmogorov-Smirnov statistic of `samples` against `cdf`.
fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let m = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn first_amplitude_is_beta_distributed() {
    // |x_1|^2 ~ Beta(1, n - 1): mean 1/n, CDF 1 - (1 - t)^(n - 1).
    for n in [2usize, 3, 5, 10] {
        let mut rng = SampleStream::new(100 + n as u64);
        let w: Vec<f64> = (0..N)
            .map(|_| haar_pure(n, &mut rng).unwrap().amplitudes()[0].norm_sqr())
            .collect();
        let nf = n as f64;
        let mean = w.iter().sum::<f64>() / N as f64;
        let sd = ((nf - 1.0) / (nf * nf * (nf + 1.0)) / N as f64).sqrt();
        assert!((mean - 1.0 / nf).abs() < 5.0 * sd, "n = {n}: mean {mean}");

        let d = ks_statistic(w, |t| 1.0 - (1.0 - t).powi(n as i32 - 1));
        // 0.1% critical value.
        let critical = 1.949 / (N as f64).sqrt();
        assert!(d < critical, "n = {n}: KS statistic {d} >= {critical}");
    }
}

#[test]
fn phases_are_uniform() {
    let mut rng = SampleStream::new(7);
    let phases: Vec<f64> = (0..N)
        .map(|_| {
            let z = haar_pure(4, &mut rng).unwrap().amplitudes()[2];
            (z.arg() + std::f64::consts::PI) / std::f64::consts::TAU
        })
        .collect();
    let d = ks_statistic(phases, |t| t.clamp(0.0, 1.0));
    assert!(d < 1.949 / (N as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn at_most_one_large_amplitude() {
    let mut rng = SampleStream::new(8);
    for n in 2..=6 {
        for _ in 0..2000 {
            let x = haar_pure(n, &mut rng).unwrap();
            let large = x.amplitudes().iter().filter(|z| z.norm_sqr() > 0.5).count();
            assert!(large <= 1);
        }
    }
}

#[test]
fn ginibre_states_have_full_requested_rank() {
    let mut rng = SampleStream::new(9);
    for (n, k) in [(3, 1), (4, 2), (6, 3), (8, 8), (12, 3)] {
        let trials = 1000;
        let mut exact_rank = 0;
        for _ in 0..trials {
            let rho = random_density(n, k, &mut rng).unwrap();
            assert!((rho.matrix().trace() - 1.0).abs() < 1e-12);
            assert!(rho.matrix().is_psd(1e-12));
            if rho.rank(1e-10) == k {
                exact_rank += 1;
            }
        }
        assert!(exact_rank as f64 >= 0.999 * trials as f64, "(n, k) = ({n}, {k}): {exact_rank}");
    }
}

#[test]
fn substreams_are_reproducible_and_distinct() {
    let a = haar_pure(5, &mut SampleStream::substream(42, 17)).unwrap();
    let b = haar_pure(5, &mut SampleStream::substream(42, 17)).unwrap();
    let c = haar_pure(5, &mut SampleStream::substream(42, 18)).unwrap();
    let d = haar_pure(5, &mut SampleStream::substream(43, 17)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, d);
}
