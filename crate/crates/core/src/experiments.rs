//! How often the measure saturates at one for random states.
//!
//! A pure state `x` has value one exactly when `max_j |x_j| <= 1/sqrt(2)`,
//! and under the Haar measure that happens with probability
//! `1 - n / 2^(n-1)`. For rank `k >= 2` there is no closed form and each
//! sample goes through the solver.
//!
//! Sample `s` of dimension `n` and rank `k` always uses the substream
//! `(seed, n, k, s)`, and per-sample outcomes are only counted, so reports
//! do not depend on the number of rayon workers.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::closed_forms::{pure_mod_trace, qubit_mod_trace};
use crate::error::{Error, Result};
use crate::io::StateFile;
use crate::solver::{mod_trace_distance, SolverOptions, CLASSIFICATION_TOL, MAX_DIM};
use crate::states::{
    block_direct_sum, haar_pure, random_density, random_qubit, DensityMatrix, SampleStream,
};
use crate::verification::{stream_index, summarize, CheckResult, Sample, SuiteReport};

/// Two-sided confidence level of [`ProportionReport::ci_halfwidth`].
pub const CONFIDENCE: f64 = 0.99;

/// Below this many hits (or misses) the interval is exact binomial.
const EXACT_INTERVAL_BELOW: usize = 10;

/// Estimates further than this many half-widths from the exact value are
/// flagged.
const FLAG_HALFWIDTHS: f64 = 5.0;

/// Estimated proportion of states with value one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionReport {
    pub dim: usize,
    pub rank: usize,
    /// Classified samples; excluded ones are not counted here.
    pub samples: usize,
    pub hits: usize,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    /// `1 - n / 2^(n-1)` for rank one.
    pub exact: Option<f64>,
    /// Samples the solver could not classify within tolerance.
    pub excluded: usize,
    pub seed: u64,
}

impl ProportionReport {
    fn new(dim: usize, rank: usize, samples: usize, hits: usize, excluded: usize, seed: u64) -> Self {
        let estimate = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        Self {
            dim,
            rank,
            samples,
            hits,
            estimate,
            ci_halfwidth: ci_halfwidth(hits, samples),
            exact: if rank == 1 { exact_proportion(dim).ok() } else { None },
            excluded,
            seed,
        }
    }

    /// Whether the estimate sits more than five half-widths from the exact
    /// value.
    pub fn flagged(&self) -> bool {
        self.exact
            .is_some_and(|e| (self.estimate - e).abs() > FLAG_HALFWIDTHS * self.ci_halfwidth)
    }
}

/// Half-width of the 99% interval for `hits` out of `samples`: normal
/// approximation, or Clopper-Pearson when either count is small.
pub fn ci_halfwidth(hits: usize, samples: usize) -> f64 {
    if samples == 0 {
        return f64::INFINITY;
    }
    let alpha = 1.0 - CONFIDENCE;
    let n = samples as f64;
    let p = hits as f64 / n;
    let misses = samples - hits;
    if hits < EXACT_INTERVAL_BELOW || misses < EXACT_INTERVAL_BELOW {
        let lower = if hits == 0 {
            0.0
        } else {
            Beta::new(hits as f64, (misses + 1) as f64)
                .expect("positive shape parameters")
                .inverse_cdf(alpha / 2.0)
        };
        let upper = if misses == 0 {
            1.0
        } else {
            Beta::new((hits + 1) as f64, misses as f64)
                .expect("positive shape parameters")
                .inverse_cdf(1.0 - alpha / 2.0)
        };
        (p - lower).max(upper - p)
    } else {
        let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
        z * (p * (1.0 - p) / n).sqrt()
    }
}

/// `1 - n / 2^(n-1)`, the Haar probability that a pure state in dimension
/// `n` has value one. Zero for `n = 1`.
pub fn exact_proportion(n: usize) -> Result<f64> {
    match n {
        0 => Err(Error::InvalidArgument("dimension must be at least 1".into())),
        1 => Ok(0.0),
        _ => Ok(1.0 - n as f64 * 0.5f64.powi(n as i32 - 1)),
    }
}

/// Density `((n-1) / (x + n - 1))^n` of `(n-1)|x_1|^2 / (1 - |x_1|^2)` for a
/// Haar-random pure state; an F-distribution with `(2, 2n-2)` degrees of
/// freedom.
pub fn f_density(n: usize, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("f_density needs n >= 2, got {n}")));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("f_density needs x >= 0, got {x}")));
    }
    let m = (n - 1) as f64;
    Ok((m / (x + m)).powi(n as i32))
}

fn check_sampling(n: usize, k: usize, samples: usize) -> Result<()> {
    if n < 1 || k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    if n > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "dimension {n} exceeds the supported maximum of {MAX_DIM}"
        )));
    }
    if samples == 0 || samples as u64 >= 1 << 32 {
        return Err(Error::InvalidArgument(format!("sample count {samples} out of range")));
    }
    Ok(())
}

fn sample_stream(seed: u64, n: usize, k: usize, s: usize) -> SampleStream {
    SampleStream::substream(seed, ((n as u64) << 48) | ((k as u64) << 40) | s as u64)
}

/// The state drawn for sample `s` of `(n, k)` by [`mc_pure_proportion`],
/// [`mc_rank_proportion`] and [`sweep`]: a pure state for rank one.
pub fn sweep_sample(n: usize, k: usize, seed: u64, s: usize) -> Result<StateFile> {
    check_sampling(n, k, s + 1)?;
    let mut rng = sample_stream(seed, n, k, s);
    if k == 1 {
        haar_pure(n, &mut rng).map(StateFile::Pure)
    } else {
        random_density(n, k, &mut rng).map(StateFile::Density)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Hit,
    Miss,
    Excluded,
}

fn tally(outcomes: impl ParallelIterator<Item = Result<Outcome>>) -> Result<(usize, usize, usize)> {
    outcomes
        .map(|o| {
            o.map(|o| match o {
                Outcome::Hit => (1, 0, 0),
                Outcome::Miss => (0, 1, 0),
                Outcome::Excluded => (0, 0, 1),
            })
        })
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))
}

/// Haar pure states classified by the exact criterion `max_j |x_j|^2 <= 1/2`.
pub fn mc_pure_proportion(n: usize, samples: usize, seed: u64) -> Result<ProportionReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
    }
    check_sampling(n, 1, samples)?;
    let (hits, misses, _) = tally((0..samples).into_par_iter().map(|s| {
        let mut rng = sample_stream(seed, n, 1, s);
        let x = haar_pure(n, &mut rng)?;
        let largest = x.amplitudes().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        Ok(if largest <= 0.5 { Outcome::Hit } else { Outcome::Miss })
    }))?;
    Ok(ProportionReport::new(n, 1, hits + misses, hits, 0, seed))
}

/// Classifies one state with the solver. A sample is a hit once a lower
/// bound of at least `1 - tol` is certified and a miss once a point below
/// `1 - tol` is found; anything else is excluded.
pub fn classify_saturated(rho: &DensityMatrix, tol: f64) -> Result<Option<bool>> {
    let threshold = 1.0 - tol;
    let opts = SolverOptions {
        stop_below: Some(threshold),
        ..SolverOptions::default()
    };
    let r = mod_trace_distance(rho, &opts)?;
    if r.value < threshold {
        return Ok(Some(false));
    }
    match r.best_lower_bound {
        Some(lb) if lb >= threshold => Ok(Some(true)),
        _ if r.converged => Ok(Some(r.value >= threshold)),
        _ => Ok(None),
    }
}

/// Rank-`k` states from the Ginibre-induced measure classified by the
/// solver. Rank one draws the same states as [`mc_pure_proportion`].
pub fn mc_rank_proportion(
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
    classification_tol: f64,
) -> Result<ProportionReport> {
    check_sampling(n, k, samples)?;
    if !(classification_tol > 0.0 && classification_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "classification tolerance must lie in (0, 1), got {classification_tol}"
        )));
    }
    let (hits, misses, excluded) = tally((0..samples).into_par_iter().map(|s| {
        let mut rng = sample_stream(seed, n, k, s);
        let rho = random_density(n, k, &mut rng)?;
        Ok(match classify_saturated(&rho, classification_tol)? {
            Some(true) => Outcome::Hit,
            Some(false) => Outcome::Miss,
            None => Outcome::Excluded,
        })
    }))?;
    Ok(ProportionReport::new(n, k, hits + misses, hits, excluded, seed))
}

/// Smallest `n >= max(k, 2)` whose proportion of value-one states is at
/// least one half. Rank one uses the exact proportion; higher ranks use
/// [`mc_rank_proportion`] with `samples` samples per dimension.
pub fn fifty_percent_crossing(k: usize, samples: usize, seed: u64) -> Result<usize> {
    if k == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    for n in k.max(2)..=MAX_DIM {
        let proportion = if k == 1 {
            exact_proportion(n)?
        } else {
            mc_rank_proportion(n, k, samples, seed, CLASSIFICATION_TOL)?.estimate
        };
        if proportion >= 0.5 {
            return Ok(n);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no dimension up to {MAX_DIM} reaches one half at rank {k}"
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dims: RangeInclusive<usize>,
    pub ranks: RangeInclusive<usize>,
    pub samples: usize,
    pub seed: u64,
    pub classification_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dims: 2..=30,
            ranks: 1..=3,
            samples: 1000,
            seed: 42,
            classification_tol: CLASSIFICATION_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepRow {
    Report(ProportionReport),
    /// `k > n`: no rank-`k` states exist.
    Skipped { dim: usize, rank: usize },
}

impl SweepRow {
    pub fn key(&self) -> (usize, usize) {
        match self {
            SweepRow::Report(r) => (r.rank, r.dim),
            SweepRow::Skipped { dim, rank } => (*rank, *dim),
        }
    }
}

/// One row per `(n, k)`, sorted by `(k, n)`. Rank one uses the exact pure
/// criterion, higher ranks the solver.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.dims.is_empty() || config.ranks.is_empty() {
        return Err(Error::InvalidArgument("empty dimension or rank range".into()));
    }
    if *config.ranks.start() == 0 || *config.dims.start() == 0 {
        return Err(Error::InvalidArgument("dimensions and ranks start at 1".into()));
    }
    let mut rows = Vec::new();
    for k in config.ranks.clone() {
        for n in config.dims.clone() {
            let row = if k > n {
                SweepRow::Skipped { dim: n, rank: k }
            } else if k == 1 {
                if n == 1 {
                    SweepRow::Report(ProportionReport::new(1, 1, config.samples, 0, 0, config.seed))
                } else {
                    SweepRow::Report(mc_pure_proportion(n, config.samples, config.seed)?)
                }
            } else {
                SweepRow::Report(mc_rank_proportion(
                    n,
                    k,
                    config.samples,
                    config.seed,
                    config.classification_tol,
                )?)
            };
            rows.push(row);
        }
    }
    rows.sort_by_key(SweepRow::key);
    Ok(rows)
}

fn random_block(rng: &mut SampleStream) -> Result<(DensityMatrix, f64)> {
    let n = 2 + rng.below(2);
    let k = 1 + rng.below(n);
    let rho = random_density(n, k, rng)?;
    let value = mod_trace_distance(&rho, &SolverOptions::default())?.value;
    Ok((rho, value))
}

/// `|C'(p rho1 (+) (1-p) rho2) - p C'(rho1) - (1-p) C'(rho2)|` over random
/// block pairs. Trials cycle through: `p = 1`, two qubits (parts by the
/// qubit formula), pure blocks of dimensions 2 and 3 (parts by the pure
/// formula), and small mixed blocks (parts by the solver).
pub fn block_additivity_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be positive".into()));
    }
    let opts = SolverOptions::default();
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Sample> {
            let case = t % 4;
            let mut rng = SampleStream::substream(seed, stream_index(4, case as u64, t));
            let p = if case == 0 { 1.0 } else { 0.05 + 0.9 * rng.uniform() };
            let ((rho1, c1), (rho2, c2)) = match case {
                1 => {
                    let a = random_qubit(&mut rng);
                    let b = random_qubit(&mut rng);
                    let (ca, cb) = (qubit_mod_trace(&a)?, qubit_mod_trace(&b)?);
                    ((a, ca), (b, cb))
                }
                2 => {
                    let a = haar_pure(2, &mut rng)?;
                    let b = haar_pure(3, &mut rng)?;
                    ((a.density(), pure_mod_trace(&a)), (b.density(), pure_mod_trace(&b)))
                }
                _ => (random_block(&mut rng)?, random_block(&mut rng)?),
            };
            let whole = block_direct_sum(p, &rho1, 1.0 - p, &rho2)?;
            let value = mod_trace_distance(&whole, &opts)?.value;
            let expected = p * c1 + (1.0 - p) * c2;
            Ok(Sample {
                residual: (value - expected).abs(),
                note: format!("trial {t}, p = {p:.15}, whole {value:.15}, parts {expected:.15}"),
                state: whole,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        suite: "block-additivity".into(),
        checks: vec![summarize("block additivity", 1e-5, rows)],
    })
}

/// Faithfulness and convexity: random diagonal states must give zero,
/// random coherent states a positive value, and random three-state
/// mixtures in dimension 4 must satisfy `C'(sum p_j rho_j) <= sum p_j
/// C'(rho_j)`.
pub fn proper_measure_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    const ZERO_TOL: f64 = 1e-8;
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be positive".into()));
    }
    let opts = SolverOptions::default();
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<[Sample; 3]> {
            let mut rng = SampleStream::substream(seed, stream_index(5, 0, t));
            let n = 2 + rng.below(4);

            let raw: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let total: f64 = raw.iter().sum();
            let diag = DensityMatrix::from_diagonal(&raw.iter().map(|w| w / total).collect::<Vec<_>>())?;
            let zero = mod_trace_distance(&diag, &opts)?.value;

            let coherent = random_density(n, 1 + rng.below(n), &mut rng)?;
            let positive = mod_trace_distance(&coherent, &opts)?.value;

            let parts: Vec<DensityMatrix> = (0..3)
                .map(|_| {
                    let k = 1 + rng.below(4);
                    random_density(4, k, &mut rng)
                })
                .collect::<Result<_>>()?;
            let raw: Vec<f64> = (0..3).map(|_| rng.uniform() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let mixed = DensityMatrix::mixture(&p, &parts)?;
            let lhs = mod_trace_distance(&mixed, &opts)?.value;
            let mut rhs = 0.0;
            for (pj, part) in p.iter().zip(&parts) {
                rhs += pj * mod_trace_distance(part, &opts)?.value;
            }

            Ok([
                Sample {
                    residual: zero,
                    note: format!("trial {t}, diagonal state, value {zero:.3e}"),
                    state: diag,
                },
                Sample {
                    residual: if positive > ZERO_TOL { 0.0 } else { 1.0 },
                    note: format!("trial {t}, coherent state, value {positive:.3e}"),
                    state: coherent,
                },
                Sample {
                    residual: (lhs - rhs).max(0.0),
                    note: format!("trial {t}, mixture {lhs:.15} vs average {rhs:.15}"),
                    state: mixed,
                },
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns: [Vec<Sample>; 3] = Default::default();
    for row in rows {
        for (col, sample) in columns.iter_mut().zip(row) {
            col.push(sample);
        }
    }
    let [zero, positive, convexity] = columns;
    let checks: Vec<CheckResult> = vec![
        summarize("zero on incoherent states", ZERO_TOL, zero),
        summarize("positive on coherent states", 0.0, positive),
        summarize("convexity", 1e-5, convexity),
    ];
    Ok(SuiteReport {
        suite: "proper-measure".into(),
        checks,
    })
}
