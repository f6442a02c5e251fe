//! Randomized self-checks: the solver against the closed forms, the dual
//! certificates against the solver, and the subgradient against finite
//! differences.
//!
//! Every suite is deterministic in its seed and independent of the rayon
//! pool size. A failing check keeps the state that produced its largest
//! residual so it can be written out and replayed.

use rayon::prelude::*;

use crate::closed_forms::{
    closure_residual, dual_certificate_pure, pure_mod_trace, pure_optimal_witness, qubit_mod_trace,
};
use crate::error::{Error, Result};
use crate::solver::{mod_trace_distance, subgradient_step, SolverOptions};
use crate::states::{haar_pure, random_density, random_qubit, DensityMatrix, SampleStream};

/// One named check: the largest residual over its samples and the
/// tolerance it is held to.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// State behind `max_residual`.
    pub worst: Option<DensityMatrix>,
    /// Free-form description of the worst case (dimension, point, ...).
    pub worst_note: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    /// The failing check with the largest residual relative to its
    /// tolerance, if any.
    pub fn worst_failure(&self) -> Option<&CheckResult> {
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .max_by(|a, b| (a.max_residual / a.tolerance).total_cmp(&(b.max_residual / b.tolerance)))
    }
}

/// A single residual together with the input that produced it.
#[derive(Debug, Clone)]
pub(crate) struct Sample {
    pub residual: f64,
    pub state: DensityMatrix,
    pub note: String,
}

/// Builds a check from per-sample results. NaN residuals count as
/// infinitely bad; ties go to the earliest sample.
pub(crate) fn summarize(name: &str, tolerance: f64, samples: Vec<Sample>) -> CheckResult {
    let count = samples.len();
    let key = |s: &Sample| if s.residual.is_nan() { f64::INFINITY } else { s.residual };
    let mut worst: Option<Sample> = None;
    for s in samples {
        if worst.as_ref().is_none_or(|w| key(&s) > key(w)) {
            worst = Some(s);
        }
    }
    let (max_residual, state, note) = match worst {
        Some(w) => (key(&w), Some(w.state), w.note),
        None => (0.0, None, String::new()),
    };
    CheckResult {
        name: name.to_string(),
        samples: count,
        max_residual,
        tolerance,
        worst: state,
        worst_note: note,
    }
}

/// Stream index for sample `s` of group `group` (a dimension or a case tag)
/// within suite `suite`.
pub(crate) fn stream_index(suite: u64, group: u64, s: usize) -> u64 {
    (suite << 56) | (group << 40) | s as u64
}

fn check_dims(dims: &[usize]) -> Result<()> {
    match dims.iter().find(|&&n| !(2..=crate::solver::MAX_DIM).contains(&n)) {
        Some(bad) => Err(Error::InvalidArgument(format!(
            "dimensions must lie in 2..={}, got {bad}",
            crate::solver::MAX_DIM
        ))),
        None => Ok(()),
    }
}

fn check_count(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    Ok(())
}

/// Solver against `2|rho_12|` on random qubits.
pub fn qubit_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    check_count(samples)?;
    let opts = SolverOptions::default();
    let rows = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<Sample> {
            let mut rng = SampleStream::substream(seed, stream_index(1, 2, s));
            let rho = random_qubit(&mut rng);
            let exact = qubit_mod_trace(&rho)?;
            let r = mod_trace_distance(&rho, &opts)?;
            Ok(Sample {
                residual: (r.value - exact).abs(),
                note: format!("sample {s}: solver {:.15}, formula {exact:.15}", r.value),
                state: rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        suite: "qubit".into(),
        checks: vec![summarize("solver vs 2|rho_12|", 1e-6, rows)],
    })
}

/// Solver and optimal witness against the largest-amplitude formula on Haar
/// pure states.
pub fn pure_formula_suite(dims: &[usize], samples: usize, seed: u64) -> Result<SuiteReport> {
    check_dims(dims)?;
    check_count(samples)?;
    let opts = SolverOptions::default();
    let jobs: Vec<(usize, usize)> = dims.iter().flat_map(|&n| (0..samples).map(move |s| (n, s))).collect();
    let rows = jobs
        .into_par_iter()
        .map(|(n, s)| -> Result<(Sample, Sample)> {
            let mut rng = SampleStream::substream(seed, stream_index(2, n as u64, s));
            let x = haar_pure(n, &mut rng)?;
            let rho = x.density();
            let exact = pure_mod_trace(&x);
            let r = mod_trace_distance(&rho, &opts)?;
            let witness = pure_optimal_witness(&x).residual_trace_norm(&rho)?;
            let note = format!("n = {n}, sample {s}, closed form {exact:.15}");
            Ok((
                Sample {
                    residual: (r.value - exact).abs(),
                    state: rho.clone(),
                    note: format!("{note}, solver {:.15}", r.value),
                },
                Sample {
                    residual: (witness - exact).abs(),
                    state: rho,
                    note: format!("{note}, witness residual {witness:.15}"),
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (solver, witness): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(SuiteReport {
        suite: "pure-formula".into(),
        checks: vec![
            summarize("solver vs closed form", 1e-5, solver),
            summarize("witness residual vs closed form", 1e-10, witness),
        ],
    })
}

/// Feasibility, phase closure and primal-dual gap of the pure-state dual
/// certificates.
pub fn duality_suite(dims: &[usize], samples: usize, seed: u64) -> Result<SuiteReport> {
    check_dims(dims)?;
    check_count(samples)?;
    let opts = SolverOptions::default();
    let jobs: Vec<(usize, usize)> = dims.iter().flat_map(|&n| (0..samples).map(move |s| (n, s))).collect();
    let rows = jobs
        .into_par_iter()
        .map(|(n, s)| -> Result<[Sample; 4]> {
            // Same states as the pure-formula suite.
            let mut rng = SampleStream::substream(seed, stream_index(2, n as u64, s));
            let x = haar_pure(n, &mut rng)?;
            let rho = x.density();
            let cert = dual_certificate_pure(&x)?;
            let feasibility = cert.residuals()?.max();
            let closure = match &cert.phases {
                Some(theta) => {
                    let w: Vec<f64> = x.amplitudes().iter().map(|z| z.norm_sqr()).collect();
                    closure_residual(&w, theta)
                }
                None => 0.0,
            };
            let dual = cert.objective(&rho)?;
            let exact = pure_mod_trace(&x);
            let primal = mod_trace_distance(&rho, &opts)?.value;
            let note = format!("n = {n}, sample {s}, {:?}", cert.construction);
            let sample = |residual: f64, what: String| Sample {
                residual,
                state: rho.clone(),
                note: format!("{note}, {what}"),
            };
            Ok([
                sample(feasibility, format!("feasibility residual {feasibility:.3e}")),
                sample(closure, format!("closure residual {closure:.3e}")),
                sample((dual - exact).abs(), format!("dual {dual:.15}, closed form {exact:.15}")),
                sample((primal - dual).abs(), format!("primal {primal:.15}, dual {dual:.15}")),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns: [Vec<Sample>; 4] = Default::default();
    for row in rows {
        for (col, sample) in columns.iter_mut().zip(row) {
            col.push(sample);
        }
    }
    let [feasibility, closure, tightness, gap] = columns;
    Ok(SuiteReport {
        suite: "duality".into(),
        checks: vec![
            summarize("certificate feasibility", 1e-10, feasibility),
            summarize("phase closure", 1e-10, closure),
            summarize("dual objective vs closed form", 1e-10, tightness),
            summarize("primal-dual gap", 1e-6, gap),
        ],
    })
}

/// Central finite differences against the subgradient at random points
/// where `rho - diag(d)` has no eigenvalue within `1e-3` of zero.
pub fn gradient_suite(points: usize, seed: u64) -> Result<SuiteReport> {
    const H: f64 = 1e-6;
    const SEPARATION: f64 = 1e-3;
    check_count(points)?;
    let rows = (0..points)
        .into_par_iter()
        .map(|s| -> Result<Sample> {
            let mut rng = SampleStream::substream(seed, stream_index(3, 0, s));
            let n = 2 + rng.below(5);
            let k = 1 + rng.below(n);
            let rho = random_density(n, k, &mut rng)?;
            let d = loop {
                let d: Vec<f64> = (0..n).map(|_| 0.01 + 0.6 * rng.uniform() / n as f64).collect();
                let gap = rho
                    .matrix()
                    .minus_diagonal(&d)?
                    .eigenvalues()
                    .iter()
                    .map(|l| l.abs())
                    .fold(f64::INFINITY, f64::min);
                if gap > SEPARATION {
                    break d;
                }
            };
            let (_, grad) = subgradient_step(&rho, &d)?;
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let mut up = d.clone();
                let mut down = d.clone();
                up[i] += H;
                down[i] -= H;
                let fd = (subgradient_step(&rho, &up)?.0 - subgradient_step(&rho, &down)?.0) / (2.0 * H);
                worst = worst.max((fd - grad[i]).abs());
            }
            Ok(Sample {
                residual: worst,
                state: rho,
                note: format!("n = {n}, rank {k}, d = {d:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport {
        suite: "gradient".into(),
        checks: vec![summarize("subgradient vs central differences", 1e-5, rows)],
    })
}
