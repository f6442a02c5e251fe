use std::fmt::Write as _;
use std::fs;

use coherence_core::closed_forms::{
    mod_trace_from_max_amplitude, qubit_optimal_set, CERTIFICATE_TOL,
};
use coherence_core::experiments::{self, exact_proportion, sweep_sample, SweepConfig};
use coherence_core::io::{format_float, format_state, parse_state_raw, StateFile};
use coherence_core::verification::{self, SuiteReport};
use coherence_core::{
    dual_certificate_pure, l1_coherence, mod_trace_distance, pure_mod_trace, pure_optimal_witness,
    qubit_mod_trace, trace_distance_coherence, verify_dual, DensityMatrix, IncoherentWitness,
    SolverOptions, SolverResult,
};

use crate::output::{csv_table, emit, sweep_csv};
use crate::{
    ComputeArgs, Failure, Figure, FigureArgs, Measure, Method, SampleArgs, Suite, SweepArgs, VerifyArgs,
    EXIT_INVARIANT, EXIT_VERIFY,
};

/// Value of a measure plus whatever certifies it.
struct Evaluation {
    method: &'static str,
    value: f64,
    witness: Option<IncoherentWitness>,
    dual_bound: Option<f64>,
    solver: Option<SolverResult>,
}

impl Evaluation {
    fn exact(value: f64) -> Self {
        Self {
            method: "closed-form",
            value,
            witness: None,
            dual_bound: None,
            solver: None,
        }
    }

    fn from_solver(r: SolverResult) -> Result<Self, Failure> {
        Ok(Self {
            method: "solver",
            value: r.value,
            witness: Some(IncoherentWitness::from_diagonal(&r.diagonal)?),
            dual_bound: r.best_lower_bound,
            solver: Some(r),
        })
    }
}

fn closed_form(state: &StateFile, measure: Measure) -> Result<Option<Evaluation>, Failure> {
    let rho = state.density();
    Ok(match (measure, state) {
        (Measure::L1, _) => Some(Evaluation::exact(l1_coherence(&rho))),
        (Measure::ModTr, StateFile::Pure(x)) => {
            let cert = dual_certificate_pure(x)?;
            Some(Evaluation {
                witness: Some(pure_optimal_witness(x)),
                dual_bound: Some(verify_dual(&cert, &rho, CERTIFICATE_TOL)?),
                ..Evaluation::exact(pure_mod_trace(x))
            })
        }
        (Measure::ModTr, _) if rho.dim() == 2 => Some(Evaluation {
            witness: Some(qubit_optimal_set(&rho, 0.0)?),
            ..Evaluation::exact(qubit_mod_trace(&rho)?)
        }),
        // On qubits the trace distance of coherence also equals 2|rho_12|.
        (Measure::Tr, _) if rho.dim() == 2 => Some(Evaluation::exact(qubit_mod_trace(&rho)?)),
        _ => None,
    })
}

fn solve(rho: &DensityMatrix, measure: Measure) -> Result<Option<Evaluation>, Failure> {
    let opts = SolverOptions::default();
    Ok(match measure {
        Measure::L1 => None,
        Measure::Tr => Some(Evaluation::from_solver(trace_distance_coherence(rho, &opts)?)?),
        Measure::ModTr => Some(Evaluation::from_solver(mod_trace_distance(rho, &opts)?)?),
    })
}

fn measure_name(m: Measure) -> &'static str {
    match m {
        Measure::L1 => "l1",
        Measure::Tr => "tr",
        Measure::ModTr => "mod-tr",
    }
}

fn describe(out: &mut String, e: &Evaluation) {
    let _ = writeln!(out, "method: {}", e.method);
    let _ = writeln!(out, "value: {}", format_float(e.value));
    if let Some(w) = &e.witness {
        let delta: Vec<String> = w.delta.weights().iter().map(|&v| format_float(v)).collect();
        let _ = writeln!(out, "witness_p: {}", format_float(w.scale));
        let _ = writeln!(out, "witness_delta: {}", delta.join(" "));
    }
    if let Some(lb) = e.dual_bound {
        let _ = writeln!(out, "dual_bound: {}", format_float(lb));
    }
    if let Some(r) = &e.solver {
        let _ = writeln!(out, "iterations: {}", r.iterations);
        let _ = writeln!(out, "converged: {}", r.converged);
    }
}

pub fn compute(args: &ComputeArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.state)
        .map_err(|e| Failure::new(crate::EXIT_PARSE, format!("{}: {e}", args.state.display())))?;
    let state = parse_state_raw(&text)
        .map_err(|e| Failure::new(crate::EXIT_PARSE, format!("{}: {e}", args.state.display())))?
        .validate()?;
    let rho = state.density();

    let mut out = format!("measure: {}\n", measure_name(args.measure));
    let mut status = Ok(());
    match args.method {
        Method::ClosedForm => {
            let e = closed_form(&state, args.measure)?.ok_or_else(|| {
                Failure::new(
                    EXIT_INVARIANT,
                    format!(
                        "closed-form {} needs a pure or qubit state, got a {}-dimensional density matrix",
                        measure_name(args.measure),
                        rho.dim()
                    ),
                )
            })?;
            describe(&mut out, &e);
        }
        Method::Solver => match solve(&rho, args.measure)? {
            Some(e) => describe(&mut out, &e),
            // The l1 norm has no optimization problem behind it.
            None => describe(&mut out, &closed_form(&state, args.measure)?.expect("l1 is closed form")),
        },
        Method::Auto => {
            let exact = closed_form(&state, args.measure)?;
            let numeric = solve(&rho, args.measure)?;
            match (exact, numeric) {
                (Some(e), Some(s)) => {
                    describe(&mut out, &e);
                    let diff = (e.value - s.value).abs();
                    let _ = writeln!(out, "solver_value: {}", format_float(s.value));
                    if let Some(lb) = s.dual_bound {
                        let _ = writeln!(out, "solver_dual_bound: {}", format_float(lb));
                    }
                    let verdict = if diff <= args.tol { "pass" } else { "FAIL" };
                    let _ = writeln!(out, "cross_check: {verdict} (|difference| = {})", format_float(diff));
                    if diff > args.tol {
                        status = Err(Failure::new(
                            EXIT_VERIFY,
                            format!("closed form and solver differ by {diff:e} > {:e}", args.tol),
                        ));
                    }
                }
                (Some(e), None) | (None, Some(e)) => describe(&mut out, &e),
                (None, None) => unreachable!("every measure has a closed form or a solver"),
            }
        }
    }
    emit(None, &out)?;
    status
}

pub fn sample(args: &SampleArgs) -> Result<(), Failure> {
    let mut blocks = Vec::new();
    for k in args.ranks.clone() {
        for n in args.dims.clone() {
            if k > n {
                eprintln!("warning: skipping n = {n}, k = {k}: rank exceeds dimension");
                continue;
            }
            for s in 0..args.samples {
                let state = sweep_sample(n, k, args.seed, s)?;
                blocks.push(format!(
                    "# n = {n}, k = {k}, sample {s}, seed {}\n{}",
                    args.seed,
                    format_state(&state)
                ));
            }
        }
    }
    emit(args.out.as_deref(), &blocks.join("---\n"))
}

fn run_sweep(args: &SweepArgs) -> Result<String, Failure> {
    let config = SweepConfig {
        dims: args.dims.clone(),
        ranks: args.ranks.clone(),
        samples: args.samples,
        seed: args.seed,
        classification_tol: args.tol,
    };
    let rows = experiments::sweep(&config)?;
    sweep_csv(&rows, args.seed)
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let csv = run_sweep(args)?;
    emit(args.out.as_deref(), &csv)
}

pub fn figure(args: &FigureArgs) -> Result<(), Failure> {
    let csv = match args.which {
        Figure::Fig1 => csv_table(
            &["a", "value"],
            (0..=200).map(|i| {
                let a = i as f64 / 200.0;
                vec![format_float(a), format_float(mod_trace_from_max_amplitude(a))]
            }),
        )?,
        Figure::Fig2 => csv_table(
            &["n", "exact"],
            (2..=20).map(|n| vec![n.to_string(), format_float(exact_proportion(n).expect("n >= 2"))]),
        )?,
        Figure::Fig3 => run_sweep(&SweepArgs {
            dims: args.dims.clone(),
            ranks: args.ranks.clone(),
            samples: args.samples,
            seed: args.seed,
            tol: args.tol,
            out: None,
        })?,
    };
    emit(args.out.as_deref(), &csv)
}

fn run_suite(args: &VerifyArgs) -> Result<SuiteReport, Failure> {
    let dims: Vec<usize> = args.dims.clone().collect();
    let report = match args.suite {
        Suite::Qubit => verification::qubit_suite(args.samples.unwrap_or(500), args.seed)?,
        Suite::PureFormula => verification::pure_formula_suite(&dims, args.samples.unwrap_or(100), args.seed)?,
        Suite::Duality => verification::duality_suite(&dims, args.samples.unwrap_or(100), args.seed)?,
        Suite::Gradient => verification::gradient_suite(args.samples.unwrap_or(100), args.seed)?,
        Suite::BlockAdditivity => experiments::block_additivity_suite(args.samples.unwrap_or(50), args.seed)?,
        Suite::ProperMeasure => experiments::proper_measure_suite(args.samples.unwrap_or(50), args.seed)?,
    };
    Ok(report)
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let report = run_suite(args)?;
    let mut out = format!("suite: {} (seed {})\n", report.suite, args.seed);
    for c in &report.checks {
        let _ = writeln!(
            out,
            "{} {}: samples {}, max residual {:.3e}, tolerance {:.0e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.samples,
            c.max_residual,
            c.tolerance
        );
    }
    emit(None, &out)?;
    match report.worst_failure() {
        None => Ok(()),
        Some(c) => {
            let mut replay = format!("# suite {}, seed {}, check `{}`\n# {}\n", report.suite, args.seed, c.name, c.worst_note);
            if let Some(state) = &c.worst {
                replay.push_str(&format_state(&StateFile::Density(state.clone())));
            }
            match &args.out {
                Some(path) => fs::write(path, replay)?,
                None => eprint!("worst offender:\n{replay}"),
            }
            Err(Failure::new(
                EXIT_VERIFY,
                format!("{} failed: {}", report.suite, c.name),
            ))
        }
    }
}
