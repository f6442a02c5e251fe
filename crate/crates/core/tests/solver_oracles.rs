use coherence_core::experiments::classify_saturated;
use coherence_core::io::{parse_state, StateFile};
use coherence_core::states::{random_qubit, DensityMatrix, PureState, SampleStream};
use coherence_core::{mod_trace_distance, qubit_mod_trace, trace_distance_coherence, SolverOptions};
use nalgebra::DMatrix;

struct Reference {
    simplex: bool,
    value: f64,
    rho: DensityMatrix,
}

/// Optimal values from an interior-point SDP solver; see
/// `python/generate_sdp_reference.py`.
fn references() -> Vec<Reference> {
    let text = include_str!("data/sdp_reference.txt");
    text.split("\n---\n")
        .map(|block| {
            let mut lines = block.lines();
            let constraint = lines.next().unwrap().strip_prefix("constraint: ").unwrap();
            let value = lines.next().unwrap().strip_prefix("value: ").unwrap().parse().unwrap();
            let rest: Vec<&str> = lines.collect();
            let rho = match parse_state(&rest.join("\n")).expect("reference state") {
                StateFile::Density(rho) => rho,
                StateFile::Pure(_) => unreachable!(),
            };
            Reference {
                simplex: constraint == "simplex",
                value,
                rho,
            }
        })
        .collect()
}

#[test]
fn matches_sdp_reference_values() {
    let refs = references();
    assert_eq!(refs.len(), 17);
    for (i, r) in refs.iter().enumerate() {
        let result = if r.simplex {
            trace_distance_coherence(&r.rho, &SolverOptions::default())
        } else {
            mod_trace_distance(&r.rho, &SolverOptions::default())
        }
        .unwrap();
        // The reference is evaluated at a feasible point, so it bounds the
        // optimum from above.
        assert!(result.value <= r.value + 1e-9, "case {i}: {} > {}", result.value, r.value);
        assert!((result.value - r.value).abs() <= 1e-6, "case {i}: {} vs {}", result.value, r.value);
        assert!(result.converged, "case {i}: gap {:?}", result.gap());
    }
}

#[test]
fn classification_agrees_with_reference() {
    for r in references().iter().filter(|r| !r.simplex) {
        let decided = classify_saturated(&r.rho, 1e-6).unwrap();
        if (r.value - 1.0).abs() > 1e-5 {
            assert_eq!(decided, Some(r.value > 1.0 - 1e-6), "reference {}", r.value);
        } else {
            assert_eq!(decided, Some(true), "reference {}", r.value);
        }
    }
}

fn oracle_trace_norm(rho: &DensityMatrix, d: &[f64]) -> f64 {
    let n = rho.dim();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let mut z = rho.entry(i, j);
        if i == j {
            z.re -= d[i];
        }
        z
    });
    m.symmetric_eigen().eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Minimum over the probability simplex in dimension 3 on a grid of step
/// `1/steps`.
fn simplex_grid_min(rho: &DensityMatrix, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let d = [i as f64 / steps as f64, j as f64 / steps as f64, (steps - i - j) as f64 / steps as f64];
            best = best.min(oracle_trace_norm(rho, &d));
        }
    }
    best
}

#[test]
fn trace_distance_grid_oracle() {
    let plus = PureState::maximally_coherent(2).unwrap().density();
    let r = trace_distance_coherence(&plus, &SolverOptions::default()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-6);

    let max3 = PureState::maximally_coherent(3).unwrap().density();
    let grid = simplex_grid_min(&max3, 300);
    assert!((grid - 4.0 / 3.0).abs() < 1e-4, "grid {grid}");
    let r = trace_distance_coherence(&max3, &SolverOptions::default()).unwrap();
    assert!((r.value - grid).abs() < 1e-4, "solver {}, grid {grid}", r.value);

    let mut rng = SampleStream::new(5);
    for _ in 0..3 {
        let rho = coherence_core::random_density(3, 2, &mut rng).unwrap();
        let grid = simplex_grid_min(&rho, 300);
        let r = trace_distance_coherence(&rho, &SolverOptions::default()).unwrap();
        assert!(r.value <= grid + 1e-12);
        assert!(grid - r.value < 1e-2, "solver {}, grid {grid}", r.value);
    }
}

/// Trace norm of `[[a, b], [b*, c]]` from the closed-form eigenvalues.
fn trace_norm_2x2(a: f64, b: f64, c: f64) -> f64 {
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mid + rad).abs() + (mid - rad).abs()
}

/// Grid search over `d in [0, 1]^2`, refined around the best point.
fn qubit_grid_min(rho: &DensityMatrix) -> f64 {
    let (a, b, c) = (rho.entry(0, 0).re, rho.entry(0, 1).norm(), rho.entry(1, 1).re);
    let f = |x: f64, y: f64| trace_norm_2x2(a - x, b, c - y);
    let (mut cx, mut cy, mut half) = (0.5, 0.5, 0.5);
    let mut best = f64::INFINITY;
    for _ in 0..40 {
        let steps = 40;
        let (mut bx, mut by) = (cx, cy);
        for i in 0..=steps {
            for j in 0..=steps {
                let x = (cx - half + 2.0 * half * i as f64 / steps as f64).max(0.0);
                let y = (cy - half + 2.0 * half * j as f64 / steps as f64).max(0.0);
                let v = f(x, y);
                if v < best {
                    best = v;
                    (bx, by) = (x, y);
                }
            }
        }
        (cx, cy) = (bx, by);
        half *= 0.5;
    }
    best
}

#[test]
fn qubit_formula_grid_oracle() {
    let mut rng = SampleStream::new(6);
    for _ in 0..50 {
        let rho = random_qubit(&mut rng);
        let grid = qubit_grid_min(&rho);
        let formula = qubit_mod_trace(&rho).unwrap();
        assert!((grid - formula).abs() < 1e-9, "grid {grid}, formula {formula}");
        let solver = mod_trace_distance(&rho, &SolverOptions::default()).unwrap().value;
        assert!((solver - formula).abs() < 1e-7);
    }
}

#[test]
fn lower_bounds_never_exceed_reference() {
    for r in references() {
        let result = if r.simplex {
            trace_distance_coherence(&r.rho, &SolverOptions::default())
        } else {
            mod_trace_distance(&r.rho, &SolverOptions::default())
        }
        .unwrap();
        let lb = result.best_lower_bound.unwrap();
        assert!(lb <= r.value + 1e-9, "bound {lb} above reference {}", r.value);
    }
}
