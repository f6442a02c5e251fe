//! Numerical minimization of `d -> ||rho - diag(d)||_tr`.
//!
//! Two feasible sets are supported: the nonnegative orthant (the modified
//! trace distance of coherence) and the probability simplex (the standard
//! trace distance of coherence).
//!
//! The minimizer runs projected subgradient descent from a handful of
//! starting points and then polishes the best point with a projected Newton
//! method on the smoothed objective `sum_k sqrt(lambda_k^2 + mu^2)` while
//! `mu` is driven towards zero. Every iterate is feasible and the reported
//! value is the best exact objective seen. Lower bounds come from the
//! spectral dual
//!
//! ```text
//! min_d ||rho - diag(d)||_tr = max { tr(M rho) : ||M|| <= 1, M_ii <= 0 }     (orthant)
//!                            = max { tr(M rho) - max_i M_ii : ||M|| <= 1 }   (simplex)
//! ```
//!
//! evaluated at matrices `M` built from the eigendecomposition of the
//! residual, so `converged` is set only when the primal-dual gap is below
//! the requested accuracy.

use crate::closed_forms::{dual_certificate_pure, pure_optimal_witness};
use crate::error::{Error, Result};
use crate::linalg::{EigenDecomposition, HermitianMatrix};
use crate::states::{DensityMatrix, PureState, SampleStream};

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

/// Eigenvalues below this magnitude contribute no sign to a subgradient.
pub const DEGENERATE_EIGENVALUE: f64 = 1e-12;

/// A solver value at least `1 - CLASSIFICATION_TOL` counts as "equal to one".
pub const CLASSIFICATION_TOL: f64 = 1e-6;

const STAGNATION_WINDOW: usize = 200;
const STAGNATION_REL: f64 = 1e-12;
const DIMINISHING_STEP: f64 = 0.1;
const NEAR_PURE: f64 = 1e-9;
const MU_START: f64 = 1e-2;
const MU_FACTOR: f64 = 0.1;
const NEWTON_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSchedule {
    /// Normalized steps of length `0.1 / sqrt(t + 1)`.
    Diminishing,
    /// Polyak steps towards a known lower bound; falls back to diminishing
    /// steps when no bound is available.
    Polyak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Subgradient iterations per starting point.
    pub max_iterations: usize,
    pub target_accuracy: f64,
    pub step_schedule: StepSchedule,
    /// Extra randomized starting points beyond the standard ones.
    pub restarts: usize,
    /// Run the smoothed Newton refinement after the subgradient phase.
    pub polish: bool,
    /// Stop as soon as a feasible point with value below this is found.
    pub stop_below: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 300,
            target_accuracy: 1e-7,
            step_schedule: StepSchedule::Polyak,
            restarts: 0,
            polish: true,
            stop_below: None,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.target_accuracy > 0.0) {
            return Err(Error::InvalidArgument("target accuracy must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    /// `||rho - diag(diagonal)||_tr`, the best value found.
    pub value: f64,
    pub diagonal: Vec<f64>,
    pub iterations: usize,
    /// Best certified lower bound on the true minimum.
    pub best_lower_bound: Option<f64>,
    /// Whether `value - best_lower_bound <= target_accuracy`.
    pub converged: bool,
}

impl SolverResult {
    pub fn gap(&self) -> Option<f64> {
        self.best_lower_bound.map(|lb| self.value - lb)
    }
}

/// Feasible set for the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `d >= 0`.
    Orthant,
    /// `d >= 0`, `sum(d) = 1`.
    Simplex,
}

impl Constraint {
    pub fn project(self, d: &[f64]) -> Vec<f64> {
        match self {
            Constraint::Orthant => d.iter().map(|&v| v.max(0.0)).collect(),
            Constraint::Simplex => project_simplex(d),
        }
    }
}

/// Euclidean projection onto the probability simplex (sort based; ties
/// resolved by index through a stable sort).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// `||rho - diag(d)||_tr` and a subgradient with respect to `d`,
/// `g_i = -(U sgn(Lambda) U^dagger)_ii` with `sgn(0) = 0`.
pub fn subgradient_step(rho: &DensityMatrix, d: &[f64]) -> Result<(f64, Vec<f64>)> {
    if d.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument("diagonal must be nonnegative".into()));
    }
    let eig = rho.matrix().minus_diagonal(d)?.eig();
    Ok(value_and_subgradient(&eig))
}

fn value_and_subgradient(eig: &EigenDecomposition) -> (f64, Vec<f64>) {
    let value = eig.values.iter().map(|l| l.abs()).sum();
    let n = eig.dim();
    let signs: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| if l.abs() < DEGENERATE_EIGENVALUE { 0.0 } else { l.signum() })
        .collect();
    let u = &eig.vectors;
    let grad = (0..n)
        .map(|i| {
            -(0..n)
                .map(|k| signs[k] * u[(i, k)].norm_sqr())
                .sum::<f64>()
        })
        .collect();
    (value, grad)
}

fn trace_distance_at(rho: &DensityMatrix, d: &[f64]) -> (f64, EigenDecomposition) {
    let eig = rho
        .matrix()
        .minus_diagonal(d)
        .expect("dimension checked by caller")
        .eig();
    (eig.values.iter().map(|l| l.abs()).sum(), eig)
}

/// Modified trace distance of coherence, `min_{D diagonal, D >= 0} ||rho - D||_tr`.
pub fn mod_trace_distance(rho: &DensityMatrix, opts: &SolverOptions) -> Result<SolverResult> {
    Minimizer::new(rho, Constraint::Orthant, opts)?.run()
}

/// Standard trace distance of coherence, the minimum over diagonal density
/// matrices.
pub fn trace_distance_coherence(rho: &DensityMatrix, opts: &SolverOptions) -> Result<SolverResult> {
    Minimizer::new(rho, Constraint::Simplex, opts)?.run()
}

/// Lower bound from a matrix `M` with `||M|| <= 1`, adjusted to satisfy the
/// diagonal condition of the spectral dual.
fn bound_from_contraction(rho: &DensityMatrix, m: &HermitianMatrix, constraint: Constraint) -> f64 {
    let tr_m_rho = m.trace_product(rho.matrix()).expect("same dimension");
    let diag = m.real_diagonal();
    match constraint {
        Constraint::Simplex => tr_m_rho - diag.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Constraint::Orthant => {
            // W = (I + M)/2 lies between 0 and I; shrinking it by c keeps
            // that and brings its diagonal under 1/2.
            let w_max = diag.iter().map(|&v| 0.5 * (1.0 + v)).fold(0.0, f64::max);
            let c = if w_max > 0.5 { 0.5 / w_max } else { 1.0 };
            let tr_w_rho = 0.5 * (1.0 + tr_m_rho);
            2.0 * c * tr_w_rho - 1.0
        }
    }
}

/// Best of `M = P_+ - P_- + s P_0` for `s` in {-1, 0}, where `P_0` covers
/// eigenvalues inside the degeneracy threshold.
fn sign_bound(rho: &DensityMatrix, eig: &EigenDecomposition, constraint: Constraint) -> f64 {
    [-1.0, 0.0]
        .into_iter()
        .map(|kernel| {
            let m = eig.spectral_map(|l| {
                if l > DEGENERATE_EIGENVALUE {
                    1.0
                } else if l < -DEGENERATE_EIGENVALUE {
                    -1.0
                } else {
                    kernel
                }
            });
            bound_from_contraction(rho, &m, constraint)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn smoothed_bound(rho: &DensityMatrix, eig: &EigenDecomposition, mu: f64, constraint: Constraint) -> f64 {
    let m = eig.spectral_map(|l| smooth_slope(l, mu));
    bound_from_contraction(rho, &m, constraint)
}

fn smooth_value(l: f64, mu: f64) -> f64 {
    l.hypot(mu)
}

fn smooth_slope(l: f64, mu: f64) -> f64 {
    l / l.hypot(mu)
}

fn smooth_curvature(l: f64, mu: f64) -> f64 {
    let s = l.hypot(mu);
    mu * mu / (s * s * s)
}

/// Divided difference of the smoothed slope, written to avoid cancellation
/// when the two eigenvalues are close and share a sign.
fn slope_divided_difference(x: f64, y: f64, mu: f64) -> f64 {
    if x == y {
        return smooth_curvature(x, mu);
    }
    if x * y > 0.0 {
        let (sx, sy) = (x.hypot(mu), y.hypot(mu));
        mu * mu * (x + y) / ((x * sy + y * sx) * sx * sy)
    } else {
        (smooth_slope(x, mu) - smooth_slope(y, mu)) / (x - y)
    }
}

struct Best {
    value: f64,
    diagonal: Vec<f64>,
    lower: Option<f64>,
}

impl Best {
    fn offer(&mut self, value: f64, d: &[f64]) {
        if value < self.value {
            self.value = value;
            self.diagonal = d.to_vec();
        }
    }

    fn offer_bound(&mut self, lb: f64) {
        if lb.is_finite() && self.lower.is_none_or(|cur| lb > cur) {
            self.lower = Some(lb);
        }
    }

    fn gap(&self) -> f64 {
        self.lower.map_or(f64::INFINITY, |lb| self.value - lb)
    }
}

struct Minimizer<'a> {
    rho: &'a DensityMatrix,
    constraint: Constraint,
    opts: &'a SolverOptions,
    best: Best,
    /// Lower bound used as the Polyak target.
    polyak_target: Option<f64>,
    iterations: usize,
}

impl<'a> Minimizer<'a> {
    fn new(rho: &'a DensityMatrix, constraint: Constraint, opts: &'a SolverOptions) -> Result<Self> {
        opts.validate()?;
        if rho.dim() > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "dimension {} exceeds the supported maximum of {MAX_DIM}",
                rho.dim()
            )));
        }
        Ok(Self {
            rho,
            constraint,
            opts,
            best: Best {
                value: f64::INFINITY,
                diagonal: Vec::new(),
                // A trace norm is never negative.
                lower: Some(0.0),
            },
            polyak_target: None,
            iterations: 0,
        })
    }

    fn done(&self) -> bool {
        self.best.gap() <= self.opts.target_accuracy
            || self.opts.stop_below.is_some_and(|t| self.best.value < t)
    }

    fn evaluate(&mut self, d: &[f64]) -> EigenDecomposition {
        let (value, eig) = trace_distance_at(self.rho, d);
        self.best.offer(value, d);
        eig
    }

    fn starting_points(&mut self) -> Vec<Vec<f64>> {
        let n = self.rho.dim();
        let mut starts = vec![self.constraint.project(&self.rho.diagonal())];
        match self.constraint {
            Constraint::Orthant => starts.push(vec![0.0; n]),
            Constraint::Simplex => starts.push(vec![1.0 / n as f64; n]),
        }
        if self.constraint == Constraint::Orthant {
            let eig = self.rho.matrix().eig();
            if eig.values[0] >= 1.0 - NEAR_PURE {
                if let Ok(x) = PureState::normalized(eig.vector(0)) {
                    starts.push(pure_optimal_witness(&x).scaled_diagonal());
                    if let Ok(cert) = dual_certificate_pure(&x) {
                        if cert.check_feasible(1e-12).is_ok() {
                            if let Ok(lb) = cert.objective(self.rho) {
                                self.best.offer_bound(lb);
                                self.polyak_target = Some(lb);
                            }
                        }
                    }
                }
            }
        }
        let mut rng = SampleStream::new(0x5eed_d1a6);
        for _ in 0..self.opts.restarts {
            let raw: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform() / n as f64).collect();
            starts.push(self.constraint.project(&raw));
        }
        starts
    }

    fn run(mut self) -> Result<SolverResult> {
        let starts = self.starting_points();
        for d in &starts {
            let eig = self.evaluate(d);
            let lb = sign_bound(self.rho, &eig, self.constraint);
            self.best.offer_bound(lb);
            if self.done() {
                return Ok(self.finish());
            }
        }
        for d in starts {
            self.subgradient_descent(d);
            if self.done() {
                return Ok(self.finish());
            }
        }
        if self.opts.polish {
            self.polish();
        }
        Ok(self.finish())
    }

    fn finish(self) -> SolverResult {
        let converged = self.best.gap() <= self.opts.target_accuracy;
        SolverResult {
            value: self.best.value,
            diagonal: self.best.diagonal,
            iterations: self.iterations,
            best_lower_bound: self.best.lower,
            converged,
        }
    }

    fn subgradient_descent(&mut self, mut d: Vec<f64>) {
        let mut history: Vec<f64> = Vec::with_capacity(self.opts.max_iterations);
        for t in 0..self.opts.max_iterations {
            self.iterations += 1;
            let eig = self.evaluate(&d);
            history.push(self.best.value);
            if self.done() {
                return;
            }
            if t >= STAGNATION_WINDOW {
                let old = history[t - STAGNATION_WINDOW];
                let scale = self.best.value.abs().max(f64::MIN_POSITIVE);
                if old - self.best.value < STAGNATION_REL * scale {
                    return;
                }
            }
            let (value, mut grad) = value_and_subgradient(&eig);
            if self.constraint == Constraint::Simplex {
                // Only the component tangent to the simplex moves the iterate.
                let mean = grad.iter().sum::<f64>() / grad.len() as f64;
                grad.iter_mut().for_each(|g| *g -= mean);
            }
            let norm_sq: f64 = grad.iter().map(|g| g * g).sum();
            if norm_sq == 0.0 {
                return;
            }
            let step = match (self.opts.step_schedule, self.polyak_target) {
                (StepSchedule::Polyak, Some(target)) => {
                    let excess = value - target;
                    if excess <= 0.0 {
                        return;
                    }
                    excess / norm_sq
                }
                _ => DIMINISHING_STEP / ((t + 1) as f64).sqrt() / norm_sq.sqrt(),
            };
            let moved: Vec<f64> = d.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
            d = self.constraint.project(&moved);
        }
    }

    fn polish(&mut self) {
        let n = self.rho.dim();
        let mu_min = (self.opts.target_accuracy * 1e-2 / n as f64).max(1e-13);
        let mut d = self.best.diagonal.clone();
        let mut mu = MU_START;
        loop {
            d = self.newton(d, mu);
            let eig = self.evaluate(&d);
            let lb = smoothed_bound(self.rho, &eig, mu, self.constraint)
                .max(sign_bound(self.rho, &eig, self.constraint));
            self.best.offer_bound(lb);
            if self.done() || mu <= mu_min {
                return;
            }
            mu = (mu * MU_FACTOR).max(mu_min);
        }
    }

    /// Projected Newton iterations on the smoothed objective at fixed `mu`.
    fn newton(&mut self, mut d: Vec<f64>, mu: f64) -> Vec<f64> {
        let n = self.rho.dim();
        let mut state = SmoothState::at(self.rho, &d, mu);
        for _ in 0..NEWTON_ITERATIONS {
            self.iterations += 1;
            self.best.offer(state.exact_value, &d);
            let grad = &state.grad;

            let pg = self.constraint.project(
                &d.iter().zip(grad).map(|(x, g)| x - g).collect::<Vec<_>>(),
            );
            let pg_norm = d
                .iter()
                .zip(&pg)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if pg_norm <= 1e-13 {
                break;
            }

            let eps = pg_norm.min(1e-9);
            let free_grad_floor = match self.constraint {
                Constraint::Orthant => 0.0,
                Constraint::Simplex => (0..n)
                    .filter(|&i| d[i] > eps)
                    .map(|i| grad[i])
                    .fold(f64::INFINITY, f64::min),
            };
            let free: Vec<usize> = (0..n)
                .filter(|&i| !(d[i] <= eps && grad[i] > free_grad_floor))
                .collect();

            let direction = newton_direction(&state, &free, self.constraint, n);
            let slope: f64 = direction.iter().zip(grad).map(|(a, b)| a * b).sum();
            let candidate = if slope < 0.0 {
                self.line_search(&d, &direction, &state, mu)
            } else {
                None
            };
            let next = candidate.or_else(|| {
                let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
                self.line_search(&d, &neg, &state, mu)
            });
            match next {
                Some((nd, ns)) => {
                    let decrease = state.smooth_value - ns.smooth_value;
                    d = nd;
                    state = ns;
                    if decrease <= 1e-15 * state.smooth_value.abs().max(1e-300) {
                        break;
                    }
                }
                None => break,
            }
        }
        self.best.offer(state.exact_value, &d);
        d
    }

    fn line_search(
        &self,
        d: &[f64],
        direction: &[f64],
        state: &SmoothState,
        mu: f64,
    ) -> Option<(Vec<f64>, SmoothState)> {
        let mut alpha = 1.0;
        for _ in 0..50 {
            let trial: Vec<f64> = d.iter().zip(direction).map(|(x, s)| x + alpha * s).collect();
            let trial = self.constraint.project(&trial);
            let predicted: f64 = trial
                .iter()
                .zip(d)
                .zip(&state.grad)
                .map(|((t, x), g)| g * (t - x))
                .sum();
            if predicted < 0.0 {
                let next = SmoothState::at(self.rho, &trial, mu);
                if next.smooth_value <= state.smooth_value + 1e-4 * predicted {
                    return Some((trial, next));
                }
            }
            alpha *= 0.5;
        }
        None
    }
}

/// Smoothed objective, its gradient and the spectral data needed for the
/// Hessian at one point.
struct SmoothState {
    eig: EigenDecomposition,
    mu: f64,
    smooth_value: f64,
    exact_value: f64,
    grad: Vec<f64>,
}

impl SmoothState {
    fn at(rho: &DensityMatrix, d: &[f64], mu: f64) -> Self {
        let (exact_value, eig) = trace_distance_at(rho, d);
        let smooth_value = eig.values.iter().map(|&l| smooth_value(l, mu)).sum();
        let n = eig.dim();
        let slopes: Vec<f64> = eig.values.iter().map(|&l| smooth_slope(l, mu)).collect();
        let u = &eig.vectors;
        let grad = (0..n)
            .map(|i| -(0..n).map(|k| slopes[k] * u[(i, k)].norm_sqr()).sum::<f64>())
            .collect();
        Self {
            eig,
            mu,
            smooth_value,
            exact_value,
            grad,
        }
    }

    /// Hessian of the smoothed objective restricted to `free`
    /// (Daleckii-Krein formula), row-major.
    fn hessian(&self, free: &[usize]) -> Vec<f64> {
        let n = self.eig.dim();
        let m = free.len();
        let u = &self.eig.vectors;
        let lam = &self.eig.values;
        let mut h = vec![0.0; m * m];
        let mut q = vec![num_complex::Complex64::new(0.0, 0.0); m];
        for a in 0..n {
            for b in a..n {
                let gamma = slope_divided_difference(lam[a], lam[b], self.mu);
                if gamma == 0.0 {
                    continue;
                }
                let weight = if a == b { gamma } else { 2.0 * gamma };
                for (r, &i) in free.iter().enumerate() {
                    q[r] = u[(i, a)].conj() * u[(i, b)];
                }
                for r in 0..m {
                    for s in r..m {
                        let v = weight * (q[r] * q[s].conj()).re;
                        h[r * m + s] += v;
                    }
                }
            }
        }
        for r in 0..m {
            for s in 0..r {
                h[r * m + s] = h[s * m + r];
            }
        }
        h
    }
}

/// Newton step on the free coordinates; active coordinates stay put. For
/// the simplex the step is constrained to keep the sum fixed.
fn newton_direction(state: &SmoothState, free: &[usize], constraint: Constraint, n: usize) -> Vec<f64> {
    let mut direction = vec![0.0; n];
    if free.is_empty() {
        return direction;
    }
    let h = state.hessian(free);
    let g: Vec<f64> = free.iter().map(|&i| state.grad[i]).collect();
    let Some(chol) = Cholesky::regularized(&h, free.len()) else {
        return direction;
    };
    let hg = chol.solve(&g);
    let step: Vec<f64> = match constraint {
        Constraint::Orthant => hg.iter().map(|v| -v).collect(),
        Constraint::Simplex => {
            let ones = vec![1.0; free.len()];
            let h1 = chol.solve(&ones);
            let denom: f64 = h1.iter().sum();
            let nu = if denom != 0.0 { -hg.iter().sum::<f64>() / denom } else { 0.0 };
            hg.iter().zip(&h1).map(|(a, b)| -(a + nu * b)).collect()
        }
    };
    for (r, &i) in free.iter().enumerate() {
        direction[i] = step[r];
    }
    direction
}

/// Dense Cholesky factor of a symmetric positive definite matrix.
struct Cholesky {
    l: Vec<f64>,
    m: usize,
}

impl Cholesky {
    fn factor(a: &[f64], m: usize) -> Option<Self> {
        let mut l = vec![0.0; m * m];
        for j in 0..m {
            let mut diag = a[j * m + j];
            for k in 0..j {
                diag -= l[j * m + k] * l[j * m + k];
            }
            if !(diag > 0.0) {
                return None;
            }
            let ljj = diag.sqrt();
            l[j * m + j] = ljj;
            for i in j + 1..m {
                let mut v = a[i * m + j];
                for k in 0..j {
                    v -= l[i * m + k] * l[j * m + k];
                }
                l[i * m + j] = v / ljj;
            }
        }
        Some(Self { l, m })
    }

    /// Factors `A + tau I`, increasing `tau` until the factorization exists.
    fn regularized(a: &[f64], m: usize) -> Option<Self> {
        let scale = (0..m).map(|i| a[i * m + i].abs()).fold(0.0, f64::max).max(1e-300);
        let mut tau = 1e-14 * scale;
        for _ in 0..20 {
            let mut shifted = a.to_vec();
            for i in 0..m {
                shifted[i * m + i] += tau;
            }
            if let Some(c) = Self::factor(&shifted, m) {
                return Some(c);
            }
            tau *= 100.0;
        }
        None
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = b.to_vec();
        for i in 0..m {
            for k in 0..i {
                y[i] -= self.l[i * m + k] * y[k];
            }
            y[i] /= self.l[i * m + i];
        }
        for i in (0..m).rev() {
            for k in i + 1..m {
                y[i] -= self.l[k * m + i] * y[k];
            }
            y[i] /= self.l[i * m + i];
        }
        y
    }
}

/// Worst solver/closed-form disagreement for one family of states.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationRow {
    pub dim: usize,
    pub family: StateFamily,
    pub samples: usize,
    pub max_discrepancy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFamily {
    /// Random 2x2 density matrices checked against `2|rho_12|`.
    QubitMixed,
    /// Haar pure states checked against the largest-amplitude formula.
    HaarPure,
    /// Random diagonal states, where the minimum is zero.
    Incoherent,
}

impl StateFamily {
    pub fn label(self) -> &'static str {
        match self {
            StateFamily::QubitMixed => "qubit-mixed",
            StateFamily::HaarPure => "haar-pure",
            StateFamily::Incoherent => "incoherent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidationReport {
    pub rows: Vec<CrossValidationRow>,
}

impl CrossValidationReport {
    pub fn max_for(&self, family: StateFamily) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.family == family)
            .map(|r| r.max_discrepancy)
            .reduce(f64::max)
    }
}

/// Compares the solver against the closed forms on sampled qubit, pure and
/// incoherent states for each dimension in `dims`.
pub fn cross_validate(dims: &[usize], samples_per_dim: usize, seed: u64) -> Result<CrossValidationReport> {
    use crate::closed_forms::{pure_mod_trace, qubit_mod_trace};
    use crate::states::{haar_pure, random_qubit};
    use rayon::prelude::*;

    if let Some(&bad) = dims.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("dimensions must be >= 2, got {bad}")));
    }
    let opts = SolverOptions::default();
    let mut families = Vec::new();
    for &n in dims {
        if n == 2 {
            families.push((n, StateFamily::QubitMixed));
        }
        families.push((n, StateFamily::HaarPure));
        families.push((n, StateFamily::Incoherent));
    }
    let rows = families
        .into_iter()
        .enumerate()
        .map(|(f_idx, (n, family))| -> Result<CrossValidationRow> {
            let worst = (0..samples_per_dim)
                .into_par_iter()
                .map(|s| -> Result<f64> {
                    let index = ((f_idx as u64) << 32) | s as u64;
                    let mut rng = SampleStream::substream(seed, index);
                    let (rho, exact) = match family {
                        StateFamily::QubitMixed => {
                            let rho = random_qubit(&mut rng);
                            let exact = qubit_mod_trace(&rho)?;
                            (rho, exact)
                        }
                        StateFamily::HaarPure => {
                            let x = haar_pure(n, &mut rng)?;
                            (x.density(), pure_mod_trace(&x))
                        }
                        StateFamily::Incoherent => {
                            let raw: Vec<f64> = (0..n).map(|_| rng.uniform() + 1e-3).collect();
                            let total: f64 = raw.iter().sum();
                            let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
                            (DensityMatrix::from_diagonal(&w)?, 0.0)
                        }
                    };
                    let r = mod_trace_distance(&rho, &opts)?;
                    Ok((r.value - exact).abs())
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(CrossValidationRow {
                dim: n,
                family,
                samples: samples_per_dim,
                max_discrepancy: worst,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossValidationReport { rows })
}
