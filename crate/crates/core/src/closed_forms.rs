//! Exact values of the modified trace distance of coherence on qubits and
//! pure states, together with optimal incoherent witnesses and the dual
//! certificates that prove their optimality.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use crate::error::{Error, Result};
use crate::linalg::{block_2x2, ComplexMatrix, HermitianMatrix, C64};
use crate::states::{DensityMatrix, DiagonalState, PureState, SampleStream};

/// Entrywise tolerance on `diag(Y)` and the spectral constraints of a
/// certificate.
pub const CERTIFICATE_TOL: f64 = 1e-10;

/// Largest closure residual `|sum_j w_j e^{i theta_j}|` accepted.
pub const CLOSURE_TOL: f64 = 1e-10;

/// A scaled diagonal state `p * delta`, the object minimized over.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherentWitness {
    pub scale: f64,
    pub delta: DiagonalState,
    /// Position inside the one-parameter family of qubit optima.
    pub mu: Option<f64>,
}

impl IncoherentWitness {
    /// Encodes a nonnegative diagonal `d` as `p = sum(d)`, `delta = d / p`.
    /// The zero diagonal becomes `p = 0` with a uniform `delta`.
    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        if d.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidArgument("diagonal entries must be nonnegative".into()));
        }
        let p: f64 = d.iter().sum();
        let delta = if p > 0.0 {
            DiagonalState::new(d.iter().map(|v| v / p).collect())?
        } else {
            DiagonalState::uniform(d.len())
        };
        Ok(Self {
            scale: p,
            delta,
            mu: None,
        })
    }

    /// `p * delta` as a weight vector.
    pub fn scaled_diagonal(&self) -> Vec<f64> {
        self.delta.weights().iter().map(|w| w * self.scale).collect()
    }

    /// `rho - p delta`.
    pub fn residual(&self, rho: &DensityMatrix) -> Result<HermitianMatrix> {
        rho.matrix().minus_diagonal(&self.scaled_diagonal())
    }

    pub fn residual_trace_norm(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self.residual(rho)?.trace_norm())
    }
}

/// Sum of the moduli of all off-diagonal entries.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += rho.entry(i, j).norm();
            }
        }
    }
    acc
}

fn require_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "qubit formula needs a 2x2 state, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// `2 |rho_12|` for a qubit.
pub fn qubit_mod_trace(rho: &DensityMatrix) -> Result<f64> {
    require_qubit(rho)?;
    Ok(2.0 * rho.entry(0, 1).norm())
}

/// Optimal qubit witness `diag(rho_11 - mu, rho_22 - mu)`.
///
/// The residual is `[[mu, rho_12], [rho_21, mu]]` with eigenvalues
/// `mu +- |rho_12|`, so its trace norm equals `2|rho_12|` exactly when
/// `|mu| <= |rho_12|`; nonnegativity of the diagonal adds
/// `mu <= min(rho_11, rho_22)`.
pub fn qubit_optimal_interval(rho: &DensityMatrix) -> Result<(f64, f64)> {
    require_qubit(rho)?;
    let d = rho.diagonal();
    let off = rho.entry(0, 1).norm();
    Ok((-off, off.min(d[0]).min(d[1])))
}

pub fn qubit_optimal_set(rho: &DensityMatrix, mu: f64) -> Result<IncoherentWitness> {
    let (lo, hi) = qubit_optimal_interval(rho)?;
    let d = rho.diagonal();
    const SLACK: f64 = 1e-12;
    if !(mu >= lo - SLACK && mu <= hi + SLACK) {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu} outside the optimal interval [{lo}, {hi}]"
        )));
    }
    let diag = [(d[0] - mu).max(0.0), (d[1] - mu).max(0.0)];
    let mut w = IncoherentWitness::from_diagonal(&diag)?;
    w.mu = Some(mu);
    Ok(w)
}

/// Modified trace distance of a pure state whose largest amplitude modulus
/// is `a`: one up to `a = 1/sqrt(2)`, then `2 a sqrt(1 - a^2)`.
pub fn mod_trace_from_max_amplitude(a: f64) -> f64 {
    if a <= FRAC_1_SQRT_2 {
        1.0
    } else {
        let a = a.min(1.0);
        2.0 * a * (1.0 - a * a).max(0.0).sqrt()
    }
}

/// Largest modulus, its index, and the Euclidean norm of the remaining
/// amplitudes (computed directly, which is more accurate than
/// `sqrt(1 - a^2)` when `a` is close to one).
fn leading_amplitude(x: &PureState) -> (f64, usize, f64) {
    let j = x.argmax_modulus();
    let rest = x
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != j)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    (x.amplitudes()[j].norm(), j, rest)
}

fn is_flat_case(a: f64) -> bool {
    a <= FRAC_1_SQRT_2
}

/// Modified trace distance of `|x><x|`.
pub fn pure_mod_trace(x: &PureState) -> f64 {
    let (a, _, rest) = leading_amplitude(x);
    if is_flat_case(a) {
        1.0
    } else {
        (2.0 * a * rest).min(1.0)
    }
}

/// An optimal `(p, delta)` for `|x><x|`: `p = 0` when the largest modulus is
/// at most `1/sqrt(2)` (with the uniform `delta` by convention), otherwise
/// `p = 2 a^2 - 1` on a point mass at the largest amplitude.
pub fn pure_optimal_witness(x: &PureState) -> IncoherentWitness {
    let (a, j, rest) = leading_amplitude(x);
    if is_flat_case(a) {
        IncoherentWitness {
            scale: 0.0,
            delta: DiagonalState::uniform(x.dim()),
            mu: None,
        }
    } else {
        IncoherentWitness {
            // 2a^2 - 1 written as a^2 - rest^2 for accuracy near a = 1.
            scale: (a * a - rest * rest).max(0.0),
            delta: DiagonalState::point_mass(x.dim(), j),
            mu: None,
        }
    }
}

/// The two nonzero eigenvalues of `rho - p delta` at the case (b) witness
/// and their unnormalized eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessEigenpair {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
}

/// Eigenpairs of the residual at the optimal witness for a state with real
/// nonnegative amplitudes whose first entry is the largest and exceeds
/// `1/sqrt(2)` (canonical states in particular).
pub fn witness_eigenpair(x: &PureState) -> Result<WitnessEigenpair> {
    let real_nonneg = x.amplitudes().iter().all(|z| z.im.abs() <= 1e-12 && z.re >= -1e-12);
    let (a, jmax, rest) = leading_amplitude(x);
    if !real_nonneg || jmax != 0 {
        return Err(Error::InvalidArgument(
            "witness eigenpair needs real nonnegative amplitudes with the largest first".into(),
        ));
    }
    if is_flat_case(a) {
        return Err(Error::InvalidArgument(format!(
            "largest amplitude {a} is at most 1/sqrt(2); the residual has no such eigenpair"
        )));
    }
    let s2 = rest * rest;
    let tail: Vec<f64> = x.amplitudes()[1..].iter().map(|z| z.re).collect();
    let with_head = |h: f64| std::iter::once(h).chain(tail.iter().copied()).collect();
    Ok(WitnessEigenpair {
        lambda_plus: s2 + a * rest,
        lambda_minus: s2 - a * rest,
        v_plus: with_head(rest),
        v_minus: with_head(-rest),
    })
}

/// Phases `theta` with `theta_1 = 0` and `sum_j w_j e^{i theta_j} = 0` for a
/// probability vector whose entries are all at most one half.
pub fn close_phase_polygon(w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() || w.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::InvalidArgument("weights must be nonnegative and nonempty".into()));
    }
    let total: f64 = w.iter().sum();
    if !((total - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "weights sum to {total:.15}, expected 1"
        )));
    }
    let max = w.iter().copied().fold(0.0, f64::max);
    if max > 0.5 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "largest weight {max} exceeds 1/2; the polygon cannot close"
        )));
    }
    closing_phases(w)
}

/// `|sum_j w_j e^{i theta_j}|`.
pub fn closure_residual(w: &[f64], theta: &[f64]) -> f64 {
    w.iter()
        .zip(theta)
        .map(|(&wj, &t)| C64::from_polar(wj, t))
        .sum::<C64>()
        .norm()
}

/// Scale-free core of [`close_phase_polygon`].
fn closing_phases(w: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = w.iter().sum();
    let tol = CLOSURE_TOL * total.max(1.0) * 0.1;
    let theta = triangle_phases(w);
    if closure_residual(w, &theta) <= tol {
        return Ok(theta);
    }
    fixed_point_phases(w, tol).ok_or_else(|| {
        Error::InvalidArgument("phase closure did not reach the residual tolerance".into())
    })
}

/// Greedy three-way partition (heaviest weight to the lightest group), then
/// the group sums are laid out as the sides of a triangle.
fn triangle_phases(w: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&i, &j| w[j].total_cmp(&w[i]));
    let mut group_of = vec![0usize; w.len()];
    let mut sums = [0.0f64; 3];
    for &i in &order {
        let g = (0..3)
            .min_by(|&a, &b| sums[a].total_cmp(&sums[b]))
            .expect("three groups");
        group_of[i] = g;
        sums[g] += w[i];
    }

    // Group containing index 0 is laid along the positive real axis.
    let ga = group_of[0];
    let others: Vec<usize> = (0..3).filter(|&g| g != ga).collect();
    let (gb, gc) = (others[0], others[1]);
    let (sa, sb, sc) = (sums[ga], sums[gb], sums[gc]);

    let beta = if sa > 0.0 && sb > 0.0 {
        ((sc * sc - sa * sa - sb * sb) / (2.0 * sa * sb))
            .clamp(-1.0, 1.0)
            .acos()
    } else {
        0.0
    };
    let p2 = C64::new(sa, 0.0) + C64::from_polar(sb, beta);
    let gamma = if p2.norm() > 0.0 { (-p2).arg() } else { 0.0 };

    let mut phase = [0.0; 3];
    phase[gb] = beta;
    phase[gc] = gamma;
    group_of.iter().map(|&g| wrap_angle(phase[g])).collect()
}

/// Damped coordinate-wise minimization of `|sum_j w_j e^{i theta_j}|^2`
/// from randomized starts.
pub(crate) fn fixed_point_phases(w: &[f64], tol: f64) -> Option<Vec<f64>> {
    const STARTS: u64 = 32;
    const SWEEPS: usize = 20_000;
    const DAMPING: f64 = 0.8;
    for start in 0..STARTS {
        let mut rng = SampleStream::substream(0x70_6f_6c_79, start);
        let mut theta: Vec<f64> = w.iter().map(|_| TAU * rng.uniform()).collect();
        let mut sum: C64 = w.iter().zip(&theta).map(|(&wj, &t)| C64::from_polar(wj, t)).sum();
        for sweep in 0..SWEEPS {
            if sweep % 16 == 15 && sum.norm() < 1e-2 {
                gauss_newton_phases(w, &mut theta, tol);
                sum = w.iter().zip(&theta).map(|(&wj, &t)| C64::from_polar(wj, t)).sum();
            }
            for j in 0..w.len() {
                if w[j] == 0.0 {
                    continue;
                }
                let others = sum - C64::from_polar(w[j], theta[j]);
                if others.norm() == 0.0 {
                    continue;
                }
                let target = (-others).arg();
                let step = wrap_signed(target - theta[j]);
                theta[j] += DAMPING * step;
                sum = others + C64::from_polar(w[j], theta[j]);
            }
            if sum.norm() <= tol {
                break;
            }
        }
        let shift = theta[0];
        let theta: Vec<f64> = theta.iter().map(|t| wrap_angle(t - shift)).collect();
        if closure_residual(w, &theta) <= tol {
            return Some(theta);
        }
    }
    None
}

/// Minimum-norm Gauss-Newton steps on `sum_j w_j e^{i theta_j} = 0`.
fn gauss_newton_phases(w: &[f64], theta: &mut [f64], tol: f64) {
    for _ in 0..50 {
        let r: C64 = w.iter().zip(theta.iter()).map(|(&wj, &t)| C64::from_polar(wj, t)).sum();
        if r.norm() <= tol {
            return;
        }
        // Columns of the Jacobian are i w_j e^{i theta_j} as real 2-vectors.
        let cols: Vec<(f64, f64)> =
            w.iter().zip(theta.iter()).map(|(&wj, &t)| (-wj * t.sin(), wj * t.cos())).collect();
        let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
        for &(x, y) in &cols {
            a += x * x;
            b += x * y;
            d += y * y;
        }
        let reg = 1e-14 * (a + d);
        let (a, d) = (a + reg, d + reg);
        let det = a * d - b * b;
        if !(det > 0.0) {
            return;
        }
        let u = (d * r.re - b * r.im) / det;
        let v = (a * r.im - b * r.re) / det;
        let before = r.norm();
        let old = theta.to_vec();
        for (t, &(x, y)) in theta.iter_mut().zip(&cols) {
            *t -= x * u + y * v;
        }
        let after: f64 = w.iter().zip(theta.iter()).map(|(&wj, &t)| C64::from_polar(wj, t)).sum::<C64>().norm();
        if !(after < before) {
            theta.copy_from_slice(&old);
            return;
        }
    }
}

fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn wrap_signed(t: f64) -> f64 {
    let r = wrap_angle(t);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Which branch of the pure-state construction produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Largest modulus at most `1/sqrt(2)`: `Y` built from an orthogonal
    /// phase-rotated copy of the state.
    CaseA,
    /// Largest modulus above `1/sqrt(2)`: `Y` built from the witness
    /// residual's eigenvectors.
    CaseB,
}

/// Feasible point `(X, Y, Z)` of the dual program
///
/// ```text
/// maximize   -tr(rho (Y + Y^dagger))
/// subject to [X Y; Y^dagger Z] >= 0,  ||X||, ||Z|| <= 1/2,  diag(Y) = 0.
/// ```
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub x_block: HermitianMatrix,
    pub y_block: ComplexMatrix,
    pub z_block: HermitianMatrix,
    pub construction: Construction,
    /// Phases `theta_j` of the orthogonal copy (case A only).
    pub phases: Option<Vec<f64>>,
    /// `|y>` for case A; the normalized `|v+>`, `|v->` for case B.
    pub companions: Vec<PureState>,
}

/// How far a certificate is from violating each dual constraint; all
/// entries are zero for an exactly feasible point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateResiduals {
    /// `max_i |Y_ii|`.
    pub diag_y: f64,
    /// `max(0, ||X|| - 1/2)`.
    pub x_norm_excess: f64,
    pub z_norm_excess: f64,
    /// `max(0, -lambda_min([X Y; Y^dagger Z]))`.
    pub block_negativity: f64,
}

impl CertificateResiduals {
    pub fn max(&self) -> f64 {
        self.diag_y
            .max(self.x_norm_excess)
            .max(self.z_norm_excess)
            .max(self.block_negativity)
    }
}

impl DualCertificate {
    /// The trivial certificate `X = Z = I/2`, `Y = 0` with objective zero.
    pub fn trivial(n: usize, construction: Construction) -> Self {
        let half = HermitianMatrix::identity(n).scale(0.5);
        Self {
            x_block: half.clone(),
            y_block: ComplexMatrix::zeros(n, n),
            z_block: half,
            construction,
            phases: None,
            companions: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.x_block.dim()
    }

    pub fn block_matrix(&self) -> Result<HermitianMatrix> {
        block_2x2(&self.x_block, &self.y_block, &self.z_block)
    }

    pub fn residuals(&self) -> Result<CertificateResiduals> {
        let diag_y = self.y_block.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(CertificateResiduals {
            diag_y,
            x_norm_excess: (self.x_block.operator_norm() - 0.5).max(0.0),
            z_norm_excess: (self.z_block.operator_norm() - 0.5).max(0.0),
            block_negativity: (-self.block_matrix()?.min_eigenvalue()).max(0.0),
        })
    }

    /// Checks every constraint at tolerance `tol`, naming the first one
    /// violated.
    pub fn check_feasible(&self, tol: f64) -> Result<()> {
        let r = self.residuals()?;
        let checks = [
            ("diag(Y) = 0", r.diag_y),
            ("||X|| <= 1/2", r.x_norm_excess),
            ("||Z|| <= 1/2", r.z_norm_excess),
            ("[X Y; Y^dagger Z] positive semidefinite", r.block_negativity),
        ];
        for (constraint, residual) in checks {
            if !(residual <= tol) {
                return Err(Error::InfeasibleCertificate { constraint, residual });
            }
        }
        Ok(())
    }

    /// `-Re tr(rho (Y + Y^dagger))`, without a feasibility check.
    pub fn objective(&self, rho: &DensityMatrix) -> Result<f64> {
        let n = self.dim();
        if rho.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "certificate of dimension {n} applied to a state of dimension {}",
                rho.dim()
            )));
        }
        let y = &self.y_block;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let sym = y[(j, i)] + y[(i, j)].conj();
                acc += (rho.entry(i, j) * sym).re;
            }
        }
        Ok(-acc)
    }
}

/// Dual objective of a feasible certificate; a lower bound on the modified
/// trace distance of `rho` by weak duality.
pub fn verify_dual(cert: &DualCertificate, rho: &DensityMatrix, tol: f64) -> Result<f64> {
    if rho.dim() != cert.dim() {
        return Err(Error::DimensionMismatch(format!(
            "certificate of dimension {} applied to a state of dimension {}",
            cert.dim(),
            rho.dim()
        )));
    }
    cert.check_feasible(tol)?;
    cert.objective(rho)
}

/// Dual certificate whose objective on `|x><x|` equals [`pure_mod_trace`].
///
/// The construction is carried out in the state's own basis, so any pure
/// state is accepted; for a canonical state it reduces to the textbook
/// vectors with the largest amplitude first.
pub fn dual_certificate_pure(x: &PureState) -> Result<DualCertificate> {
    let n = x.dim();
    let (a, jmax, rest) = leading_amplitude(x);

    if is_flat_case(a) {
        let w: Vec<f64> = x.amplitudes().iter().map(|z| z.norm_sqr()).collect();
        let theta = closing_phases(&w)?;
        let y_amps: Vec<C64> = x
            .amplitudes()
            .iter()
            .zip(&theta)
            .map(|(&xj, &t)| xj * C64::from_polar(1.0, t))
            .collect();
        let y_state = PureState::normalized(y_amps)?;
        let y_block = ComplexMatrix::outer(y_state.amplitudes(), y_state.amplitudes())
            .sub(&ComplexMatrix::outer(x.amplitudes(), x.amplitudes()))?
            .scale(0.5);
        let mut cert = DualCertificate::trivial(n, Construction::CaseA);
        cert.y_block = y_block;
        cert.phases = Some(theta);
        cert.companions = vec![y_state];
        return Ok(cert);
    }

    if rest == 0.0 {
        // Basis state: the objective, like the distance, is zero.
        return Ok(DualCertificate::trivial(n, Construction::CaseB));
    }

    let head_phase = x.amplitudes()[jmax] / a;
    let make = |sign: f64| -> Result<PureState> {
        let mut v = x.amplitudes().to_vec();
        v[jmax] = head_phase * (sign * rest);
        PureState::normalized(v)
    };
    let v_plus = make(1.0)?;
    let v_minus = make(-1.0)?;
    let y_block = ComplexMatrix::outer(v_minus.amplitudes(), v_minus.amplitudes())
        .sub(&ComplexMatrix::outer(v_plus.amplitudes(), v_plus.amplitudes()))?
        .scale(0.5);
    let mut cert = DualCertificate::trivial(n, Construction::CaseB);
    cert.y_block = y_block;
    cert.companions = vec![v_plus, v_minus];
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qubit(r11: f64, r12: C64) -> DensityMatrix {
        let m = ComplexMatrix::new(2, 2, vec![c(r11, 0.0), r12, r12.conj(), c(1.0 - r11, 0.0)])
            .unwrap();
        DensityMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_coherence(&DensityMatrix::from_diagonal(&[0.2, 0.8]).unwrap()), 0.0);
        let plus = PureState::maximally_coherent(2).unwrap().density();
        assert_abs_diff_eq!(l1_coherence(&plus), 1.0, epsilon = 1e-15);
        let max3 = PureState::maximally_coherent(3).unwrap().density();
        assert_abs_diff_eq!(l1_coherence(&max3), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn qubit_formula_examples() {
        let plus = PureState::maximally_coherent(2).unwrap().density();
        assert_abs_diff_eq!(qubit_mod_trace(&plus).unwrap(), 1.0, epsilon = 1e-15);
        let diag = DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(qubit_mod_trace(&diag).unwrap(), 0.0);
        let rho = qubit(0.5, c(0.3, 0.1));
        assert_abs_diff_eq!(qubit_mod_trace(&rho).unwrap(), 2.0 * 0.1f64.sqrt(), epsilon = 1e-15);
        let big = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(qubit_mod_trace(&big), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn qubit_optimal_family() {
        let rho = qubit(0.5, c(0.3, 0.1));
        let off = rho.entry(0, 1).norm();
        assert_eq!(qubit_optimal_interval(&rho).unwrap(), (-off, off));
        for mu in [0.0, -off, 0.25, off] {
            let w = qubit_optimal_set(&rho, mu).unwrap();
            assert_eq!(w.mu, Some(mu));
            assert_abs_diff_eq!(w.residual_trace_norm(&rho).unwrap(), 2.0 * off, epsilon = 1e-12);
        }
        let w = qubit_optimal_set(&rho, 0.0).unwrap();
        assert_abs_diff_eq!(w.scaled_diagonal()[0], 0.5, epsilon = 1e-15);
        let w = qubit_optimal_set(&rho, -off).unwrap();
        assert_abs_diff_eq!(w.scaled_diagonal()[1], 0.5 + off, epsilon = 1e-15);
        assert!(qubit_optimal_set(&rho, off + 0.01).is_err());
        assert!(qubit_optimal_set(&rho, -off - 0.01).is_err());

        let plus = PureState::maximally_coherent(2).unwrap().density();
        let w = qubit_optimal_set(&plus, 0.25).unwrap();
        assert_abs_diff_eq!(w.scaled_diagonal()[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w.residual_trace_norm(&plus).unwrap(), 1.0, epsilon = 1e-14);
        // mu = 1/2 removes the whole diagonal: p = 0.
        let w = qubit_optimal_set(&plus, 0.5).unwrap();
        assert_eq!(w.scale, 0.0);
    }

    #[test]
    fn pure_formula_examples() {
        assert_eq!(pure_mod_trace(&PureState::maximally_coherent(3).unwrap()), 1.0);
        assert_eq!(pure_mod_trace(&PureState::basis(4, 2).unwrap()), 0.0);
        let x = PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        assert_abs_diff_eq!(pure_mod_trace(&x), 0.8, epsilon = 1e-15);
        assert_eq!(mod_trace_from_max_amplitude(FRAC_1_SQRT_2), 1.0);
        assert_eq!(mod_trace_from_max_amplitude(1.0), 0.0);
    }

    #[test]
    fn pure_witness_examples() {
        let x = PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        let w = pure_optimal_witness(&x);
        assert_abs_diff_eq!(w.scale, 0.6, epsilon = 1e-15);
        assert_eq!(w.delta.weights(), &[1.0, 0.0]);
        let rho = x.density();
        let residual = w.residual(&rho).unwrap();
        let vals = residual.eigenvalues();
        assert_abs_diff_eq!(vals[0], 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], -0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(residual.trace_norm(), 0.8, epsilon = 1e-14);

        let boundary = PureState::from_real(&[FRAC_1_SQRT_2, 0.5, 0.5]).unwrap();
        assert_eq!(pure_optimal_witness(&boundary).scale, 0.0);

        let e1 = PureState::basis(3, 0).unwrap();
        let w = pure_optimal_witness(&e1);
        assert_eq!(w.scale, 1.0);
        assert_eq!(w.delta.weights(), &[1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(w.residual_trace_norm(&e1.density()).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eigenpair_examples() {
        let x = PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        let e = witness_eigenpair(&x).unwrap();
        assert_abs_diff_eq!(e.lambda_plus, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(e.lambda_minus, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(e.v_plus[0], 0.2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.v_minus[0], -(0.2f64.sqrt()), epsilon = 1e-15);

        let x = PureState::from_real(&[0.9, 0.3, 0.1f64.sqrt()]).unwrap();
        let e = witness_eigenpair(&x).unwrap();
        assert_abs_diff_eq!(e.lambda_plus, 0.19 + 0.9 * 0.19f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.lambda_minus, 0.19 - 0.9 * 0.19f64.sqrt(), epsilon = 1e-14);
        // direct eigensolve of rho - p delta
        let r = pure_optimal_witness(&x).residual(&x.density()).unwrap();
        let vals = r.eigenvalues();
        assert_abs_diff_eq!(vals[0], e.lambda_plus, epsilon = 1e-13);
        assert_abs_diff_eq!(vals[2], e.lambda_minus, epsilon = 1e-13);
        assert_abs_diff_eq!(vals[1], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(
            e.lambda_plus.abs() + e.lambda_minus.abs(),
            2.0 * 0.9 * 0.19f64.sqrt(),
            epsilon = 1e-14
        );

        let near_basis = PureState::normalized(vec![c(1.0, 0.0), c(1e-6, 0.0)]).unwrap();
        let e = witness_eigenpair(&near_basis).unwrap();
        assert!(e.lambda_plus.abs() < 2e-6 && e.lambda_minus.abs() < 2e-6);

        assert!(witness_eigenpair(&PureState::maximally_coherent(3).unwrap()).is_err());
        let unsorted = PureState::from_real(&[0.2f64.sqrt(), 0.8f64.sqrt()]).unwrap();
        assert!(witness_eigenpair(&unsorted.canonicalize()).is_ok());
        assert!(witness_eigenpair(&unsorted).is_err());
    }

    #[test]
    fn phase_polygon_examples() {
        let t = close_phase_polygon(&[0.5, 0.5]).unwrap();
        assert_eq!(t[0], 0.0);
        assert_abs_diff_eq!(t[1], PI, epsilon = 1e-15);

        let t = close_phase_polygon(&[0.5, 0.3, 0.2]).unwrap();
        assert_abs_diff_eq!(t[1], PI, epsilon = 1e-12);
        assert_abs_diff_eq!(t[2], PI, epsilon = 1e-12);

        let w = [0.4, 0.3, 0.3];
        let t = close_phase_polygon(&w).unwrap();
        assert_eq!(t[0], 0.0);
        assert!(closure_residual(&w, &t) <= 1e-12);

        let third = 1.0 / 3.0;
        let t = close_phase_polygon(&[third; 3]).unwrap();
        assert_abs_diff_eq!(t[1], 2.0 * PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[2], 4.0 * PI / 3.0, epsilon = 1e-12);

        assert!(close_phase_polygon(&[0.6, 0.4]).is_err());
        assert!(close_phase_polygon(&[0.3, 0.3]).is_err());
        assert!(close_phase_polygon(&[1.0]).is_err());
    }

    #[test]
    fn fixed_point_fallback_closes() {
        for w in [vec![0.4, 0.3, 0.3], vec![0.25; 4], vec![0.1, 0.2, 0.3, 0.15, 0.25]] {
            let t = fixed_point_phases(&w, 1e-11).expect("closes");
            assert_eq!(t[0], 0.0);
            assert!(closure_residual(&w, &t) <= 1e-11);
        }
        // With the largest side exactly 1/2 the solution is degenerate and
        // the fallback only gets close; the triangle layout handles it.
        assert!(fixed_point_phases(&[0.5, 0.3, 0.2], 1e-4).is_some());
    }

    #[test]
    fn certificate_examples() {
        let x = PureState::maximally_coherent(2).unwrap();
        let cert = dual_certificate_pure(&x).unwrap();
        assert_eq!(cert.construction, Construction::CaseA);
        let y = cert.companions[0].amplitudes();
        assert_abs_diff_eq!((y[0] * y[1].conj()).re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.y_block[(0, 1)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.y_block[(1, 0)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(verify_dual(&cert, &x.density(), 1e-10).unwrap(), 1.0, epsilon = 1e-14);

        let x = PureState::from_real(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        let cert = dual_certificate_pure(&x).unwrap();
        assert_eq!(cert.construction, Construction::CaseB);
        let vp = cert.companions[0].amplitudes();
        assert_abs_diff_eq!(vp[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(vp[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.y_block[(0, 1)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.y_block[(0, 0)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(verify_dual(&cert, &x.density(), 1e-10).unwrap(), 0.8, epsilon = 1e-14);

        let x = PureState::maximally_coherent(3).unwrap();
        let cert = dual_certificate_pure(&x).unwrap();
        let t = cert.phases.clone().unwrap();
        assert_abs_diff_eq!(t[1], 2.0 * PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(verify_dual(&cert, &x.density(), 1e-10).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trivial_certificate_gives_zero() {
        let cert = DualCertificate::trivial(3, Construction::CaseA);
        let rho = PureState::maximally_coherent(3).unwrap().density();
        assert_eq!(verify_dual(&cert, &rho, 0.0).unwrap(), 0.0);
        let e1 = PureState::basis(3, 0).unwrap();
        let cert = dual_certificate_pure(&e1).unwrap();
        assert_eq!(verify_dual(&cert, &e1.density(), 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn infeasible_certificates_are_named() {
        let mut cert = DualCertificate::trivial(2, Construction::CaseA);
        cert.y_block[(0, 0)] = c(0.1, 0.0);
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        match verify_dual(&cert, &rho, 1e-10) {
            Err(Error::InfeasibleCertificate { constraint, .. }) => assert_eq!(constraint, "diag(Y) = 0"),
            other => panic!("unexpected {other:?}"),
        }
        let mut cert = DualCertificate::trivial(2, Construction::CaseA);
        cert.x_block = HermitianMatrix::identity(2);
        assert!(matches!(
            verify_dual(&cert, &rho, 1e-10),
            Err(Error::InfeasibleCertificate { constraint: "||X|| <= 1/2", .. })
        ));
        let mut cert = DualCertificate::trivial(2, Construction::CaseA);
        cert.y_block[(0, 1)] = c(1.0, 0.0);
        cert.y_block[(1, 0)] = c(1.0, 0.0);
        assert!(matches!(
            verify_dual(&cert, &rho, 1e-10),
            Err(Error::InfeasibleCertificate { constraint: "[X Y; Y^dagger Z] positive semidefinite", .. })
        ));
        let small = DensityMatrix::from_diagonal(&[1.0]).unwrap();
        assert!(matches!(
            verify_dual(&DualCertificate::trivial(2, Construction::CaseA), &small, 1e-10),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
