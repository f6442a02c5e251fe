//! Pure states, density matrices, diagonal (incoherent) states and the
//! random samplers that produce them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};

pub const PURE_NORM_TOL: f64 = 1e-12;
pub const DENSITY_TOL: f64 = 1e-10;
pub const DIAGONAL_SUM_TOL: f64 = 1e-12;

/// Seedable random stream backed by ChaCha20.
///
/// Monte Carlo sample `i` of a run seeded with `s` draws from
/// `SampleStream::substream(s, i)`, which selects ChaCha stream `i` under key
/// `s`. Results therefore do not depend on how samples are distributed
/// across workers.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: ChaCha20Rng,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn substream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// A complex number whose real and imaginary parts are independent
    /// standard normals, from one Box-Muller transform.
    pub fn complex_normal(&mut self) -> C64 {
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        C64::new(r * c, r * s)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.complex_normal().re
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Unit vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("pure state needs dimension >= 1".into()));
        }
        let norm = l2_norm(&amplitudes);
        if !((norm - 1.0).abs() <= PURE_NORM_TOL) {
            return Err(Error::Invariant(format!(
                "pure state norm is {norm:.15}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = l2_norm(&amplitudes);
        if amplitudes.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize an empty, zero or non-finite vector".into(),
            ));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidArgument(format!("basis index {k} out of range for dimension {n}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    /// `(1, 1, ..., 1)/sqrt(n)`.
    pub fn maximally_coherent(n: usize) -> Result<Self> {
        Self::normalized(vec![C64::new(1.0, 0.0); n])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Largest amplitude modulus, `max_j |x_j|`.
    pub fn max_modulus(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Index of the largest amplitude modulus (first one on ties).
    pub fn argmax_modulus(&self) -> usize {
        let mut best = 0;
        for (j, z) in self.amplitudes.iter().enumerate() {
            if z.norm() > self.amplitudes[best].norm() {
                best = j;
            }
        }
        best
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|x><x|`.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: HermitianMatrix::projector(&self.amplitudes),
        }
    }

    /// Removes phases and sorts moduli in descending order. The modified
    /// trace distance is invariant under this map.
    pub fn canonicalize(&self) -> PureState {
        let mut moduli: Vec<f64> = self.amplitudes.iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        PureState {
            amplitudes: moduli.into_iter().map(|m| C64::new(m, 0.0)).collect(),
        }
    }

    /// Whether the amplitudes are real, nonnegative and sorted descending.
    pub fn is_canonical(&self, tol: f64) -> bool {
        self.amplitudes.iter().all(|z| z.im.abs() <= tol && z.re >= -tol)
            && self
                .amplitudes
                .windows(2)
                .all(|w| w[0].re + tol >= w[1].re)
    }
}

/// Canonical form of a pure state; see [`PureState::canonicalize`].
pub fn canonicalize(x: &PureState) -> PureState {
    x.canonicalize()
}

fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let trace = matrix.trace();
        if !((trace - 1.0).abs() <= DENSITY_TOL) {
            return Err(Error::Invariant(format!(
                "density matrix trace is {trace:.12}, expected 1"
            )));
        }
        let min = matrix.min_eigenvalue();
        if !(min >= -DENSITY_TOL) {
            return Err(Error::Invariant(format!(
                "density matrix is not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(weights))
    }

    /// Builds a state without validation; callers guarantee the invariants.
    pub(crate) fn from_trusted(matrix: HermitianMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.real_diagonal()
    }

    /// True iff every off-diagonal entry has modulus at most `tol`.
    pub fn is_incoherent(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)].norm() <= tol))
    }

    /// Numerical rank: eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.matrix.eigenvalues().iter().filter(|&&l| l > tol).count()
    }

    /// Convex combination `sum_j w_j rho_j` of states of equal dimension.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture needs one weight per state and at least one state".into(),
            ));
        }
        check_probabilities(weights)?;
        let n = states[0].dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (&w, s) in weights.iter().zip(states) {
            if s.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "mixture of dimensions {n} and {}",
                    s.dim()
                )));
            }
            acc = acc.add(&s.matrix.matrix().scale(w))?;
        }
        Self::from_matrix(acc)
    }
}

pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    rho.is_incoherent(tol)
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidArgument("probabilities must be nonnegative".into()));
    }
    let s: f64 = p.iter().sum();
    if !((s - 1.0).abs() <= DIAGONAL_SUM_TOL) {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {s:.15}, expected 1"
        )));
    }
    Ok(())
}

/// Block-diagonal state `p1 rho1 (+) p2 rho2`.
pub fn block_direct_sum(
    p1: f64,
    rho1: &DensityMatrix,
    p2: f64,
    rho2: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_probabilities(&[p1, p2])?;
    let (n1, n2) = (rho1.dim(), rho2.dim());
    let zero = C64::new(0.0, 0.0);
    let m = ComplexMatrix::from_fn(n1 + n2, n1 + n2, |i, j| match (i < n1, j < n1) {
        (true, true) => rho1.entry(i, j) * p1,
        (false, false) => rho2.entry(i - n1, j - n1) * p2,
        _ => zero,
    });
    DensityMatrix::from_matrix(m)
}

/// Diagonal density matrix, stored as its weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    weights: Vec<f64>,
}

impl DiagonalState {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("diagonal state needs dimension >= 1".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Invariant("diagonal weights must be nonnegative".into()));
        }
        let s: f64 = weights.iter().sum();
        if !((s - 1.0).abs() <= DIAGONAL_SUM_TOL) {
            return Err(Error::Invariant(format!(
                "diagonal weights sum to {s:.15}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, k: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[k] = 1.0;
        Self { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(HermitianMatrix::from_real_diagonal(&self.weights))
    }
}

/// Haar-random pure state: a normalized vector of independent standard
/// complex Gaussians.
pub fn haar_pure(n: usize, rng: &mut SampleStream) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    loop {
        let amps: Vec<C64> = (0..n).map(|_| rng.complex_normal()).collect();
        // A zero vector has probability zero; redraw rather than divide by it.
        if l2_norm(&amps) > 0.0 {
            return PureState::normalized(amps);
        }
    }
}

/// Rank-`k` density matrix from the Ginibre-induced measure: `G G^dagger /
/// tr(G G^dagger)` with `G` an `n x k` matrix of standard complex Gaussians.
pub fn random_density(n: usize, k: usize, rng: &mut SampleStream) -> Result<DensityMatrix> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "rank must satisfy 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    let g: Vec<C64> = (0..n * k).map(|_| rng.complex_normal()).collect();
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..k {
                acc += g[i * k + c] * g[j * k + c].conj();
            }
            m[(i, j)] = acc;
            m[(j, i)] = acc.conj();
        }
    }
    let trace = m.trace().re;
    let h = HermitianMatrix::new(m.scale(1.0 / trace))?;
    Ok(DensityMatrix::from_trusted(h))
}

/// Random 2x2 density matrix from the Hilbert-Schmidt (rank-2 Ginibre)
/// measure.
pub fn random_qubit(rng: &mut SampleStream) -> DensityMatrix {
    random_density(2, 2, rng).expect("2x2 full rank is valid")
}
