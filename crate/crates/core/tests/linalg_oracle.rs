use coherence_core::linalg::{block_2x2, trace_norm, ComplexMatrix, HermitianMatrix, C64};
use coherence_core::states::{canonicalize, haar_pure, SampleStream};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn random_hermitian(n: usize, rng: &mut SampleStream) -> HermitianMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| rng.complex_normal());
    HermitianMatrix::new(g.add(&g.adjoint()).unwrap().scale(0.5)).unwrap()
}

fn to_nalgebra(h: &HermitianMatrix) -> DMatrix<C64> {
    let n = h.dim();
    DMatrix::from_fn(n, n, |i, j| h[(i, j)])
}

fn oracle_eigenvalues(h: &HermitianMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = to_nalgebra(h).symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[test]
fn eigenvalues_match_nalgebra() {
    let mut rng = SampleStream::new(1);
    for n in 1..=16 {
        for _ in 0..5 {
            let h = random_hermitian(n, &mut rng);
            let ours = h.eigenvalues();
            let theirs = oracle_eigenvalues(&h);
            let scale = h.matrix().frobenius_norm().max(1.0);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() <= 1e-12 * scale, "n = {n}: {ours:?} vs {theirs:?}");
            }
        }
    }
}

#[test]
fn eigenvectors_reconstruct_and_are_orthonormal() {
    let mut rng = SampleStream::new(2);
    for n in [2, 5, 9, 13] {
        let h = random_hermitian(n, &mut rng);
        let eig = h.eig();
        let back = eig.reconstruct();
        let err = back.matrix().sub(h.matrix()).unwrap().max_abs();
        assert!(err < 1e-12, "n = {n}: reconstruction error {err:e}");
        let u = &eig.vectors;
        let gram = u.adjoint().matmul(u).unwrap();
        let ortho = gram.sub(&ComplexMatrix::identity(n)).unwrap().max_abs();
        assert!(ortho < 1e-12, "n = {n}: orthogonality error {ortho:e}");
    }
}

#[test]
fn degenerate_spectrum() {
    // Projector onto a random 3-dimensional subspace of C^6.
    let mut rng = SampleStream::new(3);
    let vs: Vec<Vec<C64>> = (0..3)
        .map(|_| haar_pure(6, &mut rng).unwrap().amplitudes().to_vec())
        .collect();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for mut v in vs {
        for b in &basis {
            let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            v.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        basis.push(v.iter().map(|z| z / norm).collect());
    }
    let mut m = ComplexMatrix::zeros(6, 6);
    for b in &basis {
        m = m.add(&ComplexMatrix::outer(b, b)).unwrap();
    }
    let p = HermitianMatrix::new(m).unwrap();
    let values = p.eigenvalues();
    for (k, v) in values.iter().enumerate() {
        let want = if k < 3 { 1.0 } else { 0.0 };
        assert!((v - want).abs() < 1e-13, "{values:?}");
    }
}

fn hermitian_strategy() -> impl Strategy<Value = HermitianMatrix> {
    (1usize..=7, any::<u64>()).prop_map(|(n, seed)| random_hermitian(n, &mut SampleStream::new(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_inequalities(h in hermitian_strategy()) {
        let n = h.dim() as f64;
        let tn = h.trace_norm();
        let op = h.operator_norm();
        let slack = 1e-12 * tn.max(1.0);
        prop_assert!(tn + slack >= h.trace().abs());
        prop_assert!(op <= tn + slack);
        prop_assert!(tn <= n * op + slack);
        prop_assert!((trace_norm(&h) - tn).abs() <= slack);
    }

    #[test]
    fn block_eigenvalues_are_half_plus_minus_singular_values(seed in any::<u64>(), n in 1usize..=5) {
        // [I/2 Y; Y^dagger I/2] has eigenvalues 1/2 +- sigma_k(Y).
        let mut rng = SampleStream::new(seed);
        let y = ComplexMatrix::from_fn(n, n, |_, _| rng.complex_normal() * 0.2);
        let half = HermitianMatrix::identity(n).scale(0.5);
        let b = block_2x2(&half, &y, &half).unwrap();
        let mut got = b.eigenvalues();
        got.sort_by(|a, b| a.total_cmp(b));

        let yy = DMatrix::from_fn(n, n, |i, j| y[(i, j)]);
        let sv: Vec<f64> = yy.singular_values().iter().copied().collect();
        let mut want: Vec<f64> = sv.iter().flat_map(|s| [0.5 + s, 0.5 - s]).collect();
        want.sort_by(|a, b| a.total_cmp(b));
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-12, "{:?} vs {:?}", got, want);
        }
    }

    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>(), n in 1usize..=8) {
        let x = haar_pure(n, &mut SampleStream::new(seed)).unwrap();
        let c = canonicalize(&x);
        prop_assert!(c.is_canonical(1e-12));
        let cc = canonicalize(&c);
        for (a, b) in c.amplitudes().iter().zip(cc.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-14);
        }
        // Same modulus multiset.
        let mut m1: Vec<f64> = x.amplitudes().iter().map(|z| z.norm()).collect();
        let mut m2: Vec<f64> = c.amplitudes().iter().map(|z| z.norm()).collect();
        m1.sort_by(|a, b| a.total_cmp(b));
        m2.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in m1.iter().zip(&m2) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
