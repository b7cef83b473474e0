use nalgebra::{DMatrix, DVector};
use prodrange::linalg::{haar_unitary, random_hermitian};
use prodrange::localopt::sample_product_compressions;
use prodrange::product::{outer_bound_scan, restrict_code, symmetrize_code, verify_product_kl};
use prodrange::spectral::{dual_code, hermitian_rank_k_range};
use prodrange::zoo;
use prodrange::{
    hermitian_eigendecomposition, partial_trace, random_haar_unitary, tensor_product, trace_norm, ComplexMatrix,
    ProductCode, Projector, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_projector(d: usize, rank: usize, seed: u64) -> Projector {
    let u = random_haar_unitary(d, seed);
    let vecs: Vec<DVector<C64>> = (0..rank).map(|i| u.matrix().column(i).into_owned()).collect();
    Projector::span(&[d], &vecs).unwrap()
}

fn amax(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn local(u: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    tensor_product(u, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_preserves_trace(seed in any::<u64>(), da in 2usize..5, db in 2usize..5, keep in 0usize..2) {
        let m = random_hermitian(&[da, db], &mut rng(seed));
        let t = partial_trace(&m, keep).unwrap().trace();
        prop_assert!((t - m.trace()).norm() <= 1e-10);
    }

    #[test]
    fn partial_trace_is_locally_covariant(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let mut r = rng(seed);
        let q = random_hermitian(&[da, db], &mut r);
        let u = haar_unitary(da, &mut r);
        let v = haar_unitary(db, &mut r);
        let lhs = partial_trace(&q.conjugate_by(&local(&u, &v)), 0).unwrap();
        let rhs = partial_trace(&q, 0).unwrap().conjugate_by(&u);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn trace_norm_contracts_under_partial_trace(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_hermitian(&[3, 3], &mut r);
        let h = random_hermitian(&[3, 3], &mut r);
        let reduced = &partial_trace(&g, 0).unwrap() - &partial_trace(&h, 0).unwrap();
        prop_assert!(trace_norm(&reduced) <= trace_norm(&(&g - &h)) + 1e-9);
    }

    #[test]
    fn eigendecomposition_round_trip_16(seed in any::<u64>()) {
        let m = random_hermitian(&[4, 4], &mut rng(seed));
        let eig = hermitian_eigendecomposition(&m).unwrap();
        prop_assert!(amax(&(eig.reconstruct() - m.matrix())) <= 1e-9);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn scan_is_local_unitary_invariant(seed in any::<u64>(), alpha in 0.05f64..0.95) {
        let mut r = rng(seed);
        let q = zoo::example1_projector(alpha).unwrap().projector().unwrap();
        let w = local(&haar_unitary(3, &mut r), &haar_unitary(3, &mut r));
        let rotated = q.rotate(&w).unwrap();
        let a = outer_bound_scan(&q, 2, 2, 0.01).unwrap();
        let b = outer_bound_scan(&rotated, 2, 2, 0.01).unwrap();
        prop_assert_eq!(a.gamma_trace, b.gamma_trace);
    }

    #[test]
    fn dual_code_is_orthogonal(seed in any::<u64>(), k in 1usize..4, extra in 0usize..3, gamma in 0.05f64..0.95) {
        let (q, r) = zoo::block_form_pair(k, k + 1, gamma, extra, seed).unwrap();
        let dual = dual_code(&q, &r, gamma).unwrap();
        prop_assert_eq!(dual.rank(), r.rank());
        prop_assert!((r.matrix() * dual.matrix()).trace().norm() <= 1e-8);
        let back = &(dual.matrix() * q.matrix()) * dual.matrix();
        let expected = dual.matrix().scale(C64::new(1.0 - gamma, 0.0));
        prop_assert!(back.max_abs_diff(&expected) <= 1e-8);
    }

    #[test]
    fn restriction_keeps_the_value(seed in any::<u64>(), alpha in 0.05f64..0.95, beta in 0.0f64..1.0, party in 0usize..2) {
        let e = zoo::q44_projector(alpha).unwrap();
        let (parties, _) = zoo::q44_code(alpha, beta).unwrap();
        let code = ProductCode::certify(&e.operator, parties).unwrap();
        let sub = restrict_code(&code, party, 1, seed).unwrap();
        let v = verify_product_kl(&e.operator, sub.parties()).unwrap();
        prop_assert!(v.lambda().is_some_and(|l| (l - code.lambda()).norm() <= 1e-8));
    }

    #[test]
    fn symmetrized_code_keeps_the_value(seed in any::<u64>()) {
        let mut r = rng(seed);
        let xi = zoo::random_d4_phases(seed);
        let alphas = r.random::<bool>().then(|| zoo::random_d4_alphas(seed));
        let variant = if alphas.is_some() { zoo::EigenVariant::Alternative } else { zoo::EigenVariant::Bell };
        let (u, code) = zoo::reverse_build_d4(&xi, variant, alphas).unwrap();
        let (rotated, sym) = symmetrize_code(&u, code.parties()).unwrap();
        let v = verify_product_kl(&rotated, &sym).unwrap();
        prop_assert!(v.lambda().is_some_and(|l| (l - code.lambda()).norm() <= 1e-8));
    }

    #[test]
    fn code_blocks_have_the_printed_pattern(alpha in 0.05f64..0.95, beta in 0.0f64..1.0) {
        // with B = R q (I − R): B B† = γ(1 − γ) R whenever R q R = γ R
        let q = zoo::q44_projector(alpha).unwrap().projector().unwrap();
        let (parties, gamma) = zoo::q44_code(alpha, beta).unwrap();
        let r = parties[0].tensor(&parties[1]);
        let rm = r.matrix().matrix();
        let comp = r.complement();
        let rqr = rm * q.matrix().matrix() * rm;
        prop_assert!(amax(&(&rqr - rm * C64::new(gamma, 0.0))) <= 1e-8);
        let b = rm * q.matrix().matrix() * comp.matrix().matrix();
        let bb = &b * b.adjoint();
        prop_assert!(amax(&(bb - rm * C64::new(gamma * (1.0 - gamma), 0.0))) <= 1e-8);
    }

    #[test]
    fn hermitian_certificates_lie_in_the_range(seed in any::<u64>(), t in 0.0f64..1.0) {
        let a = random_hermitian(&[6], &mut rng(seed));
        let range = hermitian_rank_k_range(&a, 2).unwrap();
        let (lo, hi) = range.bounds().unwrap();
        let lambda = lo + t * (hi - lo);
        let cert = prodrange::spectral::delta_k_membership_hermitian(&a, 2, lambda).unwrap();
        let cert = cert.expect("interior of the rank-2 range is certified");
        prop_assert!(range.contains_tol(cert.lambda.re, 1e-9));
        let p = cert.code.matrix().matrix();
        let residual = amax(&(p * a.matrix() * p - p * cert.lambda));
        prop_assert!(residual <= 1e-8);
    }
}

#[test]
fn reduced_ranges_contain_the_exact_ones() {
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let e = zoo::q44_projector(alpha).unwrap();
        let scan = outer_bound_scan(&e.projector().unwrap(), 2, 2, 0.01).unwrap();
        let exact = e.known_exact_range.unwrap();
        assert!(exact.is_subset_of(&scan.interval, 1e-9), "alpha={alpha}: {exact} vs {}", scan.interval);
        assert!(scan.interval.is_subset_of(&prodrange::RealInterval::new(0.0, 1.0), 0.0));
    }
    for gamma in [0.1, 0.25, 0.5, 0.9] {
        let e = zoo::q24_projector(gamma).unwrap();
        let scan = outer_bound_scan(&e.projector().unwrap(), 2, 2, 0.01).unwrap();
        let exact = e.known_exact_range.unwrap();
        assert!(exact.is_subset_of(&scan.interval, 1e-9), "gamma={gamma}: {exact} vs {}", scan.interval);
    }
}

#[test]
fn product_dfs_code_admits_no_intermediate_value() {
    // a rank-4 product projector S ⊗ S′ on 3 ⊗ 3
    let s = random_projector(3, 2, 11);
    let sp = random_projector(3, 2, 12);
    let q = s.tensor(&sp);
    let values = sample_product_compressions(q.matrix(), 2, 2, 10_000, 5, 1e-10).unwrap();
    assert!(values.iter().all(|z| z.re <= 1e-8 || z.re >= 1.0 - 1e-8), "{values:?}");
}
