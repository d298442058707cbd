use proptest::prelude::*;
use qmarkov::generators::{gaussian_matrix, random_density, random_hermitian, random_pd, random_unitary, Stream};
use qmarkov::linalg::{
    c64, conj, cr, eigh, expm_h, fidelity, frechet_exp, frechet_log, logm, max_abs_diff, partial_trace,
    partial_trace_adjoint, powm, schatten_norm, sqrtm, trace_distance, trace_norm, trace_prod, CMat, QuantumState,
};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn eigh_reconstructs_and_sorts(seed in any::<u64>(), d in 1usize..7) {
        let mut s = Stream::new(seed, 0);
        let h = random_hermitian(d, &mut s);
        let sp = eigh(&h).unwrap();
        prop_assert!(max_abs_diff(&sp.reconstruct(), &h) <= 1e-12 * h.norm().max(1.0));
        prop_assert!(sp.values.windows(2).all(|w| w[0] >= w[1]));
        let v = &sp.vectors;
        prop_assert!(max_abs_diff(&(v.adjoint() * v), &CMat::identity(d, d)) <= 1e-12);
    }

    #[test]
    fn functional_calculus_is_consistent(seed in any::<u64>(), d in 1usize..6) {
        let mut s = Stream::new(seed, 1);
        let b = random_pd(d, &mut s);
        let r = sqrtm(&b).unwrap();
        prop_assert!(max_abs_diff(&(&r * &r), &b) <= 1e-10 * b.norm().max(1.0));
        prop_assert!(max_abs_diff(&expm_h(&logm(&b).unwrap()), &b) <= 1e-10 * b.norm().max(1.0));
        let inv = powm(&b, cr(-1.0)).unwrap();
        prop_assert!(max_abs_diff(&(&inv * &b), &CMat::identity(d, d)) <= 1e-8);
    }

    #[test]
    fn schatten_norms_are_ordered_and_unitarily_invariant(seed in any::<u64>(), d in 1usize..6) {
        let mut s = Stream::new(seed, 2);
        let l = gaussian_matrix(d, d, &mut s);
        let (n1, n2, ninf) = (schatten_norm(&l, 1.0), schatten_norm(&l, 2.0), schatten_norm(&l, f64::INFINITY));
        prop_assert!(n1 + 1e-12 >= n2 && n2 + 1e-12 >= ninf);
        prop_assert!((n2 - l.norm()).abs() <= 1e-10 * n2.max(1.0));
        let (u, w) = (random_unitary(d, &mut s), random_unitary(d, &mut s));
        let rotated = &u * &l * &w;
        for p in [0.5, 1.0, 3.0] {
            let (a, b) = (schatten_norm(&l, p), schatten_norm(&rotated, p));
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }
    }

    #[test]
    fn holder_inequality(seed in any::<u64>(), d in 1usize..6, p in 1.05f64..8.0) {
        let mut s = Stream::new(seed, 3);
        let (a, b) = (gaussian_matrix(d, d, &mut s), gaussian_matrix(d, d, &mut s));
        let q = p / (p - 1.0);
        let lhs = trace_prod(&a, &b).norm();
        prop_assert!(lhs <= schatten_norm(&a, p) * schatten_norm(&b, q) * (1.0 + 1e-12));
        prop_assert!(trace_norm(&(&a * &b)) <= schatten_norm(&a, p) * schatten_norm(&b, q) * (1.0 + 1e-12));
    }

    #[test]
    fn fidelity_properties(seed in any::<u64>(), d in 1usize..5) {
        let mut s = Stream::new(seed, 4);
        let rho = random_density(d, s.range(1, d), &mut s).unwrap().rho;
        let sigma = random_density(d, s.range(1, d), &mut s).unwrap().rho;
        let f = fidelity(&rho, &sigma).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-10).contains(&f));
        prop_assert!((f - fidelity(&sigma, &rho).unwrap()).abs() <= 1e-9);
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() <= 1e-9);
        let u = random_unitary(d, &mut s);
        prop_assert!((f - fidelity(&conj(&u, &rho), &conj(&u, &sigma)).unwrap()).abs() <= 1e-9);
        // 1 − √F ≤ T ≤ √(1 − F).
        let t = trace_distance(&rho, &sigma).unwrap();
        prop_assert!(1.0 - f.max(0.0).sqrt() <= t + 1e-9);
        prop_assert!(t <= (1.0 - f).max(0.0).sqrt() + 1e-7);
    }

    #[test]
    fn fidelity_below_every_alberti_witness(seed in any::<u64>(), d in 1usize..5) {
        let mut s = Stream::new(seed, 5);
        let rho = random_density(d, d, &mut s).unwrap().rho;
        let sigma = random_density(d, d, &mut s).unwrap().rho;
        let f = fidelity(&rho, &sigma).unwrap();
        for _ in 0..5 {
            let w = random_pd(d, &mut s);
            let winv = powm(&w, cr(-1.0)).unwrap();
            let bound = trace_prod(&rho, &w).re * trace_prod(&sigma, &winv).re;
            prop_assert!(f <= bound * (1.0 + 1e-10));
        }
    }

    #[test]
    fn frechet_derivatives_match_finite_differences(seed in any::<u64>(), d in 1usize..5) {
        let mut s = Stream::new(seed, 6);
        let b = random_pd(d, &mut s) + CMat::identity(d, d) * cr(0.5);
        let x = random_hermitian(d, &mut s);
        let eps = 1e-5;
        let fd = (logm(&(&b + &x * cr(eps))).unwrap() - logm(&(&b - &x * cr(eps))).unwrap()) / cr(2.0 * eps);
        prop_assert!(max_abs_diff(&frechet_log(&b, &x).unwrap(), &fd) <= 1e-6);
        let h = random_hermitian(d, &mut s);
        let fd = (expm_h(&(&h + &x * cr(eps))) - expm_h(&(&h - &x * cr(eps)))) / cr(2.0 * eps);
        let scale = expm_h(&h).norm().max(1.0);
        prop_assert!(max_abs_diff(&frechet_exp(&h, &x).unwrap(), &fd) <= 1e-6 * scale);
    }

    #[test]
    fn partial_trace_is_adjoint_to_embedding(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..3) {
        let mut s = Stream::new(seed, 7);
        let shape = [a, b, c];
        let x = gaussian_matrix(a * b * c, a * b * c, &mut s);
        for keep in [vec![0usize], vec![1], vec![0, 2], vec![1, 2]] {
            let dk: usize = keep.iter().map(|&k| shape[k]).product();
            let y = gaussian_matrix(dk, dk, &mut s);
            let lhs = trace_prod(&partial_trace(&x, &shape, &keep).unwrap(), &y);
            let rhs = trace_prod(&x, &partial_trace_adjoint(&y, &shape, &keep).unwrap());
            prop_assert!((lhs - rhs).norm() <= 1e-10 * x.norm().max(1.0) * y.norm().max(1.0));
        }
        let tr_all: c64 = x.trace();
        prop_assert!((partial_trace(&x, &shape, &[0]).unwrap().trace() - tr_all).norm() <= 1e-10 * x.norm());
    }
}

#[test]
fn state_validation_rejects_bad_inputs() {
    let mut m = CMat::identity(2, 2) * cr(0.5);
    assert!(QuantumState::new(m.clone(), vec![2]).is_ok());
    assert!(QuantumState::new(m.clone(), vec![3]).is_err());
    m[(0, 0)] = cr(0.7);
    assert!(QuantumState::new(m.clone(), vec![2]).is_err());
    let mut neg = CMat::zeros(2, 2);
    neg[(0, 0)] = cr(1.2);
    neg[(1, 1)] = cr(-0.2);
    assert!(QuantumState::new(neg, vec![2]).is_err());
    let mut nh = CMat::identity(2, 2) * cr(0.5);
    nh[(0, 1)] = c64::new(0.1, 0.0);
    assert!(QuantumState::new(nh, vec![2]).is_err());
}
