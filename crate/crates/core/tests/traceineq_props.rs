use proptest::prelude::*;
use qmarkov::generators::{gaussian_matrix, random_hermitian, random_pd, random_unitary, Stream};
use qmarkov::linalg::{conj, cr, diag, trace_re, CMat};
use qmarkov::quad::beta0_rule;
use qmarkov::traceineq::{
    check_alt2, check_gt2, check_gt_general, check_gt_multi, check_lieb_triple, check_log_trace2, check_peierls,
    lie_product_probe, TOL_EXACT, TOL_QUAD,
};

fn commuting_pair(s: &mut Stream, d: usize) -> (CMat, CMat) {
    let u = random_unitary(d, s);
    let a: Vec<f64> = (0..d).map(|_| s.normal()).collect();
    let b: Vec<f64> = (0..d).map(|_| s.normal()).collect();
    let h = |v: &[f64]| qmarkov::linalg::hermitian_part(&conj(&u, &diag(v)));
    (h(&a), h(&b))
}

fn normalized(m: CMat) -> CMat {
    let t = trace_re(&m);
    m / cr(t)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn golden_thompson_and_peierls(seed in any::<u64>(), d in 1usize..6) {
        let mut s = Stream::new(seed, 0);
        let (h1, h2) = (random_hermitian(d, &mut s), random_hermitian(d, &mut s));
        let gt = check_gt2(&h1, &h2, TOL_EXACT).unwrap();
        prop_assert!(gt.pass, "{gt:?}");
        if d > 1 {
            prop_assert_eq!(gt.equality, Some(false));
        }
        prop_assert!(check_peierls(&h1, &h2, TOL_EXACT).unwrap().pass);
    }

    #[test]
    fn golden_thompson_equality_for_commuting_pairs(seed in any::<u64>(), d in 1usize..6) {
        let mut s = Stream::new(seed, 1);
        let (h1, h2) = commuting_pair(&mut s, d);
        let gt = check_gt2(&h1, &h2, TOL_EXACT).unwrap();
        prop_assert!(gt.margin.abs() <= 1e-10 * gt.rhs.max(1.0), "{gt:?}");
        prop_assert_eq!(gt.equality, Some(true));
    }

    #[test]
    fn multivariate_golden_thompson(seed in any::<u64>(), d in 1usize..4, n in 2usize..5, p in 0.5f64..4.0) {
        let mut s = Stream::new(seed, 2);
        let hs: Vec<CMat> = (0..n).map(|_| random_hermitian(d, &mut s)).collect();
        let rule = beta0_rule();
        let r = check_gt_multi(&hs, p, &rule, TOL_QUAD).unwrap();
        prop_assert!(r.pass, "{r:?}");
        // Hermitian inputs give the same bound through the general entry point.
        let g = check_gt_general(&hs, p, &rule, TOL_QUAD).unwrap();
        prop_assert!((g.lhs - r.lhs).abs() <= 1e-9 && (g.rhs - r.rhs).abs() <= 1e-9);
    }

    #[test]
    fn multivariate_golden_thompson_is_tight_when_commuting(seed in any::<u64>(), d in 1usize..5, p in 0.5f64..4.0) {
        let mut s = Stream::new(seed, 3);
        let (h1, h2) = commuting_pair(&mut s, d);
        let r = check_gt_multi(&[h1, h2], p, &beta0_rule(), TOL_QUAD).unwrap();
        prop_assert!(r.margin.abs() <= 1e-9, "{r:?}");
    }

    #[test]
    fn general_operators(seed in any::<u64>(), d in 1usize..4, p in 0.5f64..4.0) {
        let mut s = Stream::new(seed, 4);
        let ls: Vec<CMat> = (0..3).map(|_| gaussian_matrix(d, d, &mut s) * cr(0.5)).collect();
        let r = check_gt_general(&ls, p, &beta0_rule(), TOL_QUAD).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn lieb_triple(seed in any::<u64>(), d in 1usize..4) {
        let mut s = Stream::new(seed, 5);
        let hs: Vec<CMat> = (0..3).map(|_| random_hermitian(d, &mut s)).collect();
        let r = check_lieb_triple(&hs[0], &hs[1], &hs[2], &beta0_rule(), TOL_QUAD).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn araki_lieb_thirring(seed in any::<u64>(), d in 1usize..5, q in 0.25f64..3.0, r in 0.05f64..1.0) {
        let mut s = Stream::new(seed, 6);
        let (b1, b2) = (random_pd(d, &mut s), random_pd(d, &mut s));
        let rep = check_alt2(&b1, &b2, q, r, TOL_EXACT).unwrap();
        prop_assert!(rep.pass, "{rep:?}");
        let rev = check_alt2(&b1, &b2, q, 1.0 / r, TOL_EXACT).unwrap();
        prop_assert!(rev.pass, "{rev:?}");
    }

    #[test]
    fn two_operator_log_trace(seed in any::<u64>(), d in 1usize..5, p in 0.05f64..2.0) {
        let mut s = Stream::new(seed, 7);
        let b1 = normalized(random_pd(d, &mut s));
        let b2 = random_pd(d, &mut s);
        let r = check_log_trace2(&b1, &b2, p, TOL_EXACT).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn checks_are_deterministic(seed in any::<u64>(), d in 1usize..4) {
        let mut s = Stream::new(seed, 8);
        let hs: Vec<CMat> = (0..3).map(|_| random_hermitian(d, &mut s)).collect();
        let rule = beta0_rule();
        let a = serde_json::to_string(&check_gt_multi(&hs, 2.0, &rule, TOL_QUAD).unwrap()).unwrap();
        let b = serde_json::to_string(&check_gt_multi(&hs, 2.0, &rule, TOL_QUAD).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn lie_product_error_decays_like_one_over_m() {
    let mut s = Stream::new(11, 0);
    let ls: Vec<CMat> = (0..3).map(|_| gaussian_matrix(3, 3, &mut s) * cr(0.5)).collect();
    let r = lie_product_probe(&ls, &[1, 2, 4, 8, 16, 32, 64]).unwrap();
    assert!(r.decreasing, "{:?}", r.errors);
    let last = *r.errors.last().unwrap();
    assert!(64.0 * last <= r.fitted_c * (1.0 + 1e-12));
    assert!(r.errors[0] / last > 16.0);
}

#[test]
fn parameter_validation() {
    let h = diag(&[1.0, 0.0]);
    assert!(check_gt_multi(std::slice::from_ref(&h), 2.0, &beta0_rule(), TOL_QUAD).is_err());
    assert!(check_gt_multi(&[h.clone(), h.clone()], 0.0, &beta0_rule(), TOL_QUAD).is_err());
    assert!(check_alt2(&h, &h, -1.0, 0.5, TOL_EXACT).is_err());
    assert!(check_gt2(&h, &diag(&[1.0, 0.0, 0.0]), TOL_EXACT).is_err());
}
