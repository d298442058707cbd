use proptest::prelude::*;
use qmarkov::entropy::{
    classical_cmi, classical_relative_entropy, cmi, conditional_entropy, dmax, dmin, measured_relative_entropy,
    relative_entropy, renyi, shannon, von_neumann, LogBase, MeasuredOpts,
};
use qmarkov::generators::{
    random_channel, random_classical, random_density, random_density_shaped, random_pd, random_unitary, Stream,
};
use qmarkov::linalg::{conj, diag, identity, tensor, CMat};
use qmarkov::traceineq::{check_klein, check_renyi_triangle, KleinFn, TOL_EXACT};

const TOL: f64 = 1e-9;

fn full_rank_pair(s: &mut Stream, d: usize) -> (CMat, CMat) {
    (random_density(d, d, s).unwrap().rho, random_density(d, d, s).unwrap().rho)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn dmin_d_dmax_are_ordered(seed in any::<u64>(), d in 1usize..5) {
        let mut s = Stream::new(seed, 0);
        let (rho, sigma) = full_rank_pair(&mut s, d);
        let (lo, mid, hi) = (dmin(&rho, &sigma).unwrap(), relative_entropy(&rho, &sigma).unwrap().value, dmax(&rho, &sigma).unwrap());
        prop_assert!(lo <= mid + TOL && mid <= hi + TOL, "{lo} {mid} {hi}");
        prop_assert!((renyi(&rho, &sigma, 0.5).unwrap().value - lo).abs() <= 1e-8);
    }

    #[test]
    fn renyi_is_monotone_in_alpha(seed in any::<u64>(), d in 1usize..5) {
        let mut s = Stream::new(seed, 1);
        let (rho, sigma) = full_rank_pair(&mut s, d);
        let alphas = [0.5, 0.7, 0.99, 1.0, 1.01, 1.5, 2.0, 5.0, f64::INFINITY];
        let vals: Vec<f64> = alphas.iter().map(|&a| renyi(&rho, &sigma, a).unwrap().value).collect();
        for w in vals.windows(2) {
            prop_assert!(w[0] <= w[1] + TOL, "{vals:?}");
        }
    }

    #[test]
    fn relative_entropy_basic_properties(seed in any::<u64>(), d in 1usize..5) {
        let mut s = Stream::new(seed, 2);
        let rho = random_density(d, s.range(1, d), &mut s).unwrap().rho;
        let sigma = random_density(d, d, &mut s).unwrap().rho;
        let v = relative_entropy(&rho, &sigma).unwrap().value;
        prop_assert!(v >= -TOL);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().value.abs() <= 1e-8);
        let u = random_unitary(d, &mut s);
        prop_assert!((relative_entropy(&conj(&u, &rho), &conj(&u, &sigma)).unwrap().value - v).abs() <= 1e-8);
        // Additivity under tensor products.
        let (r2, s2) = full_rank_pair(&mut s, 2);
        let joint = relative_entropy(&tensor(&rho, &r2), &tensor(&sigma, &s2)).unwrap().value;
        prop_assert!((joint - v - relative_entropy(&r2, &s2).unwrap().value).abs() <= 1e-8);
        // Pinsker.
        let t = qmarkov::linalg::trace_distance(&rho, &sigma).unwrap();
        prop_assert!(v + TOL >= 2.0 * t * t);
    }

    #[test]
    fn unsupported_states_have_infinite_divergence(seed in any::<u64>(), d in 2usize..5) {
        let mut s = Stream::new(seed, 3);
        let rho = random_density(d, d, &mut s).unwrap().rho;
        let sigma = random_density(d, 1, &mut s).unwrap().rho;
        prop_assert!(relative_entropy(&rho, &sigma).unwrap().is_infinite());
        prop_assert!(renyi(&rho, &sigma, 2.0).unwrap().is_infinite());
        prop_assert!(dmax(&rho, &sigma).unwrap().is_infinite());
        prop_assert!(renyi(&rho, &sigma, 0.5).unwrap().value.is_finite());
    }

    #[test]
    fn data_processing(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4) {
        let mut s = Stream::new(seed, 4);
        let (rho, sigma) = full_rank_pair(&mut s, din);
        let e = random_channel(din, dout, s.range(din.div_ceil(dout), din * dout), &mut s).unwrap();
        let (er, es) = (e.forward(&rho).unwrap(), e.forward(&sigma).unwrap());
        for a in [0.5, 0.8, 1.0, 2.0, f64::INFINITY] {
            let before = renyi(&rho, &sigma, a).unwrap().value;
            let after = renyi(&er, &es, a).unwrap().value;
            prop_assert!(after <= before + 1e-8, "alpha {a}: {after} > {before}");
        }
    }

    #[test]
    fn measured_is_below_umegaki(seed in any::<u64>(), d in 1usize..4) {
        let mut s = Stream::new(seed, 5);
        let (rho, sigma) = full_rank_pair(&mut s, d);
        let m = measured_relative_entropy(&rho, &sigma, MeasuredOpts::default()).unwrap().value;
        let full = relative_entropy(&rho, &sigma).unwrap().value;
        prop_assert!(m <= full + TOL && m >= -TOL);
    }

    #[test]
    fn renyi_triangle_holds(seed in any::<u64>(), d in 1usize..4, alpha in 0.5f64..6.0) {
        let mut s = Stream::new(seed, 6);
        let (rho, sigma) = full_rank_pair(&mut s, d);
        let omega = random_density(d, d, &mut s).unwrap().rho;
        let r = check_renyi_triangle(&rho, &sigma, &omega, alpha, TOL_EXACT).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn klein_inequality(seed in any::<u64>(), d in 1usize..5) {
        let mut s = Stream::new(seed, 7);
        let (b1, b2) = (random_pd(d, &mut s), random_pd(d, &mut s));
        for f in [KleinFn::XLogX, KleinFn::Square, KleinFn::NegLog] {
            let r = check_klein(&b1, &b2, f, TOL_EXACT).unwrap();
            prop_assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn strong_subadditivity_and_conditional_bounds(seed in any::<u64>(), a in 1usize..3, b in 1usize..3, c in 1usize..3) {
        let mut s = Stream::new(seed, 8);
        let total = a * b * c;
        let rho = random_density_shaped(&[a, b, c], s.range(1, total), &mut s).unwrap();
        prop_assert!(cmi(&rho).unwrap() >= -TOL);
        let ab = rho.marginal(&[0, 1]).unwrap();
        let h = conditional_entropy(&ab).unwrap();
        let la = (a as f64).ln();
        prop_assert!(h >= -la - TOL && h <= la + TOL);
        prop_assert!(von_neumann(&rho) <= (total as f64).ln() + TOL);
    }

    #[test]
    fn classical_quantities_match_diagonal_states(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut s = Stream::new(seed, 9);
        let p = random_classical(&[a, b, c], &mut s).unwrap();
        let rho = p.to_state();
        prop_assert!((classical_cmi(&p).unwrap() - cmi(&rho).unwrap()).abs() <= 1e-10);
        prop_assert!((shannon(&p.p) - von_neumann(&rho)).abs() <= 1e-10);
        let q = random_classical(&[a, b, c], &mut s).unwrap();
        let quantum = relative_entropy(&rho.rho, &q.to_state().rho).unwrap().value;
        prop_assert!((classical_relative_entropy(&p.p, &q.p) - quantum).abs() <= 1e-10);
    }
}

#[test]
fn maximally_mixed_reference_values() {
    let d = 4;
    let mixed = identity(d) / qmarkov::linalg::cr(d as f64);
    let pure = diag(&[1.0, 0.0, 0.0, 0.0]);
    let ln4 = 4f64.ln();
    assert!((relative_entropy(&pure, &mixed).unwrap().value - ln4).abs() < 1e-12);
    assert!((dmax(&pure, &mixed).unwrap() - ln4).abs() < 1e-12);
    assert!((dmin(&pure, &mixed).unwrap() - ln4).abs() < 1e-12);
    assert!((LogBase::Two.convert(ln4) - 2.0).abs() < 1e-12);
}
