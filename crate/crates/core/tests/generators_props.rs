use proptest::prelude::*;
use qmarkov::entropy::classical_cmi;
use qmarkov::generators::{
    dirichlet, random_channel, random_classical, random_density, random_density_shaped, random_hermitian,
    random_isometry, random_markov_joint, random_stochastic, random_unitary, Stream,
};
use qmarkov::linalg::{eigh, herm_defect, identity, max_abs_diff, trace_re};

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn same_seed_same_draws(seed in any::<u64>(), stream in any::<u64>(), d in 1usize..5) {
        let mut a = Stream::new(seed, stream);
        let mut b = Stream::new(seed, stream);
        prop_assert_eq!(random_hermitian(d, &mut a), random_hermitian(d, &mut b));
        prop_assert_eq!(random_density(d, d, &mut a).unwrap().rho, random_density(d, d, &mut b).unwrap().rho);
        prop_assert_eq!(random_channel(d, 2, 2 * d, &mut a).unwrap().kraus, random_channel(d, 2, 2 * d, &mut b).unwrap().kraus);
        prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
    }

    #[test]
    fn streams_are_independent(seed in any::<u64>(), stream in 0u64..1000) {
        let mut a = Stream::new(seed, stream);
        let mut b = Stream::new(seed, stream + 1);
        let (x, y): (Vec<f64>, Vec<f64>) = ((0..4).map(|_| a.uniform()).collect(), (0..4).map(|_| b.uniform()).collect());
        prop_assert_ne!(x, y);
    }

    #[test]
    fn range_is_inclusive(seed in any::<u64>(), lo in 0usize..5, width in 0usize..5) {
        let mut s = Stream::new(seed, 0);
        let hi = lo + width;
        for _ in 0..20 {
            let v = s.range(lo, hi);
            prop_assert!((lo..=hi).contains(&v));
        }
    }

    #[test]
    fn densities_have_requested_rank(seed in any::<u64>(), d in 1usize..6) {
        let mut s = Stream::new(seed, 1);
        let rank = s.range(1, d);
        let rho = random_density(d, rank, &mut s).unwrap();
        prop_assert!((trace_re(&rho.rho) - 1.0).abs() <= 1e-12);
        prop_assert!(herm_defect(&rho.rho) <= 1e-14);
        let sp = eigh(&rho.rho).unwrap();
        let nonzero = sp.values.iter().filter(|&&v| v > 1e-12).count();
        prop_assert_eq!(nonzero, rank);
        prop_assert!(random_density(d, d + 1, &mut s).is_err());
        let shaped = random_density_shaped(&[d, 2], 2 * d, &mut s).unwrap();
        prop_assert_eq!(shaped.shape, vec![d, 2]);
    }

    #[test]
    fn unitaries_and_isometries(seed in any::<u64>(), d in 1usize..6, extra in 0usize..3) {
        let mut s = Stream::new(seed, 2);
        let u = random_unitary(d, &mut s);
        prop_assert!(max_abs_diff(&(u.adjoint() * &u), &identity(d)) <= 1e-12);
        let v = random_isometry(d + extra, d, &mut s).unwrap();
        prop_assert!(max_abs_diff(&(v.adjoint() * &v), &identity(d)) <= 1e-12);
    }

    #[test]
    fn classical_generators(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut s = Stream::new(seed, 3);
        let p = dirichlet(a * b, &mut s);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12 && p.iter().all(|&x| x >= 0.0));
        let w = random_stochastic(b, a, &mut s);
        for j in 0..a {
            prop_assert!(((0..b).map(|i| w[i][j]).sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        let joint = random_classical(&[a, b, c], &mut s).unwrap();
        prop_assert!((joint.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let markov = random_markov_joint([a, b, c], &mut s).unwrap();
        prop_assert!(classical_cmi(&markov).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn fixed_seed_is_stable_across_runs() {
    // Pins the stream construction: a change here changes every seeded report.
    let mut s = Stream::new(0, 0);
    let bits: Vec<u64> = (0..3).map(|_| s.uniform().to_bits()).collect();
    assert_eq!(bits, [0x3f98f37b5a07d7c0, 0x3fef6cb04fcddfa4, 0x3feb8b6d4d203081]);
}
