use proptest::prelude::*;
use qmarkov::channels::{
    choi, choi_of_map, classical_channel, is_tpcp, is_tpcp_choi, kraus_from_choi, stinespring, KrausChannel, TP_TOL,
};
use qmarkov::generators::{gaussian_matrix, random_channel, random_density, random_stochastic, Stream};
use qmarkov::linalg::{identity, max_abs_diff, tensor, trace_prod, trace_re, CMat};

fn channel(s: &mut Stream, din: usize, dout: usize) -> KrausChannel {
    let rank = s.range(din.div_ceil(dout), din * dout);
    random_channel(din, dout, rank, s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn random_channels_are_tpcp(seed in any::<u64>(), din in 1usize..5, dout in 1usize..5) {
        let mut s = Stream::new(seed, 0);
        let e = channel(&mut s, din, dout);
        let v = is_tpcp(&e, TP_TOL);
        prop_assert!(v.pass(), "{v:?}");
        let c = choi(&e);
        prop_assert!((trace_re(&c.matrix) - 1.0).abs() <= 1e-12);
        prop_assert!(is_tpcp_choi(&c, TP_TOL).pass());
        let rho = random_density(din, din, &mut s).unwrap().rho;
        prop_assert!((trace_re(&e.forward(&rho).unwrap()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn choi_reproduces_action_and_kraus(seed in any::<u64>(), din in 1usize..5, dout in 1usize..5) {
        let mut s = Stream::new(seed, 1);
        let e = channel(&mut s, din, dout);
        let c = choi(&e);
        let x = gaussian_matrix(din, din, &mut s);
        let y = e.forward(&x).unwrap();
        prop_assert!(max_abs_diff(&c.apply(&x), &y) <= 1e-12 * x.norm().max(1.0));
        let back = kraus_from_choi(&c).unwrap();
        prop_assert!(back.kraus.len() <= din * dout);
        prop_assert!(max_abs_diff(&back.forward(&x).unwrap(), &y) <= 1e-10 * x.norm().max(1.0));
    }

    #[test]
    fn adjoint_is_hilbert_schmidt_dual(seed in any::<u64>(), din in 1usize..5, dout in 1usize..5) {
        let mut s = Stream::new(seed, 2);
        let e = channel(&mut s, din, dout);
        let x = gaussian_matrix(din, din, &mut s);
        let y = gaussian_matrix(dout, dout, &mut s);
        let lhs = trace_prod(&e.forward(&x).unwrap(), &y);
        let rhs = trace_prod(&x, &e.adjoint(&y).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-10 * x.norm().max(1.0) * y.norm().max(1.0));
        // Unital adjoint of a trace-preserving map.
        prop_assert!(max_abs_diff(&e.adjoint(&identity(dout)).unwrap(), &identity(din)) <= 1e-10);
    }

    #[test]
    fn composition_is_sequential_application(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut s = Stream::new(seed, 3);
        let first = channel(&mut s, a, b);
        let second = channel(&mut s, b, c);
        let both = second.compose(&first).unwrap();
        prop_assert!(is_tpcp(&both, TP_TOL).pass());
        let rho = random_density(a, a, &mut s).unwrap().rho;
        let seq = second.forward(&first.forward(&rho).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&both.forward(&rho).unwrap(), &seq) <= 1e-12);
    }

    #[test]
    fn extensions_and_dilations(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4, r in 1usize..3) {
        let mut s = Stream::new(seed, 4);
        let e = channel(&mut s, din, dout);
        let ext = e.tensor_identity(r);
        prop_assert!(is_tpcp(&ext, TP_TOL).pass());
        let (x, z) = (gaussian_matrix(din, din, &mut s), gaussian_matrix(r, r, &mut s));
        let lhs = ext.forward(&tensor(&x, &z)).unwrap();
        let rhs = tensor(&e.forward(&x).unwrap(), &z);
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-10 * x.norm().max(1.0) * z.norm().max(1.0));
        let v = stinespring(&e).unwrap();
        prop_assert!(max_abs_diff(&(v.adjoint() * &v), &identity(din)) <= 1e-10);
    }

    #[test]
    fn classical_channels_act_on_diagonals(seed in any::<u64>(), din in 1usize..5, dout in 1usize..5) {
        let mut s = Stream::new(seed, 5);
        let w = random_stochastic(dout, din, &mut s);
        let e = classical_channel(&w).unwrap();
        prop_assert!(is_tpcp(&e, TP_TOL).pass());
        let p = qmarkov::generators::dirichlet(din, &mut s);
        let out = e.forward(&qmarkov::linalg::diag(&p)).unwrap();
        for (o, row) in w.iter().enumerate() {
            let expect: f64 = row.iter().zip(&p).map(|(a, b)| a * b).sum();
            prop_assert!((out[(o, o)].re - expect).abs() <= 1e-12);
        }
    }
}

#[test]
fn transpose_is_positive_but_not_completely_positive() {
    let c = choi_of_map(2, 2, |x: &CMat| Ok(x.transpose())).unwrap();
    let v = is_tpcp_choi(&c, TP_TOL);
    assert!(v.trace_preserving);
    assert!(!v.completely_positive);
    // Normalized Choi matrix of the transpose is SWAP/2.
    assert!((v.choi_min_eig + 0.5).abs() < 1e-12);
}

#[test]
fn non_trace_preserving_kraus_is_rejected() {
    let k = identity(2) * qmarkov::linalg::cr(0.9);
    let e = KrausChannel { din: 2, dout: 2, kraus: vec![k] };
    assert!(!is_tpcp(&e, TP_TOL).trace_preserving);
    assert!(stinespring(&e).is_err());
}
