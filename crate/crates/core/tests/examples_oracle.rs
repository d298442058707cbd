//! Independent oracles for the linear-form constructions.

use qmarkov::entropy::LogBase;
use qmarkov::examples::{appendix_a_report, appendix_b_report, slater_cmi, triangle_counterexample, AppendixA, AppendixB};

/// `D(P‖R(P_XY))` for example B by direct enumeration of the support of `P`,
/// with `R(P_XY)` summed explicitly over the kernel of `R`.
fn example_b_direct(n: u32, p: f64) -> f64 {
    let big_n = 1usize << n;
    let inv_n = 1.0 / big_n as f64;
    let p_xyz = |x: usize, y: usize, z: usize| {
        let mut v = 0.0;
        if x == y && y == z {
            v += p * inv_n;
        }
        if z == (x + y) % big_n {
            v += (1.0 - p) * inv_n * inv_n;
        }
        v
    };
    // P_XY by explicit marginalization over the support.
    let mut p_xy = vec![0.0; big_n * big_n];
    for x in 0..big_n {
        p_xy[x * big_n + x] += p * inv_n;
        for y in 0..big_n {
            p_xy[x * big_n + y] += (1.0 - p) * inv_n * inv_n;
        }
    }
    // R(y', z | y) = p [y' = y = z] + (1 − p)/N [y' + z = y].
    let q_xyz = |x: usize, yp: usize, z: usize| {
        let mut v = 0.0;
        for y in 0..big_n {
            let mut k = 0.0;
            if yp == y && z == y {
                k += p;
            }
            if (yp + z) % big_n == y {
                k += (1.0 - p) * inv_n;
            }
            v += p_xy[x * big_n + y] * k;
        }
        v
    };
    let mut support = std::collections::BTreeSet::new();
    for x in 0..big_n {
        support.insert((x, x, x));
        for y in 0..big_n {
            support.insert((x, y, (x + y) % big_n));
        }
    }
    support
        .into_iter()
        .map(|(x, y, z)| {
            let a = p_xyz(x, y, z);
            a * (a / q_xyz(x, y, z)).ln()
        })
        .sum()
}

#[test]
fn example_b_relative_entropy_matches_direct_enumeration() {
    for alpha in [4u32, 8] {
        let inst = AppendixB::for_alpha(alpha).unwrap();
        let direct = example_b_direct(inst.n, inst.p);
        let cells = appendix_b_report(alpha, LogBase::E).unwrap().relative_entropy;
        assert!((direct - cells).abs() <= 1e-9 * direct.max(1.0), "alpha {alpha}: direct {direct} vs cells {cells}");
    }
}

#[test]
fn example_b_direct_value_at_alpha_8() {
    let inst = AppendixB::for_alpha(8).unwrap();
    let d = example_b_direct(inst.n, inst.p);
    assert!((d - 5.516).abs() < 1e-3, "{d}");
    // Exceeds log(1/p) = 2 log 8.
    assert!(d > 2.0 * 8f64.ln());
}

#[test]
fn example_b_cells_match_enumeration_for_small_n() {
    for alpha in [2u32, 3, 4] {
        let inst = AppendixB::for_alpha(alpha).unwrap();
        let bf = inst.brute_force().unwrap();
        assert!(bf.max_entry_diff <= 1e-14, "alpha {alpha}: {bf:?}");
        assert!(bf.max_quantity_diff <= 1e-12, "alpha {alpha}: {bf:?}");
    }
}

#[test]
fn example_b_marginal_is_recovered_and_invariant() {
    for alpha in [4u32, 8, 16, 32, 64] {
        let r = appendix_b_report(alpha, LogBase::E).unwrap();
        assert_eq!(r.invariance_defect, 0.0);
        assert!(r.recovery_marginal_defect <= 1e-15);
        assert!(r.mass_defect <= 1e-12);
        assert!(r.cmi >= r.cmi_lower_bound);
        assert!((r.renyi_upper - r.renyi_upper_cells).abs() <= 1e-9 * r.renyi_upper.abs().max(1.0));
    }
}

#[test]
fn example_a_cells_match_enumeration_on_grid() {
    for n in 1..=4u32 {
        for pi in 0..=4 {
            for qi in 0..=(4 - pi) {
                let (p, q) = (0.25 * pi as f64, 0.25 * qi as f64);
                let bf = AppendixA::new(n, p, q).unwrap().brute_force().unwrap();
                assert!(bf.max_entry_diff <= 1e-12, "n={n} p={p} q={q}: {bf:?}");
                assert!(bf.max_quantity_diff <= 1e-12, "n={n} p={p} q={q}: {bf:?}");
            }
        }
    }
}

#[test]
fn example_a_reverse_ratio_list() {
    // p = q = ¼: P(X = Y) = p + pq + q² = 3/8 and the largest listed reverse ratio is 15/8.
    let r = appendix_a_report(10, 0.25, 0.25, LogBase::Two).unwrap();
    assert!((r.dmax_reverse - (15.0f64 / 8.0).log2()).abs() < 1e-12, "{}", r.dmax_reverse);
}

#[test]
fn example_a_reference_point() {
    let r = appendix_a_report(10, 0.5, 0.0, LogBase::Two).unwrap();
    assert_eq!(r.dmax_bits, 1.0);
    assert!(r.dmax_forward_exact <= r.dmax_forward + 1e-12);
    assert!(r.recovery_marginal_defect <= 1e-15);
    let nats = appendix_a_report(10, 0.5, 0.0, LogBase::E).unwrap();
    assert!((nats.cmi - r.cmi * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn slater_states() {
    let r3 = slater_cmi(3).unwrap();
    assert!((r3.norm - 1.0).abs() < 1e-12);
    assert!((r3.min_cmi - 3f64.ln()).abs() < 1e-9);
    assert!(r3.chain_defect < 1e-9);
    let r4 = slater_cmi(4).unwrap();
    assert!(r4.min_cmi <= r4.bound + 1e-9);
    assert!(slater_cmi(5).is_err());
}

#[test]
fn relative_entropy_triangle_fails_on_qubits() {
    let t = triangle_counterexample().unwrap();
    assert!((t.d_rho_sigma - 0.549306).abs() < 1e-6);
    assert!((t.d_rho_omega + t.d_omega_sigma - 0.274653).abs() < 1e-6);
    assert!(t.violated);
}
