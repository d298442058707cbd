use proptest::prelude::*;
use qmarkov::quad::{
    beta0_char, beta0_rule, beta_density, beta_rule, cos_transform, integrate, mu_density, mu_hat, mu_rule,
    RuleParams, DEFAULT_NODES, DEFAULT_PANELS, DEFAULT_T,
};
use std::f64::consts::PI;

#[test]
fn beta_density_anchor_values() {
    assert!((beta_density(0.0, 0.0).unwrap() - PI / 4.0).abs() < 1e-15);
    assert!((beta_density(0.5, 0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((beta_density(0.5, 1.0).unwrap() - 1.0 / (PI).cosh()).abs() < 1e-15);
    assert!(beta_density(1.0, 0.0).is_err());
    assert!(beta_density(-0.1, 0.0).is_err());
}

#[test]
fn default_rule_mass_and_size() {
    let r = beta0_rule();
    assert_eq!(r.len(), DEFAULT_PANELS * DEFAULT_NODES);
    assert_eq!(r.params.t_max, DEFAULT_T);
    assert!((r.raw_mass - 1.0).abs() < 1e-12, "{}", r.raw_mass);
    assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
}

#[test]
fn beta0_rule_characteristic_function() {
    let r = beta0_rule();
    for omega in [0.0, 0.3, 1.0, 2.5, 6.0] {
        assert!((cos_transform(&r, omega) - beta0_char(omega)).abs() < 1e-10, "{omega}");
    }
}

#[test]
fn doubling_nodes_changes_integrals_little() {
    let base = beta0_rule();
    let fine = beta_rule(0.0, RuleParams { nodes_per_panel: 2 * DEFAULT_NODES, ..RuleParams::default() }).unwrap();
    for f in [|t: f64| t.cos(), |t: f64| (0.7 * t).sin().powi(2), |t: f64| 1.0 / (1.0 + t * t)] {
        let a = integrate(&base, |t| Ok(f(t))).unwrap();
        let b = integrate(&fine, |t| Ok(f(t))).unwrap();
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn beta_theta_rule_has_unit_mass() {
    for theta in [0.1, 0.5, 0.9] {
        let r = beta_rule(theta, RuleParams::default()).unwrap();
        assert!((r.raw_mass - 1.0).abs() < 1e-6, "theta {theta}: {}", r.raw_mass);
    }
}

#[test]
fn mu_rule_resolves_its_transform() {
    let kappa = 1.3;
    let r = mu_rule(kappa, 3.0).unwrap();
    assert!((r.raw_mass - 1.0).abs() < 1e-6);
    for omega in [0.0, 0.4, 1.0, 1.3, 2.0, 2.6, 3.0] {
        assert!((cos_transform(&r, omega) - mu_hat(kappa, omega)).abs() < 1e-6, "{omega}");
    }
}

proptest! {
    #[test]
    fn beta_density_is_even_and_positive(theta in 0.0f64..0.999, t in -30.0f64..30.0) {
        let a = beta_density(theta, t).unwrap();
        prop_assert!(a > 0.0 || t.abs() > 25.0);
        prop_assert_eq!(a, beta_density(theta, -t).unwrap());
    }

    #[test]
    fn mu_density_is_even_and_nonnegative(kappa in 0.01f64..50.0, t in -100.0f64..100.0) {
        let a = mu_density(kappa, t).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - mu_density(kappa, -t).unwrap()).abs() <= 1e-15 * a.max(1e-300));
        prop_assert!(a <= mu_density(kappa, 0.0).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn mu_hat_is_supported_on_kappa_and_bounded(kappa in 0.01f64..50.0, w in -200.0f64..200.0) {
        let v = mu_hat(kappa, w);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        prop_assert_eq!(v, mu_hat(kappa, -w));
        if w.abs() >= kappa {
            prop_assert_eq!(v, 0.0);
        }
        prop_assert!((mu_hat(kappa, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_rule_is_symmetric(i in 0usize..(DEFAULT_PANELS * DEFAULT_NODES)) {
        let r = beta0_rule();
        let n = r.len();
        prop_assert!((r.nodes[i] + r.nodes[n - 1 - i]).abs() < 1e-12);
        prop_assert!((r.weights[i] - r.weights[n - 1 - i]).abs() < 1e-15);
    }
}
