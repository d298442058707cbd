//! Densities on the real line and truncated composite Gauss–Legendre rules.
//!
//! Rule weights are density-weighted and renormalized so that they sum to one;
//! the pre-normalization mass is kept as `raw_mass`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::linalg::{c64, CMat};
use crate::{Error, Result};

pub const DEFAULT_T: f64 = 10.0;
pub const DEFAULT_PANELS: usize = 20;
pub const DEFAULT_NODES: usize = 40;
/// Largest accepted deviation of the raw mass from one.
pub const MASS_TOL: f64 = 1e-6;

/// `β_θ(t)` for `θ ∈ (0,1)`, and the limit `β₀(t) = (π/2)/(cosh πt + 1)`.
pub fn beta_density(theta: f64, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&theta) || theta.is_nan() {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let ch = (PI * t).cosh();
    if theta == 0.0 {
        return Ok(0.5 * PI / (ch + 1.0));
    }
    Ok((PI * theta).sin() / (2.0 * theta * (ch + (PI * theta).cos())))
}

/// `μ_κ(t) = (3κ/8π) sinc⁴(κt/4)`, the stable form of
/// `12/(πκ³t⁴)(3 + cos κt − 4 cos(κt/2))`.
pub fn mu_density(kappa: f64, t: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::KappaNonpositive(kappa));
    }
    let x = 0.25 * kappa * t;
    let s = if x.abs() < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Ok(3.0 * kappa / (8.0 * PI) * s.powi(4))
}

/// Closed-form Fourier transform `μ̂_κ(ω) = (3/κ)(tri_κ ⋆ tri_κ)(ω)` with
/// `tri_κ` the unit-height triangle of half-width `κ/2`.
pub fn mu_hat(kappa: f64, omega: f64) -> f64 {
    let a = 0.5 * kappa;
    let u = omega.abs() / a;
    let conv = if u <= 1.0 {
        a * (2.0 / 3.0 - u * u + 0.5 * u * u * u)
    } else if u <= 2.0 {
        a * (2.0 - u).powi(3) / 6.0
    } else {
        0.0
    };
    3.0 / kappa * conv
}

/// Closed form `∫β₀(t) e^{iωt} dt = ω/ sinh ω` (reference for tests and checks).
pub fn beta0_char(omega: f64) -> f64 {
    if omega.abs() < 1e-8 {
        1.0
    } else {
        omega / omega.sinh()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Beta { theta: f64 },
    Mu { kappa: f64 },
}

impl Density {
    pub fn beta0() -> Self {
        Density::Beta { theta: 0.0 }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match *self {
            Density::Beta { theta } => beta_density(theta, t),
            Density::Mu { kappa } => mu_density(kappa, t),
        }
    }
}

/// Truncation and resolution of a composite rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RuleParams {
    pub t_max: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for RuleParams {
    fn default() -> Self {
        RuleParams { t_max: DEFAULT_T, panels: DEFAULT_PANELS, nodes_per_panel: DEFAULT_NODES }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub density: Density,
    pub params: RuleParams,
    #[serde(skip)]
    pub nodes: Vec<f64>,
    #[serde(skip)]
    pub weights: Vec<f64>,
    pub raw_mass: f64,
}

/// Quadrature metadata echoed in reports.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct QuadMeta {
    pub density: Density,
    pub t_max: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub raw_mass: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn meta(&self) -> QuadMeta {
        QuadMeta {
            density: self.density,
            t_max: self.params.t_max,
            panels: self.params.panels,
            nodes_per_panel: self.params.nodes_per_panel,
            raw_mass: self.raw_mass,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[-T, T]` weighted by `density`.
pub fn make_rule(density: Density, params: RuleParams) -> Result<QuadratureRule> {
    if !(params.t_max > 0.0) || params.panels == 0 || params.nodes_per_panel == 0 {
        return Err(Error::Param(format!("invalid rule parameters {params:?}")));
    }
    density.eval(0.0)?;
    let (gx, gw) = gauss_legendre(params.nodes_per_panel);
    let h = 2.0 * params.t_max / params.panels as f64;
    let mut nodes = Vec::with_capacity(params.panels * gx.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for p in 0..params.panels {
        let mid = -params.t_max + (p as f64 + 0.5) * h;
        for (x, w) in gx.iter().zip(&gw) {
            let t = mid + 0.5 * h * x;
            nodes.push(t);
            weights.push(0.5 * h * w * density.eval(t)?);
        }
    }
    let raw_mass: f64 = weights.iter().sum();
    if (raw_mass - 1.0).abs() > MASS_TOL {
        return Err(Error::TailMassTooLarge { mass: raw_mass, tol: MASS_TOL });
    }
    for w in &mut weights {
        *w /= raw_mass;
    }
    Ok(QuadratureRule { density, params, nodes, weights, raw_mass })
}

pub fn beta_rule(theta: f64, params: RuleParams) -> Result<QuadratureRule> {
    make_rule(Density::Beta { theta }, params)
}

pub fn beta0_rule() -> QuadratureRule {
    make_rule(Density::beta0(), RuleParams::default()).expect("default β₀ rule")
}

/// Parameters for a `μ_κ` rule resolving `e^{iωt}` up to `|ω| ≤ omega_max`.
///
/// Truncation at `κT = 1000` leaves raw tail mass below `1e-8`.
pub fn mu_rule_params(kappa: f64, omega_max: f64) -> RuleParams {
    let t1 = 1000.0;
    let h1 = (4.0 / (omega_max.abs() / kappa + 1.0)).min(2.0);
    let panels = (2.0 * t1 / h1).ceil() as usize;
    RuleParams { t_max: t1 / kappa, panels, nodes_per_panel: 16 }
}

pub fn mu_rule(kappa: f64, omega_max: f64) -> Result<QuadratureRule> {
    if !(kappa > 0.0) {
        return Err(Error::KappaNonpositive(kappa));
    }
    make_rule(Density::Mu { kappa }, mu_rule_params(kappa, omega_max))
}

/// Values that can be accumulated by a quadrature rule.
pub trait Integrand: Sized {
    fn scaled(self, w: f64) -> Self;
    fn plus(self, other: Self) -> Self;
    fn finite(&self) -> bool;
}

impl Integrand for f64 {
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn plus(self, o: Self) -> Self {
        self + o
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl Integrand for c64 {
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn plus(self, o: Self) -> Self {
        self + o
    }
    fn finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Integrand for CMat {
    fn scaled(self, w: f64) -> Self {
        self * c64::new(w, 0.0)
    }
    fn plus(self, o: Self) -> Self {
        self + o
    }
    fn finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// `Σ wᵢ f(tᵢ)`.
pub fn integrate<T: Integrand>(rule: &QuadratureRule, mut f: impl FnMut(f64) -> Result<T>) -> Result<T> {
    let mut acc: Option<T> = None;
    for (t, w) in rule.iter() {
        let v = f(t)?;
        if !v.finite() {
            return Err(Error::NonFinite(t));
        }
        let term = v.scaled(w);
        acc = Some(match acc {
            None => term,
            Some(a) => a.plus(term),
        });
    }
    acc.ok_or_else(|| Error::Param("empty rule".into()))
}

/// Even-part Fourier multiplier `Σ wᵢ cos(ω tᵢ)` of a symmetric rule.
pub fn cos_transform(rule: &QuadratureRule, omega: f64) -> f64 {
    rule.iter().map(|(t, w)| w * (omega * t).cos()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(1);
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn theta_one_rejected() {
        assert!(matches!(beta_density(1.0, 0.0), Err(Error::ThetaOutOfRange(_))));
        assert!(matches!(mu_density(0.0, 1.0), Err(Error::KappaNonpositive(_))));
    }
}
