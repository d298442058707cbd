//! Entropies and divergences.
//!
//! `ρ ⋢ σ` is declared when `tr Π_σ^⊥ ρ > SUPPORT_TOL`; divergences that need
//! the support condition then return `+∞`.

mod lambda;
mod measured;

pub use lambda::{classical_lambda_max, covering_lp, stationary_classes, ClosedClass};
pub use measured::{measured_qubit_oracle, measured_relative_entropy, MeasuredInfo, MeasuredOpts};

use serde::Serialize;

use crate::linalg::{cr, eigh_unchecked, fidelity, partial_trace, trace_prod, CMat, QuantumState, Spectrum};
use crate::{Error, Result};

/// Mass outside `supp σ` above which `ρ ⋢ σ`.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivKind {
    Relative,
    Measured,
    Renyi,
    Max,
    Min,
}

#[derive(Clone, Debug, Serialize)]
pub struct Divergence {
    /// `f64::INFINITY` encodes `+∞`.
    pub value: f64,
    pub kind: DivKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<MeasuredInfo>,
}

impl Divergence {
    fn plain(value: f64, kind: DivKind) -> Self {
        Divergence { value, kind, alpha: None, measured: None }
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// Finite joint distribution stored row-major over `shape`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ClassicalJoint {
    pub shape: Vec<usize>,
    pub p: Vec<f64>,
}

impl ClassicalJoint {
    /// Entries nonnegative, total mass 1 within 1e-12.
    pub fn new(shape: Vec<usize>, p: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if shape.is_empty() || n != p.len() {
            return Err(Error::Shape(format!("shape {shape:?} vs {} entries", p.len())));
        }
        if p.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Param("negative probability".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Param(format!("probabilities sum to {s}")));
        }
        Ok(ClassicalJoint { shape, p })
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.p[self.index(idx)]
    }

    /// Marginal over the parts in `keep` (ascending order).
    pub fn marginal(&self, keep: &[usize]) -> ClassicalJoint {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let shape: Vec<usize> = keep.iter().map(|&k| self.shape[k]).collect();
        let n: usize = shape.iter().product();
        let mut out = vec![0.0; n];
        let mut idx = vec![0usize; self.shape.len()];
        for &v in &self.p {
            let j = keep.iter().fold(0, |acc, &k| acc * self.shape[k] + idx[k]);
            out[j] += v;
            for a in (0..idx.len()).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        ClassicalJoint { shape, p: out }
    }

    pub fn entropy(&self) -> f64 {
        shannon(&self.p)
    }

    /// Diagonal embedding as a density operator.
    pub fn to_state(&self) -> QuantumState {
        QuantumState { rho: crate::linalg::diag(&self.p), shape: self.shape.clone() }
    }
}

/// `−Σ p log p` with `0 log 0 = 0`.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// `h(p) = −p log p − (1−p) log(1−p)`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

/// Classical `I(X:Z|Y)` of a three-part joint.
pub fn classical_cmi(p: &ClassicalJoint) -> Result<f64> {
    if p.shape.len() != 3 {
        return Err(Error::Shape(format!("expected 3 parts, got {:?}", p.shape)));
    }
    Ok(p.marginal(&[0, 1]).entropy() + p.marginal(&[1, 2]).entropy() - p.entropy() - p.marginal(&[1]).entropy())
}

/// Classical `D(P‖Q)`; `+∞` when `P` is not dominated by `Q`.
pub fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).ln();
        }
    }
    s
}

/// Entropy of a PSD matrix's spectrum, negative rounding clipped.
pub fn spectrum_entropy(sp: &Spectrum) -> f64 {
    sp.values.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
}

pub fn entropy_of(m: &CMat) -> f64 {
    spectrum_entropy(&eigh_unchecked(m))
}

/// `H(ρ) = −tr ρ log ρ`.
pub fn von_neumann(rho: &QuantumState) -> f64 {
    entropy_of(&rho.rho)
}

/// Entropy of the marginal on `keep`.
pub fn marginal_entropy(rho: &QuantumState, keep: &[usize]) -> Result<f64> {
    if keep.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy_of(&partial_trace(&rho.rho, &rho.shape, keep)?))
}

/// `H(A|B) = H(AB) − H(B)` for a bipartite state.
pub fn conditional_entropy(rho: &QuantumState) -> Result<f64> {
    if rho.shape.len() != 2 {
        return Err(Error::Shape(format!("expected 2 parts, got {:?}", rho.shape)));
    }
    Ok(von_neumann(rho) - marginal_entropy(rho, &[1])?)
}

/// `I(A:C|B) = H(AB) + H(BC) − H(ABC) − H(B)` for shape `[dA, dB, dC]`.
pub fn cmi(rho: &QuantumState) -> Result<f64> {
    if rho.shape.len() != 3 {
        return Err(Error::Shape(format!("expected 3 parts, got {:?}", rho.shape)));
    }
    cmi_sets(rho, &[0], &[1], &[2])
}

/// `I(A:C|B)` for arbitrary disjoint groups of parts.
pub fn cmi_sets(rho: &QuantumState, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let cat = |x: &[usize], y: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = x.iter().chain(y).copied().collect();
        v.sort_unstable();
        v
    };
    let ab = cat(a, b);
    let bc = cat(b, c);
    let abc = cat(&ab, c);
    Ok(marginal_entropy(rho, &ab)? + marginal_entropy(rho, &bc)?
        - marginal_entropy(rho, &abc)?
        - marginal_entropy(rho, b)?)
}

/// Mass of `ρ` outside the support of `σ`.
pub fn outside_support(rho: &CMat, sigma_sp: &Spectrum) -> f64 {
    let eps = sigma_sp.support_eps();
    let mut s = 0.0;
    for (k, &l) in sigma_sp.values.iter().enumerate() {
        if l <= eps {
            let v = sigma_sp.vectors.column(k);
            let w = rho * v;
            s += (v.adjoint() * w)[(0, 0)].re;
        }
    }
    s
}

pub fn supported(rho: &CMat, sigma: &CMat) -> bool {
    outside_support(rho, &eigh_unchecked(sigma)) <= SUPPORT_TOL
}

/// `D(ρ‖σ) = tr ρ (log ρ − log σ)`.
pub fn relative_entropy(rho: &CMat, sigma: &CMat) -> Result<Divergence> {
    crate::linalg::same_dim(rho, sigma)?;
    let ss = eigh_unchecked(sigma);
    if outside_support(rho, &ss) > SUPPORT_TOL {
        return Ok(Divergence::plain(f64::INFINITY, DivKind::Relative));
    }
    let rs = eigh_unchecked(rho);
    rs.psd_values()?;
    let log_sigma = ss.log()?;
    let v = -spectrum_entropy(&rs) - trace_prod(rho, &log_sigma).re;
    Ok(Divergence::plain(v, DivKind::Relative))
}

/// Minimal (sandwiched) Rényi divergence `D_α`; `α = 1` is `D`, `α = ∞` is `D_max`.
pub fn renyi(rho: &CMat, sigma: &CMat, alpha: f64) -> Result<Divergence> {
    if !(alpha > 0.0) {
        return Err(Error::Param(format!("alpha must be positive, got {alpha}")));
    }
    if alpha == 1.0 {
        let mut d = relative_entropy(rho, sigma)?;
        d.kind = DivKind::Renyi;
        d.alpha = Some(1.0);
        return Ok(d);
    }
    crate::linalg::same_dim(rho, sigma)?;
    let ss = eigh_unchecked(sigma);
    let unsupported = outside_support(rho, &ss) > SUPPORT_TOL;
    let out = |v: f64| Divergence { value: v, kind: DivKind::Renyi, alpha: Some(alpha), measured: None };
    if alpha.is_infinite() {
        if unsupported {
            return Ok(out(f64::INFINITY));
        }
        let s = ss.pow(cr(-0.5))?;
        let m = &s * rho * &s;
        let top = eigh_unchecked(&m).values[0];
        let mut d = out(top.ln());
        d.kind = DivKind::Max;
        return Ok(d);
    }
    if alpha > 1.0 && unsupported {
        return Ok(out(f64::INFINITY));
    }
    let g = (1.0 - alpha) / (2.0 * alpha);
    let s = ss.pow(cr(g))?;
    let m = &s * rho * &s;
    let vals = eigh_unchecked(&m).values;
    let top = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    if top <= 0.0 {
        return Ok(out(f64::INFINITY));
    }
    // log ‖M‖_α = log top + (1/α) log Σ (λ/top)^α
    let sum: f64 = vals.iter().filter(|&&l| l > 0.0).map(|&l| (l / top).powf(alpha)).sum();
    let log_norm = top.ln() + sum.ln() / alpha;
    let mut d = out(alpha / (alpha - 1.0) * log_norm);
    if alpha == 0.5 {
        d.kind = DivKind::Min;
    }
    Ok(d)
}

pub fn dmax(rho: &CMat, sigma: &CMat) -> Result<f64> {
    Ok(renyi(rho, sigma, f64::INFINITY)?.value)
}

/// `D_min = −log F`.
pub fn dmin(rho: &CMat, sigma: &CMat) -> Result<f64> {
    Ok(-fidelity(rho, sigma)?.ln())
}

/// Logarithm base used for display; stored values are in nats.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum LogBase {
    #[serde(rename = "e")]
    E,
    #[default]
    #[serde(rename = "2")]
    Two,
}

impl LogBase {
    pub fn convert(self, nats: f64) -> f64 {
        to_base(nats, self == LogBase::Two)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "e" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            _ => Err(Error::Param(format!("log base must be e or 2, got {s}"))),
        }
    }
}

/// Converts a natural-log value to bits when `base2` is set.
pub fn to_base(v: f64, base2: bool) -> f64 {
    if base2 {
        v / std::f64::consts::LN_2
    } else {
        v
    }
}

/// Number-valued convenience for `D(ρ‖σ)`.
pub fn rel_ent(rho: &CMat, sigma: &CMat) -> Result<f64> {
    Ok(relative_entropy(rho, sigma)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_of_product() {
        let p = ClassicalJoint::new(vec![2, 3], vec![0.1, 0.2, 0.1, 0.2, 0.2, 0.2]).unwrap();
        assert_eq!(p.marginal(&[0]).p.len(), 2);
        assert!((p.marginal(&[0]).p[0] - 0.4).abs() < 1e-15);
        assert!((p.marginal(&[1]).p[2] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(ClassicalJoint::new(vec![2], vec![0.5, 0.6]).is_err());
    }
}
