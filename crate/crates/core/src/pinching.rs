//! Pinching with respect to the spectral projectors of a Hermitian operator.
//!
//! Eigenvalues are grouped by single linkage: consecutive sorted eigenvalues
//! closer than `max(1e-8·‖H‖∞, CLUSTER_FLOOR)` share a projector.

use num_bigint::BigUint;
use serde::Serialize;

use crate::linalg::{c64, cr, eigh, eigh_unchecked, logm, same_dim, trace_re, CMat, Spectrum};
use crate::quad::{cos_transform, QuadratureRule};
use crate::{Error, Result};

pub const CLUSTER_RTOL: f64 = 1e-8;
/// Absolute floor of the clustering tolerance.
pub const CLUSTER_FLOOR: f64 = 1e-10;
/// Largest tensor-power dimension accepted by [`asymptotic_gt_trace`].
pub const MAX_POWER_DIM: usize = 4096;

/// Spectral projectors of `H` with their cluster means.
#[derive(Clone, Debug)]
pub struct PinchingSpec {
    pub spectrum: Spectrum,
    /// Eigenvalue indices of each cluster, in descending order of value.
    pub groups: Vec<Vec<usize>>,
    pub clusters: Vec<f64>,
    pub gap_tol: f64,
}

impl PinchingSpec {
    pub fn new(h: &CMat) -> Result<Self> {
        let spectrum = eigh(h)?;
        let gap_tol = (CLUSTER_RTOL * spectrum.max_abs()).max(CLUSTER_FLOOR);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (k, &l) in spectrum.values.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if spectrum.values[*g.last().unwrap()] - l <= gap_tol => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        let clusters =
            groups.iter().map(|g| g.iter().map(|&k| spectrum.values[k]).sum::<f64>() / g.len() as f64).collect();
        Ok(PinchingSpec { spectrum, groups, clusters, gap_tol })
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Cluster label of every eigenvalue index.
    pub fn labels(&self) -> Vec<usize> {
        let mut lab = vec![0; self.spectrum.dim()];
        for (z, g) in self.groups.iter().enumerate() {
            for &k in g {
                lab[k] = z;
            }
        }
        lab
    }

    pub fn projectors(&self) -> Vec<CMat> {
        let lab = self.labels();
        (0..self.len())
            .map(|z| self.spectrum.apply_values(&lab.iter().map(|&l| cr(if l == z { 1.0 } else { 0.0 })).collect::<Vec<_>>()))
            .collect()
    }

    /// `Σ_λ Π_λ X Π_λ`.
    pub fn apply(&self, x: &CMat) -> CMat {
        let lab = self.labels();
        let mut y = self.spectrum.to_eigenbasis(x);
        for k in 0..y.nrows() {
            for l in 0..y.ncols() {
                if lab[k] != lab[l] {
                    y[(k, l)] = cr(0.0);
                }
            }
        }
        self.spectrum.from_eigenbasis(&y)
    }

    /// Smallest distance between cluster means; `+∞` for a single cluster.
    pub fn gap(&self) -> f64 {
        self.clusters.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }
}

pub fn pinch(h: &CMat, x: &CMat) -> Result<CMat> {
    same_dim(h, x)?;
    Ok(PinchingSpec::new(h)?.apply(x))
}

/// Pinching as the average `(1/K) Σ_y U_y X U_y†` with `U_y = Σ_z e^{2πiyz/K} Π_z`.
pub fn pinch_unitary_average(h: &CMat, x: &CMat) -> Result<CMat> {
    same_dim(h, x)?;
    let spec = PinchingSpec::new(h)?;
    let proj = spec.projectors();
    let k = proj.len();
    let mut acc = CMat::zeros(x.nrows(), x.ncols());
    for y in 0..k {
        let mut u = CMat::zeros(x.nrows(), x.ncols());
        for (z, p) in proj.iter().enumerate() {
            let ph = c64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((y * z) % k) as f64 / k as f64);
            u += p * ph;
        }
        acc += &u * x * u.adjoint();
    }
    Ok(acc / cr(k as f64))
}

pub fn spectral_gap(h: &CMat) -> Result<f64> {
    Ok(PinchingSpec::new(h)?.gap())
}

/// `∫ μ_κ(t) e^{itH} X e^{−itH} dt` with the rule supplied.
///
/// Evaluated in the eigenbasis of `H`: entry `(k, l)` is multiplied by the
/// rule's cosine transform at `λ_k − λ_l`.
pub fn smooth_pinch(h: &CMat, kappa: f64, x: &CMat, rule: &QuadratureRule) -> Result<CMat> {
    if !(kappa > 0.0) {
        return Err(Error::KappaNonpositive(kappa));
    }
    same_dim(h, x)?;
    let sp = eigh(h)?;
    let mut y = sp.to_eigenbasis(x);
    let d = sp.dim();
    for k in 0..d {
        for l in k + 1..d {
            let m = cos_transform(rule, sp.values[k] - sp.values[l]);
            y[(k, l)] *= m;
            y[(l, k)] *= m;
        }
    }
    Ok(sp.from_eigenbasis(&y))
}

/// Smooth pinching with a `μ_κ` rule sized to the spread of `H`.
pub fn smooth_pinch_auto(h: &CMat, kappa: f64, x: &CMat) -> Result<CMat> {
    let sp = eigh(h)?;
    let spread = sp.values.first().unwrap_or(&0.0) - sp.values.last().unwrap_or(&0.0);
    let rule = crate::quad::mu_rule(kappa, spread)?;
    smooth_pinch(h, kappa, x, &rule)
}

/// `C(m + d − 1, d − 1)`, the number of distinct multisets of size `m` over `d` letters.
pub fn distinct_eig_bound(d: usize, m: usize) -> Result<BigUint> {
    if d == 0 || m == 0 {
        return Err(Error::Param(format!("distinct_eig_bound needs d, m >= 1, got ({d}, {m})")));
    }
    let k = d - 1;
    let mut acc = BigUint::from(1u32);
    for i in 1..=k {
        acc = acc * BigUint::from(m + i) / BigUint::from(i);
    }
    Ok(acc)
}

/// Number of clusters of `H` under the pinching tolerance.
pub fn count_distinct(h: &CMat) -> Result<usize> {
    Ok(PinchingSpec::new(h)?.len())
}

/// One tensor power of the pinching argument for Golden–Thompson.
#[derive(Clone, Debug, Serialize)]
pub struct GtStep {
    pub m: usize,
    /// `(1/m) log tr exp(log B1^⊗m + log B2^⊗m)`.
    pub gt: f64,
    /// `(1/m) log tr exp(log P(B1^⊗m) + log B2^⊗m)`, pinching w.r.t. `B2^⊗m`.
    pub pinched: f64,
    pub spec_count: usize,
    /// `pinched + log|spec(B2^⊗m)|/m`.
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GtChain {
    pub steps: Vec<GtStep>,
    /// `log tr exp(log B1 + log B2)`.
    pub gt_endpoint: f64,
    /// `log tr B1 B2`.
    pub product_endpoint: f64,
}

/// Evaluates the tensor-power chain for `m = 1..=m_max`.
pub fn asymptotic_gt_trace(b1: &CMat, b2: &CMat, m_max: usize) -> Result<GtChain> {
    same_dim(b1, b2)?;
    let d = b1.nrows();
    let dim = (d as f64).powi(m_max as i32);
    if dim > MAX_POWER_DIM as f64 {
        return Err(Error::DimTooLarge(dim as usize, MAX_POWER_DIM));
    }
    for b in [b1, b2] {
        let sp = eigh(b)?;
        if sp.values.last().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::NotPd(sp.values.last().copied().unwrap_or(0.0)));
        }
    }
    let (l1, l2) = (logm(b1)?, logm(b2)?);
    let gt_endpoint = trace_exp_h(&(&l1 + &l2)).ln();
    let product_endpoint = trace_re(&(b1 * b2)).ln();
    let mut steps = Vec::with_capacity(m_max);
    let (mut p1, mut p2) = (b1.clone(), b2.clone());
    for m in 1..=m_max {
        if m > 1 {
            p1 = p1.kronecker(b1);
            p2 = p2.kronecker(b2);
        }
        let log2 = logm(&p2)?;
        let gt = trace_exp_h(&(logm(&p1)? + &log2)).ln() / m as f64;
        let spec = PinchingSpec::new(&p2)?;
        let pinched_b1 = crate::linalg::hermitian_part(&spec.apply(&p1));
        let pinched = trace_exp_h(&(logm(&pinched_b1)? + &log2)).ln() / m as f64;
        let spec_count = spec.len();
        steps.push(GtStep { m, gt, pinched, spec_count, upper: pinched + (spec_count as f64).ln() / m as f64 });
    }
    Ok(GtChain { steps, gt_endpoint, product_endpoint })
}

fn trace_exp_h(h: &CMat) -> f64 {
    eigh_unchecked(h).values.iter().map(|l| l.exp()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;

    #[test]
    fn gaps_and_clusters() {
        assert_eq!(spectral_gap(&diag(&[0.0, 1.0, 3.0])).unwrap(), 1.0);
        assert_eq!(spectral_gap(&diag(&[1.0, 1.0])).unwrap(), f64::INFINITY);
        assert_eq!(spectral_gap(&diag(&[0.0, 1e-12])).unwrap(), f64::INFINITY);
    }

    #[test]
    fn binomial_bound() {
        assert_eq!(distinct_eig_bound(2, 3).unwrap(), BigUint::from(4u32));
        assert_eq!(distinct_eig_bound(1, 7).unwrap(), BigUint::from(1u32));
        assert_eq!(distinct_eig_bound(3, 2).unwrap(), BigUint::from(6u32));
    }
}
