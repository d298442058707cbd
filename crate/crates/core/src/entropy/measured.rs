//! Measured relative entropy by ascent on `f(H) = tr ρH + 1 − tr σ e^H`.
//!
//! Any `H` gives a lower bound on `D_M(ρ‖σ)`; the returned value is `f` at the
//! final iterate together with the certificate `ω = e^H`.

use serde::Serialize;

use super::{outside_support, Divergence, DivKind, SUPPORT_TOL};
use crate::linalg::{c64, cr, eigh_unchecked, frechet_exp_spec, trace_prod, CMat};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeasuredOpts {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Allowed shortfall below `−log F` for a converged run.
    pub slack: f64,
}

impl Default for MeasuredOpts {
    fn default() -> Self {
        MeasuredOpts { max_iter: 500, grad_tol: 1e-8, slack: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasuredInfo {
    #[serde(skip)]
    pub certificate: CMat,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

/// Coordinates of a Hermitian matrix in an orthonormal basis for `Re tr(AB)`.
fn herm_to_vec(h: &CMat) -> Vec<f64> {
    let d = h.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut v = Vec::with_capacity(d * d);
    for k in 0..d {
        v.push(h[(k, k)].re);
    }
    for k in 0..d {
        for l in k + 1..d {
            v.push(s * h[(k, l)].re);
            v.push(s * h[(k, l)].im);
        }
    }
    v
}

fn vec_to_herm(v: &[f64], d: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = CMat::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = cr(v[k]);
    }
    let mut i = d;
    for k in 0..d {
        for l in k + 1..d {
            let z = c64::new(v[i] * s, v[i + 1] * s);
            h[(k, l)] = z;
            h[(l, k)] = z.conj();
            i += 2;
        }
    }
    h
}

struct Objective<'a> {
    rho: &'a CMat,
    sigma: &'a CMat,
    d: usize,
}

impl Objective<'_> {
    /// `(f, ∇f)` at coordinates `x`; `f = −∞` when `e^H` overflows.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let h = vec_to_herm(x, self.d);
        let sp = eigh_unchecked(&h);
        if sp.values.first().is_some_and(|&l| l > 700.0) {
            return (f64::NEG_INFINITY, vec![0.0; x.len()]);
        }
        let sig_eb = sp.to_eigenbasis(self.sigma);
        let tr_se: f64 = (0..self.d).map(|k| sp.values[k].exp() * sig_eb[(k, k)].re).sum();
        let f = trace_prod(self.rho, &h).re + 1.0 - tr_se;
        let grad = self.rho - frechet_exp_spec(&sp, self.sigma);
        (f, herm_to_vec(&grad))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower bound on `D_M(ρ‖σ)` via quasi-Newton ascent with backtracking.
///
/// Starts at `log ρ − log σ` on `supp σ`, stops when `‖∇f‖_F ≤ grad_tol` or after
/// `max_iter` iterations. Returns `+∞` when `ρ ⋢ σ`.
pub fn measured_relative_entropy(rho: &CMat, sigma: &CMat, opts: MeasuredOpts) -> Result<Divergence> {
    crate::linalg::same_dim(rho, sigma)?;
    let ss = eigh_unchecked(sigma);
    if outside_support(rho, &ss) > SUPPORT_TOL {
        return Ok(Divergence { value: f64::INFINITY, kind: DivKind::Measured, alpha: None, measured: None });
    }
    let vals = ss.psd_values()?;
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.0).collect();
    let r = keep.len();
    if r == 0 {
        return Err(Error::Param("sigma is zero".into()));
    }
    let w = CMat::from_fn(ss.dim(), r, |i, j| ss.vectors[(i, keep[j])]);
    let rho_s = crate::linalg::hermitian_part(&(w.adjoint() * rho * &w));
    let sigma_s = CMat::from_fn(r, r, |i, j| if i == j { cr(vals[keep[i]]) } else { cr(0.0) });
    let log_sigma = CMat::from_fn(r, r, |i, j| if i == j { cr(vals[keep[i]].ln()) } else { cr(0.0) });
    let h0 = eigh_unchecked(&rho_s).log()? - log_sigma;

    let obj = Objective { rho: &rho_s, sigma: &sigma_s, d: r };
    let n = r * r;
    let mut x = herm_to_vec(&h0);
    let (mut f, mut g) = obj.eval(&x);
    let mut hinv: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut gnorm = dot(&g, &g).sqrt();
    while iterations < opts.max_iter {
        if gnorm <= opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir = match &hinv {
            Some(m) => (0..n).map(|i| dot(&m[i * n..(i + 1) * n], &g)).collect::<Vec<f64>>(),
            None => g.clone(),
        };
        let mut slope = dot(&g, &dir);
        if !(slope > 0.0) {
            hinv = None;
            dir = g.clone();
            slope = dot(&g, &dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let (fnew, gnew) = obj.eval(&xn);
            if fnew.is_finite() && fnew >= f + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            if hinv.is_none() {
                break;
            }
            hinv = None;
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        // Curvature pair for minimizing −f.
        let y: Vec<f64> = g.iter().zip(&gnew).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            let m = hinv.get_or_insert_with(|| {
                let scale = sy / dot(&y, &y);
                let mut id = vec![0.0; n * n];
                for i in 0..n {
                    id[i * n + i] = scale;
                }
                id
            });
            bfgs_update(m, &s, &y, sy, n);
        }
        x = xn;
        f = fnew;
        g = gnew;
        gnorm = dot(&g, &g).sqrt();
    }
    if !converged && gnorm <= opts.grad_tol {
        converged = true;
    }
    let h = vec_to_herm(&x, r);
    let omega_s = eigh_unchecked(&h).apply(|l| cr(l.exp()));
    let certificate = &w * omega_s * w.adjoint();
    Ok(Divergence {
        value: f,
        kind: DivKind::Measured,
        alpha: None,
        measured: Some(MeasuredInfo { certificate, iterations, grad_norm: gnorm, converged }),
    })
}

/// `M ← (I − ρ s yᵀ) M (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(sᵀy)`.
fn bfgs_update(m: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let my: Vec<f64> = (0..n).map(|i| dot(&m[i * n..(i + 1) * n], y)).collect();
    let ymy = dot(y, &my);
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] += -rho * (s[i] * my[j] + my[i] * s[j]) + (rho * rho * ymy + rho) * s[i] * s[j];
        }
    }
}

/// Classical relative entropy of the outcome distributions of the projective
/// measurement along Bloch direction `(θ, φ)`.
fn qubit_basis_value(rho: &CMat, sigma: &CMat, theta: f64, phi: f64) -> f64 {
    let v0 = [cr((theta / 2.0).cos()), c64::from_polar((theta / 2.0).sin(), phi)];
    let v1 = [-v0[1].conj(), v0[0].conj()];
    let expect = |m: &CMat, v: &[c64; 2]| -> f64 {
        let mut s = c64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                s += v[i].conj() * m[(i, j)] * v[j];
            }
        }
        s.re
    };
    let mut total = 0.0;
    for v in [&v0, &v1] {
        let p = expect(rho, v).max(0.0);
        let q = expect(sigma, v).max(0.0);
        if p > 0.0 {
            if q <= 0.0 {
                return f64::INFINITY;
            }
            total += p * (p / q).ln();
        }
    }
    total
}

/// Maximum over a `grid_n × grid_n` grid of qubit measurement bases, refined once
/// around the best cell.
pub fn measured_qubit_oracle(rho: &CMat, sigma: &CMat, grid_n: usize) -> Result<f64> {
    if rho.nrows() != 2 || sigma.nrows() != 2 {
        return Err(Error::DimMismatch("qubit oracle needs dimension 2".into()));
    }
    let n = grid_n.max(2);
    let pi = std::f64::consts::PI;
    let (dt, dp) = (pi / (n - 1) as f64, 2.0 * pi / n as f64);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let (t, p) = (i as f64 * dt, j as f64 * dp);
            let v = qubit_basis_value(rho, sigma, t, p);
            if v > best.0 {
                best = (v, t, p);
            }
        }
    }
    let (_, t0, p0) = best;
    for i in 0..n {
        for j in 0..n {
            let t = t0 - dt + 2.0 * dt * i as f64 / (n - 1) as f64;
            let p = p0 - dp + 2.0 * dp * j as f64 / (n - 1) as f64;
            let v = qubit_basis_value(rho, sigma, t, p);
            if v > best.0 {
                best = (v, t, p);
            }
        }
    }
    Ok(best.0)
}
