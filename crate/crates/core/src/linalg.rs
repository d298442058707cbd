//! Dense Hermitian kernel.
//!
//! Eigenvalues below `SUPPORT_EPS * λmax` are treated as exact zeros; logarithms
//! and negative powers act on the support only (`log 0 = 0`, `0^z = 0`).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex64;
pub type CMat = DMatrix<c64>;

/// Relative threshold below which eigenvalues count as zero.
pub const SUPPORT_EPS: f64 = 1e-12;
/// Relative Hermiticity tolerance accepted by [`eigh`].
pub const HERM_TOL: f64 = 1e-10;
/// Relative gap under which divided differences use the analytic limit.
pub const DEGEN_EPS: f64 = 1e-8;
/// Negative eigenvalues above `-NEG_TOL * λmax` are clipped, below rejected.
pub const NEG_TOL: f64 = 1e-9;

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> c64) -> CMat {
        let d = self.dim();
        let fv: Vec<c64> = self.values.iter().map(|&l| f(l)).collect();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let s = fv[j];
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|l| c64::new(l, 0.0))
    }

    /// Conjugates `x` into the eigenbasis: `V† x V`.
    pub fn to_eigenbasis(&self, x: &CMat) -> CMat {
        self.vectors.adjoint() * x * &self.vectors
    }

    pub fn from_eigenbasis(&self, y: &CMat) -> CMat {
        &self.vectors * y * self.vectors.adjoint()
    }

    /// Support threshold for PSD spectra.
    pub fn support_eps(&self) -> f64 {
        SUPPORT_EPS * self.values.first().copied().unwrap_or(0.0).max(0.0)
    }

    /// Eigenvalues with PSD clipping; errors on clearly negative values.
    pub fn psd_values(&self) -> Result<Vec<f64>> {
        let top = self.values.first().copied().unwrap_or(0.0).max(0.0);
        let eps = SUPPORT_EPS * top;
        let neg = -NEG_TOL * top.max(f64::MIN_POSITIVE);
        let mut out = Vec::with_capacity(self.dim());
        for &l in &self.values {
            if l < neg && l < -1e-300 {
                return Err(Error::NotPsd(l));
            }
            out.push(if l <= eps { 0.0 } else { l });
        }
        Ok(out)
    }

    /// Projector onto eigenvalues above the support threshold.
    pub fn support_projector(&self) -> CMat {
        let eps = self.support_eps();
        self.apply(|l| if l > eps { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
    }

    /// Pseudo-power `B^z` on the support.
    pub fn pow(&self, z: c64) -> Result<CMat> {
        let vals = self.psd_values()?;
        let fv: Vec<c64> =
            vals.iter().map(|&l| if l > 0.0 { (z * l.ln()).exp() } else { c64::new(0.0, 0.0) }).collect();
        Ok(self.apply_values(&fv))
    }

    /// Logarithm on the support (`log 0 = 0`).
    pub fn log(&self) -> Result<CMat> {
        let vals = self.psd_values()?;
        let fv: Vec<c64> = vals.iter().map(|&l| c64::new(if l > 0.0 { l.ln() } else { 0.0 }, 0.0)).collect();
        Ok(self.apply_values(&fv))
    }

    pub fn apply_values(&self, fv: &[c64]) -> CMat {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            for i in 0..d {
                scaled[(i, j)] *= fv[j];
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Density operator with a subsystem shape.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantumState {
    #[serde(skip)]
    pub rho: CMat,
    pub shape: Vec<usize>,
}

impl QuantumState {
    /// Validates Hermiticity (1e-12), positivity (−1e-10) and trace (1e-10).
    pub fn new(rho: CMat, shape: Vec<usize>) -> Result<Self> {
        check_shape(rho.nrows(), &shape)?;
        let defect = herm_defect(&rho);
        if defect > 1e-12 * rho.norm().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::Param(format!("trace {} differs from 1", tr.re)));
        }
        let sp = eigh_unchecked(&rho);
        let min = sp.values.last().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::NotPsd(min));
        }
        Ok(QuantumState { rho, shape })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<QuantumState> {
        let m = partial_trace(&self.rho, &self.shape, keep)?;
        Ok(QuantumState { rho: m, shape: keep.iter().map(|&k| self.shape[k]).collect() })
    }
}

pub fn check_shape(dim: usize, shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::Shape(format!("bad shape {shape:?}")));
    }
    let prod: usize = shape.iter().product();
    if prod != dim {
        return Err(Error::Shape(format!("shape {shape:?} has product {prod}, matrix dim {dim}")));
    }
    Ok(())
}

pub fn cr(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn diag(v: &[f64]) -> CMat {
    let d = v.len();
    CMat::from_fn(d, d, |i, j| if i == j { cr(v[i]) } else { cr(0.0) })
}

/// Builds a matrix from real row-major data.
pub fn real_matrix(d: usize, data: &[f64]) -> CMat {
    CMat::from_fn(d, d, |i, j| cr(data[i * d + j]))
}

pub fn ket(d: usize, i: usize) -> CMat {
    CMat::from_fn(d, 1, |r, _| if r == i { cr(1.0) } else { cr(0.0) })
}

/// `|v⟩⟨v|` for a column vector.
pub fn projector(v: &CMat) -> CMat {
    v * v.adjoint()
}

pub fn herm_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// `tr(a b)` without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> c64 {
    let d = a.nrows();
    let mut s = c64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Eigendecomposition without the Hermiticity check; the input is symmetrized.
pub fn eigh_unchecked(h: &CMat) -> Spectrum {
    let sym = hermitian_part(h);
    let eig = SymmetricEigen::new(sym);
    let d = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Spectrum { values, vectors }
}

/// Hermitian eigendecomposition with descending eigenvalues.
///
/// The Hermiticity defect is measured in Frobenius norm relative to `‖H‖_F`.
pub fn eigh(h: &CMat) -> Result<Spectrum> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimMismatch(format!("{}x{} is not square", h.nrows(), h.ncols())));
    }
    let defect = herm_defect(h);
    if defect > HERM_TOL * h.norm() {
        return Err(Error::NotHermitian(defect));
    }
    Ok(eigh_unchecked(h))
}

/// `f(H)` for a scalar function evaluated on the spectrum.
pub fn matfunc(h: &CMat, f: impl Fn(f64) -> c64) -> Result<CMat> {
    let sp = eigh(h)?;
    for &l in &sp.values {
        let v = f(l);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Domain(l));
        }
    }
    Ok(sp.apply(f))
}

pub fn expm_h(h: &CMat) -> CMat {
    eigh_unchecked(h).apply(|l| cr(l.exp()))
}

/// Logarithm of a PSD matrix on its support.
pub fn logm(b: &CMat) -> Result<CMat> {
    eigh(b)?.log()
}

/// Pseudo-power `B^z` of a PSD matrix.
pub fn powm(b: &CMat, z: c64) -> Result<CMat> {
    eigh(b)?.pow(z)
}

pub fn sqrtm(b: &CMat) -> Result<CMat> {
    powm(b, cr(0.5))
}

/// General matrix exponential (Padé scaling and squaring).
pub fn expm(l: &CMat) -> CMat {
    l.exp()
}

pub fn singular_values(l: &CMat) -> Vec<f64> {
    l.singular_values().iter().copied().collect()
}

/// Schatten `p`-norm for `p ∈ (0, ∞]`; a quasi-norm for `p < 1`.
pub fn schatten_norm(l: &CMat, p: f64) -> f64 {
    let sv = singular_values(l);
    schatten_from_sv(&sv, p)
}

pub fn schatten_from_sv(sv: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return sv.iter().fold(0.0, |m, &s| m.max(s));
    }
    let top = sv.iter().fold(0.0, |m: f64, &s| m.max(s));
    if top == 0.0 {
        return 0.0;
    }
    let s: f64 = sv.iter().map(|&x| (x / top).powf(p)).sum();
    top * s.powf(1.0 / p)
}

/// `log ‖L‖_p` computed without overflow of the norm itself.
pub fn log_schatten(l: &CMat, p: f64) -> f64 {
    schatten_norm(l, p).ln()
}

pub fn op_norm(l: &CMat) -> f64 {
    schatten_norm(l, f64::INFINITY)
}

pub fn trace_norm(l: &CMat) -> f64 {
    schatten_norm(l, 1.0)
}

/// Operator norm of a Hermitian matrix via its spectrum.
pub fn op_norm_h(h: &CMat) -> f64 {
    eigh_unchecked(h).max_abs()
}

/// Trace norm of a Hermitian matrix via its spectrum.
pub fn trace_norm_h(h: &CMat) -> f64 {
    eigh_unchecked(h).values.iter().map(|v| v.abs()).sum()
}

fn check_psd(m: &CMat) -> Result<Spectrum> {
    let sp = eigh(m)?;
    sp.psd_values()?;
    Ok(sp)
}

/// `F(ρ,σ) = ‖√ρ √σ‖₁²`, evaluated as `(tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &CMat, sigma: &CMat) -> Result<f64> {
    same_dim(rho, sigma)?;
    let sr = check_psd(rho)?.pow(cr(0.5))?;
    check_psd(sigma)?;
    Ok(fidelity_with_sqrt(&sr, sigma))
}

/// Fidelity given a precomputed `√ρ`.
pub fn fidelity_with_sqrt(sqrt_rho: &CMat, sigma: &CMat) -> f64 {
    let m = sqrt_rho * sigma * sqrt_rho;
    let sp = eigh_unchecked(&m);
    // Eigenvalues below the support threshold are rounding noise; their roots are not.
    let eps = sp.support_eps();
    let s: f64 = sp.values.iter().filter(|&&v| v > eps).map(|&v| v.sqrt()).sum();
    s * s
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(0.5 * trace_norm_h(&(rho - sigma)))
}

pub fn same_dim(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_all(ms: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

/// Row-major index layout of a multipartite system split into kept and traced parts.
struct Split {
    kept_dim: usize,
    traced_dim: usize,
    /// `full[k * traced_dim + t]` is the full index of kept combo `k`, traced combo `t`.
    full: Vec<usize>,
}

fn split(shape: &[usize], keep: &[usize]) -> Result<Split> {
    let n = shape.len();
    let mut seen = vec![false; n];
    for &k in keep {
        if k >= n || seen[k] {
            return Err(Error::Shape(format!("bad keep set {keep:?} for shape {shape:?}")));
        }
        seen[k] = true;
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let traced: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
    let kept_dim: usize = keep_sorted.iter().map(|&i| shape[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| shape[i]).product();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    let offsets = |parts: &[usize], combo_dim: usize| -> Vec<usize> {
        let mut out = Vec::with_capacity(combo_dim);
        for c in 0..combo_dim {
            let mut rem = c;
            let mut off = 0;
            for &i in parts.iter().rev() {
                off += (rem % shape[i]) * strides[i];
                rem /= shape[i];
            }
            out.push(off);
        }
        out
    };
    let ko = offsets(&keep_sorted, kept_dim);
    let to = offsets(&traced, traced_dim);
    let mut full = Vec::with_capacity(kept_dim * traced_dim);
    for k in &ko {
        for t in &to {
            full.push(k + t);
        }
    }
    Ok(Split { kept_dim, traced_dim, full })
}

/// Partial trace keeping the subsystems in `keep` (returned in ascending order).
pub fn partial_trace(x: &CMat, shape: &[usize], keep: &[usize]) -> Result<CMat> {
    check_shape(x.nrows(), shape)?;
    let s = split(shape, keep)?;
    let mut out = CMat::zeros(s.kept_dim, s.kept_dim);
    for r in 0..s.kept_dim {
        for c in 0..s.kept_dim {
            let mut acc = c64::new(0.0, 0.0);
            for t in 0..s.traced_dim {
                acc += x[(s.full[r * s.traced_dim + t], s.full[c * s.traced_dim + t])];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Adjoint of [`partial_trace`]: embeds `y` as `y ⊗ id` in the original ordering.
pub fn partial_trace_adjoint(y: &CMat, shape: &[usize], keep: &[usize]) -> Result<CMat> {
    let s = split(shape, keep)?;
    if y.nrows() != s.kept_dim {
        return Err(Error::DimMismatch(format!("expected {} got {}", s.kept_dim, y.nrows())));
    }
    let d = s.kept_dim * s.traced_dim;
    let mut out = CMat::zeros(d, d);
    for r in 0..s.kept_dim {
        for c in 0..s.kept_dim {
            let v = y[(r, c)];
            if v == c64::new(0.0, 0.0) {
                continue;
            }
            for t in 0..s.traced_dim {
                out[(s.full[r * s.traced_dim + t], s.full[c * s.traced_dim + t])] = v;
            }
        }
    }
    Ok(out)
}

/// First divided differences of `f` on a sorted spectrum, analytic limit `fp` on near-ties.
pub fn divided_differences(vals: &[f64], f: impl Fn(f64) -> f64, fp: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    let d = vals.len();
    let scale = vals.iter().fold(0.0, |m: f64, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    DMatrix::from_fn(d, d, |k, l| {
        let (a, b) = (vals[k], vals[l]);
        if (a - b).abs() <= DEGEN_EPS * scale {
            fp(a, b)
        } else {
            (f(a) - f(b)) / (a - b)
        }
    })
}

fn schur_apply(sp: &Spectrum, gamma: &DMatrix<f64>, x: &CMat) -> CMat {
    let mut y = sp.to_eigenbasis(x);
    for k in 0..y.nrows() {
        for l in 0..y.ncols() {
            y[(k, l)] *= gamma[(k, l)];
        }
    }
    sp.from_eigenbasis(&y)
}

/// Fréchet derivative `D log[B](X)` via Daleckii–Krein divided differences.
pub fn frechet_log(b: &CMat, x: &CMat) -> Result<CMat> {
    same_dim(b, x)?;
    let sp = eigh(b)?;
    frechet_log_spec(&sp, x)
}

pub fn frechet_log_spec(sp: &Spectrum, x: &CMat) -> Result<CMat> {
    let min = sp.values.last().copied().unwrap_or(0.0);
    if min <= sp.support_eps() {
        return Err(Error::NotPd(min));
    }
    let gamma = divided_differences(
        &sp.values,
        |v| v.ln(),
        |a, b| {
            // ln(a/b)/(a-b) → 1/λ; ln_1p keeps close pairs accurate.
            if a == b {
                1.0 / a
            } else {
                (a / b - 1.0).ln_1p() / (a - b)
            }
        },
    );
    Ok(schur_apply(sp, &gamma, x))
}

/// Fréchet derivative `D exp[H](X)`.
pub fn frechet_exp_spec(sp: &Spectrum, x: &CMat) -> CMat {
    let gamma = divided_differences(
        &sp.values,
        |v| v.exp(),
        |a, b| if a == b { a.exp() } else { b.exp() * (a - b).exp_m1() / (a - b) },
    );
    schur_apply(sp, &gamma, x)
}

pub fn frechet_exp(h: &CMat, x: &CMat) -> Result<CMat> {
    same_dim(h, x)?;
    Ok(frechet_exp_spec(&eigh(h)?, x))
}

/// Maximum absolute entry difference.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Conjugation `a x a†`.
pub fn conj(a: &CMat, x: &CMat) -> CMat {
    a * x * a.adjoint()
}

/// `e^{z·v_k}` on the eigenvectors of a spectrum, with masked entries set to 0.
///
/// For a Hermitian `H` (`v = λ`) this is `e^{zH}`; for a PSD `B` (`v = log λ`
/// on the support) it is the pseudo-power `B^z`.
#[derive(Clone, Debug)]
pub struct ExpFamily {
    sp: Spectrum,
    exps: Vec<Option<f64>>,
}

impl ExpFamily {
    pub fn hermitian(h: &CMat) -> Result<Self> {
        let sp = eigh(h)?;
        let exps = sp.values.iter().map(|&l| Some(l)).collect();
        Ok(ExpFamily { sp, exps })
    }

    pub fn psd(b: &CMat) -> Result<Self> {
        let sp = eigh(b)?;
        let vals = sp.psd_values()?;
        let exps = vals.iter().map(|&l| if l > 0.0 { Some(l.ln()) } else { None }).collect();
        Ok(ExpFamily { sp, exps })
    }

    pub fn at(&self, z: c64) -> CMat {
        let fv: Vec<c64> = self.exps.iter().map(|e| e.map_or(cr(0.0), |v| (z * v).exp())).collect();
        self.sp.apply_values(&fv)
    }
}
