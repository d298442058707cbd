//! Numerical checks of trace inequalities.
//!
//! Every check returns a [`CheckReport`] oriented so that the inequality reads
//! `lhs ≤ rhs`; `margin = rhs − lhs` and `pass ⟺ margin ≥ −tol`.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::entropy::{dmax, renyi};
use crate::linalg::{
    c64, commutator, cr, eigh, eigh_unchecked, expm, frechet_log_spec, hermitian_part, identity, logm, op_norm,
    schatten_from_sv, singular_values, trace_prod, trace_re, CMat, ExpFamily, Spectrum,
};
use crate::quad::{cos_transform, integrate, QuadMeta, QuadratureRule};
use crate::{Error, Result};

/// Default tolerance for checks evaluated in closed form.
pub const TOL_EXACT: f64 = 1e-9;
/// Default tolerance for checks that integrate against a quadrature rule.
pub const TOL_QUAD: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub tol: f64,
    pub params: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadMeta>,
}

impl CheckReport {
    /// Report for `lhs ≤ rhs`. Equal infinities count as margin 0.
    pub fn new(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = if lhs == rhs { 0.0 } else { rhs - lhs };
        CheckReport {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            pass: margin >= -tol,
            tol,
            params: BTreeMap::new(),
            details: BTreeMap::new(),
            equality: None,
            quadrature: None,
        }
    }

    /// Overrides the margin (for two-sided checks).
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self.pass = margin >= -self.tol;
        self
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), v.into());
        self
    }

    pub fn detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    pub fn quad(mut self, rule: &QuadratureRule) -> Self {
        self.quadrature = Some(rule.meta());
        self
    }
}

fn dims_param(ms: &[CMat]) -> Value {
    json!(ms.iter().map(|m| m.nrows()).collect::<Vec<_>>())
}

fn same_dims(ms: &[&CMat]) -> Result<usize> {
    let d = ms.first().map(|m| m.nrows()).ok_or_else(|| Error::Param("no operands".into()))?;
    for m in ms {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimMismatch(format!("{}x{} vs {d}x{d}", m.nrows(), m.ncols())));
        }
    }
    Ok(d)
}

fn trace_exp(h: &CMat) -> f64 {
    eigh_unchecked(h).values.iter().map(|l| l.exp()).sum()
}

/// `tr e^{H1+H2} ≤ tr e^{H1} e^{H2}`.
pub fn check_gt2(h1: &CMat, h2: &CMat, tol: f64) -> Result<CheckReport> {
    same_dims(&[h1, h2])?;
    eigh(h1)?;
    eigh(h2)?;
    let lhs = trace_exp(&(h1 + h2));
    let rhs = trace_prod(&crate::linalg::expm_h(h1), &crate::linalg::expm_h(h2)).re;
    let comm = op_norm(&commutator(h1, h2));
    let mut r = CheckReport::new("gt2", lhs, rhs, tol).param("d", h1.nrows()).detail("commutator_norm", comm);
    r.equality = Some(r.margin.abs() <= tol && comm <= tol);
    Ok(r)
}

/// Lieb's triple inequality `tr e^{H1+H2+H3} ≤ tr e^{H1} D log[e^{−H2}](e^{H3})`.
///
/// The right side is evaluated in closed form (divided differences) and as the
/// `β₀` average of `tr e^{H1} e^{(1+it)H2/2} e^{H3} e^{(1−it)H2/2}`; the
/// closed form is `rhs`, the quadrature value and their gap are details.
pub fn check_lieb_triple(h1: &CMat, h2: &CMat, h3: &CMat, rule: &QuadratureRule, tol: f64) -> Result<CheckReport> {
    same_dims(&[h1, h2, h3])?;
    let (rhs, rhs_quad) = lieb_triple_rhs(h1, h2, h3, rule)?;
    let lhs = trace_exp(&(h1 + h2 + h3));
    Ok(CheckReport::new("lieb_triple", lhs, rhs, tol)
        .param("d", h1.nrows())
        .detail("rhs_quadrature", rhs_quad)
        .detail("representation_gap", (rhs - rhs_quad).abs())
        .quad(rule))
}

/// `(closed form, β₀ quadrature)` right sides of Lieb's triple inequality.
pub fn lieb_triple_rhs(h1: &CMat, h2: &CMat, h3: &CMat, rule: &QuadratureRule) -> Result<(f64, f64)> {
    let sp2 = eigh(h2)?;
    let e1 = crate::linalg::expm_h(h1);
    let e3 = crate::linalg::expm_h(h3);
    // e^{−H2} shares eigenvectors with H2; eigenvalues must stay descending.
    let mut vals: Vec<f64> = sp2.values.iter().map(|l| (-l).exp()).collect();
    let mut vecs = sp2.vectors.clone();
    vals.reverse();
    let d = vals.len();
    for j in 0..d {
        vecs.set_column(j, &sp2.vectors.column(d - 1 - j));
    }
    let b = Spectrum { values: vals, vectors: vecs };
    let closed = trace_prod(&e1, &frechet_log_spec(&b, &e3)?).re;

    let a = sp2.to_eigenbasis(&e1);
    let c = sp2.to_eigenbasis(&e3);
    let lam = &sp2.values;
    let mut quad = 0.0;
    for k in 0..d {
        for l in 0..d {
            let w = cos_transform(rule, 0.5 * (lam[k] - lam[l]));
            quad += (a[(l, k)] * c[(k, l)]).re * (0.5 * (lam[k] + lam[l])).exp() * w;
        }
    }
    Ok((closed, quad))
}

/// `log‖exp Σ H_k‖_p ≤ ∫ β₀(t) log‖Π_k exp((1+it) H_k)‖_p dt`.
pub fn check_gt_multi(hs: &[CMat], p: f64, rule: &QuadratureRule, tol: f64) -> Result<CheckReport> {
    if hs.len() < 2 || !(p > 0.0) {
        return Err(Error::Param(format!("gt_multi needs n >= 2 and p > 0 (n={}, p={p})", hs.len())));
    }
    let refs: Vec<&CMat> = hs.iter().collect();
    let d = same_dims(&refs)?;
    let fams = hs.iter().map(ExpFamily::hermitian).collect::<Result<Vec<_>>>()?;
    let sum: CMat = hs.iter().fold(CMat::zeros(d, d), |a, h| a + h);
    let lhs = log_schatten_herm(&sum, p);
    let rhs = integrate(rule, |t| Ok(log_norm_of_product(&fams, c64::new(1.0, t), p)))?;
    Ok(CheckReport::new("gt_multi", lhs, rhs, tol)
        .param("n", hs.len())
        .param("p", p)
        .param("dims", dims_param(hs))
        .quad(rule))
}

/// `log‖e^H‖_p` from the spectrum of `H`, stable for large `H`.
fn log_schatten_herm(h: &CMat, p: f64) -> f64 {
    let vals = eigh_unchecked(h).values;
    let top = vals[0];
    if p.is_infinite() {
        return top;
    }
    let s: f64 = vals.iter().map(|&l| ((l - top) * p).exp()).sum();
    top + s.ln() / p
}

fn log_norm_of_product(fams: &[ExpFamily], z: c64, p: f64) -> f64 {
    let mut prod = fams[0].at(z);
    for f in &fams[1..] {
        prod *= f.at(z);
    }
    schatten_from_sv(&singular_values(&prod), p).ln()
}

/// Araki–Lieb–Thirring: for `r ∈ (0, 1]`,
/// `tr (B1^{r/2} B2^r B1^{r/2})^{q/r} ≤ tr (B1^{1/2} B2 B1^{1/2})^q`, reversed for `r ≥ 1`.
pub fn check_alt2(b1: &CMat, b2: &CMat, q: f64, r: f64, tol: f64) -> Result<CheckReport> {
    same_dims(&[b1, b2])?;
    if !(q > 0.0) || !(r > 0.0) {
        return Err(Error::Param(format!("alt2 needs q, r > 0 (q={q}, r={r})")));
    }
    let (f1, f2) = (ExpFamily::psd(b1)?, ExpFamily::psd(b2)?);
    let side = |s: f64| -> f64 {
        let h = f1.at(cr(s / 2.0));
        let m = hermitian_part(&(&h * f2.at(cr(s)) * &h));
        eigh_unchecked(&m).values.iter().filter(|&&l| l > 0.0).map(|&l| l.powf(q / s)).sum()
    };
    let (tr_r, tr_1) = (side(r), side(1.0));
    let (lhs, rhs, dir) = if r <= 1.0 { (tr_r, tr_1, "r<=1") } else { (tr_1, tr_r, "r>=1") };
    Ok(CheckReport::new("alt2", lhs, rhs, tol).param("q", q).param("r", r).param("direction", dir))
}

/// `log‖ |Π B_k^r|^{1/r} ‖_p ≤ ∫ β_r(t) log‖Π B_k^{1+it}‖_p dt` for `r ∈ (0,1)`.
pub fn check_alt_multi(bs: &[CMat], p: f64, r: f64, rule: &QuadratureRule, tol: f64) -> Result<CheckReport> {
    if !(r > 0.0 && r < 1.0) || !(p > 0.0) || bs.is_empty() {
        return Err(Error::Param(format!("alt_multi needs r in (0,1), p > 0 (r={r}, p={p})")));
    }
    let refs: Vec<&CMat> = bs.iter().collect();
    same_dims(&refs)?;
    let fams = bs.iter().map(ExpFamily::psd).collect::<Result<Vec<_>>>()?;
    // ‖ |L|^{1/r} ‖_p = ‖L‖_{p/r}^{1/r}
    let lhs = log_norm_of_product(&fams, cr(r), p / r) / r;
    let rhs = integrate(rule, |t| Ok(log_norm_of_product(&fams, c64::new(1.0, t), p)))?;
    Ok(CheckReport::new("alt_multi", lhs, rhs, tol)
        .param("n", bs.len())
        .param("p", p)
        .param("r", r)
        .param("dims", dims_param(bs))
        .quad(rule))
}

/// Two-sided logarithmic trace inequality
/// `(1/p) tr B1 log B2^{p/2}B1^pB2^{p/2} ≤ tr B1(log B1 + log B2) ≤ (1/p) tr B1 log B1^{p/2}B2^pB1^{p/2}`.
///
/// `lhs`/`rhs` are the outer bounds; the margin is the smaller of the two gaps.
pub fn check_log_trace2(b1: &CMat, b2: &CMat, p: f64, tol: f64) -> Result<CheckReport> {
    let (lower, mid, upper) = log_trace2_values(b1, b2, p)?;
    let (gl, gu) = (mid - lower, upper - mid);
    Ok(CheckReport::new("log_trace2", lower, upper, tol)
        .with_margin(gl.min(gu))
        .param("p", p)
        .detail("middle", mid)
        .detail("lower_gap", gl)
        .detail("upper_gap", gu))
}

/// `(lower, middle, upper)` of the two-sided logarithmic trace inequality.
pub fn log_trace2_values(b1: &CMat, b2: &CMat, p: f64) -> Result<(f64, f64, f64)> {
    same_dims(&[b1, b2])?;
    if !(p > 0.0) {
        return Err(Error::Param(format!("p must be positive, got {p}")));
    }
    let (f1, f2) = (ExpFamily::psd(b1)?, ExpFamily::psd(b2)?);
    let outer = |fa: &ExpFamily, fb: &ExpFamily| -> Result<f64> {
        let h = fa.at(cr(p / 2.0));
        let m = hermitian_part(&(&h * fb.at(cr(p)) * &h));
        Ok(trace_prod(b1, &logm(&m)?).re / p)
    };
    let lower = outer(&f2, &f1)?;
    let upper = outer(&f1, &f2)?;
    let mid = trace_prod(b1, &(logm(b1)? + logm(b2)?)).re;
    Ok((lower, mid, upper))
}

/// `p → 0` probe: `(p, lower gap, upper gap)` for each `p`.
pub fn log_trace_probe(b1: &CMat, b2: &CMat, ps: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    ps.iter()
        .map(|&p| {
            let (l, m, u) = log_trace2_values(b1, b2, p)?;
            Ok((p, m - l, u - m))
        })
        .collect()
}

/// `∫ β₀(t) (1/q) tr B1 log(B_n^{q(1+it)/2}⋯B_2^{q/2} B_1^q B_2^{q/2}⋯B_n^{q(1−it)/2}) dt ≤ Σ_k tr B1 log B_k`.
pub fn check_log_trace_multi(bs: &[CMat], q: f64, rule: &QuadratureRule, tol: f64) -> Result<CheckReport> {
    if bs.len() < 2 || !(q > 0.0) {
        return Err(Error::Param(format!("log_trace_multi needs n >= 2 and q > 0 (n={}, q={q})", bs.len())));
    }
    let refs: Vec<&CMat> = bs.iter().collect();
    same_dims(&refs)?;
    let b1 = &bs[0];
    let fams = bs.iter().map(ExpFamily::psd).collect::<Result<Vec<_>>>()?;
    let mut rhs = 0.0;
    for b in bs {
        rhs += trace_prod(b1, &logm(b)?).re;
    }
    // M_t = W W† with W = B_n^{q(1+it)/2}⋯B_3^{q(1+it)/2} B_2^{q/2} B_1^{q/2}.
    let core = fams[1].at(cr(q / 2.0)) * fams[0].at(cr(q / 2.0));
    let lhs = integrate(rule, |t| {
        let z = c64::new(q / 2.0, q * t / 2.0);
        let mut w = core.clone();
        for f in &fams[2..] {
            w = f.at(z) * w;
        }
        let m = hermitian_part(&(&w * w.adjoint()));
        Ok(trace_prod(b1, &logm(&m)?).re / q)
    })?;
    Ok(CheckReport::new("log_trace_multi", lhs, rhs, tol)
        .param("n", bs.len())
        .param("q", q)
        .param("dims", dims_param(bs))
        .quad(rule))
}

/// Peierls–Bogoliubov: `tr H2 e^{H1} / tr e^{H1} ≤ log(tr e^{H1+H2} / tr e^{H1})`.
pub fn check_peierls(h1: &CMat, h2: &CMat, tol: f64) -> Result<CheckReport> {
    same_dims(&[h1, h2])?;
    let sp1 = eigh(h1)?;
    eigh(h2)?;
    let top = sp1.values[0];
    let g = sp1.apply(|l| cr((l - top).exp()));
    let z1 = trace_re(&g);
    let lhs = trace_prod(h2, &g).re / z1;
    let shifted = h1 + h2 - identity(h1.nrows()) * cr(top);
    let rhs = (trace_exp(&shifted) / z1).ln();
    Ok(CheckReport::new("peierls", lhs, rhs, tol).param("d", h1.nrows()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KleinFn {
    XLogX,
    Square,
    NegLog,
}

impl KleinFn {
    fn f(self, x: f64) -> f64 {
        match self {
            KleinFn::XLogX => {
                if x > 0.0 {
                    x * x.ln()
                } else {
                    0.0
                }
            }
            KleinFn::Square => x * x,
            KleinFn::NegLog => -x.ln(),
        }
    }

    fn fp(self, x: f64) -> f64 {
        match self {
            KleinFn::XLogX => x.ln() + 1.0,
            KleinFn::Square => 2.0 * x,
            KleinFn::NegLog => -1.0 / x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KleinFn::XLogX => "t_log_t",
            KleinFn::Square => "t_squared",
            KleinFn::NegLog => "neg_log_t",
        }
    }
}

/// Klein: `tr (B1 − B2) f′(B2) ≤ tr f(B1) − tr f(B2)`.
pub fn check_klein(b1: &CMat, b2: &CMat, f: KleinFn, tol: f64) -> Result<CheckReport> {
    same_dims(&[b1, b2])?;
    let (s1, s2) = (eigh(b1)?, eigh(b2)?);
    for s in [&s1, &s2] {
        let min = s.values.last().copied().unwrap_or(0.0);
        if min <= 0.0 {
            return Err(Error::NotPd(min));
        }
    }
    let tf = |s: &Spectrum| s.values.iter().map(|&l| f.f(l)).sum::<f64>();
    let rhs = tf(&s1) - tf(&s2);
    let fp2 = s2.apply(|l| cr(f.fp(l)));
    let lhs = trace_prod(&(b1 - b2), &fp2).re;
    let mut r = CheckReport::new("klein", lhs, rhs, tol).param("f", f.name());
    r.equality = Some(crate::linalg::max_abs_diff(b1, b2) == 0.0);
    Ok(r)
}

/// Lieb concavity along a segment:
/// `t tr e^{H+log B1} + (1−t) tr e^{H+log B2} ≤ tr e^{H + log(t B1 + (1−t) B2)}` for each `t`.
pub fn probe_lieb_concavity(h: &CMat, b1: &CMat, b2: &CMat, t_grid: &[f64], tol: f64) -> Result<CheckReport> {
    same_dims(&[h, b1, b2])?;
    eigh(h)?;
    let e1 = trace_exp(&(h + logm(b1)?));
    let e2 = trace_exp(&(h + logm(b2)?));
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut details = BTreeMap::new();
    for &t in t_grid {
        let lhs = t * e1 + (1.0 - t) * e2;
        let mix = b1 * cr(t) + b2 * cr(1.0 - t);
        let rhs = trace_exp(&(h + logm(&mix)?));
        details.insert(format!("margin_t={t}"), rhs - lhs);
        if worst.is_none_or(|(l, r, _)| rhs - lhs < r - l) {
            worst = Some((lhs, rhs, t));
        }
    }
    let (lhs, rhs, t) = worst.ok_or_else(|| Error::Param("empty t grid".into()))?;
    let mut r = CheckReport::new("lieb_concavity", lhs, rhs, tol).param("worst_t", t).param("grid", t_grid.len());
    r.details = details;
    Ok(r)
}

/// `log‖exp Σ L_k‖_p ≤ ∫ β₀(t) log‖Π exp((1+it) Re L_k)‖_p dt` for arbitrary `L_k`.
pub fn check_gt_general(ls: &[CMat], p: f64, rule: &QuadratureRule, tol: f64) -> Result<CheckReport> {
    if ls.is_empty() || !(p > 0.0) {
        return Err(Error::Param(format!("gt_general needs n >= 1 and p > 0 (p={p})")));
    }
    let refs: Vec<&CMat> = ls.iter().collect();
    let d = same_dims(&refs)?;
    let sum: CMat = ls.iter().fold(CMat::zeros(d, d), |a, l| a + l);
    let lhs = schatten_from_sv(&singular_values(&expm(&sum)), p).ln();
    let fams = ls.iter().map(|l| ExpFamily::hermitian(&hermitian_part(l))).collect::<Result<Vec<_>>>()?;
    let rhs = integrate(rule, |t| Ok(log_norm_of_product(&fams, c64::new(1.0, t), p)))?;
    Ok(CheckReport::new("gt_general", lhs, rhs, tol).param("n", ls.len()).param("p", p).quad(rule))
}

#[derive(Clone, Debug, Serialize)]
pub struct LieProductReport {
    pub m: Vec<usize>,
    pub errors: Vec<f64>,
    pub decreasing: bool,
    /// `max_m m · error(m)`.
    pub fitted_c: f64,
}

/// `‖(Π e^{L_k/m})^m − e^{Σ L_k}‖∞` along `m_list`.
pub fn lie_product_probe(ls: &[CMat], m_list: &[usize]) -> Result<LieProductReport> {
    let refs: Vec<&CMat> = ls.iter().collect();
    let d = same_dims(&refs)?;
    let target = expm(&ls.iter().fold(CMat::zeros(d, d), |a, l| a + l));
    let mut errors = Vec::with_capacity(m_list.len());
    for &m in m_list {
        if m == 0 {
            return Err(Error::Param("m must be positive".into()));
        }
        let step = ls.iter().fold(identity(d), |a, l| a * expm(&(l / cr(m as f64))));
        errors.push(op_norm(&(mat_pow(&step, m) - &target)));
    }
    let decreasing = errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
    let fitted_c = m_list.iter().zip(&errors).map(|(&m, &e)| m as f64 * e).fold(0.0, f64::max);
    Ok(LieProductReport { m: m_list.to_vec(), errors, decreasing, fitted_c })
}

fn mat_pow(a: &CMat, mut k: usize) -> CMat {
    let mut base = a.clone();
    let mut acc = identity(a.nrows());
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

/// `D_α(ρ‖σ) ≤ D_α(ρ‖ω) + D_max(ω‖σ)` for `α ≥ ½`.
pub fn check_renyi_triangle(rho: &CMat, sigma: &CMat, omega: &CMat, alpha: f64, tol: f64) -> Result<CheckReport> {
    if !(alpha >= 0.5) {
        return Err(Error::Param(format!("alpha must be >= 1/2, got {alpha}")));
    }
    let lhs = renyi(rho, sigma, alpha)?.value;
    let rhs = renyi(rho, omega, alpha)?.value + dmax(omega, sigma)?;
    let a: Value = if alpha.is_infinite() { json!("inf") } else { json!(alpha) };
    Ok(CheckReport::new("renyi_triangle", lhs, rhs, tol).param("alpha", a))
}
