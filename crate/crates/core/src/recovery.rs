//! Rotated Petz recovery maps and the recoverability checks built on them.
//!
//! `T^{[t]}(X) = σ^{(1+it)/2} E†(E(σ)^{−(1+it)/2} X E(σ)^{−(1−it)/2}) σ^{(1−it)/2}`,
//! with negative powers taken on the support. The averaged map integrates
//! `T^{[t]}` against `β₀`; the tripartite map `B → BC` is the case
//! `σ = id_A ⊗ ρ_BC`, `E = tr_C`.

use serde::Serialize;

use crate::channels::{choi_of_map, kraus_from_choi, ChoiMatrix, KrausChannel};
use crate::entropy::{
    classical_lambda_max, cmi, conditional_entropy, dmax, measured_relative_entropy, relative_entropy,
    ClassicalJoint, Divergence, MeasuredOpts,
};
use crate::linalg::{
    c64, cr, eigh_unchecked, fidelity_with_sqrt, hermitian_part, identity, partial_trace, partial_trace_adjoint,
    same_dim, tensor, trace_norm_h, CMat, ExpFamily, QuantumState,
};
use crate::quad::{beta0_rule, integrate, QuadratureRule};
use crate::traceineq::CheckReport;
use crate::{Error, Result};

/// Tolerance of the recoverability checks.
pub const TOL_RECOVERY: f64 = 1e-8;
/// Tolerance for invariance and Markov verification.
pub const TOL_INVARIANT: f64 = 1e-9;

/// Channel underlying a recovery map.
#[derive(Clone, Debug)]
pub enum Channel {
    Kraus(KrausChannel),
    /// `tr` over the parts not in `keep`.
    PartialTrace { shape: Vec<usize>, keep: Vec<usize> },
}

impl Channel {
    pub fn din(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.din,
            Channel::PartialTrace { shape, .. } => shape.iter().product(),
        }
    }

    pub fn dout(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dout,
            Channel::PartialTrace { shape, keep } => keep.iter().map(|&k| shape[k]).product(),
        }
    }

    pub fn forward(&self, x: &CMat) -> Result<CMat> {
        match self {
            Channel::Kraus(k) => k.forward(x),
            Channel::PartialTrace { shape, keep } => partial_trace(x, shape, keep),
        }
    }

    pub fn adjoint(&self, y: &CMat) -> Result<CMat> {
        match self {
            Channel::Kraus(k) => k.adjoint(y),
            Channel::PartialTrace { shape, keep } => partial_trace_adjoint(y, shape, keep),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", content = "t", rename_all = "snake_case")]
pub enum RecoveryMode {
    Petz,
    Rotated(f64),
    Averaged,
}

/// Recovery map for `(σ, E)` with cached spectral data.
#[derive(Clone, Debug)]
pub struct RecoveryMap {
    pub channel: Channel,
    pub mode: RecoveryMode,
    pub rule: QuadratureRule,
    sigma: ExpFamily,
    image: ExpFamily,
}

impl RecoveryMap {
    pub fn new(sigma: &CMat, channel: Channel, mode: RecoveryMode) -> Result<Self> {
        Self::with_rule(sigma, channel, mode, beta0_rule())
    }

    pub fn with_rule(sigma: &CMat, channel: Channel, mode: RecoveryMode, rule: QuadratureRule) -> Result<Self> {
        if sigma.nrows() != channel.din() {
            return Err(Error::DimMismatch(format!("sigma dim {} vs channel input {}", sigma.nrows(), channel.din())));
        }
        let image = ExpFamily::psd(&hermitian_part(&channel.forward(sigma)?))?;
        Ok(RecoveryMap { sigma: ExpFamily::psd(sigma)?, image, channel, mode, rule })
    }

    /// `T_{B→BC}` acting on `AB` for a state of shape `[dA, dB, dC]`.
    pub fn tripartite(rho: &QuantumState, mode: RecoveryMode) -> Result<Self> {
        let [da, db, dc] = three(&rho.shape)?;
        let rho_bc = partial_trace(&rho.rho, &rho.shape, &[1, 2])?;
        let sigma = tensor(&identity(da), &rho_bc);
        Self::new(&sigma, Channel::PartialTrace { shape: vec![da, db, dc], keep: vec![0, 1] }, mode)
    }

    /// Same map integrated against `rule` in averaged mode.
    pub fn rule_replaced(self, rule: QuadratureRule) -> Self {
        RecoveryMap { rule, ..self }
    }

    /// Input dimension (the channel's output).
    pub fn din(&self) -> usize {
        self.channel.dout()
    }

    pub fn dout(&self) -> usize {
        self.channel.din()
    }

    /// `T^{[t]}(X)`.
    pub fn apply_t(&self, x: &CMat, t: f64) -> Result<CMat> {
        if x.nrows() != self.din() || x.ncols() != self.din() {
            return Err(Error::DimMismatch(format!("input {}x{} for recovery from dim {}", x.nrows(), x.ncols(), self.din())));
        }
        let a = self.image.at(c64::new(-0.5, -0.5 * t));
        let s = self.sigma.at(c64::new(0.5, 0.5 * t));
        let inner = &a * x * a.adjoint();
        Ok(&s * self.channel.adjoint(&inner)? * s.adjoint())
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        match self.mode {
            RecoveryMode::Petz => self.apply_t(x, 0.0),
            RecoveryMode::Rotated(t) => self.apply_t(x, t),
            RecoveryMode::Averaged => integrate(&self.rule, |t| self.apply_t(x, t)),
        }
    }

    /// Choi matrix of the map (Choi convention of [`crate::channels`]).
    pub fn choi(&self) -> Result<ChoiMatrix> {
        choi_of_map(self.din(), self.dout(), |x| self.apply(x))
    }
}

fn three(shape: &[usize]) -> Result<[usize; 3]> {
    match shape {
        &[a, b, c] => Ok([a, b, c]),
        _ => Err(Error::Shape(format!("expected 3 parts, got {shape:?}"))),
    }
}

pub fn petz_apply(r: &RecoveryMap, x: &CMat) -> Result<CMat> {
    r.apply(x)
}

/// Kraus family of the recovery map, extracted from its Choi matrix.
pub fn map_as_channel(r: &RecoveryMap) -> Result<KrausChannel> {
    kraus_from_choi(&r.choi()?)
}

/// `−∫ β₀(t) log F(ρ, T^{[t]}(X)) dt` for a fixed input `X`.
pub fn averaged_log_fidelity(r: &RecoveryMap, rho: &CMat, x: &CMat) -> Result<f64> {
    let sqrt_rho = eigh_unchecked(rho).pow(cr(0.5))?;
    integrate(&r.rule, |t| {
        let out = r.apply_t(x, t)?;
        Ok(-fidelity_with_sqrt(&sqrt_rho, &out).ln())
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FrReport {
    pub cmi: f64,
    pub measured: Divergence,
    pub neg_log_fidelity: f64,
    pub checks: Vec<CheckReport>,
}

impl FrReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `I(A:C|B) ≥ D_M(ρ‖T̄(ρ_AB))` and `I(A:C|B) ≥ −∫β₀ log F(ρ, T^{[t]}(ρ_AB))`.
pub fn fr_check(rho: &QuantumState, rule: &QuadratureRule, opts: MeasuredOpts, tol: f64) -> Result<FrReport> {
    let c = cmi(rho)?;
    let r = RecoveryMap::tripartite(rho, RecoveryMode::Averaged)?;
    let r = RecoveryMap { rule: rule.clone(), ..r };
    let rho_ab = partial_trace(&rho.rho, &rho.shape, &[0, 1])?;
    let recovered = hermitian_part(&r.apply(&rho_ab)?);
    let measured = measured_relative_entropy(&rho.rho, &recovered, opts)?;
    let nlf = averaged_log_fidelity(&r, &rho.rho, &rho_ab)?;
    let shape = serde_json::json!(rho.shape);
    let checks = vec![
        CheckReport::new("fr_measured", measured.value, c, tol).param("shape", shape.clone()).quad(rule),
        CheckReport::new("fr_log_fidelity", nlf, c, tol).param("shape", shape).quad(rule),
    ];
    Ok(FrReport { cmi: c, measured, neg_log_fidelity: nlf, checks })
}

#[derive(Clone, Debug, Serialize)]
pub struct DpiReport {
    pub contraction: f64,
    pub measured: Divergence,
    pub neg_log_fidelity: f64,
    pub checks: Vec<CheckReport>,
}

impl DpiReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `D(ρ‖σ) − D(E(ρ)‖E(σ)) ≥ D_M(ρ‖T̄_{σ,E}∘E(ρ))` and its per-`t` log-fidelity form.
pub fn strengthened_dpi_check(
    rho: &CMat,
    sigma: &CMat,
    e: &Channel,
    rule: &QuadratureRule,
    opts: MeasuredOpts,
    tol: f64,
) -> Result<DpiReport> {
    same_dim(rho, sigma)?;
    let full = relative_entropy(rho, sigma)?;
    if full.is_infinite() {
        let sp = eigh_unchecked(sigma);
        return Err(Error::SupportViolation(crate::entropy::outside_support(rho, &sp)));
    }
    let (er, es) = (hermitian_part(&e.forward(rho)?), hermitian_part(&e.forward(sigma)?));
    let contraction = full.value - relative_entropy(&er, &es)?.value;
    let r = RecoveryMap::with_rule(sigma, e.clone(), RecoveryMode::Averaged, rule.clone())?;
    let recovered = hermitian_part(&r.apply(&er)?);
    let measured = measured_relative_entropy(rho, &recovered, opts)?;
    let nlf = averaged_log_fidelity(&r, rho, &er)?;
    let checks = vec![
        CheckReport::new("dpi_measured", measured.value, contraction, tol).param("d", rho.nrows()).quad(rule),
        CheckReport::new("dpi_log_fidelity", nlf, contraction, tol).param("d", rho.nrows()).quad(rule),
    ];
    Ok(DpiReport { contraction, measured, neg_log_fidelity: nlf, checks })
}

/// Source of the `Λ` term in the CMI upper bound.
#[derive(Clone, Debug)]
pub enum LambdaSource {
    /// Exact `Λ_max` by covering LP; state and channel must be classical.
    Classical,
    /// Upper bound `D_max(ρ_AB‖τ_AB)` for an invariant `τ_AB`.
    Invariant(CMat),
    /// `Λ = 0` after verifying `R_{B→B}(ρ_AB) = ρ_AB`.
    ReadOnly,
}

/// `tr_C ∘ R` as a map on `B`.
fn reduced_action(r: &KrausChannel, db: usize, dc: usize, x: &CMat) -> Result<CMat> {
    partial_trace(&r.forward(x)?, &[db, dc], &[0])
}

/// `(id_A ⊗ M)(X)` for a map `M` on `B`, evaluated on matrix units of `B`.
fn on_b(x: &CMat, da: usize, db: usize, dout: usize, m: impl Fn(&CMat) -> Result<CMat>) -> Result<CMat> {
    let mut out = CMat::zeros(da * dout, da * dout);
    for i in 0..db {
        for j in 0..db {
            let img = m(&crate::channels::unit(db, i, j))?;
            for a in 0..da {
                for a2 in 0..da {
                    let v = x[(a * db + i, a2 * db + j)];
                    if v == c64::new(0.0, 0.0) {
                        continue;
                    }
                    for o in 0..dout {
                        for o2 in 0..dout {
                            out[(a * dout + o, a2 * dout + o2)] += v * img[(o, o2)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn is_diagonal(m: &CMat) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() <= 1e-12))
}

/// `D(ρ_ABC‖R(ρ_AB)) ≥ I(A:C|B) − Λ` for a recovery channel `R: B → BC`.
pub fn cmi_upper_check(rho: &QuantumState, r: &KrausChannel, source: &LambdaSource, tol: f64) -> Result<CheckReport> {
    let [da, db, dc] = three(&rho.shape)?;
    if r.din != db || r.dout != db * dc {
        return Err(Error::DimMismatch(format!("recovery {}->{} for B={db}, C={dc}", r.din, r.dout)));
    }
    let rho_ab = partial_trace(&rho.rho, &rho.shape, &[0, 1])?;
    let recovered = hermitian_part(&on_b(&rho_ab, da, db, db * dc, |x| r.forward(x))?);
    let d = relative_entropy(&rho.rho, &recovered)?.value;
    let c = cmi(rho)?;
    let reduce = |x: &CMat| on_b(x, da, db, db, |y| reduced_action(r, db, dc, y));
    let (lambda, mode) = match source {
        LambdaSource::Classical => {
            if !is_diagonal(&rho_ab) {
                return Err(Error::Param("classical Λ needs a diagonal state".into()));
            }
            let mut w = vec![vec![0.0; db]; db];
            for y in 0..db {
                let img = reduced_action(r, db, dc, &crate::channels::unit(db, y, y))?;
                if !is_diagonal(&img) {
                    return Err(Error::Param("classical Λ needs a classical channel".into()));
                }
                for (yp, row) in w.iter_mut().enumerate() {
                    row[y] = img[(yp, yp)].re.max(0.0);
                }
            }
            for y in 0..db {
                let s: f64 = (0..db).map(|yp| w[yp][y]).sum();
                for row in w.iter_mut() {
                    row[y] /= s;
                }
            }
            let p: Vec<f64> = (0..da * db).map(|i| rho_ab[(i, i)].re.max(0.0)).collect();
            let t: f64 = p.iter().sum();
            let joint = ClassicalJoint::new(vec![da, db], p.into_iter().map(|v| v / t).collect())?;
            (classical_lambda_max(&joint, &w)?, "classical")
        }
        LambdaSource::Invariant(tau) => {
            let moved = reduce(tau)?;
            let dev = crate::linalg::max_abs_diff(&moved, tau);
            if dev > TOL_INVARIANT {
                return Err(Error::InvariantViolation(dev));
            }
            (dmax(&rho_ab, tau)?, "invariant_upper_bound")
        }
        LambdaSource::ReadOnly => {
            let dev = crate::linalg::max_abs_diff(&reduce(&rho_ab)?, &rho_ab);
            if dev > TOL_INVARIANT {
                return Err(Error::InvariantViolation(dev));
            }
            (0.0, "read_only")
        }
    };
    Ok(CheckReport::new("cmi_upper", c - lambda, d, tol)
        .param("lambda_source", mode)
        .param("shape", serde_json::json!(rho.shape))
        .detail("cmi", c)
        .detail("lambda", lambda))
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkovVerdict {
    pub cmi: f64,
    pub markov: bool,
    /// `(t, ‖T^{[t]}(ρ_AB) − ρ_ABC‖₁)`, filled when `markov`.
    pub recovery_errors: Vec<(f64, f64)>,
    /// `‖T^{[0]}(ρ_AB) − ρ_ABC‖₁ ≤ 10√tol`; `None` when not Markov.
    pub recovered: Option<bool>,
}

impl MarkovVerdict {
    pub fn pass(&self) -> bool {
        self.markov && self.recovered == Some(true)
    }
}

/// Markov iff `I(A:C|B) ≤ tol`; Markov states must also be recovered by the Petz map.
pub fn markov_verify(rho: &QuantumState, tol: f64) -> Result<MarkovVerdict> {
    let c = cmi(rho)?;
    let markov = c <= tol;
    let mut recovery_errors = Vec::new();
    let mut recovered = None;
    if markov {
        let rho_ab = partial_trace(&rho.rho, &rho.shape, &[0, 1])?;
        let r = RecoveryMap::tripartite(rho, RecoveryMode::Petz)?;
        for t in [0.0, 1.0, -1.0] {
            let err = trace_norm_h(&hermitian_part(&(r.apply_t(&rho_ab, t)? - &rho.rho)));
            recovery_errors.push((t, err));
        }
        recovered = Some(recovery_errors[0].1 <= 10.0 * tol.sqrt());
    }
    Ok(MarkovVerdict { cmi: c, markov, recovery_errors, recovered })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionVerdict {
    pub off_block: f64,
    pub factorization: f64,
    pub weights: Vec<f64>,
    pub pass: bool,
}

/// Verifies `ρ = ⊕_j P(j) ρ_{A b_L^j} ⊗ ρ_{b_R^j C}` after rotating `B` by `u_b`
/// (columns are the new basis), blocks laid out consecutively.
pub fn markov_decomposition_verify(rho: &QuantumState, blocks: &[(usize, usize)], u_b: &CMat) -> Result<DecompositionVerdict> {
    let [da, db, dc] = three(&rho.shape)?;
    if blocks.iter().map(|(l, r)| l * r).sum::<usize>() != db {
        return Err(Error::Shape(format!("blocks {blocks:?} do not tile dim B = {db}")));
    }
    if u_b.nrows() != db || u_b.ncols() != db {
        return Err(Error::Shape(format!("basis unitary must be {db}x{db}")));
    }
    let u = tensor(&tensor(&identity(da), u_b), &identity(dc));
    let rot = u.adjoint() * &rho.rho * &u;
    let mut label = vec![0usize; db];
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut off = 0;
    for (j, (l, r)) in blocks.iter().enumerate() {
        offsets.push(off);
        label[off..off + l * r].fill(j);
        off += l * r;
    }
    let idx = |a: usize, b: usize, c: usize| (a * db + b) * dc + c;
    let mut off_block = 0.0f64;
    for a in 0..da {
        for b in 0..db {
            for c in 0..dc {
                for a2 in 0..da {
                    for b2 in 0..db {
                        if label[b] == label[b2] {
                            continue;
                        }
                        for c2 in 0..dc {
                            off_block = off_block.max(rot[(idx(a, b, c), idx(a2, b2, c2))].norm());
                        }
                    }
                }
            }
        }
    }
    let mut factorization = 0.0f64;
    let mut weights = Vec::with_capacity(blocks.len());
    for (j, &(l, r)) in blocks.iter().enumerate() {
        let w = l * r;
        let n = da * w * dc;
        let pos = |k: usize| {
            let (a, rest) = (k / (w * dc), k % (w * dc));
            idx(a, offsets[j] + rest / dc, rest % dc)
        };
        let block = CMat::from_fn(n, n, |i, k| rot[(pos(i), pos(k))]);
        let p = block.trace().re;
        weights.push(p);
        if p <= 1e-14 {
            factorization = factorization.max(trace_norm_h(&hermitian_part(&block)));
            continue;
        }
        let shape = [da, l, r, dc];
        let left = partial_trace(&block, &shape, &[0, 1])?;
        let right = partial_trace(&block, &shape, &[2, 3])?;
        let prod = tensor(&left, &right) / cr(p);
        factorization = factorization.max(trace_norm_h(&hermitian_part(&(block - prod))));
    }
    let pass = off_block <= 1e-8 && factorization <= 1e-8;
    Ok(DecompositionVerdict { off_block, factorization, weights, pass })
}

/// `I(A:C|B)_ρ ≤ D(ρ‖μ)` for a Markov `μ`.
pub fn winter_bound_check(rho: &QuantumState, mu: &QuantumState, tol: f64) -> Result<CheckReport> {
    if rho.shape != mu.shape {
        return Err(Error::Shape(format!("{:?} vs {:?}", rho.shape, mu.shape)));
    }
    let v = markov_verify(mu, TOL_INVARIANT)?;
    if !v.markov {
        return Err(Error::NotMarkov(v.cmi));
    }
    let c = cmi(rho)?;
    let d = relative_entropy(&rho.rho, &mu.rho)?.value;
    Ok(CheckReport::new("winter_bound", c, d, tol).param("shape", serde_json::json!(rho.shape)))
}

/// Weighted family of bipartite states with optional second arguments `σ_x`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub weights: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub sigmas: Option<Vec<CMat>>,
}

/// Strengthened concavity of `H(A|B)` and, when `σ_x` are given, strengthened
/// joint convexity of `D`.
pub fn ensemble_checks(ens: &Ensemble, opts: MeasuredOpts, tol: f64) -> Result<Vec<CheckReport>> {
    let n = ens.states.len();
    if n == 0 || ens.weights.len() != n {
        return Err(Error::Param("ensemble needs matching weights and states".into()));
    }
    let shape = ens.states[0].shape.clone();
    if shape.len() != 2 || ens.states.iter().any(|s| s.shape != shape) {
        return Err(Error::Shape(format!("ensemble members must share a bipartite shape, got {shape:?}")));
    }
    let total: f64 = ens.weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 || ens.weights.iter().any(|&w| w < 0.0) {
        return Err(Error::Param(format!("ensemble weights sum to {total}")));
    }
    let d: usize = shape.iter().product();
    let mix = |ms: &mut dyn Iterator<Item = &CMat>| -> CMat {
        ms.zip(&ens.weights).fold(CMat::zeros(d, d), |acc, (m, &w)| acc + m * cr(w))
    };
    let bar = mix(&mut ens.states.iter().map(|s| &s.rho));
    let bar_state = QuantumState { rho: bar.clone(), shape: shape.clone() };
    let mut rhs = conditional_entropy(&bar_state)?;
    let r = RecoveryMap::new(&bar, Channel::PartialTrace { shape: shape.clone(), keep: vec![1] }, RecoveryMode::Averaged)?;
    let mut lhs = 0.0;
    for (s, &w) in ens.states.iter().zip(&ens.weights) {
        rhs -= w * conditional_entropy(s)?;
        if w == 0.0 {
            continue;
        }
        let rb = partial_trace(&s.rho, &shape, &[1])?;
        let rec = hermitian_part(&r.apply(&rb)?);
        lhs += w * measured_relative_entropy(&s.rho, &rec, opts)?.value;
    }
    let mut out = vec![CheckReport::new("concavity_conditional_entropy", lhs, rhs, tol).param("members", n)];

    if let Some(sigmas) = &ens.sigmas {
        if sigmas.len() != n {
            return Err(Error::Param("one sigma per member required".into()));
        }
        let mut rhs = 0.0;
        for ((s, sg), &w) in ens.states.iter().zip(sigmas).zip(&ens.weights) {
            if w > 0.0 {
                rhs += w * relative_entropy(&s.rho, sg)?.value;
            }
        }
        let sbar = mix(&mut sigmas.iter());
        rhs -= relative_entropy(&bar, &sbar)?.value;
        let cq = |ms: &[&CMat]| -> CMat {
            let mut m = CMat::zeros(n * d, n * d);
            for (x, (a, &w)) in ms.iter().zip(&ens.weights).enumerate() {
                m.view_mut((x * d, x * d), (d, d)).copy_from(&(*a * cr(w)));
            }
            m
        };
        let rho_xa = cq(&ens.states.iter().map(|s| &s.rho).collect::<Vec<_>>());
        let sigma_xa = cq(&sigmas.iter().collect::<Vec<_>>());
        let r = RecoveryMap::new(&sigma_xa, Channel::PartialTrace { shape: vec![n, d], keep: vec![1] }, RecoveryMode::Averaged)?;
        let rec = hermitian_part(&r.apply(&bar)?);
        let lhs = measured_relative_entropy(&rho_xa, &rec, opts)?.value;
        out.push(CheckReport::new("joint_convexity_relative_entropy", lhs, rhs, tol).param("members", n));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::is_tpcp;
    use crate::generators::{random_channel, random_density, random_density_shaped, random_markov_joint, Stream};
    use crate::linalg::{ket, projector, tensor_all};

    fn ghz() -> QuantumState {
        let v = (ket(8, 0) + ket(8, 7)) * cr(std::f64::consts::FRAC_1_SQRT_2);
        QuantumState::new(projector(&v), vec![2, 2, 2]).unwrap()
    }

    #[test]
    fn product_state_is_recovered() {
        let mut s = Stream::new(1, 0);
        let parts: Vec<CMat> = [2, 3, 2].iter().map(|&d| random_density(d, d, &mut s).unwrap().rho).collect();
        let rho = QuantumState::new(tensor_all(&parts), vec![2, 3, 2]).unwrap();
        let rho_ab = partial_trace(&rho.rho, &rho.shape, &[0, 1]).unwrap();
        for mode in [RecoveryMode::Petz, RecoveryMode::Rotated(0.7), RecoveryMode::Averaged] {
            let r = RecoveryMap::tripartite(&rho, mode).unwrap();
            assert!(crate::linalg::max_abs_diff(&r.apply(&rho_ab).unwrap(), &rho.rho) < 1e-12);
        }
    }

    #[test]
    fn classical_markov_chain_is_recovered() {
        let mut s = Stream::new(2, 0);
        let rho = random_markov_joint([2, 3, 2], &mut s).unwrap().to_state();
        let v = markov_verify(&rho, 1e-10).unwrap();
        assert!(v.pass());
        assert!(v.recovery_errors.iter().all(|&(_, e)| e <= 1e-10));
    }

    #[test]
    fn ghz_is_not_markov() {
        let v = markov_verify(&ghz(), 1e-9).unwrap();
        assert!(!v.markov);
        assert!((v.cmi - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sigma_is_recovered_and_map_is_tpcp() {
        let mut s = Stream::new(3, 0);
        let sigma = random_density(3, 3, &mut s).unwrap().rho;
        let e = random_channel(3, 2, 2, &mut s).unwrap();
        let es = e.forward(&sigma).unwrap();
        for mode in [RecoveryMode::Petz, RecoveryMode::Rotated(-1.3), RecoveryMode::Averaged] {
            let r = RecoveryMap::new(&sigma, Channel::Kraus(e.clone()), mode).unwrap();
            assert!(crate::linalg::max_abs_diff(&r.apply(&es).unwrap(), &sigma) < 1e-9);
            assert!(is_tpcp(&map_as_channel(&r).unwrap(), 1e-9).pass());
        }
    }

    #[test]
    fn identity_channel_recovers_identity() {
        let mut s = Stream::new(4, 0);
        let sigma = random_density(3, 3, &mut s).unwrap().rho;
        let x = random_density(3, 3, &mut s).unwrap().rho;
        let r = RecoveryMap::new(&sigma, Channel::Kraus(KrausChannel::identity(3)), RecoveryMode::Averaged).unwrap();
        assert!(crate::linalg::max_abs_diff(&r.apply(&x).unwrap(), &x) < 1e-9);
    }

    #[test]
    fn ghz_recovery_bounds() {
        let rep = fr_check(&ghz(), &beta0_rule(), MeasuredOpts::default(), TOL_RECOVERY).unwrap();
        assert!((rep.cmi - 2f64.ln()).abs() < 1e-12);
        assert!(rep.pass(), "{:?}", rep.checks);
    }

    #[test]
    fn random_fr_instance() {
        let mut s = Stream::new(5, 0);
        let rho = random_density_shaped(&[2, 3, 2], 12, &mut s).unwrap();
        let rep = fr_check(&rho, &beta0_rule(), MeasuredOpts::default(), TOL_RECOVERY).unwrap();
        assert!(rep.pass(), "{:?}", rep.checks);
    }

    #[test]
    fn winter_bound_on_pinched_ghz() {
        let g = ghz();
        let pb = tensor_all(&[identity(2), diag_proj(0), identity(2)]);
        let pb1 = tensor_all(&[identity(2), diag_proj(1), identity(2)]);
        let mu = &pb * &g.rho * &pb + &pb1 * &g.rho * &pb1;
        let mu = QuantumState::new(mu, vec![2, 2, 2]).unwrap();
        let rep = winter_bound_check(&g, &mu, 1e-9).unwrap();
        assert!(rep.pass);
        assert!((rep.rhs - 2f64.ln()).abs() < 1e-9);
    }

    fn diag_proj(i: usize) -> CMat {
        projector(&ket(2, i))
    }
}
