//! Completely positive maps as Kraus families with explicit input/output dims.
//!
//! Choi convention: `τ_E = (1/din) Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j|`, output factor first,
//! so `tr ω E(σ) = din · tr τ_E (ω ⊗ σᵀ)`.

use serde::Serialize;

use crate::linalg::{c64, cr, eigh_unchecked, herm_defect, identity, CMat};
use crate::{Error, Result};

/// Relative floor below which Choi eigenvalues are discarded.
pub const KRAUS_FLOOR: f64 = 1e-12;
pub const TP_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct KrausChannel {
    pub din: usize,
    pub dout: usize,
    pub kraus: Vec<CMat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Adjoint,
}

#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    pub matrix: CMat,
    pub din: usize,
    pub dout: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TpcpVerdict {
    pub trace_preserving: bool,
    pub completely_positive: bool,
    pub tp_defect: f64,
    pub choi_min_eig: f64,
}

impl TpcpVerdict {
    pub fn pass(&self) -> bool {
        self.trace_preserving && self.completely_positive
    }
}

impl KrausChannel {
    pub fn new(din: usize, dout: usize, kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Param("empty Kraus family".into()));
        }
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::DimMismatch(format!(
                    "Kraus operator {}x{} for channel {din}->{dout}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        Ok(KrausChannel { din, dout, kraus })
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel { din: d, dout: d, kraus: vec![identity(d)] }
    }

    /// Unitary conjugation `X ↦ U X U†`.
    pub fn unitary(u: CMat) -> Self {
        let d = u.nrows();
        KrausChannel { din: d, dout: d, kraus: vec![u] }
    }

    pub fn apply(&self, x: &CMat, mode: Mode) -> Result<CMat> {
        let (din, dout) = match mode {
            Mode::Forward => (self.din, self.dout),
            Mode::Adjoint => (self.dout, self.din),
        };
        if x.nrows() != din || x.ncols() != din {
            return Err(Error::DimMismatch(format!("input {}x{} for dim {din}", x.nrows(), x.ncols())));
        }
        let mut out = CMat::zeros(dout, dout);
        for k in &self.kraus {
            match mode {
                Mode::Forward => out += k * x * k.adjoint(),
                Mode::Adjoint => out += k.adjoint() * x * k,
            }
        }
        Ok(out)
    }

    pub fn forward(&self, x: &CMat) -> Result<CMat> {
        self.apply(x, Mode::Forward)
    }

    pub fn adjoint(&self, y: &CMat) -> Result<CMat> {
        self.apply(y, Mode::Adjoint)
    }

    /// `Σ E†E − id`, measured in Frobenius norm.
    pub fn tp_defect(&self) -> f64 {
        let mut s = CMat::zeros(self.din, self.din);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        (s - identity(self.din)).norm()
    }

    /// `E ⊗ id_d`.
    pub fn tensor_identity(&self, d: usize) -> KrausChannel {
        let id = identity(d);
        KrausChannel {
            din: self.din * d,
            dout: self.dout * d,
            kraus: self.kraus.iter().map(|k| k.kronecker(&id)).collect(),
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.dout != self.din {
            return Err(Error::DimMismatch(format!("{} -> {}", first.dout, self.din)));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Ok(KrausChannel { din: first.din, dout: self.dout, kraus })
    }
}

/// Matrix unit `|i⟩⟨j|`.
pub fn unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = cr(1.0);
    m
}

/// Choi matrix of an arbitrary linear map given by its action on matrix units.
pub fn choi_of_map(din: usize, dout: usize, map: impl Fn(&CMat) -> Result<CMat>) -> Result<ChoiMatrix> {
    let mut c = CMat::zeros(dout * din, dout * din);
    let s = cr(1.0 / din as f64);
    for i in 0..din {
        for j in 0..din {
            let img = map(&unit(din, i, j))?;
            if img.nrows() != dout {
                return Err(Error::DimMismatch(format!("map output {} != {dout}", img.nrows())));
            }
            for o in 0..dout {
                for p in 0..dout {
                    c[(o * din + i, p * din + j)] = img[(o, p)] * s;
                }
            }
        }
    }
    Ok(ChoiMatrix { matrix: c, din, dout })
}

pub fn choi(e: &KrausChannel) -> ChoiMatrix {
    choi_of_map(e.din, e.dout, |x| e.forward(x)).expect("dims are consistent")
}

impl ChoiMatrix {
    pub fn min_eig(&self) -> f64 {
        eigh_unchecked(&self.matrix).values.last().copied().unwrap_or(0.0)
    }

    /// Applies the represented map: `E(X)_{op} = din Σ_ij τ[(o,i),(p,j)] X_ij`.
    pub fn apply(&self, x: &CMat) -> CMat {
        let (din, dout) = (self.din, self.dout);
        CMat::from_fn(dout, dout, |o, p| {
            let mut acc = c64::new(0.0, 0.0);
            for i in 0..din {
                for j in 0..din {
                    acc += self.matrix[(o * din + i, p * din + j)] * x[(i, j)];
                }
            }
            acc * din as f64
        })
    }

    /// `tr_out τ`.
    pub fn input_marginal(&self) -> CMat {
        let (din, dout) = (self.din, self.dout);
        CMat::from_fn(din, din, |i, j| (0..dout).map(|o| self.matrix[(o * din + i, o * din + j)]).sum())
    }
}

/// Canonical Kraus family from the Choi eigendecomposition.
pub fn kraus_from_choi(c: &ChoiMatrix) -> Result<KrausChannel> {
    let scaled = &c.matrix * cr(c.din as f64);
    if herm_defect(&scaled) > 1e-9 * scaled.norm().max(1.0) {
        return Err(Error::ChoiNotPsd(f64::NAN));
    }
    let sp = eigh_unchecked(&scaled);
    let top = sp.values.first().copied().unwrap_or(0.0).max(0.0);
    let min = sp.values.last().copied().unwrap_or(0.0);
    if min < -1e-9 * top.max(1.0) {
        return Err(Error::ChoiNotPsd(min / c.din as f64));
    }
    let mut kraus = Vec::new();
    for (k, &l) in sp.values.iter().enumerate() {
        if l <= KRAUS_FLOOR * top {
            continue;
        }
        let s = l.sqrt();
        kraus.push(CMat::from_fn(c.dout, c.din, |o, i| sp.vectors[(o * c.din + i, k)] * s));
    }
    if kraus.is_empty() {
        kraus.push(CMat::zeros(c.dout, c.din));
    }
    Ok(KrausChannel { din: c.din, dout: c.dout, kraus })
}

/// Checks `Σ E†E = id` and Choi positivity.
pub fn is_tpcp(e: &KrausChannel, tol: f64) -> TpcpVerdict {
    let tp_defect = e.tp_defect();
    let choi_min_eig = choi(e).min_eig();
    TpcpVerdict {
        trace_preserving: tp_defect <= tol,
        completely_positive: choi_min_eig >= -tol,
        tp_defect,
        choi_min_eig,
    }
}

/// TPCP verdict for a map known only through its Choi matrix.
pub fn is_tpcp_choi(c: &ChoiMatrix, tol: f64) -> TpcpVerdict {
    let marg = c.input_marginal() * cr(c.din as f64);
    let tp_defect = (marg - identity(c.din)).norm();
    let choi_min_eig = c.min_eig();
    TpcpVerdict {
        trace_preserving: tp_defect <= tol,
        completely_positive: choi_min_eig >= -tol,
        tp_defect,
        choi_min_eig,
    }
}

/// Stinespring isometry `V = Σ_k K_k ⊗ |k⟩`, output ordered as (out, env).
pub fn stinespring(e: &KrausChannel) -> Result<CMat> {
    let v = is_tpcp(e, TP_TOL);
    if !v.pass() {
        return Err(Error::NotTpcp(format!("tp defect {:e}, choi min {:e}", v.tp_defect, v.choi_min_eig)));
    }
    let r = e.kraus.len();
    Ok(CMat::from_fn(e.dout * r, e.din, |row, i| e.kraus[row % r][(row / r, i)]))
}

/// Channel `diag(p) ↦ diag(Wp)` for a column-stochastic `W[(y', y)]`.
pub fn classical_channel(w: &[Vec<f64>]) -> Result<KrausChannel> {
    check_stochastic(w)?;
    let dout = w.len();
    let din = w[0].len();
    let mut kraus = Vec::new();
    for (yp, row) in w.iter().enumerate() {
        for (y, &p) in row.iter().enumerate() {
            if p > 0.0 {
                let mut k = CMat::zeros(dout, din);
                k[(yp, y)] = cr(p.sqrt());
                kraus.push(k);
            }
        }
    }
    Ok(KrausChannel { din, dout, kraus })
}

/// Column-stochastic check: `W[y'][y] ≥ 0`, `Σ_{y'} W[y'][y] = 1` within 1e-12.
pub fn check_stochastic(w: &[Vec<f64>]) -> Result<()> {
    if w.is_empty() || w[0].is_empty() {
        return Err(Error::NotStochastic("empty matrix".into()));
    }
    let din = w[0].len();
    if w.iter().any(|r| r.len() != din) {
        return Err(Error::NotStochastic("ragged rows".into()));
    }
    for y in 0..din {
        let mut s = 0.0;
        for row in w {
            if !(row[y] >= 0.0) {
                return Err(Error::NotStochastic(format!("negative entry in column {y}")));
            }
            s += row[y];
        }
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::NotStochastic(format!("column {y} sums to {s}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_map_is_not_cp() {
        let c = choi_of_map(2, 2, |x| Ok(x.transpose())).unwrap();
        assert!((c.min_eig() + 0.5).abs() < 1e-12);
        assert!(matches!(kraus_from_choi(&c), Err(Error::ChoiNotPsd(_))));
    }

    #[test]
    fn classical_channel_rejects_bad_columns() {
        assert!(classical_channel(&[vec![0.5, 1.0], vec![0.6, 0.0]]).is_err());
        assert!(classical_channel(&[vec![-0.1, 1.0], vec![1.1, 0.0]]).is_err());
    }
}
