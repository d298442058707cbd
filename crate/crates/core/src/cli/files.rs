//! JSON state and report files.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs; channels are
//! arrays of Kraus matrices with `dims = [din, dout]`; classical joints are
//! nested real arrays of depth `dims.len()`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channels::{is_tpcp, KrausChannel, TP_TOL};
use crate::entropy::ClassicalJoint;
use crate::linalg::{c64, herm_defect, CMat, QuantumState, HERM_TOL};
use crate::quad::QuadMeta;
use crate::traceineq::CheckReport;
use crate::{Error, Result};

pub const REPORT_SCHEMA: &str = "qml-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Density,
    Hermitian,
    Channel,
    Classical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub kind: Kind,
    pub dims: Vec<usize>,
    pub data: Value,
}

/// Validated contents of a [`StateFile`].
#[derive(Clone, Debug)]
pub enum Instance {
    Density(QuantumState),
    Hermitian(CMat),
    Channel(KrausChannel),
    Classical(ClassicalJoint),
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::Density(_) => Kind::Density,
            Instance::Hermitian(_) => Kind::Hermitian,
            Instance::Channel(_) => Kind::Channel,
            Instance::Classical(_) => Kind::Classical,
        }
    }

    /// Matrix view of densities, Hermitian operators and (diagonally) classical joints.
    pub fn matrix(&self) -> Result<CMat> {
        match self {
            Instance::Density(s) => Ok(s.rho.clone()),
            Instance::Hermitian(h) => Ok(h.clone()),
            Instance::Classical(c) => Ok(c.to_state().rho),
            Instance::Channel(_) => Err(Error::Input("expected a matrix, got a channel".into())),
        }
    }

    pub fn state(&self) -> Result<QuantumState> {
        match self {
            Instance::Density(s) => Ok(s.clone()),
            Instance::Classical(c) => Ok(c.to_state()),
            other => Err(Error::Input(format!("expected a density, got {:?}", other.kind()))),
        }
    }

    pub fn channel(&self) -> Result<KrausChannel> {
        match self {
            Instance::Channel(k) => Ok(k.clone()),
            other => Err(Error::Input(format!("expected a channel, got {:?}", other.kind()))),
        }
    }
}

fn matrix_to_value(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn value_to_matrix(v: &Value, rows: usize, cols: usize) -> Result<CMat> {
    let bad = |what: &str| Error::Input(format!("matrix data: {what}"));
    let rs = v.as_array().ok_or_else(|| bad("expected an array of rows"))?;
    if rs.len() != rows {
        return Err(bad(&format!("expected {rows} rows, got {}", rs.len())));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, r) in rs.iter().enumerate() {
        let cs = r.as_array().ok_or_else(|| bad(&format!("row {i} is not an array")))?;
        if cs.len() != cols {
            return Err(bad(&format!("row {i} has {} entries, expected {cols}", cs.len())));
        }
        for (j, z) in cs.iter().enumerate() {
            let pair = z.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad(&format!("entry ({i},{j}) is not [re, im]")))?;
            let re = pair[0].as_f64().ok_or_else(|| bad(&format!("entry ({i},{j}) real part")))?;
            let im = pair[1].as_f64().ok_or_else(|| bad(&format!("entry ({i},{j}) imaginary part")))?;
            m[(i, j)] = c64::new(re, im);
        }
    }
    Ok(m)
}

fn flatten_real(v: &Value, dims: &[usize], out: &mut Vec<f64>) -> Result<()> {
    match dims.split_first() {
        None => out.push(v.as_f64().ok_or_else(|| Error::Input("classical data: expected a number".into()))?),
        Some((&d, rest)) => {
            let a = v.as_array().filter(|a| a.len() == d).ok_or_else(|| {
                Error::Input(format!("classical data: expected an array of length {d}"))
            })?;
            for x in a {
                flatten_real(x, rest, out)?;
            }
        }
    }
    Ok(())
}

fn nest_real(p: &[f64], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => serde_json::json!(p[0]),
        Some((&d, rest)) => {
            let stride: usize = rest.iter().product();
            Value::Array((0..d).map(|i| nest_real(&p[i * stride..(i + 1) * stride], rest)).collect())
        }
    }
}

impl StateFile {
    /// Parses and validates against the kind-specific checks.
    pub fn validate(&self) -> Result<Instance> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Shape(format!("dims {:?}", self.dims)));
        }
        match self.kind {
            Kind::Density => {
                let d: usize = self.dims.iter().product();
                let m = value_to_matrix(&self.data, d, d)?;
                Ok(Instance::Density(QuantumState::new(m, self.dims.clone())?))
            }
            Kind::Hermitian => {
                let d: usize = self.dims.iter().product();
                let m = value_to_matrix(&self.data, d, d)?;
                let defect = herm_defect(&m);
                if defect > HERM_TOL * m.norm().max(1.0) {
                    return Err(Error::NotHermitian(defect));
                }
                Ok(Instance::Hermitian(m))
            }
            Kind::Channel => {
                let &[din, dout] = self.dims.as_slice() else {
                    return Err(Error::Shape(format!("channel dims must be [din, dout], got {:?}", self.dims)));
                };
                let ks = self.data.as_array().ok_or_else(|| Error::Input("channel data: expected an array of Kraus matrices".into()))?;
                let kraus = ks.iter().map(|k| value_to_matrix(k, dout, din)).collect::<Result<Vec<_>>>()?;
                let ch = KrausChannel::new(din, dout, kraus)?;
                let v = is_tpcp(&ch, TP_TOL);
                if !v.pass() {
                    return Err(Error::NotTpcp(format!("trace-preservation defect {:e}", v.tp_defect)));
                }
                Ok(Instance::Channel(ch))
            }
            Kind::Classical => {
                let mut p = Vec::new();
                flatten_real(&self.data, &self.dims, &mut p)?;
                Ok(Instance::Classical(ClassicalJoint::new(self.dims.clone(), p)?))
            }
        }
    }

    /// Canonical file for an instance.
    pub fn from_instance(inst: &Instance) -> Self {
        match inst {
            Instance::Density(s) => StateFile { kind: Kind::Density, dims: s.shape.clone(), data: matrix_to_value(&s.rho) },
            Instance::Hermitian(h) => StateFile { kind: Kind::Hermitian, dims: vec![h.nrows()], data: matrix_to_value(h) },
            Instance::Channel(k) => StateFile {
                kind: Kind::Channel,
                dims: vec![k.din, k.dout],
                data: Value::Array(k.kraus.iter().map(matrix_to_value).collect()),
            },
            Instance::Classical(c) => StateFile { kind: Kind::Classical, dims: c.shape.clone(), data: nest_real(&c.p, &c.shape) },
        }
    }
}

/// Reads a file holding one state object or an array of them.
pub fn parse_state(path: &Path) -> Result<Vec<Instance>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_state_str(&text).map_err(|e| match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_state_str(text: &str) -> Result<Vec<Instance>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    let files: Vec<StateFile> = match v {
        Value::Array(_) => serde_json::from_value(v),
        _ => serde_json::from_value(v).map(|f| vec![f]),
    }
    .map_err(|e| Error::Input(e.to_string()))?;
    files.iter().map(StateFile::validate).collect()
}

pub fn emit_state(insts: &[Instance]) -> String {
    let files: Vec<StateFile> = insts.iter().map(StateFile::from_instance).collect();
    let v = if files.len() == 1 { serde_json::to_value(&files[0]) } else { serde_json::to_value(&files) };
    serde_json::to_string_pretty(&v.expect("state files serialize")).expect("values serialize")
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Smallest margin over all checks; `null` when there are none.
    pub worst_margin: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Meta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadMeta>,
    pub log_base: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportFile {
    pub schema: &'static str,
    pub command: Vec<String>,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    pub meta: Meta,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

impl ReportFile {
    pub fn new(command: Vec<String>, checks: Vec<CheckReport>, meta: Meta, data: Value) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let worst_margin = checks.iter().map(|c| c.margin).reduce(f64::min);
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed, worst_margin };
        ReportFile { schema: REPORT_SCHEMA, command, checks, summary, meta, data }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}
