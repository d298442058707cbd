//! Seeded random trials for each inequality family.
//!
//! Trial `k` draws from `Stream::new(seed, k)`, so any failing trial can be
//! replayed alone.

use clap::ValueEnum;

use super::{GenKind, Global};
use crate::channels::classical_channel;
use crate::entropy::{self, measured_qubit_oracle, MeasuredOpts};
use crate::generators::{
    random_channel, random_classical, random_density, random_density_shaped, random_hermitian, random_markov_joint,
    random_pd, random_stochastic, Stream,
};
use crate::linalg::{trace_re, CMat};
use crate::recovery::{self, Channel, LambdaSource};
use crate::traceineq::{self as ti, CheckReport};
use crate::{Error, Result};

use super::files::Instance;

/// Agreement required between the measured-divergence optimizer and the qubit grid oracle.
pub const QUBIT_ORACLE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Gt2,
    GtMulti,
    Alt2,
    LogTrace,
    Fr,
    Dpi,
    Measured,
    CmiUpper,
    Markov,
}

impl Suite {
    pub fn uses_rule(self) -> bool {
        matches!(self, Suite::GtMulti | Suite::LogTrace | Suite::Fr | Suite::Dpi)
    }

    fn default_dims(self) -> Vec<usize> {
        match self {
            Suite::Gt2 | Suite::GtMulti | Suite::Alt2 | Suite::LogTrace | Suite::Dpi => vec![3],
            Suite::Measured => vec![2],
            Suite::Fr | Suite::CmiUpper | Suite::Markov => vec![2, 2, 2],
        }
    }
}

fn normalized(m: CMat) -> CMat {
    let t = trace_re(&m);
    m / crate::linalg::cr(t)
}

fn one_dim(dims: &[usize], suite: Suite) -> Result<usize> {
    match dims {
        [d] if *d >= 1 => Ok(*d),
        _ => Err(Error::Param(format!("{suite:?} takes a single dimension, got {dims:?}"))),
    }
}

fn three_dims(dims: &[usize], suite: Suite) -> Result<[usize; 3]> {
    match dims {
        &[a, b, c] if a * b * c >= 1 => Ok([a, b, c]),
        _ => Err(Error::Param(format!("{suite:?} takes three dimensions, got {dims:?}"))),
    }
}

/// Runs `g.trials` trials and returns every check produced.
pub fn run_suite(suite: Suite, g: &Global, dims: Option<&[usize]>) -> Result<Vec<CheckReport>> {
    let dims = dims.map_or_else(|| suite.default_dims(), <[usize]>::to_vec);
    let rule = if suite.uses_rule() { Some(g.rule()?) } else { None };
    let mut out = Vec::new();
    for k in 0..g.trials {
        let mut s = Stream::new(g.seed, k as u64);
        let checks = trial(suite, g, &dims, rule.as_ref(), &mut s)?;
        out.extend(checks.into_iter().map(|c| c.param("trial", k)));
    }
    Ok(out)
}

fn trial(suite: Suite, g: &Global, dims: &[usize], rule: Option<&crate::quad::QuadratureRule>, s: &mut Stream) -> Result<Vec<CheckReport>> {
    let exact = g.tol.unwrap_or(ti::TOL_EXACT);
    let quad_tol = g.tol.unwrap_or(ti::TOL_QUAD);
    let rec_tol = g.tol.unwrap_or(recovery::TOL_RECOVERY);
    let rule = || rule.expect("rule built for quadrature suites");
    Ok(match suite {
        Suite::Gt2 => {
            let d = one_dim(dims, suite)?;
            let (h1, h2) = (random_hermitian(d, s), random_hermitian(d, s));
            vec![ti::check_gt2(&h1, &h2, exact)?, ti::check_peierls(&h1, &h2, exact)?]
        }
        Suite::GtMulti => {
            let d = one_dim(dims, suite)?;
            let n = s.range(2, 4);
            let hs: Vec<CMat> = (0..n).map(|_| random_hermitian(d, s)).collect();
            let p = 0.5 + 2.5 * s.uniform();
            vec![ti::check_gt_multi(&hs, p, rule(), quad_tol)?]
        }
        Suite::Alt2 => {
            let d = one_dim(dims, suite)?;
            let (b1, b2) = (random_pd(d, s), random_pd(d, s));
            let q = 0.25 + 2.0 * s.uniform();
            let r = 0.05 + 1.9 * s.uniform();
            vec![ti::check_alt2(&b1, &b2, q, r, exact)?]
        }
        Suite::LogTrace => {
            let d = one_dim(dims, suite)?;
            let b1 = normalized(random_pd(d, s));
            let bs = vec![b1.clone(), random_pd(d, s), random_pd(d, s)];
            let p = 0.05 + 1.95 * s.uniform();
            vec![
                ti::check_log_trace2(&bs[0], &bs[1], p, exact)?,
                ti::check_log_trace_multi(&bs, 1.0, rule(), quad_tol)?,
            ]
        }
        Suite::Fr => {
            let shape = three_dims(dims, suite)?;
            let d: usize = shape.iter().product();
            let rank = s.range(1, d);
            let rho = random_density_shaped(&shape, rank, s)?;
            recovery::fr_check(&rho, rule(), MeasuredOpts::default(), rec_tol)?.checks
        }
        Suite::Dpi => {
            let d = one_dim(dims, suite)?;
            let rank = s.range(1, d);
            let rho = random_density(d, rank, s)?;
            let sigma = random_density(d, d, s)?;
            let dout = s.range(2, d.max(2));
            let e = random_channel(d, dout, s.range(d.div_ceil(dout), d * dout), s)?;
            let rep = recovery::strengthened_dpi_check(
                &rho.rho,
                &sigma.rho,
                &Channel::Kraus(e),
                rule(),
                MeasuredOpts::default(),
                rec_tol,
            )?;
            rep.checks
        }
        Suite::Measured => {
            let d = one_dim(dims, suite)?;
            let rho = random_density(d, s.range(1, d), s)?;
            let sigma = random_density(d, d, s)?;
            let m = entropy::measured_relative_entropy(&rho.rho, &sigma.rho, MeasuredOpts::default())?;
            let full = entropy::relative_entropy(&rho.rho, &sigma.rho)?;
            let mut checks = vec![CheckReport::new("measured_le_umegaki", m.value, full.value, exact)];
            if d == 2 {
                let oracle = measured_qubit_oracle(&rho.rho, &sigma.rho, 200)?;
                let gap = (m.value - oracle).abs();
                checks.push(
                    CheckReport::new("measured_qubit_oracle", m.value, oracle, QUBIT_ORACLE_TOL)
                        .with_margin(-gap)
                        .detail("oracle", oracle),
                );
            }
            checks
        }
        Suite::CmiUpper => {
            let [da, db, dc] = three_dims(dims, suite)?;
            let rho = random_classical(&[da, db, dc], s)?.to_state();
            let r = classical_channel(&random_stochastic(db * dc, db, s))?;
            vec![recovery::cmi_upper_check(&rho, &r, &LambdaSource::Classical, rec_tol)?]
        }
        Suite::Markov => {
            let shape = three_dims(dims, suite)?;
            let rho = random_markov_joint(shape, s)?.to_state();
            let tol = g.tol.unwrap_or(recovery::TOL_INVARIANT);
            let v = recovery::markov_verify(&rho, tol)?;
            let err = v.recovery_errors.first().map_or(f64::INFINITY, |e| e.1);
            vec![
                CheckReport::new("markov_cmi", v.cmi, tol, 0.0),
                CheckReport::new("markov_petz_recovery", err, 10.0 * tol.sqrt(), 0.0),
            ]
        }
    })
}

/// One random instance of the requested kind from `Stream::new(seed, 0)`.
pub fn generate(kind: GenKind, seed: u64, d: usize, rank: Option<usize>, dims: Option<&[usize]>, dout: Option<usize>) -> Result<Instance> {
    let mut s = Stream::new(seed, 0);
    Ok(match kind {
        GenKind::Density => {
            let shape = dims.map_or_else(|| vec![d], <[usize]>::to_vec);
            let total: usize = shape.iter().product();
            Instance::Density(random_density_shaped(&shape, rank.unwrap_or(total), &mut s)?)
        }
        GenKind::Hermitian => Instance::Hermitian(random_hermitian(d, &mut s)),
        GenKind::Channel => {
            let dout = dout.unwrap_or(d);
            Instance::Channel(random_channel(d, dout, rank.unwrap_or(d * dout), &mut s)?)
        }
        GenKind::Classical => {
            let shape = dims.map_or_else(|| vec![d, d], <[usize]>::to_vec);
            Instance::Classical(random_classical(&shape, &mut s)?)
        }
        GenKind::Markov => {
            let shape = match dims {
                Some(&[a, b, c]) => [a, b, c],
                None => [d, d, d],
                Some(other) => return Err(Error::Param(format!("markov takes three dimensions, got {other:?}"))),
            };
            Instance::Classical(random_markov_joint(shape, &mut s)?)
        }
    })
}
