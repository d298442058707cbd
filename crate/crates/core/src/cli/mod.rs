//! `qml` command line: entropies, checks, recovery, appendix reports, fuzzing.
//!
//! Exit status is 0 when every check passes, 1 when any fails and 2 on input
//! errors, which are printed to stderr as `error[CODE]: message`.

pub mod files;
pub mod fuzz;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::entropy::{self, LogBase, MeasuredOpts};
use crate::examples;
use crate::linalg::{fidelity, hermitian_part, partial_trace, trace_distance, trace_re, CMat};
use crate::quad::{self, Density, QuadratureRule, RuleParams};
use crate::recovery::{self, Channel, LambdaSource, RecoveryMap, RecoveryMode};
use crate::traceineq::{self as ti, CheckReport, KleinFn};
use crate::{Error, Result};
use files::{emit_state, parse_state, Instance, Meta, ReportFile};

#[derive(Debug, Parser)]
#[command(name = "qml", version, about = "Entropy, trace-inequality and recovery-map checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Check tolerance; defaults depend on the check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "quad-T", global = true, default_value_t = quad::DEFAULT_T)]
    pub quad_t: f64,
    #[arg(long, global = true, default_value_t = quad::DEFAULT_PANELS)]
    pub quad_panels: usize,
    #[arg(long, global = true, default_value_t = quad::DEFAULT_NODES)]
    pub quad_nodes: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Display base for reported entropies: e or 2.
    #[arg(long, global = true)]
    pub log_base: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropies of a state, and divergences against `--sigma`.
    Entropy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Runs one inequality check on the matrices in the input files.
    Verify {
        check: VerifyCheck,
        #[arg(long = "in", required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = KleinArg::Xlogx)]
        klein: KleinArg,
        #[arg(long, value_enum, default_value_t = LambdaArg::Classical)]
        lambda: LambdaArg,
    },
    /// Applies the tripartite recovery map to `ρ_AB`.
    Recover {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Averaged)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Tests whether a tripartite state is a quantum Markov chain.
    MarkovCheck {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Reports on the linear-form constructions over `Z_{2^n}`.
    Appendix {
        #[command(subcommand)]
        which: AppendixCmd,
    },
    /// CMI of the antisymmetric state on `d` copies of `C^d`.
    Slater {
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
    /// Tabulates `β_θ(t)`.
    Densities {
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        csv: bool,
        #[arg(long, default_value_t = 4.0)]
        t_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Seeded random trials of one inequality family.
    Fuzz {
        suite: fuzz::Suite,
        /// Comma-separated subsystem dimensions.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Writes a seeded random instance.
    Gen {
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        dout: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AppendixCmd {
    /// `n`-bit example with mixing weights `p`, `q`.
    A {
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
    },
    /// One `α`, or the default sweep when absent.
    B {
        #[arg(long)]
        alpha: Option<u32>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VerifyCheck {
    Gt2,
    Lieb,
    GtMulti,
    Alt2,
    AltMulti,
    LogTrace2,
    LogTraceMulti,
    Peierls,
    Klein,
    Fr,
    Dpi,
    Winter,
    CmiUpper,
    RenyiTriangle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KleinArg {
    Xlogx,
    Square,
    Neglog,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LambdaArg {
    Classical,
    Invariant,
    ReadOnly,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Petz,
    Rotated,
    Averaged,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenKind {
    Density,
    Hermitian,
    Channel,
    Classical,
    Markov,
}

/// Output of a subcommand before it is written.
enum Output {
    Report(ReportFile),
    Text(String),
}

impl Global {
    pub fn rule(&self) -> Result<QuadratureRule> {
        quad::make_rule(
            Density::beta0(),
            RuleParams { t_max: self.quad_t, panels: self.quad_panels, nodes_per_panel: self.quad_nodes },
        )
    }

    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn base(&self, default: LogBase) -> Result<LogBase> {
        self.log_base.as_deref().map_or(Ok(default), LogBase::parse)
    }

    fn meta(&self, base: LogBase) -> Meta {
        Meta { log_base: base_name(base).into(), ..Meta::default() }
    }
}

fn base_name(b: LogBase) -> &'static str {
    match b {
        LogBase::E => "e",
        LogBase::Two => "2",
    }
}

pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Input(format!("bad dimension list {s:?}"))))
        .collect()
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(parse_state(p)?);
    }
    Ok(out)
}

fn load_one(path: &Path) -> Result<Instance> {
    let mut v = parse_state(path)?;
    if v.len() != 1 {
        return Err(Error::Input(format!("{}: expected one object, got {}", path.display(), v.len())));
    }
    Ok(v.remove(0))
}

fn matrices(insts: &[Instance], want: usize, name: &str) -> Result<Vec<CMat>> {
    if want > 0 && insts.len() != want {
        return Err(Error::Input(format!("{name} needs {want} matrices, got {}", insts.len())));
    }
    insts.iter().map(Instance::matrix).collect()
}

/// Parses arguments, runs, writes output and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, echo).and_then(|out| write_output(&cli.global, out)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            2
        }
    }
}

fn write_output(g: &Global, out: Output) -> Result<i32> {
    let (text, code) = match out {
        Output::Report(r) => {
            let code = if r.all_pass() { 0 } else { 1 };
            (serde_json::to_string_pretty(&r).expect("reports serialize"), code)
        }
        Output::Text(t) => (t, 0),
    };
    match &g.out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Error::Input(format!("{}: {e}", p.display())))?,
        None => {
            let mut so = std::io::stdout().lock();
            let _ = writeln!(so, "{text}");
        }
    }
    Ok(code)
}

fn execute(cli: &Cli, echo: Vec<String>) -> Result<Output> {
    let g = &cli.global;
    match &cli.command {
        Command::Entropy { input, sigma, alpha } => entropy_cmd(g, echo, input, sigma.as_ref(), *alpha),
        Command::Verify { check, input, p, q, r, alpha, klein, lambda } => {
            let insts = load_all(input)?;
            let opts = VerifyOpts { p: *p, q: *q, r: *r, alpha: *alpha, klein: *klein, lambda: *lambda };
            let (checks, uses_rule) = verify(g, *check, &insts, &opts)?;
            let mut meta = g.meta(LogBase::E);
            if uses_rule {
                meta.quadrature = Some(g.rule()?.meta());
            }
            Ok(Output::Report(ReportFile::new(echo, checks, meta, Value::Null)))
        }
        Command::Recover { input, mode, t } => recover_cmd(g, echo, input, *mode, *t),
        Command::MarkovCheck { input } => {
            let rho = load_one(input)?.state()?;
            let tol = g.tol_or(recovery::TOL_INVARIANT);
            let v = recovery::markov_verify(&rho, tol)?;
            let mut check = CheckReport::new("markov", v.cmi, tol, 0.0);
            if v.markov {
                let err = v.recovery_errors[0].1;
                check = check.detail("petz_error", err).with_margin(if v.pass() { 0.0 } else { -err });
            }
            let data = serde_json::to_value(&v).expect("verdict serializes");
            Ok(Output::Report(ReportFile::new(echo, vec![check], g.meta(LogBase::E), data)))
        }
        Command::Appendix { which } => appendix_cmd(g, echo, which),
        Command::Slater { d } => {
            let r = examples::slater_cmi(*d)?;
            let checks = vec![
                CheckReport::new("slater_min_cmi", r.min_cmi, r.bound, 1e-9).param("d", *d),
                CheckReport::new("slater_chain_rule", r.chain_defect, 0.0, 1e-9).param("d", *d),
            ];
            let data = serde_json::to_value(&r).expect("report serializes");
            Ok(Output::Report(ReportFile::new(echo, checks, g.meta(LogBase::E), data)))
        }
        Command::Densities { theta, csv, t_max, points } => densities_cmd(*theta, *csv, *t_max, *points),
        Command::Fuzz { suite, dims } => {
            let dims = dims.as_deref().map(parse_dims).transpose()?;
            let checks = fuzz::run_suite(*suite, g, dims.as_deref())?;
            let mut meta = g.meta(LogBase::E);
            meta.seed = Some(g.seed);
            meta.trials = Some(g.trials);
            if suite.uses_rule() {
                meta.quadrature = Some(g.rule()?.meta());
            }
            Ok(Output::Report(ReportFile::new(echo, checks, meta, Value::Null)))
        }
        Command::Gen { kind, d, rank, dims, dout } => {
            let dims = dims.as_deref().map(parse_dims).transpose()?;
            let inst = fuzz::generate(*kind, g.seed, *d, *rank, dims.as_deref(), *dout)?;
            Ok(Output::Text(emit_state(&[inst])))
        }
    }
}

fn entropy_cmd(g: &Global, echo: Vec<String>, input: &Path, sigma: Option<&PathBuf>, alpha: Option<f64>) -> Result<Output> {
    let base = g.base(LogBase::E)?;
    let rho = load_one(input)?.state()?;
    let b = |v: f64| base.convert(v);
    let mut data = serde_json::Map::new();
    data.insert("entropy".into(), json!(b(entropy::von_neumann(&rho))));
    for k in 0..rho.shape.len() {
        data.insert(format!("entropy_{k}"), json!(b(entropy::marginal_entropy(&rho, &[k])?)));
    }
    match rho.shape.len() {
        2 => {
            data.insert("conditional_entropy".into(), json!(b(entropy::conditional_entropy(&rho)?)));
            data.insert("mutual_information".into(), json!(b(entropy::cmi_sets(&rho, &[0], &[], &[1])?)));
        }
        3 => {
            data.insert("cmi".into(), json!(b(entropy::cmi(&rho)?)));
        }
        _ => {}
    }
    if let Some(sp) = sigma {
        let s = load_one(sp)?.matrix()?;
        data.insert("relative_entropy".into(), json!(b(entropy::relative_entropy(&rho.rho, &s)?.value)));
        data.insert("dmax".into(), json!(b(entropy::dmax(&rho.rho, &s)?)));
        data.insert("dmin".into(), json!(b(entropy::dmin(&rho.rho, &s)?)));
        let m = entropy::measured_relative_entropy(&rho.rho, &s, MeasuredOpts::default())?;
        data.insert("measured_lower_bound".into(), json!(b(m.value)));
        if let Some(a) = alpha {
            data.insert("renyi".into(), json!(b(entropy::renyi(&rho.rho, &s, a)?.value)));
        }
    }
    Ok(Output::Report(ReportFile::new(echo, vec![], g.meta(base), Value::Object(data))))
}

struct VerifyOpts {
    p: Option<f64>,
    q: Option<f64>,
    r: Option<f64>,
    alpha: Option<f64>,
    klein: KleinArg,
    lambda: LambdaArg,
}

fn verify(g: &Global, check: VerifyCheck, insts: &[Instance], o: &VerifyOpts) -> Result<(Vec<CheckReport>, bool)> {
    use VerifyCheck::*;
    let exact = g.tol_or(ti::TOL_EXACT);
    let quad_tol = g.tol_or(ti::TOL_QUAD);
    let rec_tol = g.tol_or(recovery::TOL_RECOVERY);
    let one = |c: CheckReport| Ok((vec![c], false));
    match check {
        Gt2 => {
            let m = matrices(insts, 2, "gt2")?;
            one(ti::check_gt2(&m[0], &m[1], exact)?)
        }
        Peierls => {
            let m = matrices(insts, 2, "peierls")?;
            one(ti::check_peierls(&m[0], &m[1], exact)?)
        }
        Lieb => {
            let m = matrices(insts, 3, "lieb")?;
            Ok((vec![ti::check_lieb_triple(&m[0], &m[1], &m[2], &g.rule()?, g.tol_or(1e-6))?], true))
        }
        GtMulti => {
            let m = matrices(insts, 0, "gt-multi")?;
            Ok((vec![ti::check_gt_multi(&m, o.p.unwrap_or(2.0), &g.rule()?, quad_tol)?], true))
        }
        Alt2 => {
            let m = matrices(insts, 2, "alt2")?;
            one(ti::check_alt2(&m[0], &m[1], o.q.unwrap_or(1.0), o.r.unwrap_or(0.5), exact)?)
        }
        AltMulti => {
            let m = matrices(insts, 0, "alt-multi")?;
            Ok((vec![ti::check_alt_multi(&m, o.p.unwrap_or(2.0), o.r.unwrap_or(0.5), &g.rule()?, quad_tol)?], true))
        }
        LogTrace2 => {
            let m = matrices(insts, 2, "log-trace2")?;
            one(ti::check_log_trace2(&m[0], &m[1], o.p.unwrap_or(1.0), exact)?)
        }
        LogTraceMulti => {
            let m = matrices(insts, 0, "log-trace-multi")?;
            Ok((vec![ti::check_log_trace_multi(&m, o.q.unwrap_or(1.0), &g.rule()?, quad_tol)?], true))
        }
        Klein => {
            let m = matrices(insts, 2, "klein")?;
            let f = match o.klein {
                KleinArg::Xlogx => KleinFn::XLogX,
                KleinArg::Square => KleinFn::Square,
                KleinArg::Neglog => KleinFn::NegLog,
            };
            one(ti::check_klein(&m[0], &m[1], f, exact)?)
        }
        Fr => {
            let [rho] = insts else {
                return Err(Error::Input("fr needs one tripartite state".into()));
            };
            let rep = recovery::fr_check(&rho.state()?, &g.rule()?, MeasuredOpts::default(), rec_tol)?;
            Ok((rep.checks, true))
        }
        Dpi => {
            let [rho, sigma, e] = insts else {
                return Err(Error::Input("dpi needs ρ, σ and a channel".into()));
            };
            let rep = recovery::strengthened_dpi_check(
                &rho.matrix()?,
                &sigma.matrix()?,
                &Channel::Kraus(e.channel()?),
                &g.rule()?,
                MeasuredOpts::default(),
                rec_tol,
            )?;
            Ok((rep.checks, true))
        }
        Winter => {
            let [rho, mu] = insts else {
                return Err(Error::Input("winter needs ρ and a Markov μ".into()));
            };
            one(recovery::winter_bound_check(&rho.state()?, &mu.state()?, rec_tol)?)
        }
        CmiUpper => {
            let (rho, r, rest) = match insts {
                [rho, r, rest @ ..] => (rho.state()?, r.channel()?, rest),
                _ => return Err(Error::Input("cmi-upper needs ρ_ABC and a channel B→BC".into())),
            };
            let source = match (o.lambda, rest) {
                (LambdaArg::Classical, []) => LambdaSource::Classical,
                (LambdaArg::ReadOnly, []) => LambdaSource::ReadOnly,
                (LambdaArg::Invariant, [tau]) => LambdaSource::Invariant(tau.matrix()?),
                _ => return Err(Error::Input("invariant Λ needs τ_AB as a third input; other modes take none".into())),
            };
            one(recovery::cmi_upper_check(&rho, &r, &source, rec_tol)?)
        }
        RenyiTriangle => {
            let m = matrices(insts, 3, "renyi-triangle")?;
            one(ti::check_renyi_triangle(&m[0], &m[1], &m[2], o.alpha.unwrap_or(0.5), exact)?)
        }
    }
}

fn recover_cmd(g: &Global, echo: Vec<String>, input: &Path, mode: ModeArg, t: f64) -> Result<Output> {
    let rho = load_one(input)?.state()?;
    let mode = match mode {
        ModeArg::Petz => RecoveryMode::Petz,
        ModeArg::Rotated => RecoveryMode::Rotated(t),
        ModeArg::Averaged => RecoveryMode::Averaged,
    };
    let r = RecoveryMap::tripartite(&rho, mode)?.rule_replaced(g.rule()?);
    let rho_ab = partial_trace(&rho.rho, &rho.shape, &[0, 1])?;
    let out = hermitian_part(&r.apply(&rho_ab)?);
    let tr = trace_re(&out);
    let check = CheckReport::new("trace_preserved", (tr - 1.0).abs(), 0.0, g.tol_or(recovery::TOL_INVARIANT));
    let recovered = crate::linalg::QuantumState { rho: out.clone(), shape: rho.shape.clone() };
    let state: Value = serde_json::from_str(&emit_state(&[Instance::Density(recovered)])).expect("emitted JSON parses");
    let data = json!({
        "mode": mode,
        "trace_distance": trace_distance(&rho.rho, &out)?,
        "fidelity": fidelity(&rho.rho, &out)?,
        "recovered": state,
    });
    let mut meta = g.meta(LogBase::E);
    if mode == RecoveryMode::Averaged {
        meta.quadrature = Some(r.rule.meta());
    }
    Ok(Output::Report(ReportFile::new(echo, vec![check], meta, data)))
}

fn appendix_cmd(g: &Global, echo: Vec<String>, which: &AppendixCmd) -> Result<Output> {
    let base = g.base(LogBase::Two)?;
    match which {
        AppendixCmd::A { n, p, q } => {
            let r = examples::appendix_a_report(*n, *p, *q, base)?;
            let mut checks = vec![
                CheckReport::new("cmi_lower_bound", r.cmi_lower_bound, r.cmi, 1e-12),
                CheckReport::new("recovery_marginal", r.recovery_marginal_defect, 0.0, 1e-15),
            ];
            if let Some(bf) = &r.brute_force {
                checks.push(CheckReport::new("brute_force_entries", bf.max_entry_diff, 0.0, 1e-14));
                checks.push(CheckReport::new("brute_force_quantities", bf.max_quantity_diff, 0.0, 1e-12));
            }
            let data = serde_json::to_value(&r).expect("report serializes");
            Ok(Output::Report(ReportFile::new(echo, checks, g.meta(base), data)))
        }
        AppendixCmd::B { alpha } => {
            let alphas: Vec<u32> = alpha.map_or(examples::ALPHA_SWEEP.to_vec(), |a| vec![a]);
            let sweep = examples::appendix_b_sweep(&alphas, base)?;
            let mut checks = Vec::new();
            for r in &sweep.reports {
                let a = f64::from(r.alpha);
                checks.push(CheckReport::new("invariance", r.invariance_defect, 0.0, 0.0).param("alpha", r.alpha));
                checks.push(
                    CheckReport::new("relative_entropy_bound", r.relative_entropy, r.relative_entropy_bound, 1e-12)
                        .param("alpha", r.alpha)
                        .detail("two_log_alpha", base.convert(2.0 * a.ln())),
                );
                if let Some(bf) = &r.brute_force {
                    checks.push(CheckReport::new("brute_force_entries", bf.max_entry_diff, 0.0, 1e-14).param("alpha", r.alpha));
                }
            }
            if alpha.is_none() {
                let found = sweep.smallest_alpha.is_some();
                checks.push(
                    CheckReport::new("chain_alpha_exists", if found { 0.0 } else { 1.0 }, 0.0, 0.0)
                        .param("smallest_alpha", sweep.smallest_alpha.map_or(Value::Null, Value::from)),
                );
            }
            let data = serde_json::to_value(&sweep).expect("report serializes");
            Ok(Output::Report(ReportFile::new(echo, checks, g.meta(base), data)))
        }
    }
}

fn densities_cmd(theta: f64, csv: bool, t_max: f64, points: usize) -> Result<Output> {
    if points < 2 || !(t_max > 0.0) {
        return Err(Error::Param(format!("need points >= 2 and t_max > 0, got {points}, {t_max}")));
    }
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let t = -t_max + 2.0 * t_max * i as f64 / (points - 1) as f64;
        rows.push((t, quad::beta_density(theta, t)?));
    }
    if csv {
        let mut s = String::from("t,beta");
        for (t, b) in rows {
            s.push_str(&format!("\n{t},{b}"));
        }
        Ok(Output::Text(s))
    } else {
        let v: Vec<Value> = rows.iter().map(|(t, b)| json!({ "t": t, "beta": b })).collect();
        Ok(Output::Text(serde_json::to_string_pretty(&json!({ "theta": theta, "values": v })).expect("values serialize")))
    }
}
