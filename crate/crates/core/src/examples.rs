//! Exact constructions: two classical recovery counterexamples on `2ⁿ`-ary
//! alphabets, the Slater determinant, and a relative-entropy triangle violation.
//!
//! The classical joints are evaluated on cells: points of `Z_N^m` (`N = 2ⁿ`)
//! grouped by which of a fixed set of linear forms vanish. Every distribution
//! involved is constant on cells, so sums over `N³` points reduce to sums over
//! at most `2^forms` cells with exact integer multiplicities.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::entropy::{binary_entropy, cmi_sets, relative_entropy, LogBase};
use crate::linalg::{cr, diag, partial_trace, tensor, trace_distance, CMat, QuantumState};
use crate::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;
/// Largest `n` for which brute-force enumeration is run alongside the cells.
pub const BRUTE_MAX_N: u32 = 4;
/// Largest `n` accepted by the cell evaluators.
pub const MAX_N: u32 = 64;

/// Points sharing one vanishing pattern of the forms.
#[derive(Clone, Debug)]
pub struct Cell {
    /// Bit `i` set iff form `i` vanishes.
    pub mask: u32,
    pub count: BigUint,
    pub weight: f64,
}

/// Partition of `Z_{2^bits}^vars` by the zero pattern of integer linear forms.
#[derive(Clone, Debug)]
pub struct LinearCells {
    pub bits: u32,
    pub vars: usize,
    pub forms: Vec<Vec<i64>>,
    /// Nonempty cells only.
    pub cells: Vec<Cell>,
}

impl LinearCells {
    pub fn new(bits: u32, vars: usize, forms: Vec<Vec<i64>>) -> Self {
        let f = forms.len();
        let full: Vec<BigInt> = (0..1u32 << f)
            .map(|s| {
                let rows: Vec<&[i64]> = (0..f).filter(|i| s >> i & 1 == 1).map(|i| forms[i].as_slice()).collect();
                BigInt::from(solution_count(&rows, vars, bits))
            })
            .collect();
        let mut cells = Vec::new();
        for t in 0..1u32 << f {
            let mut acc = BigInt::zero();
            for s in 0..1u32 << f {
                if s & t == t {
                    if (s ^ t).count_ones() % 2 == 0 {
                        acc += &full[s as usize];
                    } else {
                        acc -= &full[s as usize];
                    }
                }
            }
            if let Some(count) = acc.to_biguint().filter(|c| !c.is_zero()) {
                let weight = count.to_f64().unwrap_or(f64::INFINITY);
                cells.push(Cell { mask: t, count, weight });
            }
        }
        LinearCells { bits, vars, forms, cells }
    }

    /// `Σ_points g(point)` for `g` constant on cells.
    pub fn sum(&self, g: impl Fn(u32) -> f64) -> f64 {
        self.cells.iter().map(|c| c.weight * g(c.mask)).sum()
    }

    /// `−Σ P log P`.
    pub fn entropy(&self, p: impl Fn(u32) -> f64) -> f64 {
        self.sum(|m| {
            let v = p(m);
            if v > 0.0 {
                -v * v.ln()
            } else {
                0.0
            }
        })
    }

    /// `Σ P log(P/Q)`; `+∞` if `Q` vanishes where `P` does not.
    pub fn relative_entropy(&self, p: impl Fn(u32) -> f64, q: impl Fn(u32) -> f64) -> f64 {
        self.sum(|m| {
            let (a, b) = (p(m), q(m));
            if a <= 0.0 {
                0.0
            } else if b <= 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
    }

    /// `max log(P/Q)` over cells where `P > 0`.
    pub fn max_log_ratio(&self, p: impl Fn(u32) -> f64, q: impl Fn(u32) -> f64) -> f64 {
        self.cells
            .iter()
            .filter(|c| p(c.mask) > 0.0)
            .map(|c| {
                let b = q(c.mask);
                if b <= 0.0 {
                    f64::INFINITY
                } else {
                    (p(c.mask) / b).ln()
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |P − Q|` over cells.
    pub fn max_diff(&self, p: impl Fn(u32) -> f64, q: impl Fn(u32) -> f64) -> f64 {
        self.cells.iter().map(|c| (p(c.mask) - q(c.mask)).abs()).fold(0.0, f64::max)
    }

    /// Vanishing pattern of a concrete point.
    pub fn mask_of(&self, point: &[u64]) -> u32 {
        let n = 1i128 << self.bits;
        let mut m = 0;
        for (i, f) in self.forms.iter().enumerate() {
            let v: i128 = f.iter().zip(point).map(|(&a, &x)| a as i128 * x as i128).sum();
            if v.rem_euclid(n) == 0 {
                m |= 1 << i;
            }
        }
        m
    }
}

/// `#{v ∈ Z_N^vars : A v ≡ 0}` with `N = 2^bits`: `Π gcd(dᵢ, N)` over the
/// Smith invariants `dᵢ` of `A`, with `gcd(0, N) = N`.
fn solution_count(rows: &[&[i64]], vars: usize, bits: u32) -> BigUint {
    let mut exponent = 0u64;
    let mut prev = 1i64;
    let mut rank = 0;
    for k in 1..=rows.len().min(vars) {
        let dk = minor_gcd(rows, vars, k);
        if dk == 0 {
            break;
        }
        let inv = dk / prev;
        exponent += u64::from(inv.trailing_zeros().min(bits));
        prev = dk;
        rank = k;
    }
    exponent += u64::from(bits) * (vars - rank) as u64;
    BigUint::from(1u32) << exponent
}

/// gcd of all `k×k` minors.
fn minor_gcd(rows: &[&[i64]], vars: usize, k: usize) -> i64 {
    let mut g = 0i64;
    for rs in combinations(rows.len(), k) {
        for cs in combinations(vars, k) {
            let m: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| rows[r][c]).collect()).collect();
            g = gcd(g, det(&m).abs());
        }
    }
    g
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for last in k - 1..n {
        for mut c in combinations(last, k - 1) {
            c.push(last);
            out.push(c);
        }
    }
    out
}

fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        1 => m[0][0],
        n => (0..n)
            .map(|j| {
                let sub: Vec<Vec<i64>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det(&sub)
            })
            .sum(),
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Entrywise and summary agreement between cell evaluation and enumeration.
#[derive(Clone, Debug, Serialize)]
pub struct BruteForceCheck {
    pub points: usize,
    pub max_entry_diff: f64,
    pub max_quantity_diff: f64,
}

/// Flat `N×N×N` table indexed `(x·N + y)·N + z`.
struct Table3 {
    n: usize,
    v: Vec<f64>,
}

impl Table3 {
    fn zeros(n: usize) -> Self {
        Table3 { n, v: vec![0.0; n * n * n] }
    }

    fn at(&mut self, x: usize, y: usize, z: usize) -> &mut f64 {
        let n = self.n;
        &mut self.v[(x * n + y) * n + z]
    }

    fn marginal(&self, keep: [bool; 3]) -> Vec<f64> {
        let n = self.n;
        let dims: Vec<usize> = keep.iter().map(|&k| if k { n } else { 1 }).collect();
        let mut out = vec![0.0; dims.iter().product()];
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let (a, b, c) = (if keep[0] { x } else { 0 }, if keep[1] { y } else { 0 }, if keep[2] { z } else { 0 });
                    out[(a * dims[1] + b) * dims[2] + c] += self.v[(x * n + y) * n + z];
                }
            }
        }
        out
    }

    fn cmi_xz_given_y(&self) -> f64 {
        let h = |v: &[f64]| crate::entropy::shannon(v);
        h(&self.marginal([true, true, false])) + h(&self.marginal([false, true, true]))
            - h(&self.v)
            - h(&self.marginal([false, true, false]))
    }

    /// `Q(x, y', z') = Σ_y P_XY(x, y) K(y, y', z')`.
    fn recover(&self, kernel: impl Fn(usize, usize, usize) -> f64) -> Table3 {
        let n = self.n;
        let pxy = self.marginal([true, true, false]);
        let mut q = Table3::zeros(n);
        for x in 0..n {
            for y in 0..n {
                let w = pxy[x * n + y];
                if w == 0.0 {
                    continue;
                }
                for yp in 0..n {
                    for zp in 0..n {
                        *q.at(x, yp, zp) += w * kernel(y, yp, zp);
                    }
                }
            }
        }
        q
    }

    fn max_log_ratio(&self, other: &Table3) -> f64 {
        self.v
            .iter()
            .zip(&other.v)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| if *b > 0.0 { (a / b).ln() } else { f64::INFINITY })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Param(format!("n must lie in 1..={MAX_N}, got {n}")));
    }
    Ok(())
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Param(format!("{name} must lie in [0,1], got {v}")));
    }
    Ok(())
}

fn ind(mask: u32, bit: u32) -> f64 {
    if mask & bit != 0 {
        1.0
    } else {
        0.0
    }
}

/// Ratio `a/b` as a log, with `log 0 = −∞` and `a/0 = +∞` for `a > 0`.
fn log_ratio(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        f64::NEG_INFINITY
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        (a / b).ln()
    }
}

/// Uniform `X` on `2ⁿ` symbols; `Z` copies `X` with probability `p + q`,
/// `Y` copies `X` with probability `p`, copies `Z` with probability `q`, and
/// is otherwise fresh. Recovery `Y → (Y′, Z′)` outputs `(Y, Y)` with probability
/// `c = p² + q + pq` and otherwise `(Y, U)` or `(U′, Y)` with equal weight.
#[derive(Clone, Copy, Debug)]
pub struct AppendixA {
    pub n: u32,
    pub p: f64,
    pub q: f64,
}

const A_XY: u32 = 1;
const A_XZ: u32 = 2;
const A_YZ: u32 = 4;

impl AppendixA {
    pub fn new(n: u32, p: f64, q: f64) -> Result<Self> {
        check_n(n)?;
        check_prob("p", p)?;
        check_prob("q", q)?;
        if p + q > 1.0 + 1e-15 {
            return Err(Error::Param(format!("p + q must not exceed 1, got {}", p + q)));
        }
        Ok(AppendixA { n, p, q })
    }

    fn big_n(&self) -> f64 {
        2f64.powi(self.n as i32)
    }

    fn a(&self) -> f64 {
        self.p + self.q
    }

    fn r(&self) -> f64 {
        (1.0 - self.p - self.q).max(0.0)
    }

    pub fn c(&self) -> f64 {
        self.p * self.p + self.q + self.p * self.q
    }

    /// `P(X = Y)` ignoring coincidences of independent uniforms.
    pub fn p_equal(&self) -> f64 {
        self.p + self.p * self.q + self.q * self.q
    }

    pub fn triple_cells(&self) -> LinearCells {
        LinearCells::new(self.n, 3, vec![vec![1, -1, 0], vec![1, 0, -1], vec![0, 1, -1]])
    }

    pub fn pair_cells(&self) -> LinearCells {
        LinearCells::new(self.n, 2, vec![vec![1, -1]])
    }

    pub fn p_xyz(&self, m: u32) -> f64 {
        let n = self.big_n();
        let (a, r) = (self.a(), self.r());
        (a * ind(m, A_XZ) + (1.0 - a) / n) * (self.p * ind(m, A_XY) + self.q * ind(m, A_YZ) + r / n) / n
    }

    /// `P_XY` on a pair with `x = y` iff `eq`.
    pub fn p_xy(&self, eq: u32) -> f64 {
        let n = self.big_n();
        let a = self.a();
        ((self.p + self.q * a) * ind(eq, 1) + (self.q * (1.0 - a) + self.r()) / n) / n
    }

    pub fn p_yz(&self, eq: u32) -> f64 {
        let n = self.big_n();
        let a = self.a();
        ((a * self.p + self.q) * ind(eq, 1) + (self.r() + (1.0 - a) * self.p) / n) / n
    }

    /// Recovered joint `R(P_XY)`.
    pub fn q_xyz(&self, m: u32) -> f64 {
        let n = self.big_n();
        let c = self.c();
        let h = 0.5 * (1.0 - c);
        let (xy, xz) = (self.p_xy(u32::from(m & A_XY != 0)), self.p_xy(u32::from(m & A_XZ != 0)));
        c * ind(m, A_YZ) * xy + h / n * xy + h / n * xz
    }

    /// `R(P_Y)` on the `(Y′, Z′)` pair.
    pub fn q_yz(&self, eq: u32) -> f64 {
        let n = self.big_n();
        let h = 0.5 * (1.0 - self.c());
        self.c() * ind(eq, 1) / n + 2.0 * h / (n * n)
    }

    /// Listed candidates for `log max P/R(P)` (large-`n` cell ratios).
    pub fn dmax_forward_list(&self) -> Vec<f64> {
        let (p, q, c) = (self.p, self.q, self.c());
        let (e, ne, s) = (self.p_equal(), 1.0 - self.p_equal(), 1.0 - p - q);
        let h = 0.5 * (1.0 - c);
        vec![
            log_ratio((p + q) * (p + q), e * c),
            log_ratio(s * q, ne * c),
            log_ratio((p + q) * s, e * h),
            log_ratio(s * p, e * h),
            log_ratio(s * s, ne * (1.0 - c)),
        ]
    }

    pub fn dmax_reverse_list(&self) -> Vec<f64> {
        let (p, q, c) = (self.p, self.q, self.c());
        let (e, ne, s) = (self.p_equal(), 1.0 - self.p_equal(), 1.0 - p - q);
        let h = 0.5 * (1.0 - c);
        vec![
            log_ratio(e * c, (p + q) * (p + q)),
            log_ratio(ne * c, s * q),
            log_ratio(e * h, (p + q) * s),
            log_ratio(e * h, s * p),
            log_ratio(ne * (1.0 - c), s * s),
        ]
    }

    /// Enumerates the generative process on all `N³` points (with the flag
    /// variables) and compares against the cells.
    pub fn brute_force(&self) -> Result<BruteForceCheck> {
        if self.n > BRUTE_MAX_N {
            return Err(Error::DimTooLarge(1 << self.n, 1 << BRUTE_MAX_N));
        }
        let n = 1usize << self.n;
        let nf = n as f64;
        let (pz, py) = ([self.a(), 1.0 - self.a()], [self.p, self.q, self.r()]);
        let mut joint = Table3::zeros(n);
        let mut branches: Vec<(f64, Table3)> = Vec::new();
        for (ez, &wz) in pz.iter().enumerate() {
            for (ey, &wy) in py.iter().enumerate() {
                let mut t = Table3::zeros(n);
                for x in 0..n {
                    for uz in 0..n {
                        let z = if ez == 0 { x } else { uz };
                        let wz_u = if ez == 0 { 1.0 / nf } else { 1.0 / (nf * nf) };
                        if ez == 0 && uz > 0 {
                            continue;
                        }
                        for uy in 0..n {
                            let y = match ey {
                                0 => x,
                                1 => z,
                                _ => uy,
                            };
                            if ey < 2 && uy > 0 {
                                continue;
                            }
                            let w = wz_u * if ey < 2 { 1.0 } else { 1.0 / nf };
                            *t.at(x, y, z) += w;
                        }
                    }
                }
                for (j, v) in joint.v.iter_mut().zip(&t.v) {
                    *j += wz * wy * v;
                }
                branches.push((wz * wy, t));
            }
        }
        let c = self.c();
        let h = 0.5 * (1.0 - c);
        let rec = joint.recover(|y, yp, zp| {
            let mut k = 0.0;
            if yp == y && zp == y {
                k += c;
            }
            if yp == y {
                k += h / nf;
            }
            if zp == y {
                k += h / nf;
            }
            k
        });

        let cells = self.triple_cells();
        let mut entry = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let m = cells.mask_of(&[x as u64, y as u64, z as u64]);
                    let i = (x * n + y) * n + z;
                    entry = entry.max((joint.v[i] - self.p_xyz(m)).abs()).max((rec.v[i] - self.q_xyz(m)).abs());
                }
            }
        }
        let pairs = self.pair_cells();
        let (pyz, qyz) = (joint.marginal([false, true, true]), rec.marginal([false, true, true]));
        for y in 0..n {
            for z in 0..n {
                let m = pairs.mask_of(&[y as u64, z as u64]);
                entry = entry.max((pyz[y * n + z] - self.p_yz(m)).abs()).max((qyz[y * n + z] - self.q_yz(m)).abs());
            }
        }

        let sh = crate::entropy::shannon;
        let (mut hx_y, mut hx_yz) = (0.0, 0.0);
        for (w, t) in &branches {
            if *w == 0.0 {
                continue;
            }
            hx_y += w * (sh(&t.marginal([true, true, false])) - sh(&t.marginal([false, true, false])));
            hx_yz += w * (sh(&t.v) - sh(&t.marginal([false, true, true])));
        }
        let rep = self.report_nats();
        let quantity = [
            (joint.cmi_xz_given_y(), rep.cmi),
            (hx_y, rep.h_x_given_y_flags),
            (hx_yz, rep.h_x_given_yz_flags),
            (joint.max_log_ratio(&rec), rep.dmax_forward_exact),
            (rec.max_log_ratio(&joint), rep.dmax_reverse_exact),
        ]
        .iter()
        .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
        .fold(0.0, f64::max);
        Ok(BruteForceCheck { points: n * n * n, max_entry_diff: entry, max_quantity_diff: quantity })
    }

    fn report_nats(&self) -> AppendixAReport {
        let tri = self.triple_cells();
        let pair = self.pair_cells();
        let n = self.big_n();
        let h_xyz = tri.entropy(|m| self.p_xyz(m));
        let h_xy = pair.entropy(|m| self.p_xy(m));
        let h_yz = pair.entropy(|m| self.p_yz(m));
        let h_y = n.ln();
        let s = 1.0 - self.p - self.q;
        let nn = self.n as f64 * LN2;
        let fwd = self.dmax_forward_list();
        let rev = self.dmax_reverse_list();
        AppendixAReport {
            n: self.n,
            p: self.p,
            q: self.q,
            log_base: LogBase::E,
            h_x_given_y_flags: nn * s * (1.0 + self.q),
            h_x_given_yz_flags: nn * s * (1.0 - self.p),
            cmi: h_xy + h_yz - h_xyz - h_y,
            cmi_lower_bound: nn * s * (self.p + self.q) - 6f64.ln(),
            dmax_forward: fwd.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            dmax_reverse: rev.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            dmax_forward_exact: tri.max_log_ratio(|m| self.p_xyz(m), |m| self.q_xyz(m)),
            dmax_reverse_exact: tri.max_log_ratio(|m| self.q_xyz(m), |m| self.p_xyz(m)),
            dmax_bits: 0.0,
            dmax_forward_terms: fwd,
            dmax_reverse_terms: rev,
            mass_defect: (tri.sum(|m| self.p_xyz(m)) - 1.0).abs().max((tri.sum(|m| self.q_xyz(m)) - 1.0).abs()),
            recovery_marginal_defect: pair.max_diff(|m| self.p_yz(m), |m| self.q_yz(m)),
            brute_force: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixAReport {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub log_base: LogBase,
    /// `H(X|Y E_Y E_Z)`.
    pub h_x_given_y_flags: f64,
    /// `H(X|Y Z E_Y E_Z)`.
    pub h_x_given_yz_flags: f64,
    /// Exact `I(X:Z|Y)` from cells.
    pub cmi: f64,
    /// `n(1−p−q)(p+q) − log 6`.
    pub cmi_lower_bound: f64,
    /// Max of the listed ratios for `D_max(P‖R(P))`.
    pub dmax_forward: f64,
    pub dmax_reverse: f64,
    /// Exact max-log-ratio over all cells at this `n`.
    pub dmax_forward_exact: f64,
    pub dmax_reverse_exact: f64,
    /// `dmax_forward` in bits regardless of `log_base`.
    pub dmax_bits: f64,
    pub dmax_forward_terms: Vec<f64>,
    pub dmax_reverse_terms: Vec<f64>,
    pub mass_defect: f64,
    /// `max |R(P_Y) − P_YZ|`.
    pub recovery_marginal_defect: f64,
    pub brute_force: Option<BruteForceCheck>,
}

fn in_base(v: f64, b: LogBase) -> f64 {
    b.convert(v)
}

pub fn appendix_a_report(n: u32, p: f64, q: f64, base: LogBase) -> Result<AppendixAReport> {
    let inst = AppendixA::new(n, p, q)?;
    let mut r = inst.report_nats();
    r.dmax_bits = LogBase::Two.convert(r.dmax_forward);
    for v in [
        &mut r.h_x_given_y_flags,
        &mut r.h_x_given_yz_flags,
        &mut r.cmi,
        &mut r.cmi_lower_bound,
        &mut r.dmax_forward,
        &mut r.dmax_reverse,
        &mut r.dmax_forward_exact,
        &mut r.dmax_reverse_exact,
    ] {
        *v = in_base(*v, base);
    }
    for v in r.dmax_forward_terms.iter_mut().chain(r.dmax_reverse_terms.iter_mut()) {
        *v = in_base(*v, base);
    }
    r.log_base = base;
    if n <= BRUTE_MAX_N {
        r.brute_force = Some(inst.brute_force()?);
    }
    Ok(r)
}

/// Mixture with weight `p` of `X = Y = Z` uniform and weight `1 − p` of
/// independent uniform `X, Y` with `Z = X + Y mod 2ⁿ`. Recovery `Y → (Y′, Z′)`
/// outputs `(Y, Y)` with probability `p`, else `(U, Y − U)`.
#[derive(Clone, Copy, Debug)]
pub struct AppendixB {
    pub n: u32,
    pub p: f64,
}

const B_XY: u32 = 1;
const B_YZ: u32 = 2;
const B_SUM: u32 = 4;
const B_DIFF: u32 = 8;

impl AppendixB {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        check_n(n)?;
        check_prob("p", p)?;
        Ok(AppendixB { n, p })
    }

    /// Instance with `n = α`, `p = α⁻²`.
    pub fn for_alpha(alpha: u32) -> Result<Self> {
        if alpha < 2 {
            return Err(Error::Param(format!("alpha must be an integer >= 2, got {alpha}")));
        }
        Self::new(alpha, 1.0 / f64::from(alpha).powi(2))
    }

    fn big_n(&self) -> f64 {
        2f64.powi(self.n as i32)
    }

    /// Forms `x − y`, `y − z`, `x + y − z`, `x − y − z`.
    pub fn triple_cells(&self) -> LinearCells {
        LinearCells::new(self.n, 3, vec![vec![1, -1, 0], vec![0, 1, -1], vec![1, 1, -1], vec![1, -1, -1]])
    }

    pub fn pair_cells(&self) -> LinearCells {
        LinearCells::new(self.n, 2, vec![vec![1, -1]])
    }

    pub fn p_xyz(&self, m: u32) -> f64 {
        let n = self.big_n();
        self.p * ind(m, B_XY) * ind(m, B_YZ) / n + (1.0 - self.p) * ind(m, B_SUM) / (n * n)
    }

    pub fn p_xy(&self, eq: u32) -> f64 {
        let n = self.big_n();
        self.p * ind(eq, 1) / n + (1.0 - self.p) / (n * n)
    }

    pub fn p_yz(&self, eq: u32) -> f64 {
        self.p_xy(eq)
    }

    pub fn q_xyz(&self, m: u32) -> f64 {
        let n = self.big_n();
        self.p * ind(m, B_YZ) * self.p_xy(u32::from(m & B_XY != 0))
            + (1.0 - self.p) / n * self.p_xy(u32::from(m & B_DIFF != 0))
    }

    /// `R(P_Y)` on `(Y′, Z′)`.
    pub fn q_yz(&self, eq: u32) -> f64 {
        let n = self.big_n();
        (self.p * ind(eq, 1) + (1.0 - self.p) / n) / n
    }

    /// `max |R_{Y→Y′}(Q′_XY) − Q′_XY|` with `Q′_XY` uniform.
    pub fn invariance_defect(&self) -> f64 {
        let n = self.big_n();
        let u = 1.0 / (n * n);
        let moved = self.p * u + (1.0 - self.p) / n * (n * u);
        (moved - u).abs()
    }

    /// Closed form of `D_α(P_XY‖Q′_XY)`, summed in the log domain.
    pub fn renyi_closed_form(&self, alpha: f64) -> f64 {
        let n = self.n as f64;
        let big = self.big_n();
        let t1 = -n * LN2 + alpha * (1.0 - self.p).ln() + (big - 1.0).ln();
        let t2 = -n * LN2 + alpha * (1.0 - self.p + self.p * big).ln();
        log_add(t1, t2) / (alpha - 1.0)
    }

    /// `D_α(P_XY‖Q′_XY)` by summing over pair cells.
    pub fn renyi_cells(&self, alpha: f64) -> f64 {
        let q = -2.0 * self.n as f64 * LN2;
        let terms: Vec<f64> = self
            .pair_cells()
            .cells
            .iter()
            .filter(|c| self.p_xy(c.mask) > 0.0)
            .map(|c| c.weight.ln() + alpha * self.p_xy(c.mask).ln() + (1.0 - alpha) * q)
            .collect();
        terms.iter().copied().fold(f64::NEG_INFINITY, log_add) / (alpha - 1.0)
    }

    pub fn brute_force(&self) -> Result<BruteForceCheck> {
        if self.n > BRUTE_MAX_N {
            return Err(Error::DimTooLarge(1 << self.n, 1 << BRUTE_MAX_N));
        }
        let n = 1usize << self.n;
        let nf = n as f64;
        let p = self.p;
        let mut joint = Table3::zeros(n);
        for x in 0..n {
            *joint.at(x, x, x) += p / nf;
            for y in 0..n {
                *joint.at(x, y, (x + y) % n) += (1.0 - p) / (nf * nf);
            }
        }
        let rec = joint.recover(|y, yp, zp| {
            let mut k = 0.0;
            if yp == y && zp == y {
                k += p;
            }
            if zp == (y + n - yp) % n {
                k += (1.0 - p) / nf;
            }
            k
        });
        let cells = self.triple_cells();
        let mut entry = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let m = cells.mask_of(&[x as u64, y as u64, z as u64]);
                    let i = (x * n + y) * n + z;
                    entry = entry.max((joint.v[i] - self.p_xyz(m)).abs()).max((rec.v[i] - self.q_xyz(m)).abs());
                }
            }
        }
        let pairs = self.pair_cells();
        let (pxy, pyz, qyz) =
            (joint.marginal([true, true, false]), joint.marginal([false, true, true]), rec.marginal([false, true, true]));
        let uniform = 1.0 / (nf * nf);
        let mut inv = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let m = pairs.mask_of(&[a as u64, b as u64]);
                entry = entry
                    .max((pxy[a * n + b] - self.p_xy(m)).abs())
                    .max((pyz[a * n + b] - self.p_yz(m)).abs())
                    .max((qyz[a * n + b] - self.q_yz(m)).abs());
                let moved: f64 = (0..n).map(|y| uniform * (if y == b { p } else { 0.0 } + (1.0 - p) / nf)).sum();
                inv = inv.max((moved - uniform).abs());
            }
        }
        let rel: f64 = joint
            .v
            .iter()
            .zip(&rec.v)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| a * (a / b).ln())
            .sum();
        let alpha = 3.0;
        let renyi = (pxy.iter().map(|&v| v.powf(alpha) * uniform.powf(1.0 - alpha)).sum::<f64>()).ln() / (alpha - 1.0);
        let quantity = [
            (joint.cmi_xz_given_y(), self.cmi()),
            (rel, self.relative_entropy()),
            (renyi, self.renyi_cells(alpha)),
            (renyi, self.renyi_closed_form(alpha)),
            (inv, self.invariance_defect()),
        ]
        .iter()
        .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
        .fold(0.0, f64::max);
        Ok(BruteForceCheck { points: n * n * n, max_entry_diff: entry, max_quantity_diff: quantity })
    }

    pub fn cmi(&self) -> f64 {
        let pair = self.pair_cells();
        pair.entropy(|m| self.p_xy(m)) + pair.entropy(|m| self.p_yz(m))
            - self.triple_cells().entropy(|m| self.p_xyz(m))
            - self.big_n().ln()
    }

    /// `D(P‖R(P_XY))`.
    pub fn relative_entropy(&self) -> f64 {
        self.triple_cells().relative_entropy(|m| self.p_xyz(m), |m| self.q_xyz(m))
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixBReport {
    pub alpha: u32,
    pub n: u32,
    pub p: f64,
    pub log_base: LogBase,
    /// Exact `I(X:Z|Y)` from cells.
    pub cmi: f64,
    /// `(1−p)n − h(p)`.
    pub cmi_lower_bound: f64,
    /// Exact `D(P‖R(P_XY))` from cells.
    pub relative_entropy: f64,
    /// `log(1/p)`.
    pub relative_entropy_bound: f64,
    /// `D_α(P_XY‖Q′_XY)`, closed form.
    pub renyi_upper: f64,
    pub renyi_upper_cells: f64,
    pub chain_lhs: f64,
    /// `D + Λ_upper < I(X:Z|Y)`.
    pub chain_holds: bool,
    pub invariance_defect: f64,
    pub recovery_marginal_defect: f64,
    pub mass_defect: f64,
    pub brute_force: Option<BruteForceCheck>,
}

pub fn appendix_b_report(alpha: u32, base: LogBase) -> Result<AppendixBReport> {
    let inst = AppendixB::for_alpha(alpha)?;
    let a = f64::from(alpha);
    let tri = inst.triple_cells();
    let pair = inst.pair_cells();
    let cmi = inst.cmi();
    let rel = inst.relative_entropy();
    let renyi = inst.renyi_closed_form(a);
    let chain_lhs = rel + renyi;
    let b = |v: f64| in_base(v, base);
    Ok(AppendixBReport {
        alpha,
        n: inst.n,
        p: inst.p,
        log_base: base,
        cmi: b(cmi),
        cmi_lower_bound: b((1.0 - inst.p) * inst.n as f64 * LN2 - binary_entropy(inst.p)),
        relative_entropy: b(rel),
        relative_entropy_bound: b((1.0 / inst.p).ln()),
        renyi_upper: b(renyi),
        renyi_upper_cells: b(inst.renyi_cells(a)),
        chain_lhs: b(chain_lhs),
        chain_holds: chain_lhs < cmi,
        invariance_defect: inst.invariance_defect(),
        recovery_marginal_defect: pair.max_diff(|m| inst.p_yz(m), |m| inst.q_yz(m)),
        mass_defect: (tri.sum(|m| inst.p_xyz(m)) - 1.0).abs().max((tri.sum(|m| inst.q_xyz(m)) - 1.0).abs()),
        brute_force: if inst.n <= BRUTE_MAX_N { Some(inst.brute_force()?) } else { None },
    })
}

pub const ALPHA_SWEEP: [u32; 5] = [4, 8, 16, 32, 64];

#[derive(Clone, Debug, Serialize)]
pub struct AppendixBSweep {
    pub reports: Vec<AppendixBReport>,
    /// Smallest swept `α` with the strict chain inequality.
    pub smallest_alpha: Option<u32>,
}

pub fn appendix_b_sweep(alphas: &[u32], base: LogBase) -> Result<AppendixBSweep> {
    let reports = alphas.iter().map(|&a| appendix_b_report(a, base)).collect::<Result<Vec<_>>>()?;
    let smallest_alpha = reports.iter().filter(|r| r.chain_holds).map(|r| r.alpha).min();
    Ok(AppendixBSweep { reports, smallest_alpha })
}

/// Antisymmetric state of `d` qudits of dimension `d`.
pub fn slater_state(d: usize) -> Result<QuantumState> {
    if d < 2 {
        return Err(Error::Param(format!("slater needs d >= 2, got {d}")));
    }
    if d > 4 {
        return Err(Error::DimTooLarge(d.pow(d as u32), 256));
    }
    let dim = d.pow(d as u32);
    let mut psi = CMat::zeros(dim, 1);
    let perms = permutations(d);
    let amp = 1.0 / (perms.len() as f64).sqrt();
    for pi in &perms {
        let inversions = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).filter(|&(i, j)| pi[i] > pi[j]).count();
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        let idx = pi.iter().fold(0, |acc, &v| acc * d + v);
        psi[(idx, 0)] += cr(sign * amp);
    }
    QuantumState::new(&psi * psi.adjoint(), vec![d; d])
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, d - 1);
            out.push(q);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SlaterReport {
    pub d: usize,
    pub norm: f64,
    /// `I(S₁:S_k|S₂…S_{k−1})` for `k = 2..=d`.
    pub cmis: Vec<f64>,
    pub min_cmi: f64,
    pub argmin_k: usize,
    /// `(2/(d−1)) log d`.
    pub bound: f64,
    pub bound_holds: bool,
    pub chain_sum: f64,
    /// `I(S₁:S₂…S_d)`.
    pub mutual_information: f64,
    pub chain_defect: f64,
    /// Smallest trace distance from `ρ_{S₁…S_k}` (at the minimizing `k`) to the
    /// product-form Markov candidates `ρ_{AB}⊗ρ_C` and `ρ_A⊗ρ_{BC}`.
    pub markov_candidate_distance: f64,
}

pub fn slater_cmi(d: usize) -> Result<SlaterReport> {
    let rho = slater_state(d)?;
    let norm = rho.rho.trace().re;
    let mut cmis = Vec::with_capacity(d - 1);
    for k in 2..=d {
        let b: Vec<usize> = (1..k - 1).collect();
        cmis.push(cmi_sets(&rho, &[0], &b, &[k - 1])?);
    }
    let (argmin, &min_cmi) = cmis
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("d >= 2 gives at least one term");
    let argmin_k = argmin + 2;
    let bound = 2.0 / (d as f64 - 1.0) * (d as f64).ln();
    let chain_sum: f64 = cmis.iter().sum();
    let rest: Vec<usize> = (1..d).collect();
    let mutual_information = cmi_sets(&rho, &[0], &[], &rest)?;

    let keep: Vec<usize> = (0..argmin_k).collect();
    let sub = partial_trace(&rho.rho, &rho.shape, &keep)?;
    let db = d.pow(argmin_k as u32 - 2);
    let shape = [d, db, d];
    let ab = partial_trace(&sub, &shape, &[0, 1])?;
    let c = partial_trace(&sub, &shape, &[2])?;
    let a = partial_trace(&sub, &shape, &[0])?;
    let bc = partial_trace(&sub, &shape, &[1, 2])?;
    let markov_candidate_distance = trace_distance(&sub, &tensor(&ab, &c))?.min(trace_distance(&sub, &tensor(&a, &bc))?);
    Ok(SlaterReport {
        d,
        norm,
        min_cmi,
        argmin_k,
        bound,
        bound_holds: min_cmi <= bound + 1e-9,
        chain_sum,
        mutual_information,
        chain_defect: (chain_sum - mutual_information).abs(),
        cmis,
        markov_candidate_distance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangleReport {
    /// Diagonals of the three commuting qubit states.
    pub rho: [f64; 2],
    pub sigma: [f64; 2],
    pub omega: [f64; 2],
    pub d_rho_sigma: f64,
    pub d_rho_omega: f64,
    pub d_omega_sigma: f64,
    pub violated: bool,
}

/// Three diagonal qubit states with `D(ρ‖σ) > D(ρ‖ω) + D(ω‖σ)`.
pub fn triangle_counterexample() -> Result<TriangleReport> {
    let (r, s, o) = ([0.75, 0.25], [0.25, 0.75], [0.5, 0.5]);
    let d = |a: &[f64; 2], b: &[f64; 2]| -> Result<f64> { Ok(relative_entropy(&diag(a), &diag(b))?.value) };
    let (rs, ro, os) = (d(&r, &s)?, d(&r, &o)?, d(&o, &s)?);
    Ok(TriangleReport { rho: r, sigma: s, omega: o, d_rho_sigma: rs, d_rho_omega: ro, d_omega_sigma: os, violated: rs > ro + os })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_counts_partition_the_space() {
        for bits in 1..=5 {
            let a = AppendixA::new(bits, 0.3, 0.2).unwrap().triple_cells();
            let total: BigUint = a.cells.iter().map(|c| c.count.clone()).sum();
            assert_eq!(total, BigUint::from(1u32) << (3 * bits));
            let b = AppendixB::new(bits, 0.3).unwrap().triple_cells();
            let total: BigUint = b.cells.iter().map(|c| c.count.clone()).sum();
            assert_eq!(total, BigUint::from(1u32) << (3 * bits));
        }
    }

    #[test]
    fn cell_counts_match_enumeration() {
        for bits in 1..=3u32 {
            let cells = AppendixB::new(bits, 0.5).unwrap().triple_cells();
            let n = 1u64 << bits;
            let mut hist = std::collections::BTreeMap::new();
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        *hist.entry(cells.mask_of(&[x, y, z])).or_insert(0u64) += 1;
                    }
                }
            }
            for c in &cells.cells {
                assert_eq!(BigUint::from(hist.remove(&c.mask).unwrap_or(0)), c.count, "bits {bits} mask {}", c.mask);
            }
            assert!(hist.is_empty());
        }
    }

    #[test]
    fn triangle_values() {
        let t = triangle_counterexample().unwrap();
        assert!((t.d_rho_sigma - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!((t.d_rho_omega - 0.130812).abs() < 1e-6);
        assert!(t.violated);
    }

    #[test]
    fn singlet_mutual_information() {
        let r = slater_cmi(2).unwrap();
        assert!((r.cmis[0] - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((r.norm - 1.0).abs() < 1e-14);
    }
}
