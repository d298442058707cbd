//! `Λ_max(P‖id⊗W)` for classical channels.
//!
//! Invariant distributions of `id⊗W` are, row by row, nonnegative combinations
//! of the stationary vectors of the closed classes of `W`. The minimal cover of
//! `P` therefore splits into one covering LP per `x`.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::ClassicalJoint;
use crate::channels::check_stochastic;
use crate::{Error, Result};

const LP_EPS: f64 = 1e-12;

/// Closed recurrent class of a column-stochastic `W` with its stationary vector
/// (length `|Y|`, zero off the class).
#[derive(Clone, Debug, Serialize)]
pub struct ClosedClass {
    pub states: Vec<usize>,
    pub stationary: Vec<f64>,
}

/// Closed classes of `W[y'][y]` (edge `y → y'` iff `W[y'][y] > 0`), ordered by
/// smallest member.
pub fn stationary_classes(w: &[Vec<f64>]) -> Result<Vec<ClosedClass>> {
    check_stochastic(w)?;
    let n = w.len();
    if w[0].len() != n {
        return Err(Error::NotStochastic(format!("W is {}x{}, expected square", n, w[0].len())));
    }
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for y in 0..n {
        for yp in 0..n {
            if w[yp][y] > 0.0 {
                g.add_edge(nodes[y], nodes[yp], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut comp = vec![0usize; n];
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = c;
        }
    }
    let mut classes = Vec::new();
    for (c, scc) in sccs.iter().enumerate() {
        let closed = scc.iter().all(|v| (0..n).all(|yp| w[yp][v.index()] <= 0.0 || comp[yp] == c));
        if !closed {
            continue;
        }
        let mut states: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        states.sort_unstable();
        let stationary = class_stationary(w, &states)?;
        classes.push(ClosedClass { states, stationary });
    }
    classes.sort_by_key(|c| c.states[0]);
    Ok(classes)
}

/// Solves `W_C π = π`, `Σ π = 1` on a closed class.
fn class_stationary(w: &[Vec<f64>], states: &[usize]) -> Result<Vec<f64>> {
    let k = states.len();
    let mut m = DMatrix::<f64>::from_fn(k, k, |i, j| w[states[i]][states[j]] - if i == j { 1.0 } else { 0.0 });
    let mut rhs = DVector::<f64>::zeros(k);
    for j in 0..k {
        m[(k - 1, j)] = 1.0;
    }
    rhs[k - 1] = 1.0;
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NotStochastic("singular stationary system".into()))?;
    let mut pi = vec![0.0; w.len()];
    for (i, &s) in states.iter().enumerate() {
        pi[s] = sol[i].max(0.0);
    }
    let t: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= t);
    Ok(pi)
}

/// `min 1ᵀa` subject to `A a ≥ b`, `a ≥ 0`, with `A` given as columns
/// (`cols[c][y]`). Solved through the dual `max bᵀu`, `Aᵀu ≤ 1`, `u ≥ 0` by a
/// dense tableau simplex with Bland's rule. Infeasible covers give `+∞`.
pub fn covering_lp(cols: &[Vec<f64>], b: &[f64]) -> f64 {
    let m = cols.len();
    let n = b.len();
    if b.iter().all(|&v| v <= 0.0) {
        return 0.0;
    }
    if m == 0 {
        return f64::INFINITY;
    }
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for (i, col) in cols.iter().enumerate() {
        t[i][..n].copy_from_slice(&col[..n]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    for j in 0..n {
        t[m][j] = -b[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let scale = b.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -LP_EPS * scale) else {
            return t[m][width - 1];
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter] > LP_EPS {
                let r = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let rl = t[l][width - 1] / t[l][enter];
                        if r < rl - LP_EPS * rl.abs().max(1.0) || (r <= rl + LP_EPS * rl.abs().max(1.0) && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(l) = leave else {
            return f64::INFINITY;
        };
        let piv = t[l][enter];
        for v in t[l].iter_mut() {
            *v /= piv;
        }
        let prow = t[l].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != l {
                let f = row[enter];
                if f != 0.0 {
                    for (x, p) in row.iter_mut().zip(&prow) {
                        *x -= f * p;
                    }
                }
            }
        }
        basis[l] = enter;
    }
}

/// `Λ_max(P_XY‖id⊗W) = log min{Σ R : (id⊗W)R = R, R ≥ P}`; `+∞` when some
/// `P(x, y) > 0` sits on a transient state of `W`.
pub fn classical_lambda_max(p: &ClassicalJoint, w: &[Vec<f64>]) -> Result<f64> {
    if p.shape.len() != 2 {
        return Err(Error::Shape(format!("expected X×Y joint, got {:?}", p.shape)));
    }
    let classes = stationary_classes(w)?;
    if w.len() != p.shape[1] {
        return Err(Error::DimMismatch(format!("W acts on {} states, Y has {}", w.len(), p.shape[1])));
    }
    let cols: Vec<Vec<f64>> = classes.iter().map(|c| c.stationary.clone()).collect();
    let ny = p.shape[1];
    let mut total = 0.0;
    for x in 0..p.shape[0] {
        let row = &p.p[x * ny..(x + 1) * ny];
        total += covering_lp(&cols, row);
    }
    Ok(total.ln())
}
