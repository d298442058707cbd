//! Seeded random instances.
//!
//! Every instance is drawn from a [`Stream`]: ChaCha20 keyed by a 64-bit seed
//! (expanded with `seed_from_u64`) and positioned on a 64-bit stream id. Two
//! streams with the same `(seed, id)` yield identical output regardless of
//! thread count or call order, and distinct ids never overlap. Complex
//! Gaussians have independent real and imaginary parts with variance 1/2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::channels::KrausChannel;
use crate::entropy::ClassicalJoint;
use crate::linalg::{c64, cr, CMat, QuantumState};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct Stream {
    rng: ChaCha20Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream { rng }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    pub fn complex_normal(&mut self) -> c64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c64::new(self.normal() * s, self.normal() * s)
    }
}

pub fn gaussian_matrix(rows: usize, cols: usize, s: &mut Stream) -> CMat {
    CMat::from_fn(rows, cols, |_, _| s.complex_normal())
}

/// `(G + G†)/2` with `G` a complex Gaussian matrix.
pub fn random_hermitian(d: usize, s: &mut Stream) -> CMat {
    let g = gaussian_matrix(d, d, s);
    (&g + g.adjoint()) * cr(0.5)
}

/// Isometry `rows × cols` (rows ≥ cols) from a phase-fixed QR factorization.
pub fn random_isometry(rows: usize, cols: usize, s: &mut Stream) -> Result<CMat> {
    if rows < cols {
        return Err(Error::Param(format!("isometry {rows}x{cols} needs rows >= cols")));
    }
    let qr = gaussian_matrix(rows, cols, s).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..cols {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) };
        for i in 0..rows {
            q[(i, j)] *= ph;
        }
    }
    Ok(q)
}

pub fn random_unitary(d: usize, s: &mut Stream) -> CMat {
    random_isometry(d, d, s).expect("square isometry")
}

/// `G G†/tr` with `G` a `d × rank` complex Gaussian matrix.
pub fn random_density(d: usize, rank: usize, s: &mut Stream) -> Result<QuantumState> {
    random_density_shaped(&[d], rank, s)
}

pub fn random_density_shaped(shape: &[usize], rank: usize, s: &mut Stream) -> Result<QuantumState> {
    let d: usize = shape.iter().product();
    if rank == 0 || rank > d {
        return Err(Error::Param(format!("rank {rank} outside 1..={d}")));
    }
    let g = gaussian_matrix(d, rank, s);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let rho = crate::linalg::hermitian_part(&(m / cr(tr)));
    Ok(QuantumState { rho, shape: shape.to_vec() })
}

/// Full-rank PSD matrix `G G†/d` (eigenvalues of order one).
pub fn random_pd(d: usize, s: &mut Stream) -> CMat {
    let g = gaussian_matrix(d, d, s);
    crate::linalg::hermitian_part(&(&g * g.adjoint() / cr(d as f64))) + CMat::identity(d, d) * cr(1e-3)
}

/// Channel from a random isometry `din → dout·rank`.
pub fn random_channel(din: usize, dout: usize, rank: usize, s: &mut Stream) -> Result<KrausChannel> {
    if rank == 0 || rank > din * dout || dout * rank < din {
        return Err(Error::Param(format!("rank {rank} invalid for channel {din}->{dout}")));
    }
    let v = random_isometry(dout * rank, din, s)?;
    let kraus = (0..rank).map(|k| CMat::from_fn(dout, din, |o, i| v[(o * rank + k, i)])).collect();
    KrausChannel::new(din, dout, kraus)
}

/// Uniform point of the probability simplex.
pub fn dirichlet(n: usize, s: &mut Stream) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| s.exp1()).collect();
    let t: f64 = v.iter().sum();
    v.into_iter().map(|x| x / t).collect()
}

/// Column-stochastic `W[y'][y]` with uniform-simplex columns.
pub fn random_stochastic(dout: usize, din: usize, s: &mut Stream) -> Vec<Vec<f64>> {
    let cols: Vec<Vec<f64>> = (0..din).map(|_| dirichlet(dout, s)).collect();
    (0..dout).map(|yp| (0..din).map(|y| cols[y][yp]).collect()).collect()
}

pub fn random_classical(shape: &[usize], s: &mut Stream) -> Result<ClassicalJoint> {
    let n: usize = shape.iter().product();
    ClassicalJoint::new(shape.to_vec(), dirichlet(n, s))
}

/// `P_X P_{Y|X} P_{Z|Y}` with every factor uniform on its simplex.
pub fn random_markov_joint(dims: [usize; 3], s: &mut Stream) -> Result<ClassicalJoint> {
    let [dx, dy, dz] = dims;
    let px = dirichlet(dx, s);
    let wyx = random_stochastic(dy, dx, s);
    let wzy = random_stochastic(dz, dy, s);
    let mut p = Vec::with_capacity(dx * dy * dz);
    for x in 0..dx {
        for y in 0..dy {
            for z in 0..dz {
                p.push(px[x] * wyx[y][x] * wzy[z][y]);
            }
        }
    }
    ClassicalJoint::new(dims.to_vec(), p)
}
