//! Fixed-step RK4 propagation of the Schrödinger and von Neumann equations.
//!
//! A [`Generator`] supplies `H(t) v` for column vectors. States are integrated
//! between consecutive sample times with the largest uniform step that does not
//! exceed the effective step `min(2π / (50 ω_max), dt)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Norm (or trace) drift at which integration aborts.
pub const DRIFT_ABORT: f64 = 1e-4;

/// Steps per period of the fastest oscillation.
pub const STEPS_PER_PERIOD: f64 = 50.0;

/// A possibly time-dependent Hermitian generator acting on column vectors.
pub trait Generator {
    fn dim(&self) -> usize;

    /// Writes `H(t) v` into `out` (overwriting it).
    fn apply(&self, t: f64, v: &[Complex64], out: &mut [Complex64]);

    /// Applies `H(t)` to `k` column vectors stored back to back in `block`.
    fn apply_block(&self, t: f64, block: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        for (v, o) in block.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            self.apply(t, v, o);
        }
    }

    /// Largest angular frequency in the generator, used to cap the step size.
    fn max_frequency(&self) -> f64 {
        0.0
    }
}

impl Generator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, _t: f64, v: &[Complex64], out: &mut [Complex64]) {
        let m = self.inner();
        let n = self.rows();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = ZERO;
            for (j, &x) in v.iter().enumerate() {
                acc += m[(i, j)] * x;
            }
            *o = acc;
        }
    }

    fn max_frequency(&self) -> f64 {
        // Gershgorin bound on the spectral radius.
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Generator given by a closure returning the dense matrix `H(t)`.
pub struct FnGenerator<F> {
    dim: usize,
    max_frequency: f64,
    f: F,
}

impl<F: Fn(f64) -> ComplexMatrix> FnGenerator<F> {
    pub fn new(dim: usize, max_frequency: f64, f: F) -> Self {
        Self {
            dim,
            max_frequency,
            f,
        }
    }
}

impl<F: Fn(f64) -> ComplexMatrix> Generator for FnGenerator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, v: &[Complex64], out: &mut [Complex64]) {
        (self.f)(t).apply(t, v, out);
    }

    fn apply_block(&self, t: f64, block: &[Complex64], out: &mut [Complex64]) {
        let h = (self.f)(t);
        for (v, o) in block
            .chunks_exact(self.dim)
            .zip(out.chunks_exact_mut(self.dim))
        {
            h.apply(t, v, o);
        }
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

/// Sampled trajectory of states.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    /// Largest relative norm (kets) or trace (density matrix) drift seen at a sample.
    pub max_drift: f64,
    /// Step size actually used.
    pub dt: f64,
}

/// Effective step: `min(2π / (50 ω_max), dt)`.
pub fn effective_step(max_frequency: f64, dt: f64) -> f64 {
    if max_frequency > 0.0 {
        dt.min(2.0 * PI / (STEPS_PER_PERIOD * max_frequency))
    } else {
        dt
    }
}

fn validate_grid(t_grid: &[f64], dt: f64) -> Result<()> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "time grid must be ascending and finite".into(),
        ));
    }
    Ok(())
}

/// Integrates `i dψ/dt = H(t) ψ` (column vector `state0`) or
/// `dρ/dt = -i[H(t), ρ]` (square `state0`), recording the state at each grid time.
/// Integration starts from `state0` at `t_grid[0]`.
pub fn evolve_timedep<G: Generator + ?Sized>(
    generator: &G,
    state0: &ComplexMatrix,
    t_grid: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    let n = generator.dim();
    if state0.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has {} rows but generator acts on dimension {n}",
            state0.rows()
        )));
    }
    if state0.cols() == 1 {
        evolve_kets(generator, state0, t_grid, dt)
    } else if state0.cols() == n {
        evolve_density(generator, state0, t_grid, dt)
    } else {
        Err(Error::DimensionMismatch(format!(
            "state must be a column vector or a {n}x{n} matrix, got {}x{}",
            state0.rows(),
            state0.cols()
        )))
    }
}

/// Propagates every column of `kets` as an independent state vector.
pub fn evolve_kets<G: Generator + ?Sized>(
    generator: &G,
    kets: &ComplexMatrix,
    t_grid: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    validate_grid(t_grid, dt)?;
    let n = generator.dim();
    if kets.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "kets have {} rows but generator acts on dimension {n}",
            kets.rows()
        )));
    }
    let k = kets.cols();
    let h = effective_step(generator.max_frequency(), dt);
    // Column-major storage: column j occupies block[j*n..(j+1)*n].
    let mut state: Vec<Complex64> = kets.inner().as_slice().to_vec();
    let norms0: Vec<f64> = state.chunks_exact(n).map(norm_sqr).collect();

    let mut rk = Rk4Buffers::new(state.len());
    let rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| {
        generator.apply_block(t, y, out);
        for z in out.iter_mut() {
            *z = Complex64::new(z.im, -z.re);
        }
    };

    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    let mut max_drift = 0.0f64;
    let mut t = t_grid[0];
    for &target in t_grid {
        integrate_to(&rhs, &mut state, &mut rk, t, target, h);
        t = target;
        let drift = state
            .chunks_exact(n)
            .zip(&norms0)
            .map(|(c, &n0)| {
                if n0 > 0.0 {
                    (norm_sqr(c) - n0).abs() / n0
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        if drift > DRIFT_ABORT {
            return Err(Error::NormDrift {
                time: t,
                drift,
                limit: DRIFT_ABORT,
            });
        }
        max_drift = max_drift.max(drift);
        times.push(t);
        states.push(ComplexMatrix::from_inner(
            nalgebra::DMatrix::from_column_slice(n, k, &state),
        ));
    }
    Ok(Trajectory {
        times,
        states,
        max_drift,
        dt: h,
    })
}

fn evolve_density<G: Generator + ?Sized>(
    generator: &G,
    rho0: &ComplexMatrix,
    t_grid: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    validate_grid(t_grid, dt)?;
    let n = generator.dim();
    let h = effective_step(generator.max_frequency(), dt);
    let mut state: Vec<Complex64> = rho0.inner().as_slice().to_vec();
    let trace0 = rho0.trace();

    let mut hr = vec![ZERO; n * n];
    let mut adj = vec![ZERO; n * n];
    let mut hadj = vec![ZERO; n * n];
    let mut rk = Rk4Buffers::new(n * n);
    let mut rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| {
        // H rho column by column; rho H = (H rho^dagger)^dagger.
        generator.apply_block(t, y, &mut hr);
        for i in 0..n {
            for j in 0..n {
                adj[j * n + i] = y[i * n + j].conj();
            }
        }
        generator.apply_block(t, &adj, &mut hadj);
        for i in 0..n {
            for j in 0..n {
                let comm = hr[j * n + i] - hadj[i * n + j].conj();
                out[j * n + i] = Complex64::new(comm.im, -comm.re);
            }
        }
    };

    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    let mut max_drift = 0.0f64;
    let mut t = t_grid[0];
    for &target in t_grid {
        integrate_to_mut(&mut rhs, &mut state, &mut rk, t, target, h);
        t = target;
        let tr: Complex64 = (0..n).map(|i| state[i * n + i]).sum();
        let drift = (tr - trace0).norm() / trace0.norm().max(f64::MIN_POSITIVE);
        if drift > DRIFT_ABORT {
            return Err(Error::NormDrift {
                time: t,
                drift,
                limit: DRIFT_ABORT,
            });
        }
        max_drift = max_drift.max(drift);
        times.push(t);
        states.push(ComplexMatrix::from_inner(
            nalgebra::DMatrix::from_column_slice(n, n, &state),
        ));
    }
    Ok(Trajectory {
        times,
        states,
        max_drift,
        dt: h,
    })
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

struct Rk4Buffers {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![ZERO; len],
            k2: vec![ZERO; len],
            k3: vec![ZERO; len],
            k4: vec![ZERO; len],
            tmp: vec![ZERO; len],
        }
    }
}

fn integrate_to<F>(rhs: &F, y: &mut [Complex64], rk: &mut Rk4Buffers, t0: f64, t1: f64, h: f64)
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let mut f = |t: f64, y: &[Complex64], out: &mut [Complex64]| rhs(t, y, out);
    integrate_to_mut(&mut f, y, rk, t0, t1, h);
}

fn integrate_to_mut<F>(
    rhs: &mut F,
    y: &mut [Complex64],
    rk: &mut Rk4Buffers,
    t0: f64,
    t1: f64,
    h: f64,
) where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let span = t1 - t0;
    if span <= 0.0 {
        return;
    }
    let steps = (span / h).ceil().max(1.0) as usize;
    let step = span / steps as f64;
    let half = 0.5 * step;
    for s in 0..steps {
        let t = t0 + s as f64 * step;
        rhs(t, y, &mut rk.k1);
        for ((tmp, &yi), &k) in rk.tmp.iter_mut().zip(y.iter()).zip(&rk.k1) {
            *tmp = yi + k * half;
        }
        rhs(t + half, &rk.tmp, &mut rk.k2);
        for ((tmp, &yi), &k) in rk.tmp.iter_mut().zip(y.iter()).zip(&rk.k2) {
            *tmp = yi + k * half;
        }
        rhs(t + half, &rk.tmp, &mut rk.k3);
        for ((tmp, &yi), &k) in rk.tmp.iter_mut().zip(y.iter()).zip(&rk.k3) {
            *tmp = yi + k * step;
        }
        rhs(t + step, &rk.tmp, &mut rk.k4);
        let w = step / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += (rk.k1[i] + (rk.k2[i] + rk.k3[i]) * 2.0 + rk.k4[i]) * w;
        }
    }
}
