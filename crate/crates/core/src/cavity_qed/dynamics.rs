use num_complex::Complex64;
use serde::Serialize;

use super::coefficients::{coefficients_for_step, effective_hamiltonian, first_realizing_time};
use super::model::{CavityGenerator, FullSpace, LEVEL_A, LEVEL_B};
use super::params::CavityParams;
use crate::bell_protocol::{build_bipartite_factors, ProbeObservable, StepId};
use crate::error::{Error, Result};
use crate::qlinalg::{
    c64, evolve_kets, kron, matexp_unitary, overlap_fidelity, ComplexMatrix, DensityMatrix,
    Generator,
};

/// Default integration step, in units of `1/g_a`.
pub const DEFAULT_DT: f64 = 1e-3;

/// Leakage above which a gate is reported as outside the adiabatic regime.
pub const LEAKAGE_FLAG: f64 = 0.05;

/// Branch weights below this are dropped from mixed initial states.
const BRANCH_CUTOFF: f64 = 1e-12;

/// Probe expectation under the full and the effective dynamics on one grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub full_values: Vec<f64>,
    pub effective_values: Vec<f64>,
    pub observable: ProbeObservable,
}

impl TimeSeries {
    /// Largest `|full - effective|` over samples with `t <= t_limit`.
    pub fn max_deviation_until(&self, t_limit: f64) -> f64 {
        self.times
            .iter()
            .zip(self.full_values.iter().zip(&self.effective_values))
            .filter(|(t, _)| **t <= t_limit)
            .map(|(_, (f, e))| (f - e).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_deviation_until(f64::INFINITY)
    }
}

/// Result of [`simulate_comparison`].
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub series: TimeSeries,
    /// Coupling `λ` driving the effective curve.
    pub lambda: f64,
    /// Sample-averaged population outside the qubit subspace with an empty cavity.
    pub mean_leakage: f64,
    pub max_leakage: f64,
    /// Largest relative norm drift of the full integration.
    pub max_drift: f64,
    /// Step size actually used.
    pub dt: f64,
}

/// Full gate propagated over the qubit subspace.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub step: StepId,
    pub fidelity: f64,
    /// `1 - ||P||_F² / 4` for the projected propagator `P`.
    pub leakage: f64,
    pub gate_time: f64,
    pub lambda: f64,
    /// Leakage above [`LEAKAGE_FLAG`].
    pub outside_validity: bool,
    pub max_drift: f64,
}

/// Embeds a two-qubit ket (system atom, probe atom) into the full space with
/// the excited levels empty and the cavity in vacuum.
pub fn embed_qubit_ket(space: FullSpace, ket: &[Complex64]) -> Vec<Complex64> {
    let mut full = vec![c64(0.0, 0.0); space.dim()];
    for (k, &amp) in ket.iter().enumerate() {
        full[space.qubit_index(k)] = amp;
    }
    full
}

/// Probe expectation `<σz>` (`|b><b| - |a><a|`) or `<σx>` (`|a><b| + |b><a|`),
/// summed over the system atom and photon number.
pub fn probe_expectation(space: FullSpace, psi: &[Complex64], observable: ProbeObservable) -> f64 {
    let mut total = 0.0;
    for s in 0..3 {
        for n in 0..space.photon_cutoff {
            let a = psi[space.index(s, LEVEL_A, n)];
            let b = psi[space.index(s, LEVEL_B, n)];
            total += match observable {
                ProbeObservable::SigmaZ => b.norm_sqr() - a.norm_sqr(),
                ProbeObservable::SigmaX => 2.0 * (a.conj() * b).re,
            };
        }
    }
    total
}

/// Population outside the four qubit states with an empty cavity.
pub fn leakage(space: FullSpace, psi: &[Complex64]) -> f64 {
    let total: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let kept: f64 = (0..4).map(|k| psi[space.qubit_index(k)].norm_sqr()).sum();
    total - kept
}

/// Time grid of `n_samples` points spanning `[0, t_max]`.
pub fn sample_grid(t_max: f64, n_samples: usize) -> Result<Vec<f64>> {
    if n_samples < 2 || !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sample grid needs t_max > 0 and at least 2 samples, got t_max = {t_max}, n_samples = {n_samples}"
        )));
    }
    Ok((0..n_samples)
        .map(|k| t_max * k as f64 / (n_samples - 1) as f64)
        .collect())
}

/// Evolves `init` (a state of system atom ⊗ probe atom, qubit basis
/// `|0> = |b>`, `|1> = |a>`) under the full model and under `λ σ⊗σ`, and
/// records the step's probe observable on a shared grid.
///
/// The full model runs with `params` exactly as given, so the frame shift
/// should already be tuned.
pub fn simulate_comparison(
    params: &CavityParams,
    step: StepId,
    init: &DensityMatrix,
    t_max: f64,
    n_samples: usize,
    dt: f64,
) -> Result<Comparison> {
    params.validate()?;
    if init.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "initial state must be a 4x4 two-qubit state, got {}x{}",
            init.dim(),
            init.dim()
        )));
    }
    let grid = sample_grid(t_max, n_samples)?;
    let observable = step.probe_observable();
    let coeffs = coefficients_for_step(step, params)?;

    let h_eff = effective_hamiltonian(step, &coeffs);
    let probe_obs = kron(&ComplexMatrix::identity(2), &observable.matrix());
    let effective_values = grid
        .iter()
        .map(|&t| {
            let u = matexp_unitary(&h_eff, t)?;
            Ok(u.conjugate(init.matrix())?.trace_product(&probe_obs).re)
        })
        .collect::<Result<Vec<f64>>>()?;

    let generator = CavityGenerator::new(params);
    let space = generator.space();
    let branches = init.pure_branches(BRANCH_CUTOFF);
    let n = space.dim();
    let mut block = Vec::with_capacity(n * branches.len());
    for (_, ket) in &branches {
        block.extend(embed_qubit_ket(space, &ket.column_entries(0)));
    }
    let kets = ComplexMatrix::from_inner(nalgebra::DMatrix::from_column_slice(
        n,
        branches.len(),
        &block,
    ));
    let trajectory = evolve_kets(&generator, &kets, &grid, dt)?;

    let mut full_values = Vec::with_capacity(grid.len());
    let mut leak_sum = 0.0;
    let mut max_leakage = 0.0f64;
    for state in &trajectory.states {
        let mut value = 0.0;
        let mut leak = 0.0;
        for (j, (weight, _)) in branches.iter().enumerate() {
            let psi = state.column_entries(j);
            value += weight * probe_expectation(space, &psi, observable);
            leak += weight * leakage(space, &psi);
        }
        full_values.push(value);
        leak_sum += leak;
        max_leakage = max_leakage.max(leak);
    }

    Ok(Comparison {
        series: TimeSeries {
            times: trajectory.times,
            full_values,
            effective_values,
            observable,
        },
        lambda: coeffs.lam,
        mean_leakage: leak_sum / grid.len() as f64,
        max_leakage,
        max_drift: trajectory.max_drift,
        dt: trajectory.dt,
    })
}

/// Initial states of the published comparison: system atom maximally mixed,
/// probe in `|a>` (steps 1-2) or `(|a> + |b>)/√2` (step 3).
pub fn fig2_initial_state(step: StepId) -> DensityMatrix {
    let probe = match step {
        StepId::Step1 | StepId::Step2 => {
            ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).expect("2x2")
        }
        StepId::Step3 => ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).expect("2x2"),
    };
    let system = DensityMatrix::maximally_mixed(2).into_matrix();
    DensityMatrix::new(kron(&system, &probe)).expect("product of density matrices")
}

/// Number of full oscillations: pairs of crossings between the upper and
/// lower thirds of the curve's range.
pub fn completed_oscillations(values: &[f64]) -> usize {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return 0;
    }
    let third = (hi - lo) / 3.0;
    let (lower, upper) = (lo + third, hi - third);
    let mut side: Option<bool> = None;
    let mut crossings = 0;
    for &v in values {
        let now = if v >= upper {
            Some(true)
        } else if v <= lower {
            Some(false)
        } else {
            None
        };
        if let Some(now) = now {
            if side.is_some_and(|s| s != now) {
                crossings += 1;
            }
            side = Some(now);
        }
    }
    crossings / 2
}

/// Propagates the four qubit basis states under the full model for the first
/// gate time and compares the projected propagator with the step's two-qubit
/// factor, up to global phase.
pub fn full_gate_fidelity(params: &CavityParams, step: StepId, dt: f64) -> Result<GateReport> {
    params.validate()?;
    let coeffs = coefficients_for_step(step, params)?;
    let t_gate = first_realizing_time(coeffs.lam)?;
    let generator = CavityGenerator::new(params);
    let space = generator.space();
    let n = space.dim();
    let mut block = vec![c64(0.0, 0.0); 4 * n];
    for k in 0..4 {
        block[k * n + space.qubit_index(k)] = c64(1.0, 0.0);
    }
    let kets = ComplexMatrix::from_inner(nalgebra::DMatrix::from_column_slice(n, 4, &block));
    let trajectory = evolve_kets(&generator, &kets, &[0.0, t_gate], dt)?;
    let last = trajectory.states.last().expect("two grid points");
    let mut projected = ComplexMatrix::zeros(4, 4);
    for col in 0..4 {
        for row in 0..4 {
            projected.set(row, col, last.get(space.qubit_index(row), col));
        }
    }
    let (target, _) = build_bipartite_factors(step);
    let norm_sqr: f64 = projected.to_row_major().iter().map(|z| z.norm_sqr()).sum();
    let leakage = 1.0 - norm_sqr / 4.0;
    Ok(GateReport {
        step,
        fidelity: overlap_fidelity(&target, &projected),
        leakage,
        gate_time: t_gate,
        lambda: coeffs.lam,
        outside_validity: leakage > LEAKAGE_FLAG,
        max_drift: trajectory.max_drift,
    })
}

/// Same comparison with the effective Hamiltonian standing in for the full model.
pub fn effective_gate_fidelity(params: &CavityParams, step: StepId) -> Result<GateReport> {
    let coeffs = coefficients_for_step(step, params)?;
    let t_gate = first_realizing_time(coeffs.lam)?;
    let u = matexp_unitary(&effective_hamiltonian(step, &coeffs), t_gate)?;
    let (target, _) = build_bipartite_factors(step);
    Ok(GateReport {
        step,
        fidelity: overlap_fidelity(&target, &u),
        leakage: 0.0,
        gate_time: t_gate,
        lambda: coeffs.lam,
        outside_validity: false,
        max_drift: 0.0,
    })
}

/// Generator dimension, exposed for diagnostics.
pub fn full_dimension(params: &CavityParams) -> usize {
    CavityGenerator::new(params).dim()
}
