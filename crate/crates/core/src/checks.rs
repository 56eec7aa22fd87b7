//! Self-checks of the protocol algebra, runnable from the command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell_protocol::{
    apply_step, bds_density, bell_state, build_step_unitary, compose_bipartite_factors,
    recover_coefficients, recovery_pass, run_ideal_identification, BellCoefficients, StepId,
};
use crate::error::Result;
use crate::qlinalg::{c64, kron, ComplexMatrix};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check_name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(check_name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Self {
            check_name: check_name.into(),
            max_error,
            tolerance,
            pass: max_error < tolerance,
        }
    }
}

/// Uniform point on the probability simplex (normalized exponentials).
pub fn random_coefficients<R: Rng>(rng: &mut R) -> BellCoefficients {
    let mut e = [0.0; 4];
    for x in &mut e {
        *x = -(1.0 - rng.random::<f64>()).ln();
    }
    let sum: f64 = e.iter().sum();
    BellCoefficients::new(e.map(|x| x / sum)).expect("normalized nonnegative vector")
}

/// Runs every algebra check; `samples` random coefficient sets feed the
/// round-trip and nondestructiveness checks.
pub fn run_all(samples: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for step in StepId::ALL {
        let u = build_step_unitary(step);
        out.push(CheckResult::new(
            format!("unitarity_step{}", step.number()),
            u.unitarity_error(),
            1e-12,
        ));
        out.push(CheckResult::new(
            format!("factorization_step{}", step.number()),
            compose_bipartite_factors(step).max_abs_diff(&u),
            1e-12,
        ));
    }
    out.push(CheckResult::new(
        "bell_action_step1",
        bell_action_error()?,
        1e-12,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut round_trip = 0.0f64;
    let mut residual = 0.0f64;
    let mut repeat = 0.0f64;
    for _ in 0..samples {
        let c = random_coefficients(&mut rng);
        let rho = bds_density(&c);
        let mut m = [0.0; 3];
        for step in StepId::ALL {
            let report = apply_step(&rho, step)?;
            m[step.number() - 1] = report.m_value.clamp(-1.0, 1.0);
            let (_, second) = recovery_pass(&report)?;
            repeat = repeat.max(
                second
                    .probe_state
                    .matrix()
                    .max_abs_diff(report.probe_state.matrix()),
            );
        }
        let inv = recover_coefficients(m[0], m[1], m[2])?;
        round_trip = round_trip.max(inv.coefficients.max_abs_diff(&c));
        residual = residual.max(run_ideal_identification(&c)?.residual_trace_distance);
    }
    out.push(CheckResult::new("round_trip", round_trip, 1e-12));
    out.push(CheckResult::new("nondestructive", residual, 1e-10));
    out.push(CheckResult::new("recovery_probe_repeat", repeat, 1e-12));
    Ok(out)
}

/// `U¹` leaves `|Ψ2, j>`, `|Ψ4, j>` fixed and maps `|Ψ1, j> -> -i|Ψ3, 1-j>`,
/// `|Ψ3, j> -> -i|Ψ1, 1-j>`.
pub fn bell_action_error() -> Result<f64> {
    let u = build_step_unitary(StepId::Step1);
    let probe = |j: usize| {
        let mut v = [c64(0.0, 0.0); 2];
        v[j] = c64(1.0, 0.0);
        ComplexMatrix::column(&v)
    };
    let mut worst = 0.0f64;
    for j in 0..2 {
        for (from, to, phase) in [
            (2, 2, c64(1.0, 0.0)),
            (4, 4, c64(1.0, 0.0)),
            (1, 3, c64(0.0, -1.0)),
            (3, 1, c64(0.0, -1.0)),
        ] {
            let flip = if from == to { j } else { 1 - j };
            let input = kron(&bell_state(from)?, &probe(j));
            let expected = kron(&bell_state(to)?, &probe(flip)).scale(phase);
            worst = worst.max((&u * &input).max_abs_diff(&expected));
        }
    }
    Ok(worst)
}
