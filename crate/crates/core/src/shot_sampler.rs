//! Finite-ensemble version of the protocol: each step is run on `N` copies,
//! the probe outcomes are counted, and the coefficients are estimated from
//! the empirical means.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`), seeded from the plan's
//! `u64` seed with one independent stream per step, so counts are reproducible
//! across platforms and do not depend on the order steps are sampled in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bell_protocol::{recover_coefficients, BellCoefficients, StepId};
use crate::error::{Error, Result};

/// Sampling configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    shots_per_step: u64,
    pub seed: u64,
    /// Also count the probes of the recovery pass, which share the forward-pass distribution.
    pub include_recovery_shots: bool,
}

impl ShotPlan {
    pub fn new(shots_per_step: u64, seed: u64) -> Result<Self> {
        if shots_per_step == 0 {
            return Err(Error::InvalidArgument(
                "shots_per_step must be at least 1".into(),
            ));
        }
        Ok(Self {
            shots_per_step,
            seed,
            include_recovery_shots: false,
        })
    }

    pub fn with_recovery_shots(mut self, on: bool) -> Self {
        self.include_recovery_shots = on;
        self
    }

    pub fn shots_per_step(&self) -> u64 {
        self.shots_per_step
    }

    /// Probe measurements per step actually pooled.
    pub fn effective_shots(&self) -> u64 {
        if self.include_recovery_shots {
            2 * self.shots_per_step
        } else {
            self.shots_per_step
        }
    }
}

/// Probe outcome counts of one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepCounts {
    pub n_plus: u64,
    pub n_minus: u64,
}

/// Estimated expectations and coefficients with propagated uncertainties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub m_hat: [f64; 3],
    pub c_hat: BellCoefficients,
    /// Per-coefficient standard error.
    pub std_err: [f64; 4],
    pub shots_used: [u64; 3],
    /// The linear inversion left the simplex and was projected back.
    pub projected: bool,
}

/// Probability of the `+1` outcome of the step's probe observable.
pub fn outcome_probability(step: StepId, c: &BellCoefficients) -> f64 {
    let [c1, c2, c3, c4] = c.values();
    let p = match step {
        StepId::Step1 => c1 + c3,
        StepId::Step2 => c1 + c4,
        StepId::Step3 => 0.5 * (1.0 + c1 + c2 - c3 - c4),
    };
    p.clamp(0.0, 1.0)
}

/// Draws the probe outcome counts for one step.
pub fn sample_step(step: StepId, c: &BellCoefficients, plan: &ShotPlan) -> StepCounts {
    let n = plan.effective_shots();
    let p = outcome_probability(step, c);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(step.number() as u64);
    let n_plus = Binomial::new(n, p)
        .expect("probability clamped to [0, 1]")
        .sample(&mut rng);
    StepCounts {
        n_plus,
        n_minus: n - n_plus,
    }
}

/// Samples all three steps and inverts the empirical means.
pub fn estimate(c_true: &BellCoefficients, plan: &ShotPlan) -> Result<EstimateReport> {
    let n_eff = plan.effective_shots();
    let n = n_eff as f64;
    let mut m_hat = [0.0; 3];
    let mut shots_used = [0; 3];
    for step in StepId::ALL {
        let counts = sample_step(step, c_true, plan);
        let i = step.number() - 1;
        m_hat[i] = (counts.n_plus as f64 - counts.n_minus as f64) / n;
        shots_used[i] = n_eff;
    }
    let inversion = recover_coefficients(m_hat[0], m_hat[1], m_hat[2])?;
    // Every c_i is (±M1 ± M2 ± M3 + 1)/4, so all four share one variance.
    let var_sum: f64 = m_hat.iter().map(|m| (1.0 - m * m) / n).sum();
    let se = (var_sum / 16.0).sqrt().max(1.0 / n);
    Ok(EstimateReport {
        m_hat,
        c_hat: inversion.coefficients,
        std_err: [se; 4],
        shots_used,
        projected: inversion.projected,
    })
}
