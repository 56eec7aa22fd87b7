use serde::{Deserialize, Serialize};

use crate::bell_protocol::StepId;
use crate::error::{Error, Result};

/// Minimum ratio of every detuning to every coupling before the
/// large-detuning regime is considered satisfied.
pub const LARGE_DETUNING_RATIO: f64 = 10.0;

/// Relative tolerance of the matching condition `g_a²/δ_a = g_b²/δ_b`.
pub const MATCHING_TOL: f64 = 1e-9;

/// Absolute transition and laser frequencies. Documentation only: the
/// rotating-frame model depends on detunings alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabFrequencies {
    pub excited: f64,
    pub level_splitting: f64,
    pub cavity: f64,
    pub laser_a: f64,
    pub laser_b: f64,
}

/// Inputs from which a step's full parameter set is derived. Frequencies are
/// in units of `coupling_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityBase {
    pub coupling_a: f64,
    pub rabi_a: f64,
    pub cavity_detuning_a: f64,
    pub cavity_detuning_b: f64,
    pub laser_detuning_a: f64,
    pub laser_detuning_b: f64,
    pub frame_shift: f64,
    pub photon_cutoff: usize,
}

impl CavityBase {
    /// Published figure configuration: `g_a = 1`, `Ω_a = 5`, `δ_a = 102`,
    /// `δ_b = 122`, with laser detunings `(120, 100)` for the XX/YY steps and
    /// `(100, 120)` for the ZZ step.
    pub fn fig2(step: StepId) -> Self {
        let (laser_a, laser_b) = match step {
            StepId::Step1 | StepId::Step2 => (120.0, 100.0),
            StepId::Step3 => (100.0, 120.0),
        };
        Self {
            coupling_a: 1.0,
            rabi_a: 5.0,
            cavity_detuning_a: 102.0,
            cavity_detuning_b: 122.0,
            laser_detuning_a: laser_a,
            laser_detuning_b: laser_b,
            frame_shift: 0.0,
            photon_cutoff: 3,
        }
    }

    /// Multiplies all four detunings by `factor`.
    pub fn scaled_detunings(mut self, factor: f64) -> Self {
        self.cavity_detuning_a *= factor;
        self.cavity_detuning_b *= factor;
        self.laser_detuning_a *= factor;
        self.laser_detuning_b *= factor;
        self
    }

    /// Derives `g_b` from the matching condition and `Ω_b` from the step's
    /// selection rule.
    pub fn params_for_step(&self, step: StepId) -> Result<CavityParams> {
        let ratio = self.cavity_detuning_b / nonzero(self.cavity_detuning_a, "delta_a")?;
        if !ratio.is_finite() || ratio <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "matching condition needs cavity detunings of equal sign, got delta_a = {}, delta_b = {}",
                self.cavity_detuning_a, self.cavity_detuning_b
            )));
        }
        let mut params = CavityParams {
            coupling_a: self.coupling_a,
            coupling_b: self.coupling_a * ratio.sqrt(),
            rabi_a: self.rabi_a,
            rabi_b: 0.0,
            cavity_detuning_a: self.cavity_detuning_a,
            cavity_detuning_b: self.cavity_detuning_b,
            laser_detuning_a: self.laser_detuning_a,
            laser_detuning_b: self.laser_detuning_b,
            frame_shift: self.frame_shift,
            photon_cutoff: self.photon_cutoff,
            lab_frequencies: None,
        };
        params.rabi_b = super::omega_b_for_step(step, &params)?;
        params.validate()?;
        Ok(params)
    }
}

/// Full parameter set of the driven two-atom, one-cavity model in the
/// rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub coupling_a: f64,
    pub coupling_b: f64,
    pub rabi_a: f64,
    pub rabi_b: f64,
    /// `δ_a = ω_e - ω_c`.
    pub cavity_detuning_a: f64,
    /// `δ_b = ω_e - ω_c - ω_ab + δ_1`.
    pub cavity_detuning_b: f64,
    /// `Δ_a = ω_e - ω_a`.
    pub laser_detuning_a: f64,
    /// `Δ_b = ω_e - ω_b - ω_ab + δ_1`.
    pub laser_detuning_b: f64,
    /// `δ_1`: energy left on `|b>` by the rotating frame.
    pub frame_shift: f64,
    /// Number of photon-number states kept (`0..photon_cutoff`).
    pub photon_cutoff: usize,
    pub lab_frequencies: Option<LabFrequencies>,
}

impl CavityParams {
    /// Hard validity conditions: finite values and `photon_cutoff >= 2`.
    pub fn validate(&self) -> Result<()> {
        if self.photon_cutoff < 2 {
            return Err(Error::InvalidArgument(format!(
                "photon cutoff must be at least 2, got {}",
                self.photon_cutoff
            )));
        }
        let values = [
            ("g_a", self.coupling_a),
            ("g_b", self.coupling_b),
            ("omega_a", self.rabi_a),
            ("omega_b", self.rabi_b),
            ("delta_a", self.cavity_detuning_a),
            ("delta_b", self.cavity_detuning_b),
            ("Delta_a", self.laser_detuning_a),
            ("Delta_b", self.laser_detuning_b),
            ("delta_1", self.frame_shift),
        ];
        if let Some((name, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} = {v} is not finite"
            )));
        }
        Ok(())
    }

    /// Soft conditions of the adiabatic regime that do not hold.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let min_detuning = [
            self.cavity_detuning_a,
            self.cavity_detuning_b,
            self.laser_detuning_a,
            self.laser_detuning_b,
        ]
        .iter()
        .map(|d| d.abs())
        .fold(f64::INFINITY, f64::min);
        let max_coupling = [self.coupling_a, self.coupling_b, self.rabi_a, self.rabi_b]
            .iter()
            .map(|g| g.abs())
            .fold(0.0, f64::max);
        if min_detuning < LARGE_DETUNING_RATIO * max_coupling {
            out.push(format!(
                "large-detuning condition violated: min detuning {min_detuning} < {LARGE_DETUNING_RATIO} x max coupling {max_coupling}"
            ));
        }
        let lhs = self.coupling_a.powi(2) / self.cavity_detuning_a;
        let rhs = self.coupling_b.powi(2) / self.cavity_detuning_b;
        if (lhs - rhs).abs() > MATCHING_TOL * lhs.abs().max(rhs.abs()) {
            out.push(format!(
                "matching condition violated: g_a^2/delta_a = {lhs}, g_b^2/delta_b = {rhs}"
            ));
        }
        out
    }

    pub fn with_frame_shift(mut self, frame_shift: f64) -> Self {
        self.frame_shift = frame_shift;
        self
    }

    pub fn with_photon_cutoff(mut self, photon_cutoff: usize) -> Self {
        self.photon_cutoff = photon_cutoff;
        self
    }

    /// Largest detuning magnitude; bounds the fastest phase of the generator.
    pub fn max_detuning(&self) -> f64 {
        [
            self.cavity_detuning_a,
            self.cavity_detuning_b,
            self.laser_detuning_a,
            self.laser_detuning_b,
            self.frame_shift,
        ]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max)
    }

    /// `g_a² / δ_a`, the cavity-mediated shift shared by both levels.
    pub(crate) fn cavity_shift(&self) -> Result<f64> {
        Ok(self.coupling_a.powi(2) / nonzero(self.cavity_detuning_a, "delta_a")?)
    }
}

pub(crate) fn nonzero(x: f64, term: &'static str) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        Err(Error::ZeroDenominator { term })
    } else {
        Ok(x)
    }
}
