use std::path::Path;

use bellprobe::bell_protocol::StepId;
use bellprobe::cavity_qed::{CavityBase, CavityParams};
use serde::Deserialize;

use crate::CliError;

/// On-disk QED parameters. `g_b` and `Ω_b` are derived, so they are not
/// accepted here.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QedConfig {
    pub g_a: f64,
    pub omega_ra: f64,
    pub delta_a: f64,
    pub delta_b0: f64,
    #[serde(rename = "Delta_a")]
    pub laser_delta_a: f64,
    #[serde(rename = "Delta_b0")]
    pub laser_delta_b0: f64,
    pub delta_1: f64,
    pub n_ph: usize,
}

impl QedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::config(format!("invalid QED parameters in {}: {e}", path.display()))
        })
    }

    pub fn base(&self) -> CavityBase {
        CavityBase {
            coupling_a: self.g_a,
            rabi_a: self.omega_ra,
            cavity_detuning_a: self.delta_a,
            cavity_detuning_b: self.delta_b0,
            laser_detuning_a: self.laser_delta_a,
            laser_detuning_b: self.laser_delta_b0,
            frame_shift: self.delta_1,
            photon_cutoff: self.n_ph,
        }
    }

    pub fn params_for_step(&self, step: StepId) -> Result<CavityParams, CliError> {
        Ok(self.base().params_for_step(step)?)
    }
}
