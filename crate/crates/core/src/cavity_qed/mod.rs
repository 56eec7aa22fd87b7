//! Two three-level atoms (`|a>`, `|b>` ground, `|e>` excited) in one driven
//! cavity, realizing the protocol's two-qubit factors as `λ σ⊗σ` couplings.
//!
//! Frequencies are in units of `g_a` and times in `1/g_a`. The probe qubit is
//! encoded as `|0> = |b>`, `|1> = |a>`.

mod coefficients;
mod dynamics;
mod model;
mod params;

pub use coefficients::{
    coefficients_for_step, effective_field, effective_hamiltonian, first_realizing_time, gate_time,
    omega_b_for_step, tune_delta1, tune_delta1_in, EffectiveCoefficients, FieldFormula, FIELD_TOL,
    FRAME_SHIFT_BRACKET,
};
pub use dynamics::{
    completed_oscillations, effective_gate_fidelity, embed_qubit_ket, fig2_initial_state,
    full_dimension, full_gate_fidelity, leakage, probe_expectation, sample_grid,
    simulate_comparison, Comparison, GateReport, TimeSeries, DEFAULT_DT, LEAKAGE_FLAG,
};
pub use model::{
    full_hamiltonian, qubit_level, CavityGenerator, FullSpace, LEVEL_A, LEVEL_B, LEVEL_E,
};
pub use params::{CavityBase, CavityParams, LabFrequencies, LARGE_DETUNING_RATIO, MATCHING_TOL};
