//! Dense complex linear algebra and propagation primitives.
//!
//! Basis convention: the leftmost tensor factor is the most significant index
//! and `|0> = [1, 0]^T`, so a three-qubit ket `|q1 q2 q3>` sits at flat index
//! `4 q1 + 2 q2 + q3`.

mod evolve;
mod matrix;
mod metrics;

pub use evolve::{
    effective_step, evolve_kets, evolve_timedep, FnGenerator, Generator, Trajectory, DRIFT_ABORT,
    STEPS_PER_PERIOD,
};
pub use matrix::{
    c64, kron, kron_all, partial_trace, ComplexMatrix, DensityMatrix, TensorSpace,
    CONSTRUCTION_TOL, INPUT_TOL,
};
pub use metrics::{
    gate_fidelity_phase_invariant, matexp_unitary, overlap_fidelity, trace_distance,
};

/// Pauli matrices in the `|0>, |1>` basis.
pub mod pauli {
    use super::{c64, ComplexMatrix};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            [c64(0.0, 0.0), c64(0.0, -1.0)],
            [c64(0.0, 1.0), c64(0.0, 0.0)],
        ])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
    }
}
