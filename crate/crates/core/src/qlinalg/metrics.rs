use num_complex::Complex64;

use super::matrix::{hermitian_eigen, ComplexMatrix, DensityMatrix, CONSTRUCTION_TOL, INPUT_TOL};
use crate::error::{Error, Result};

/// `exp(-i h t)` for Hermitian `h`, via eigendecomposition.
pub fn matexp_unitary(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    h.ensure_hermitian(CONSTRUCTION_TOL)?;
    let (vals, vecs) = hermitian_eigen(h);
    let phases: Vec<Complex64> = vals
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -e * t))
        .collect();
    let d = ComplexMatrix::from_diagonal(&phases);
    Ok(&(&vecs * &d) * &vecs.adjoint())
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {}- and {}-dimensional states",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    let sv = diff.into_inner().singular_values();
    Ok(0.5 * sv.iter().sum::<f64>())
}

/// `|tr(u^dagger v)| / d`: one for gates equal up to a global phase.
pub fn gate_fidelity_phase_invariant(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::DimensionMismatch(format!(
            "gate fidelity between {}x{} and {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    u.ensure_unitary(INPUT_TOL)?;
    v.ensure_unitary(INPUT_TOL)?;
    Ok(overlap_fidelity(u, v))
}

/// `|tr(u^dagger p)| / d` without unitarity checks; `p` may be a leaky projected propagator.
pub fn overlap_fidelity(u: &ComplexMatrix, p: &ComplexMatrix) -> f64 {
    u.adjoint().trace_product(p).norm() / u.rows() as f64
}
