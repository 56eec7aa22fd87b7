use std::f64::consts::PI;

use serde::Serialize;

use super::params::{nonzero, CavityParams};
use crate::bell_protocol::StepId;
use crate::error::{Error, Result};
use crate::qlinalg::{c64, kron, pauli, ComplexMatrix};

/// Search interval for the frame shift, in units of `g_a`.
pub const FRAME_SHIFT_BRACKET: (f64, f64) = (-1.0, 1.0);

/// Target of the frame-shift root find, in units of `g_a`.
pub const FIELD_TOL: f64 = 1e-10;

/// Coefficients of the effective two-qubit Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCoefficients {
    pub step: StepId,
    pub j1: f64,
    pub j2: f64,
    /// Residual field `B` multiplying `σ1z + σ3z` (closed form as published).
    pub b_field: f64,
    /// Coupling `λ` of `λ σ⊗σ`.
    pub lam: f64,
}

/// How the residual field `B` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldFormula {
    /// The published closed forms: one for the XX/YY frame, one for the ZZ frame.
    Published,
    /// Second-order shift of the `|b>` level relative to `|a>`, summed over
    /// every virtual path; the same expression serves all three frames.
    SecondOrder,
}

/// Rabi frequency `Ω_b` that turns the effective coupling into a pure `σσ` form.
pub fn omega_b_for_step(step: StepId, p: &CavityParams) -> Result<f64> {
    let inv = |x: f64, term| nonzero(x, term).map(|x| 1.0 / x);
    match step {
        StepId::Step1 | StepId::Step2 => {
            let num = p.coupling_b
                * p.rabi_a
                * (inv(p.laser_detuning_a, "Delta_a")? + inv(p.cavity_detuning_b, "delta_b")?);
            let den = p.coupling_a
                * (inv(p.cavity_detuning_a, "delta_a")? + inv(p.laser_detuning_b, "Delta_b")?);
            let value = num / nonzero(den, "g_a (1/delta_a + 1/Delta_b)")?;
            Ok(if step == StepId::Step1 { value } else { -value })
        }
        StepId::Step3 => {
            let num = p.rabi_a
                * p.coupling_a
                * (inv(p.laser_detuning_a, "Delta_a")? + inv(p.cavity_detuning_a, "delta_a")?);
            let den = p.coupling_b
                * (inv(p.laser_detuning_b, "Delta_b")? + inv(p.cavity_detuning_b, "delta_b")?);
            Ok(-num / nonzero(den, "g_b (1/Delta_b + 1/delta_b)")?)
        }
    }
}

/// Exchange amplitudes, published field and coupling for the step.
pub fn coefficients_for_step(step: StepId, p: &CavityParams) -> Result<EffectiveCoefficients> {
    let s = p.cavity_shift()?;
    let inv = |x: f64, term| nonzero(x, term).map(|x| 1.0 / x);
    let (j1, j2, denom) = match step {
        StepId::Step1 | StepId::Step2 => (
            0.5 * p.coupling_a
                * p.rabi_b
                * (inv(p.cavity_detuning_a, "delta_a")? + inv(p.laser_detuning_b, "Delta_b")?),
            0.5 * p.coupling_b
                * p.rabi_a
                * (inv(p.cavity_detuning_b, "delta_b")? + inv(p.laser_detuning_a, "Delta_a")?),
            nonzero(
                p.cavity_detuning_a - p.laser_detuning_b + s,
                "delta_a - Delta_b + g_a^2/delta_a",
            )?,
        ),
        StepId::Step3 => (
            0.5 * p.rabi_a
                * p.coupling_a
                * (inv(p.laser_detuning_a, "Delta_a")? + inv(p.cavity_detuning_a, "delta_a")?),
            0.5 * p.rabi_b
                * p.coupling_b
                * (inv(p.laser_detuning_b, "Delta_b")? + inv(p.cavity_detuning_b, "delta_b")?),
            nonzero(
                p.cavity_detuning_a - p.laser_detuning_a + s,
                "delta_a - Delta_a + g_a^2/delta_a",
            )?,
        ),
    };
    Ok(EffectiveCoefficients {
        step,
        j1,
        j2,
        b_field: effective_field(step, p, FieldFormula::Published)?,
        lam: 2.0 * j1 * j1 / denom,
    })
}

/// Residual field `B` at the parameters' current frame shift.
pub fn effective_field(step: StepId, p: &CavityParams, formula: FieldFormula) -> Result<f64> {
    match formula {
        FieldFormula::Published => match step {
            StepId::Step1 | StepId::Step2 => published_field_xy(p),
            StepId::Step3 => published_field_zz(p),
        },
        FieldFormula::SecondOrder => second_order_field(p),
    }
}

fn published_field_xy(p: &CavityParams) -> Result<f64> {
    let s = p.cavity_shift()?;
    let (oa2, ob2) = (p.rabi_a.powi(2), p.rabi_b.powi(2));
    let (ga2, gb2) = (p.coupling_a.powi(2), p.coupling_b.powi(2));
    let (da, db) = (p.cavity_detuning_a, p.cavity_detuning_b);
    let (la, lb) = (
        nonzero(p.laser_detuning_a, "Delta_a")?,
        nonzero(p.laser_detuning_b, "Delta_b")?,
    );
    let raman =
        oa2 * ob2 / 4.0 / nonzero(da - db, "delta_a - delta_b")? * (1.0 / la + 1.0 / lb).powi(2);
    let path_b = ob2 * gb2 / 4.0 / nonzero(db - la + s, "delta_b - Delta_a + g_a^2/delta_a")?
        * (1.0 / lb + 1.0 / nonzero(db, "delta_b")?).powi(2);
    let path_a = oa2 * ga2 / 4.0 / nonzero(da - la + s, "delta_a - Delta_a + g_a^2/delta_a")?
        * (1.0 / la + 1.0 / nonzero(da, "delta_a")?).powi(2);
    Ok(raman + path_b - path_a + 0.5 * (ob2 / lb - oa2 / la + p.frame_shift))
}

fn published_field_zz(p: &CavityParams) -> Result<f64> {
    let s = p.cavity_shift()?;
    let (oa2, ob2) = (p.rabi_a.powi(2), p.rabi_b.powi(2));
    let (ga2, gb2) = (p.coupling_a.powi(2), p.coupling_b.powi(2));
    let (da, db) = (
        nonzero(p.cavity_detuning_a, "delta_a")?,
        nonzero(p.cavity_detuning_b, "delta_b")?,
    );
    let (la, lb) = (
        nonzero(p.laser_detuning_a, "Delta_a")?,
        nonzero(p.laser_detuning_b, "Delta_b")?,
    );
    let stark = 0.5 * (ob2 / lb + p.frame_shift - oa2 / la);
    let cross = 0.5
        * (ob2 * ga2 / 4.0 / nonzero(da - lb + s, "delta_a - Delta_b + g_a^2/delta_a")?
            * (1.0 / da + 1.0 / lb).powi(2)
            - oa2 * gb2 / 4.0 / nonzero(db - la + s, "delta_b - Delta_a + g_a^2/delta_a")?
                * (1.0 / db + 1.0 / la).powi(2));
    let raman =
        oa2 * ob2 / 4.0 / nonzero(la - lb, "Delta_a - Delta_b")? * (1.0 / la + 1.0 / lb).powi(2);
    Ok(stark + cross + raman)
}

/// Half the second-order energy difference between `|b>` and `|a>` of one
/// atom, with the partner atom's Raman-assisted exchange paths included.
fn second_order_field(p: &CavityParams) -> Result<f64> {
    let s = p.cavity_shift()?;
    let (da, db) = (
        nonzero(p.cavity_detuning_a, "delta_a")?,
        nonzero(p.cavity_detuning_b, "delta_b")?,
    );
    let (la, lb) = (
        nonzero(p.laser_detuning_a, "Delta_a")?,
        nonzero(p.laser_detuning_b, "Delta_b")?,
    );
    let (oa, ob, ga, gb) = (p.rabi_a, p.rabi_b, p.coupling_a, p.coupling_b);
    let laser_raman = 0.5 * oa * ob * (1.0 / la + 1.0 / lb);
    let laser_cavity_a = 0.5 * oa * ga * (1.0 / la + 1.0 / da);
    let laser_cavity_b = 0.5 * ob * gb * (1.0 / lb + 1.0 / db);
    let exchange_ba = 0.5 * ob * ga * (1.0 / lb + 1.0 / da);
    let exchange_ab = 0.5 * oa * gb * (1.0 / la + 1.0 / db);
    let shift_b = -ob * ob / lb
        - laser_cavity_b.powi(2) / nonzero(lb - db - s, "Delta_b - delta_b - g_a^2/delta_a")?
        - exchange_ba.powi(2) / nonzero(lb - da - s, "Delta_b - delta_a - g_a^2/delta_a")?;
    let shift_a = -oa * oa / la
        - laser_cavity_a.powi(2) / nonzero(la - da - s, "Delta_a - delta_a - g_a^2/delta_a")?
        - exchange_ab.powi(2) / nonzero(la - db - s, "Delta_a - delta_b - g_a^2/delta_a")?;
    let raman = 2.0 * laser_raman.powi(2) / nonzero(la - lb, "Delta_a - Delta_b")?;
    Ok(0.5 * (p.frame_shift + shift_b - shift_a + raman))
}

/// Frame shift nulling `B` within [`FIELD_TOL`], found by bisection on
/// [`FRAME_SHIFT_BRACKET`] with all detunings held fixed. Returns the shift
/// and the parameters carrying it.
pub fn tune_delta1(
    p: &CavityParams,
    step: StepId,
    formula: FieldFormula,
) -> Result<(f64, CavityParams)> {
    tune_delta1_in(p, step, formula, FRAME_SHIFT_BRACKET)
}

pub fn tune_delta1_in(
    p: &CavityParams,
    step: StepId,
    formula: FieldFormula,
    (lo, hi): (f64, f64),
) -> Result<(f64, CavityParams)> {
    let field = |x: f64| effective_field(step, &p.with_frame_shift(x), formula);
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (field(a)?, field(b)?);
    if fa.abs() < FIELD_TOL {
        return Ok((a, p.with_frame_shift(a)));
    }
    if fb.abs() < FIELD_TOL {
        return Ok((b, p.with_frame_shift(b)));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            field_lo: fa,
            field_hi: fb,
        });
    }
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let fm = field(mid)?;
        if fm.abs() < FIELD_TOL || b - a < f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok((mid, p.with_frame_shift(mid)))
}

/// `λ σ⊗σ` on (system atom, probe atom), qubit basis `|0> = |b>`, `|1> = |a>`.
///
/// In that basis the atomic `σz = |b><b| - |a><a|` is `diag(1, -1)` and
/// `σx = |a><b| + |b><a|` is the usual `X`; the atomic `σy` is `-Y`, which
/// leaves `σy⊗σy` unchanged.
pub fn effective_hamiltonian(step: StepId, coeffs: &EffectiveCoefficients) -> ComplexMatrix {
    let axis = match step {
        StepId::Step1 => pauli::x(),
        StepId::Step2 => pauli::y(),
        StepId::Step3 => pauli::z(),
    };
    kron(&axis, &axis).scale(c64(coeffs.lam, 0.0))
}

/// `(2n + 1) π / (4 λ)`. Even `n` realizes the factor `(I - iσσ)/√2`, odd
/// `n` its inverse.
pub fn gate_time(lam: f64, n: u32) -> Result<f64> {
    if lam == 0.0 || !lam.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gate time needs a finite nonzero coupling, got {lam}"
        )));
    }
    Ok((2 * n + 1) as f64 * PI / (4.0 * lam))
}

/// Earliest `t > 0` with `λ t ≡ π/4 (mod π)`, where `exp(-iλσσt)` equals
/// the factor up to global phase: `π/(4λ)` for `λ > 0`, `3π/(4|λ|)` for `λ < 0`.
pub fn first_realizing_time(lam: f64) -> Result<f64> {
    gate_time(lam.abs(), if lam > 0.0 { 0 } else { 1 })
}
