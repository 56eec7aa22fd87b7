//! Ideal three-step probe protocol for identifying a Bell diagonal state (BDS).
//!
//! Each step couples the BDS pair (qubits 1, 2) to a fresh probe qubit 3,
//! measures only the probe, and leaves the pair with two Bell components
//! exchanged. Running the same step again with another fresh probe swaps them
//! back, so the pair ends every step in its original state.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{
    c64, kron_all, partial_trace, pauli, trace_distance, ComplexMatrix, DensityMatrix, TensorSpace,
};

/// Tolerance on the normalization of Bell coefficients.
pub const SUM_TOL: f64 = 1e-12;

/// Mixing probabilities `c1..c4` of the four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BellCoefficients([f64; 4]);

impl BellCoefficients {
    pub fn new(c: [f64; 4]) -> Result<Self> {
        if let Some((i, x)) = c
            .iter()
            .enumerate()
            .find(|(_, &x)| !x.is_finite() || !(0.0..=1.0).contains(&x))
        {
            return Err(Error::InvalidCoefficients(format!(
                "c{} = {x} is not in [0, 1]",
                i + 1
            )));
        }
        let sum: f64 = c.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidCoefficients(format!(
                "coefficients sum to {sum}, not 1"
            )));
        }
        Ok(Self(c))
    }

    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn values(&self) -> [f64; 4] {
        self.0
    }

    /// `c_i` for `i` in `1..=4`.
    pub fn get(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &BellCoefficients) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// The three probe expectations `(M1, M2, M3)` this state produces.
    pub fn expected_measurements(&self) -> [f64; 3] {
        let [c1, c2, c3, c4] = self.0;
        [c1 + c3 - c2 - c4, c1 + c4 - c2 - c3, c1 + c2 - c3 - c4]
    }
}

impl TryFrom<[f64; 4]> for BellCoefficients {
    type Error = Error;

    fn try_from(c: [f64; 4]) -> Result<Self> {
        Self::new(c)
    }
}

impl From<BellCoefficients> for [f64; 4] {
    fn from(c: BellCoefficients) -> Self {
        c.0
    }
}

/// One of the three protocol steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepId {
    Step1,
    Step2,
    Step3,
}

impl StepId {
    pub const ALL: [StepId; 3] = [StepId::Step1, StepId::Step2, StepId::Step3];

    /// 1-based step number.
    pub fn number(self) -> usize {
        match self {
            StepId::Step1 => 1,
            StepId::Step2 => 2,
            StepId::Step3 => 3,
        }
    }

    pub fn from_number(n: usize) -> Result<Self> {
        match n {
            1 => Ok(StepId::Step1),
            2 => Ok(StepId::Step2),
            3 => Ok(StepId::Step3),
            _ => Err(Error::IndexOutOfRange {
                index: n,
                range: "1..=3",
            }),
        }
    }

    /// Observable measured on the probe after this step.
    pub fn probe_observable(self) -> ProbeObservable {
        match self {
            StepId::Step1 | StepId::Step2 => ProbeObservable::SigmaZ,
            StepId::Step3 => ProbeObservable::SigmaX,
        }
    }

    /// Initial probe ket: `|1>` for steps 1-2, `(|0> + |1>)/√2` for step 3.
    ///
    /// With the step unitaries as written, a `|1>` probe is flipped to `|0>`
    /// exactly by the Bell components counted positively in `M1`, `M2`, so
    /// `<σz> = M` with `σz = diag(1, -1)`.
    pub fn probe_ket(self) -> ComplexMatrix {
        match self {
            StepId::Step1 | StepId::Step2 => ComplexMatrix::column(&[c64(0.0, 0.0), c64(1.0, 0.0)]),
            StepId::Step3 => {
                ComplexMatrix::column(&[c64(FRAC_1_SQRT_2, 0.0), c64(FRAC_1_SQRT_2, 0.0)])
            }
        }
    }
}

/// Probe measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeObservable {
    SigmaZ,
    SigmaX,
}

impl ProbeObservable {
    /// Matrix in the `|0>, |1>` probe basis.
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            ProbeObservable::SigmaZ => pauli::z(),
            ProbeObservable::SigmaX => pauli::x(),
        }
    }
}

/// Bell state `|Ψ_i>` for `i` in `1..=4`, in the basis `|00>, |01>, |10>, |11>`.
///
/// `Ψ1 = (|10> + |01>)/√2`, `Ψ2 = (|10> - |01>)/√2`,
/// `Ψ3 = (|11> + |00>)/√2`, `Ψ4 = (|11> - |00>)/√2`.
pub fn bell_state(i: usize) -> Result<ComplexMatrix> {
    let s = FRAC_1_SQRT_2;
    let amps = match i {
        1 => [0.0, s, s, 0.0],
        2 => [0.0, -s, s, 0.0],
        3 => [s, 0.0, 0.0, s],
        4 => [-s, 0.0, 0.0, s],
        _ => {
            return Err(Error::IndexOutOfRange {
                index: i,
                range: "1..=4",
            })
        }
    };
    Ok(ComplexMatrix::column(&amps.map(|a| c64(a, 0.0))))
}

/// `Σ c_i |Ψ_i><Ψ_i|`.
pub fn bds_density(c: &BellCoefficients) -> DensityMatrix {
    let mut rho = ComplexMatrix::zeros(4, 4);
    for (i, &ci) in c.values().iter().enumerate() {
        let psi = bell_state(i + 1).expect("index in range");
        rho = &rho + &ComplexMatrix::projector(&psi).scale(c64(ci, 0.0));
    }
    DensityMatrix::new(rho).expect("convex mixture of projectors is a density matrix")
}

/// Three-qubit step unitary, qubit order (1, 2, probe 3), written out entry by entry.
pub fn build_step_unitary(step: StepId) -> ComplexMatrix {
    let o = c64(0.0, 0.0);
    match step {
        StepId::Step1 => {
            let (a, b, m) = (c64(0.5, 0.0), c64(0.0, -0.5), c64(-0.5, 0.0));
            #[rustfmt::skip]
            let rows = [
                [a, o, o, b, o, b, m, o],
                [o, a, b, o, b, o, o, m],
                [o, b, a, o, m, o, o, b],
                [b, o, o, a, o, m, b, o],
                [o, b, m, o, a, o, o, b],
                [b, o, o, m, o, a, b, o],
                [m, o, o, b, o, b, a, o],
                [o, m, b, o, b, o, o, a],
            ];
            ComplexMatrix::from_rows(&rows)
        }
        StepId::Step2 => {
            let (a, p, n, m) = (c64(0.5, 0.0), c64(0.0, 0.5), c64(0.0, -0.5), c64(-0.5, 0.0));
            #[rustfmt::skip]
            let rows = [
                [a, o, o, p, o, p, a, o],
                [o, a, n, o, n, o, o, a],
                [o, n, a, o, m, o, o, p],
                [p, o, o, a, o, m, n, o],
                [o, n, m, o, a, o, o, p],
                [p, o, o, m, o, a, n, o],
                [a, o, o, n, o, n, a, o],
                [o, a, p, o, p, o, o, a],
            ];
            ComplexMatrix::from_rows(&rows)
        }
        StepId::Step3 => {
            let (one, i) = (c64(1.0, 0.0), c64(0.0, 1.0));
            ComplexMatrix::from_diagonal(&[-i, i, one, one, one, one, i, -i])
        }
    }
}

/// Two-qubit factors `(u13, u23)` whose product reproduces the step unitary.
/// Both factors are the same matrix for every step.
pub fn build_bipartite_factors(step: StepId) -> (ComplexMatrix, ComplexMatrix) {
    let s = FRAC_1_SQRT_2;
    let o = c64(0.0, 0.0);
    let r = c64(s, 0.0);
    let u = match step {
        StepId::Step1 => {
            let n = c64(0.0, -s);
            ComplexMatrix::from_rows(&[[r, o, o, n], [o, r, n, o], [o, n, r, o], [n, o, o, r]])
        }
        StepId::Step2 => {
            let (p, n) = (c64(0.0, s), c64(0.0, -s));
            ComplexMatrix::from_rows(&[[r, o, o, p], [o, r, n, o], [o, n, r, o], [p, o, o, r]])
        }
        StepId::Step3 => {
            ComplexMatrix::from_diagonal(&[c64(s, -s), c64(s, s), c64(s, s), c64(s, -s)])
        }
    };
    (u.clone(), u)
}

/// Lifts a two-qubit gate acting on qubits `(first, second)` of a three-qubit register.
pub fn embed_two_qubit(gate: &ComplexMatrix, first: usize, second: usize) -> ComplexMatrix {
    let space = TensorSpace::qubits(3);
    let mut out = ComplexMatrix::zeros(8, 8);
    for row in 0..8 {
        let rd = space.digits(row);
        for col in 0..8 {
            let cd = space.digits(col);
            let spectator = (0..3)
                .find(|&q| q != first && q != second)
                .expect("3 qubits");
            if rd[spectator] != cd[spectator] {
                continue;
            }
            let gr = 2 * rd[first] + rd[second];
            let gc = 2 * cd[first] + cd[second];
            out.set(row, col, gate.get(gr, gc));
        }
    }
    out
}

/// `(u13 on qubits 1,3) · (u23 on qubits 2,3)` as an 8x8 matrix.
pub fn compose_bipartite_factors(step: StepId) -> ComplexMatrix {
    let (u13, u23) = build_bipartite_factors(step);
    &embed_two_qubit(&u13, 0, 2) * &embed_two_qubit(&u23, 1, 2)
}

/// Artifacts of one protocol step.
#[derive(Debug, Clone)]
pub struct ProtocolStepReport {
    pub step: StepId,
    /// Reduced state of the probe after the step unitary.
    pub probe_state: DensityMatrix,
    /// `tr(observable · probe_state)`.
    pub m_value: f64,
    /// Reduced state of qubits 1, 2 after the step.
    pub post_bds: DensityMatrix,
    pub probe_basis: ProbeObservable,
}

/// Couples `rho12` to a fresh probe, applies the step unitary and reports the
/// probe and pair reduced states.
pub fn apply_step(rho12: &DensityMatrix, step: StepId) -> Result<ProtocolStepReport> {
    if rho12.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit state must be 4x4, got {}x{}",
            rho12.dim(),
            rho12.dim()
        )));
    }
    let probe = ComplexMatrix::projector(&step.probe_ket());
    let joint = kron_all(&[rho12.matrix(), &probe]);
    let u = build_step_unitary(step);
    let evolved = u.conjugate(&joint)?;
    let space = TensorSpace::qubits(3);
    let probe_state = DensityMatrix::new(partial_trace(&evolved, &space, &[2])?)?;
    let post_bds = DensityMatrix::new(partial_trace(&evolved, &space, &[0, 1])?)?;
    let probe_basis = step.probe_observable();
    let m_value = probe_state.expectation(&probe_basis.matrix());
    Ok(ProtocolStepReport {
        step,
        probe_state,
        m_value,
        post_bds,
        probe_basis,
    })
}

/// Repeats the step on the post-step pair with a new probe. Returns the
/// restored pair state and the report of the repeated step.
pub fn recovery_pass(report: &ProtocolStepReport) -> Result<(DensityMatrix, ProtocolStepReport)> {
    let second = apply_step(&report.post_bds, report.step)?;
    Ok((second.post_bds.clone(), second))
}

/// Coefficients recovered from the three probe expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub coefficients: BellCoefficients,
    /// Set when the linear inversion left the simplex and was projected back.
    pub projected: bool,
}

/// Inverts `M1 = c1+c3-c2-c4`, `M2 = c1+c4-c2-c3`, `M3 = c1+c2-c3-c4`
/// together with `Σc = 1`.
pub fn recover_coefficients(m1: f64, m2: f64, m3: f64) -> Result<Inversion> {
    for (name, v) in [("M1", m1), ("M2", m2), ("M3", m3)] {
        if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
            return Err(Error::ExpectationOutOfRange { name, value: v });
        }
    }
    let raw = [
        (1.0 + m1 + m2 + m3) / 4.0,
        (1.0 - m1 - m2 + m3) / 4.0,
        (1.0 + m1 - m2 - m3) / 4.0,
        (1.0 - m1 + m2 - m3) / 4.0,
    ];
    if raw.iter().all(|&c| c >= 0.0) {
        if let Ok(coefficients) = BellCoefficients::new(raw) {
            return Ok(Inversion {
                coefficients,
                projected: false,
            });
        }
    }
    let projected = project_to_simplex(&raw);
    Ok(Inversion {
        coefficients: BellCoefficients::new(projected)?,
        projected: true,
    })
}

/// Euclidean projection onto `{c >= 0, Σc = 1}` (sort-and-threshold).
pub fn project_to_simplex(v: &[f64; 4]) -> [f64; 4] {
    if v.iter().all(|&x| x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() <= SUM_TOL {
        return *v;
    }
    let mut sorted = *v;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    let mut out = v.map(|x| (x - theta).max(0.0));
    // Remove rounding residue so the result passes the normalization check.
    let sum: f64 = out.iter().sum();
    if sum > 0.0 {
        out.iter_mut().for_each(|x| *x /= sum);
    }
    out
}

/// Outcome of the full ideal pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct IdentificationResult {
    pub m: [f64; 3],
    pub recovered: BellCoefficients,
    /// Trace distance between the input BDS and the pair after all recovery passes.
    pub residual_trace_distance: f64,
}

/// Runs steps 1-3, each followed by its recovery pass, on `bds_density(c)`.
pub fn run_ideal_identification(c: &BellCoefficients) -> Result<IdentificationResult> {
    let original = bds_density(c);
    let mut current = original.clone();
    let mut m = [0.0; 3];
    for step in StepId::ALL {
        let report = apply_step(&current, step)?;
        m[step.number() - 1] = report.m_value;
        let (restored, _) = recovery_pass(&report)?;
        current = restored;
    }
    let recovered = recover_coefficients(clamp_unit(m[0]), clamp_unit(m[1]), clamp_unit(m[2]))?;
    Ok(IdentificationResult {
        m,
        recovered: recovered.coefficients,
        residual_trace_distance: trace_distance(&original, &current)?,
    })
}

// Exact expectations can overshoot ±1 by an ulp.
fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}
