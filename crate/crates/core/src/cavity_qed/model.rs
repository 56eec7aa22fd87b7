use num_complex::Complex64;

use super::params::CavityParams;
use crate::qlinalg::{c64, ComplexMatrix, Generator};

/// Atomic level indices within one atom's three-dimensional factor.
pub const LEVEL_A: usize = 0;
pub const LEVEL_B: usize = 1;
pub const LEVEL_E: usize = 2;

/// Level encoding qubit value `q`: `|0> = |b>`, `|1> = |a>`.
pub fn qubit_level(q: usize) -> usize {
    [LEVEL_B, LEVEL_A][q]
}

/// Index layout of the `[3 (system atom), 3 (probe atom), photon_cutoff]` space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullSpace {
    pub photon_cutoff: usize,
}

impl FullSpace {
    pub fn dim(&self) -> usize {
        9 * self.photon_cutoff
    }

    pub fn index(&self, system: usize, probe: usize, photons: usize) -> usize {
        (system * 3 + probe) * self.photon_cutoff + photons
    }

    /// Full-space index of the two-qubit basis state `|q_system q_probe>` with
    /// an empty cavity.
    pub fn qubit_index(&self, two_qubit: usize) -> usize {
        self.index(qubit_level(two_qubit >> 1), qubit_level(two_qubit & 1), 0)
    }
}

/// `amplitude · e^{i frequency t} · Σ weight |row><col|` plus its adjoint.
#[derive(Debug, Clone)]
struct DrivenTerm {
    amplitude: f64,
    frequency: f64,
    entries: Vec<(usize, usize, f64)>,
}

/// Rotating-frame generator of two driven atoms sharing one cavity mode:
///
/// `Σ_j δ1 |b><b|_j + (Ω_a e^{iΔ_a t} + g_a a e^{iδ_a t}) |e><a|_j
///      + (Ω_b e^{iΔ_b t} + g_b a e^{iδ_b t}) |e><b|_j + h.c.`
#[derive(Debug, Clone)]
pub struct CavityGenerator {
    space: FullSpace,
    diagonal: Vec<f64>,
    terms: Vec<DrivenTerm>,
    max_frequency: f64,
}

impl CavityGenerator {
    pub fn new(p: &CavityParams) -> Self {
        let space = FullSpace {
            photon_cutoff: p.photon_cutoff,
        };
        let n_ph = p.photon_cutoff;
        let mut diagonal = vec![0.0; space.dim()];
        for s in 0..3 {
            for q in 0..3 {
                let count = (s == LEVEL_B) as u8 + (q == LEVEL_B) as u8;
                for n in 0..n_ph {
                    diagonal[space.index(s, q, n)] = p.frame_shift * count as f64;
                }
            }
        }

        let channels = [
            (
                LEVEL_A,
                p.rabi_a,
                p.laser_detuning_a,
                p.coupling_a,
                p.cavity_detuning_a,
            ),
            (
                LEVEL_B,
                p.rabi_b,
                p.laser_detuning_b,
                p.coupling_b,
                p.cavity_detuning_b,
            ),
        ];
        let mut terms = Vec::new();
        for probe_atom in [false, true] {
            // (ground, spectator, photons) -> full index with the driven atom in `level`.
            let at = |level: usize, other: usize, n: usize| {
                if probe_atom {
                    space.index(other, level, n)
                } else {
                    space.index(level, other, n)
                }
            };
            for &(ground, rabi, laser_detuning, coupling, cavity_detuning) in &channels {
                let mut laser = Vec::new();
                let mut cavity = Vec::new();
                for other in 0..3 {
                    for n in 0..n_ph {
                        laser.push((at(LEVEL_E, other, n), at(ground, other, n), 1.0));
                        if n >= 1 {
                            cavity.push((
                                at(LEVEL_E, other, n - 1),
                                at(ground, other, n),
                                (n as f64).sqrt(),
                            ));
                        }
                    }
                }
                terms.push(DrivenTerm {
                    amplitude: rabi,
                    frequency: laser_detuning,
                    entries: laser,
                });
                terms.push(DrivenTerm {
                    amplitude: coupling,
                    frequency: cavity_detuning,
                    entries: cavity,
                });
            }
        }
        terms.retain(|t| t.amplitude != 0.0);

        Self {
            space,
            diagonal,
            terms,
            max_frequency: p.max_detuning(),
        }
    }

    pub fn space(&self) -> FullSpace {
        self.space
    }

    /// Dense matrix at time `t`.
    pub fn matrix_at(&self, t: f64) -> ComplexMatrix {
        let n = self.space.dim();
        let mut m = ComplexMatrix::from_diagonal(
            &self
                .diagonal
                .iter()
                .map(|&d| c64(d, 0.0))
                .collect::<Vec<_>>(),
        );
        for term in &self.terms {
            let phase = Complex64::from_polar(term.amplitude, term.frequency * t);
            for &(r, c, w) in &term.entries {
                m.set(r, c, m.get(r, c) + phase * w);
                m.set(c, r, m.get(c, r) + phase.conj() * w);
            }
        }
        debug_assert_eq!(m.rows(), n);
        m
    }
}

impl Generator for CavityGenerator {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn apply(&self, t: f64, v: &[Complex64], out: &mut [Complex64]) {
        self.apply_block(t, v, out);
    }

    fn apply_block(&self, t: f64, block: &[Complex64], out: &mut [Complex64]) {
        let n = self.space.dim();
        let phases: Vec<Complex64> = self
            .terms
            .iter()
            .map(|term| Complex64::from_polar(term.amplitude, term.frequency * t))
            .collect();
        for (v, o) in block.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            for k in 0..n {
                o[k] = v[k] * self.diagonal[k];
            }
            for (term, &phase) in self.terms.iter().zip(&phases) {
                let back = phase.conj();
                for &(r, c, w) in &term.entries {
                    o[r] += phase * (v[c] * w);
                    o[c] += back * (v[r] * w);
                }
            }
        }
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

/// Dense rotating-frame Hamiltonian at time `t`.
pub fn full_hamiltonian(p: &CavityParams, t: f64) -> ComplexMatrix {
    CavityGenerator::new(p).matrix_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell_protocol::StepId;
    use crate::cavity_qed::CavityBase;
    use crate::qlinalg::{kron_all, ComplexMatrix};

    fn params() -> CavityParams {
        CavityBase::fig2(StepId::Step1)
            .params_for_step(StepId::Step1)
            .unwrap()
            .with_frame_shift(0.013)
    }

    fn ket_bra(dim: usize, i: usize, j: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.set(i, j, c64(1.0, 0.0));
        m
    }

    /// Same Hamiltonian assembled from Kronecker products of single-factor operators.
    fn kron_oracle(p: &CavityParams, t: f64) -> ComplexMatrix {
        let n_ph = p.photon_cutoff;
        let i3 = ComplexMatrix::identity(3);
        let iph = ComplexMatrix::identity(n_ph);
        let mut annihilate = ComplexMatrix::zeros(n_ph, n_ph);
        for n in 1..n_ph {
            annihilate.set(n - 1, n, c64((n as f64).sqrt(), 0.0));
        }
        let mut h = ComplexMatrix::zeros(9 * n_ph, 9 * n_ph);
        for atom in 0..2 {
            let lift = |op: &ComplexMatrix, field: &ComplexMatrix| {
                if atom == 0 {
                    kron_all(&[op, &i3, field])
                } else {
                    kron_all(&[&i3, op, field])
                }
            };
            h = &h + &lift(&ket_bra(3, LEVEL_B, LEVEL_B), &iph).scale(c64(p.frame_shift, 0.0));
            for (ground, rabi, ld, g, cd) in [
                (
                    LEVEL_A,
                    p.rabi_a,
                    p.laser_detuning_a,
                    p.coupling_a,
                    p.cavity_detuning_a,
                ),
                (
                    LEVEL_B,
                    p.rabi_b,
                    p.laser_detuning_b,
                    p.coupling_b,
                    p.cavity_detuning_b,
                ),
            ] {
                let raise = ket_bra(3, LEVEL_E, ground);
                let drive = lift(&raise, &iph).scale(Complex64::from_polar(rabi, ld * t));
                let cav = lift(&raise, &annihilate).scale(Complex64::from_polar(g, cd * t));
                let up = &drive + &cav;
                h = &h + &up;
                h = &h + &up.adjoint();
            }
        }
        h
    }

    #[test]
    fn matches_kronecker_oracle() {
        let p = params();
        for t in [0.0, 0.37, 12.5] {
            let diff = full_hamiltonian(&p, t).max_abs_diff(&kron_oracle(&p, t));
            assert!(diff < 1e-13, "t = {t}: {diff}");
        }
    }

    #[test]
    fn hermitian_at_random_times() {
        let p = params().with_photon_cutoff(4);
        for t in [0.0, 1.1, 77.7, 1234.5] {
            assert!(full_hamiltonian(&p, t).hermiticity_error() < 1e-14);
        }
    }

    #[test]
    fn undriven_model_is_diagonal_frame_shift() {
        let mut p = params();
        p.rabi_a = 0.0;
        p.rabi_b = 0.0;
        p.coupling_a = 0.0;
        p.coupling_b = 0.0;
        let h = full_hamiltonian(&p, 0.0);
        let space = FullSpace {
            photon_cutoff: p.photon_cutoff,
        };
        for s in 0..3 {
            for q in 0..3 {
                for n in 0..p.photon_cutoff {
                    let i = space.index(s, q, n);
                    let expected = 0.013 * ((s == LEVEL_B) as u8 + (q == LEVEL_B) as u8) as f64;
                    assert!((h.get(i, i).re - expected).abs() < 1e-15);
                }
            }
        }
        assert!(
            (&h - &ComplexMatrix::from_diagonal(
                &(0..h.rows()).map(|i| h.get(i, i)).collect::<Vec<_>>()
            ))
                .max_abs()
                == 0.0
        );
    }

    #[test]
    fn photon_ladder_elements() {
        let p = params().with_photon_cutoff(4);
        let t = 0.9;
        let h = full_hamiltonian(&p, t);
        let space = FullSpace { photon_cutoff: 4 };
        for n in 1..4 {
            let expected =
                Complex64::from_polar(p.coupling_a * (n as f64).sqrt(), p.cavity_detuning_a * t);
            let got = h.get(
                space.index(LEVEL_E, LEVEL_B, n - 1),
                space.index(LEVEL_A, LEVEL_B, n),
            );
            assert!((got - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let p = params();
        let g = CavityGenerator::new(&p);
        let n = g.dim();
        let v: Vec<Complex64> = (0..2 * n)
            .map(|k| c64((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let mut out = vec![c64(0.0, 0.0); 2 * n];
        g.apply_block(3.3, &v, &mut out);
        let dense = g.matrix_at(3.3);
        for col in 0..2 {
            let x = ComplexMatrix::column(&v[col * n..(col + 1) * n]);
            let y = &dense * &x;
            for k in 0..n {
                assert!((y.get(k, 0) - out[col * n + k]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn qubit_encoding() {
        let space = FullSpace { photon_cutoff: 3 };
        assert_eq!(space.qubit_index(0), space.index(LEVEL_B, LEVEL_B, 0));
        assert_eq!(space.qubit_index(1), space.index(LEVEL_B, LEVEL_A, 0));
        assert_eq!(space.qubit_index(3), space.index(LEVEL_A, LEVEL_A, 0));
    }
}
