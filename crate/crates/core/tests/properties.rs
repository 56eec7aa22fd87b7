//! Property tests for the linear algebra, the protocol and the sampler.

use std::f64::consts::PI;

use bellprobe::bell_protocol::{
    apply_step, bds_density, build_bipartite_factors, project_to_simplex, recover_coefficients,
    run_ideal_identification, BellCoefficients, StepId,
};
use bellprobe::cavity_qed::{effective_hamiltonian, gate_time, EffectiveCoefficients};
use bellprobe::qlinalg::{
    c64, evolve_timedep, gate_fidelity_phase_invariant, kron, matexp_unitary, partial_trace,
    trace_distance, ComplexMatrix, DensityMatrix, TensorSpace,
};
use bellprobe::shot_sampler::{estimate, ShotPlan};
use proptest::prelude::*;

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        ComplexMatrix::new(
            rows,
            cols,
            v.into_iter().map(|(re, im)| c64(re, im)).collect(),
        )
        .unwrap()
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(dim, dim).prop_map(|a| (&a + &a.adjoint()).scale(c64(0.5, 0.0)))
}

/// `A A† / tr(A A†)` is a valid density matrix for any nonzero `A`.
fn density(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    complex_matrix(dim, dim)
        .prop_filter("nonzero", |a| a.max_abs() > 1e-3)
        .prop_map(|a| {
            let m = &a * &a.adjoint();
            let tr = m.trace().re;
            DensityMatrix::new(m.scale(c64(1.0 / tr, 0.0))).unwrap()
        })
}

fn coefficients() -> impl Strategy<Value = BellCoefficients> {
    prop::array::uniform4(1e-6f64..1.0).prop_map(|w| {
        let s: f64 = w.iter().sum();
        BellCoefficients::new(w.map(|x| x / s)).unwrap()
    })
}

fn step() -> impl Strategy<Value = StepId> {
    prop::sample::select(StepId::ALL.to_vec())
}

proptest! {
    #[test]
    fn kron_is_associative(
        a in complex_matrix(2, 2),
        b in complex_matrix(3, 2),
        c in complex_matrix(2, 3),
    ) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace(rho in density(12), keep in 0usize..3) {
        let space = TensorSpace::new(vec![2, 3, 2]).unwrap();
        let reduced = partial_trace(rho.matrix(), &space, &[keep]).unwrap();
        prop_assert!((reduced.trace() - rho.matrix().trace()).norm() < 1e-12);
        prop_assert!(reduced.hermiticity_error() < 1e-12);
    }

    #[test]
    fn matexp_of_hermitian_is_unitary(h in hermitian(6), t in -3.0f64..3.0) {
        let u = matexp_unitary(&h, t).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(a in density(4), b in density(4), c in density(4)) {
        let ab = trace_distance(&a, &b).unwrap();
        let ba = trace_distance(&b, &a).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn recovered_coefficients_round_trip(c in coefficients()) {
        let [m1, m2, m3] = c.expected_measurements();
        let inv = recover_coefficients(m1, m2, m3).unwrap();
        prop_assert!(inv.coefficients.max_abs_diff(&c) < 1e-12);
    }

    #[test]
    fn identification_leaves_pair_unchanged(c in coefficients()) {
        let result = run_ideal_identification(&c).unwrap();
        prop_assert!(result.residual_trace_distance < 1e-10);
        prop_assert!(result.recovered.max_abs_diff(&c) < 1e-12);
    }

    #[test]
    fn probe_expectation_matches_measurement_equation(c in coefficients(), s in step()) {
        let report = apply_step(&bds_density(&c), s).unwrap();
        let expected = c.expected_measurements()[s.number() - 1];
        prop_assert!((report.m_value - expected).abs() < 1e-12);
        prop_assert!(report.probe_state.matrix().hermiticity_error() < 1e-12);
    }

    #[test]
    fn post_step_state_is_bell_diagonal_with_same_spectrum(c in coefficients(), s in step()) {
        let report = apply_step(&bds_density(&c), s).unwrap();
        let post = report.post_bds.matrix();
        let mut before: Vec<f64> = c.values().to_vec();
        let mut after: Vec<f64> = (1..=4)
            .map(|i| {
                let psi = bellprobe::bell_protocol::bell_state(i).unwrap();
                (&(&psi.adjoint() * post) * &psi).get(0, 0).re
            })
            .collect();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_projection_is_idempotent(v in prop::array::uniform4(-1.0f64..1.5)) {
        let once = project_to_simplex(&v);
        let twice = project_to_simplex(&once);
        prop_assert!((once.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(once.iter().all(|x| *x >= 0.0));
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn effective_coupling_alternates_factor_and_inverse(
        lam in prop_oneof![1e-4f64..1.0, -1.0f64..-1e-4],
        s in step(),
        n in 0u32..4,
    ) {
        let coeffs = EffectiveCoefficients { step: s, j1: 0.0, j2: 0.0, b_field: 0.0, lam };
        let h = effective_hamiltonian(s, &coeffs);
        let u = matexp_unitary(&h, gate_time(lam.abs(), n).unwrap()).unwrap();
        let (target, _) = build_bipartite_factors(s);
        // Negative coupling and odd n each invert the rotation.
        let inverted = (lam < 0.0) != (n % 2 == 1);
        let u = if inverted { u.adjoint() } else { u };
        prop_assert!(gate_fidelity_phase_invariant(&target, &u).unwrap() > 1.0 - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn integrator_matches_matrix_exponential(
        // Entries have modulus <= √2, so this scaling keeps the row-sum norm <= 5.
        h in hermitian(8).prop_map(|h| h.scale(c64(5.0 / (8.0 * 2f64.sqrt()), 0.0))),
        t in 0.05f64..1.0,
        psi in complex_matrix(8, 1).prop_filter("nonzero", |v| v.max_abs() > 1e-2),
    ) {
        let norm = psi.trace_product(&psi.adjoint()).re.sqrt();
        let psi = psi.scale(c64(1.0 / norm, 0.0));
        let traj = evolve_timedep(&h, &psi, &[0.0, t], 1e-4).unwrap();
        let exact = &matexp_unitary(&h, t).unwrap() * &psi;
        prop_assert!(traj.states[1].max_abs_diff(&exact) < 1e-8);
    }

    #[test]
    fn sampler_is_deterministic_per_seed(c in coefficients(), seed in any::<u64>()) {
        let plan = ShotPlan::new(5_000, seed).unwrap();
        prop_assert_eq!(estimate(&c, &plan).unwrap(), estimate(&c, &plan).unwrap());
    }
}

#[test]
fn sampler_mean_is_unbiased() {
    let c = BellCoefficients::new([0.4, 0.3, 0.2, 0.1]).unwrap();
    let runs = 200;
    let mut mean = [0.0; 4];
    let mut se = [0.0; 4];
    for seed in 0..runs {
        let report = estimate(&c, &ShotPlan::new(10_000, seed).unwrap()).unwrap();
        for (m, c) in mean.iter_mut().zip(report.c_hat.values()) {
            *m += c / runs as f64;
        }
        se = report.std_err;
    }
    for i in 0..4 {
        // Standard error of a 200-run mean; allow four of them.
        let tol = 4.0 * se[i] / (runs as f64).sqrt();
        assert!(
            (mean[i] - c.values()[i]).abs() < tol,
            "c{} mean {}",
            i + 1,
            mean[i]
        );
    }
}

#[test]
fn sampler_error_bars_cover_truth() {
    let c = BellCoefficients::new([0.35, 0.25, 0.25, 0.15]).unwrap();
    let runs = 500;
    let mut covered = 0;
    for seed in 0..runs {
        let report = estimate(&c, &ShotPlan::new(20_000, 1_000 + seed).unwrap()).unwrap();
        let inside = (0..4)
            .all(|i| (report.c_hat.values()[i] - c.values()[i]).abs() <= 3.0 * report.std_err[i]);
        covered += inside as usize;
    }
    assert!(
        covered * 100 >= 98 * runs as usize,
        "covered {covered}/{runs}"
    );
}

#[test]
fn quarter_turn_phase_is_exact() {
    // exp(-i π/4 σσ) equals the factor with no extra phase.
    let (target, _) = build_bipartite_factors(StepId::Step1);
    let h = kron(
        &bellprobe::qlinalg::pauli::x(),
        &bellprobe::qlinalg::pauli::x(),
    );
    let u = matexp_unitary(&h, PI / 4.0).unwrap();
    assert!(u.max_abs_diff(&target) < 1e-12);
}
