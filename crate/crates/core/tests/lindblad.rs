mod common;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rydqec::lindblad::{
    apply_phase_correction, apply_rydberg_removal, apply_virtual_z, build_hamiltonian,
    closed_propagator, evolve_master_equation, AtomRegister, Blockade, DensityOperator,
    DriveSchedule, Integrator,
};
use rydqec::pulse::{full_propagator, reference_pi_2pi_pi, ControlWaveform, GateKind};
use rydqec::twirl::{ReadoutVariant, VariantId};

const R: u8 = 2;

fn cz_register() -> AtomRegister {
    AtomRegister::stabilizer(1, Blockade::Infinite)
}

fn cz_schedule() -> DriveSchedule {
    DriveSchedule::sequential(vec![(reference_pi_2pi_pi(GateKind::Cz), 0, vec![1])])
}

/// Random density operator on two atoms with no weight on `|r r>`, which
/// the infinite blockade projects out.
fn allowed_density(seed: u64) -> DensityOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = common::random_density(9, &mut rng);
    let rr = DensityOperator::index(&[R, R]);
    for k in 0..9 {
        m[(rr, k)] = C::new(0.0, 0.0);
        m[(k, rr)] = C::new(0.0, 0.0);
    }
    let tr = m.trace();
    DensityOperator::from_matrix(2, m / tr).unwrap()
}

#[test]
fn undriven_hamiltonian_vanishes() {
    let mut w = ControlWaveform::resonant(3, 2.0);
    w.measurement.amplitude = vec![0.0; 3];
    w.data.amplitude = vec![0.0; 3];
    let s = DriveSchedule::sequential(vec![(w, 0, vec![1, 2])]);
    let h = build_hamiltonian(&AtomRegister::stabilizer(2, Blockade::Infinite), &s, 1.0).unwrap();
    assert_eq!(h.norm(), 0.0);
}

#[test]
fn blockade_removes_couplings_into_double_excitation() {
    let reg = cz_register();
    let h = build_hamiltonian(&reg, &cz_schedule(), 0.5).unwrap();
    let from = DensityOperator::index(&[1, R]);
    let to = DensityOperator::index(&[R, R]);
    assert_eq!(h[(to, from)].norm(), 0.0);
    // The measurement drive is on during the first stage.
    let plain = DensityOperator::index(&[1, 0]);
    let up = DensityOperator::index(&[R, 0]);
    assert!(h[(up, plain)].norm() > 0.1);
}

#[test]
fn large_finite_blockade_approaches_infinite() {
    let w = reference_pi_2pi_pi(GateKind::Cz2);
    let s = DriveSchedule::sequential(vec![(w, 0, vec![1, 2])]);
    let inf = closed_propagator(&AtomRegister::stabilizer(2, Blockade::Infinite), &s).unwrap();
    let fin = closed_propagator(&AtomRegister::stabilizer(2, Blockade::Finite(1e6)), &s).unwrap();
    // Compare on the computational inputs, which never start blockaded.
    let mut worst: f64 = 0.0;
    for bits in 0..8u8 {
        let levels = [(bits >> 2) & 1, (bits >> 1) & 1, bits & 1];
        let j = DensityOperator::index(&levels);
        worst = worst.max((inf.column(j) - fin.column(j)).norm());
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn closed_limit_matches_the_pulse_propagator() {
    let w = reference_pi_2pi_pi(GateKind::Cz2);
    let reg = AtomRegister::stabilizer(2, Blockade::Infinite);
    let s = DriveSchedule::sequential(vec![(w.clone(), 0, vec![1, 2])]);
    let u = full_propagator(&w, GateKind::Cz2).unwrap();
    for start in [[1u8, 0, 1], [0, 1, 1], [1, 1, 1]] {
        let rho = evolve_master_equation(
            &DensityOperator::pure(&start),
            &reg,
            &s,
            0.0,
            &Integrator::default(),
        )
        .unwrap();
        // Expected output from the gate-space propagator, embedded.
        let col = u.matrix.column(u.index_of(&start).unwrap());
        let mut psi = nalgebra::DVector::<C>::zeros(27);
        for (i, levels) in u.levels.iter().enumerate() {
            psi[DensityOperator::index(levels)] = col[i];
        }
        let expected = &psi * psi.adjoint();
        let td = common::trace_distance(&rho.matrix, &expected);
        assert!(td < 1e-8, "{start:?}: {td}");
    }
}

#[test]
fn decay_of_an_undriven_atom() {
    let reg = AtomRegister::new(vec![rydqec::pulse::Role::Measurement], vec![]).unwrap();
    let mut w = ControlWaveform::resonant(4, 3.0);
    w.measurement.amplitude = vec![0.0; 4];
    w.data.amplitude = vec![0.0; 4];
    let s = DriveSchedule::sequential(vec![(w, 0, vec![])]);
    for gamma in [0.01, 0.2, 1.0] {
        let rho = evolve_master_equation(&DensityOperator::pure(&[R]), &reg, &s, gamma, &Integrator::default())
            .unwrap();
        let ground = 1.0 - (-gamma * 3.0f64).exp();
        assert!((rho.matrix[(0, 0)].re - ground / 2.0).abs() < 1e-9);
        assert!((rho.matrix[(1, 1)].re - ground / 2.0).abs() < 1e-9);
        assert!((rho.matrix[(2, 2)].re - (1.0 - ground)).abs() < 1e-9);
    }
}

#[test]
fn step_halving_check_passes_for_smooth_drives() {
    let strict = Integrator {
        max_step: None,
        validate: true,
        tolerance: 1e-8,
    };
    evolve_master_equation(&allowed_density(3), &cz_register(), &cz_schedule(), 0.05, &strict).unwrap();
}

#[test]
fn removal_without_rydberg_weight_is_identity() {
    let rho = DensityOperator::outer(&[0, 1], &[1, 1]);
    assert_eq!(apply_rydberg_removal(&rho), rho);
}

#[test]
fn removal_resets_rydberg_atoms_half_and_half() {
    let out = apply_rydberg_removal(&DensityOperator::pure(&[R]));
    assert!((out.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
    assert!((out.matrix[(1, 1)].re - 0.5).abs() < 1e-15);
    assert_eq!(out.matrix[(2, 2)].norm(), 0.0);
    let coherence = apply_rydberg_removal(&DensityOperator::outer(&[0], &[R]));
    assert_eq!(coherence.matrix.norm(), 0.0);
}

#[test]
fn virtual_z_examples() {
    let reg = cz_register();
    let rho = allowed_density(7);
    let same = apply_virtual_z(&rho, &reg, 0.0, 0.0);
    assert!((same.matrix - &rho.matrix).norm() < 1e-15);
    let diag = DensityOperator::from_matrix(2, DMatrix::from_diagonal(&rho.matrix.diagonal())).unwrap();
    let rotated = apply_virtual_z(&diag, &reg, 0.4, -1.3);
    assert!((rotated.matrix - &diag.matrix).norm() < 1e-15);
}

// With the reference pulses both CZ2 windows leave a phase pi on every atom.
// Removal and the phase correction must then leave exactly the ideal
// controlled-Z action on the qubits.
#[test]
fn noiseless_bulk_readout_is_the_ideal_gate() {
    let v = ReadoutVariant::build(VariantId::BulkCz2, &common::reference_pulses()).unwrap();
    let n = v.qubits();
    let d = 1usize << n;
    let amp = C::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut psi = nalgebra::DVector::<C>::zeros(3usize.pow(n as u32));
    let mut ideal = nalgebra::DVector::<C>::zeros(psi.len());
    for bits in 0..d as u64 {
        let levels: Vec<u8> = (0..n).map(|q| ((bits >> q) & 1) as u8).collect();
        let i = DensityOperator::index(&levels);
        psi[i] = amp;
        ideal[i] = amp * v.ideal_sign(bits);
    }
    let rho0 = DensityOperator::from_matrix(n, &psi * psi.adjoint()).unwrap();
    let out = evolve_master_equation(&rho0, &v.register, &v.schedule, 0.0, &Integrator::default()).unwrap();
    let out = apply_phase_correction(&apply_rydberg_removal(&out), &v.phase_correction);
    let td = common::trace_distance(&out.matrix, &(&ideal * ideal.adjoint()));
    assert!(td < 1e-7, "{td}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn evolution_preserves_trace(seed in any::<u64>(), gamma in 0.0f64..0.5) {
        let rho0 = allowed_density(seed);
        let out = evolve_master_equation(&rho0, &cz_register(), &cz_schedule(), gamma, &Integrator::default()).unwrap();
        prop_assert!((out.trace() - rho0.trace()).norm() < 1e-9);
        prop_assert!(out.hermiticity_error() < 1e-9);
        prop_assert!(out.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn evolution_is_linear(a in any::<u64>(), b in any::<u64>(), w in 0.0f64..1.0) {
        let (r1, r2) = (allowed_density(a), allowed_density(b));
        let run = |r: &DensityOperator| {
            evolve_master_equation(r, &cz_register(), &cz_schedule(), 0.1, &Integrator::default()).unwrap().matrix
        };
        let mixed = DensityOperator::from_matrix(2, r1.matrix.scale(w) + r2.matrix.scale(1.0 - w)).unwrap();
        let err = (run(&mixed) - (run(&r1).scale(w) + run(&r2).scale(1.0 - w))).norm();
        prop_assert!(err < 1e-12, "{}", err);
    }

    #[test]
    fn removal_keeps_trace_and_clears_rydberg(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityOperator::from_matrix(2, common::random_density(9, &mut rng)).unwrap();
        let out = apply_rydberg_removal(&rho);
        prop_assert!((out.trace() - rho.trace()).norm() < 1e-12);
        prop_assert!((out.qubit_trace() - rho.trace()).norm() < 1e-12);
    }
}
