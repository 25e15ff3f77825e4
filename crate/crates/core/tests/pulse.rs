mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use rydqec::pulse::{
    self, evaluate_fidelity, evaluate_with_phases, full_propagator, reference_pi_2pi_pi,
    rydberg_occupation_times, ControlWaveform, GateKind, Parametrization, PulseError,
    SynthConfig,
};

fn dark(segments: usize, duration: f64) -> ControlWaveform {
    let mut w = ControlWaveform::resonant(segments, duration);
    w.measurement.amplitude.iter_mut().for_each(|a| *a = 0.0);
    w.data.amplitude.iter_mut().for_each(|a| *a = 0.0);
    w
}

#[test]
fn idle_waveform_is_not_the_gate() {
    for kind in [GateKind::Cz2, GateKind::Cz] {
        let inf = evaluate_fidelity(&dark(10, 5.0), kind).unwrap();
        assert!(inf > 0.1, "{kind}: {inf}");
    }
}

#[test]
fn idle_waveform_never_excites() {
    let (m, d) = rydberg_occupation_times(&dark(20, 7.0), GateKind::Cz2).unwrap();
    assert_eq!((m, d), (0.0, 0.0));
}

// Reference pulse occupation, worked out by hand. The measurement atom is in
// |1> for half of the basis states; then it spends half of each pi stage
// and all of the 2pi stage in |r>, i.e. 3 pi. A data atom only moves when
// the measurement atom is in |0> and it starts in |1> (a quarter of the
// states) and then spends half of its 2pi rotation, pi, in |r>.
#[test]
fn reference_occupation_matches_hand_count() {
    let w = reference_pi_2pi_pi(GateKind::Cz2);
    let (m, d) = rydberg_occupation_times(&w, GateKind::Cz2).unwrap();
    assert!((m - 1.5 * PI).abs() < 1e-9, "{m}");
    assert!((d - 2.0 * 0.25 * PI).abs() < 1e-9, "{d}");
    let (m, d) = rydberg_occupation_times(&w, GateKind::Cz).unwrap();
    assert!((m - 1.5 * PI).abs() < 1e-9, "{m}");
    assert!((d - 0.25 * PI).abs() < 1e-9, "{d}");
}

#[test]
fn reference_pulse_leaves_ground_state_alone() {
    let p = full_propagator(&reference_pi_2pi_pi(GateKind::Cz2), GateKind::Cz2).unwrap();
    let i = p.index_of(&[0, 0, 0]).unwrap();
    let col = p.matrix.column(i);
    assert!((col[i].norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn reference_pulse_is_the_gate_up_to_single_qubit_phases() {
    let r = evaluate_with_phases(&reference_pi_2pi_pi(GateKind::Cz2), GateKind::Cz2).unwrap();
    assert!(r.infidelity < 1e-6, "{}", r.infidelity);
    // The phase pi on each atom is the identity up to sign wrapping.
    assert!((r.theta_m.abs() - PI).abs() < 1e-6, "{}", r.theta_m);
    assert!((r.theta_d.abs() - PI).abs() < 1e-6, "{}", r.theta_d);
}

#[test]
fn swapping_the_role_tracks_changes_the_gate() {
    let mut w = reference_pi_2pi_pi(GateKind::Cz2);
    std::mem::swap(&mut w.measurement, &mut w.data);
    assert!(evaluate_fidelity(&w, GateKind::Cz2).unwrap() > 1e-3);
}

#[test]
fn synthesis_rejects_bad_configs() {
    let mut cfg = SynthConfig::new(GateKind::Cz2, Parametrization::Phase);
    cfg.segments = 10;
    assert!(matches!(pulse::synthesize_time_optimal(&cfg), Err(PulseError::InvalidArgument(_))));
    let mut cfg = SynthConfig::new(GateKind::Cz2, Parametrization::DetuningCutoff { cutoff: -1.0 });
    cfg.segments = 200;
    assert!(matches!(pulse::synthesize_time_optimal(&cfg), Err(PulseError::InvalidArgument(_))));
}

#[test]
fn pulse_file_round_trip() {
    let p = common::reference_pulse(GateKind::Cz);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cz.json");
    pulse::io::save(&p, &path).unwrap();
    let back = pulse::io::load(&path).unwrap();
    assert_eq!(back, p);
    assert_eq!(pulse::io::pulse_hash(&back), pulse::io::pulse_hash(&p));
}

fn waveform_strategy() -> impl Strategy<Value = ControlWaveform> {
    (4usize..12, 2.0f64..12.0).prop_flat_map(|(n, t)| {
        (
            prop::collection::vec(0.0f64..1.0, n),
            prop::collection::vec(-PI..PI, n),
            prop::collection::vec(0.0f64..1.0, n),
            prop::collection::vec(-PI..PI, n),
        )
            .prop_map(move |(am, pm, ad, pd)| {
                let mut w = ControlWaveform::resonant(n, t);
                w.measurement.amplitude = am;
                w.measurement.phase = pm;
                w.data.amplitude = ad;
                w.data.phase = pd;
                w
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn global_laser_phase_does_not_matter(w in waveform_strategy(), shift in -PI..PI) {
        for kind in [GateKind::Cz2, GateKind::Cz] {
            let base = evaluate_fidelity(&w, kind).unwrap();
            let mut s = w.clone();
            s.measurement.phase.iter_mut().for_each(|p| *p += shift);
            s.data.phase.iter_mut().for_each(|p| *p += shift);
            let shifted = evaluate_fidelity(&s, kind).unwrap();
            prop_assert!((base - shifted).abs() < 1e-10, "{} vs {}", base, shifted);
        }
    }

    #[test]
    fn propagator_is_unitary(w in waveform_strategy()) {
        let p = full_propagator(&w, GateKind::Cz2).unwrap();
        let n = p.matrix.nrows();
        let err = (p.matrix.adjoint() * &p.matrix - nalgebra::DMatrix::identity(n, n)).norm();
        prop_assert!(err < 1e-10, "{}", err);
    }

    #[test]
    fn infidelity_is_a_probability(w in waveform_strategy()) {
        let inf = evaluate_fidelity(&w, GateKind::Cz2).unwrap();
        prop_assert!((0.0..=1.0).contains(&inf));
    }
}
