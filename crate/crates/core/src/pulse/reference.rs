use std::f64::consts::PI;

use super::{ControlWaveform, GateKind, Parametrization, RoleDrive};

/// Sequential resonant pulse: pi on the measurement atom, 2pi on the data
/// atoms, pi on the measurement atom again.
///
/// Each stage is a resonant drive at full amplitude, so the total duration
/// is `4 pi`. The data 2pi rotation picks up a sign on every data atom
/// in `|1>` unless the measurement atom sits in `|r>` and blocks it, which
/// implements the target with `theta_m = theta_d = pi`. The same waveform
/// serves CZ, where the data track simply drives the single data atom.
pub fn reference_pi_2pi_pi(_kind: GateKind) -> ControlWaveform {
    let on_off = |a: [f64; 4]| RoleDrive {
        amplitude: a.to_vec(),
        phase: vec![0.0; 4],
        detuning: vec![0.0; 4],
    };
    ControlWaveform {
        parametrization: Parametrization::Phase,
        total_duration: 4.0 * PI,
        measurement: on_off([1.0, 0.0, 0.0, 1.0]),
        data: on_off([0.0, 1.0, 1.0, 0.0]),
    }
}
