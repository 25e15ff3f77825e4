//! Pulse synthesis for blockaded three-level atoms.
//!
//! Atoms carry the levels `|0>`, `|1>` and a Rydberg level `|r>`. Only the
//! `|1> <-> |r>` transition is driven. One laser addresses the measurement
//! atom and a second, global laser addresses every data atom, so both data
//! atoms of a CZ2 gate always see the same waveform.
//!
//! Times are in units of `1/Omega_max` and frequencies in units of
//! `Omega_max`.

mod blocks;
mod evaluate;
pub mod io;
mod reference;
mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use evaluate::{
    evaluate_fidelity, evaluate_with_phases, full_propagator, rydberg_occupation_times,
    FidelityReport,
};
pub use reference::reference_pi_2pi_pi;
pub use synth::{
    optimize_at_duration, synthesize_time_optimal, DurationScan, SynthConfig, SynthOutcome,
};

#[derive(Debug, Error)]
pub enum PulseError {
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("optimizer did not reach infidelity {goal:e}; best was {best:e} at T = {duration}")]
    NotConverged {
        goal: f64,
        best: f64,
        duration: f64,
    },
    #[error("no feasible duration in [{lo}, {hi}]; best infidelity at the upper end was {best:e}")]
    NoFeasibleDuration { lo: f64, hi: f64, best: f64 },
    #[error("lower end of the duration bracket ({lo}) is already feasible (infidelity {best:e})")]
    BracketTooHigh { lo: f64, best: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("pulse file: {0}")]
    Format(#[from] serde_json::Error),
}

/// Which atom a drive addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Measurement,
    Data,
}

/// Gate implemented by a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// One measurement atom controlling Z on two data atoms.
    Cz2,
    /// One measurement atom and one data atom.
    Cz,
}

impl GateKind {
    pub fn data_atoms(self) -> usize {
        match self {
            GateKind::Cz2 => 2,
            GateKind::Cz => 1,
        }
    }

    pub fn atoms(self) -> usize {
        1 + self.data_atoms()
    }

    /// Dimension of the computational subspace.
    pub fn dim(self) -> usize {
        1 << self.atoms()
    }

    /// Phase of the target on computational state `s`.
    ///
    /// Bit `atoms-1` of `s` is the measurement qubit, lower bits the data
    /// qubits (measurement atom most significant).
    pub fn target_phase(self, s: usize, theta_m: f64, theta_d: f64) -> f64 {
        let nd = self.data_atoms();
        let m = (s >> nd) & 1;
        let k = (s & ((1 << nd) - 1)).count_ones() as usize;
        theta_m * m as f64 + (theta_d + std::f64::consts::PI * m as f64) * k as f64
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GateKind::Cz2 => "cz2",
            GateKind::Cz => "cz",
        })
    }
}

/// How the controls of a waveform are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Parametrization {
    /// Piecewise-constant laser phase, zero detuning.
    Phase,
    /// Zero phase, piecewise-constant detuning bounded by `cutoff`.
    DetuningCutoff { cutoff: f64 },
}

/// Drive on one role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RoleDrive {
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub detuning: Vec<f64>,
}

impl RoleDrive {
    pub fn constant(segments: usize, amplitude: f64) -> Self {
        Self {
            amplitude: vec![amplitude; segments],
            phase: vec![0.0; segments],
            detuning: vec![0.0; segments],
        }
    }
}

/// Piecewise-constant drive of one gate, on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlWaveform {
    pub parametrization: Parametrization,
    pub total_duration: f64,
    pub measurement: RoleDrive,
    pub data: RoleDrive,
}

impl ControlWaveform {
    /// Waveform with unit amplitude and all phases and detunings zero.
    pub fn resonant(segments: usize, total_duration: f64) -> Self {
        Self {
            parametrization: Parametrization::Phase,
            total_duration,
            measurement: RoleDrive::constant(segments, 1.0),
            data: RoleDrive::constant(segments, 1.0),
        }
    }

    pub fn segment_count(&self) -> usize {
        self.measurement.amplitude.len()
    }

    pub fn segment_duration(&self) -> f64 {
        if self.segment_count() == 0 {
            0.0
        } else {
            self.total_duration / self.segment_count() as f64
        }
    }

    pub fn drive(&self, role: Role) -> &RoleDrive {
        match role {
            Role::Measurement => &self.measurement,
            Role::Data => &self.data,
        }
    }

    pub fn drive_mut(&mut self, role: Role) -> &mut RoleDrive {
        match role {
            Role::Measurement => &mut self.measurement,
            Role::Data => &mut self.data,
        }
    }

    /// Checks lengths, amplitude range and the detuning cutoff.
    ///
    /// A zero-duration waveform is accepted and acts as the identity.
    pub fn validate(&self) -> Result<(), PulseError> {
        let n = self.segment_count();
        if !(self.total_duration >= 0.0) || !self.total_duration.is_finite() {
            return Err(PulseError::InvalidWaveform(format!(
                "total duration {} is not a non-negative number",
                self.total_duration
            )));
        }
        for role in [Role::Measurement, Role::Data] {
            let d = self.drive(role);
            if d.amplitude.len() != n || d.phase.len() != n || d.detuning.len() != n {
                return Err(PulseError::InvalidWaveform(format!(
                    "{role:?} drive has inconsistent track lengths"
                )));
            }
            if let Some(a) = d
                .amplitude
                .iter()
                .find(|a| !(0.0..=1.0).contains(*a) || !a.is_finite())
            {
                return Err(PulseError::InvalidWaveform(format!(
                    "{role:?} amplitude {a} outside [0, 1]"
                )));
            }
            if d.phase.iter().chain(&d.detuning).any(|v| !v.is_finite()) {
                return Err(PulseError::InvalidWaveform(format!(
                    "{role:?} drive has non-finite entries"
                )));
            }
            if let Parametrization::DetuningCutoff { cutoff } = self.parametrization {
                if let Some(v) = d.detuning.iter().find(|v| v.abs() > cutoff * (1.0 + 1e-12)) {
                    return Err(PulseError::InvalidWaveform(format!(
                        "{role:?} detuning {v} exceeds cutoff {cutoff}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A synthesized pulse with its figures of merit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseResult {
    pub kind: GateKind,
    pub waveform: ControlWaveform,
    pub theta_m: f64,
    pub theta_d: f64,
    pub infidelity: f64,
    /// Basis-averaged time the measurement atom spends in `|r>`.
    pub rydberg_time_m: f64,
    /// Basis-averaged time spent in `|r>`, summed over the data atoms.
    pub rydberg_time_d: f64,
}
