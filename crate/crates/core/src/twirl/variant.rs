use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lindblad::{AtomRegister, Blockade, DriveSchedule};
use crate::pulse::{io::pulse_hash, GateKind, PulseResult};

use super::TwirlError;

/// Stabilizer readout unitaries whose noise is extracted.
///
/// Qubit 0 of every variant is the ancilla (measurement atom). The data
/// slots follow in gate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantId {
    /// Weight-4 stabilizer read out by two CZ2 gates on slots (1,2) then (3,4).
    BulkCz2,
    /// Weight-4 stabilizer read out by four CZ gates on slots 1..4 in order.
    Bulk4cz,
    /// Weight-3 stabilizer: CZ2 on slots (1,2), then the CZ2 pulse with only
    /// slot 3 driven.
    BoundaryCz2Global,
    /// Weight-3 stabilizer: CZ2 on slots (1,2), then a time-optimal CZ on
    /// slot 3.
    BoundaryCz2Local,
    /// Weight-3 stabilizer read out by three CZ gates.
    Boundary3cz,
}

impl VariantId {
    pub const ALL: [VariantId; 5] = [
        VariantId::BulkCz2,
        VariantId::Bulk4cz,
        VariantId::BoundaryCz2Global,
        VariantId::BoundaryCz2Local,
        VariantId::Boundary3cz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VariantId::BulkCz2 => "bulk_cz2",
            VariantId::Bulk4cz => "bulk_4cz",
            VariantId::BoundaryCz2Global => "boundary_cz2_global",
            VariantId::BoundaryCz2Local => "boundary_cz2_local",
            VariantId::Boundary3cz => "boundary_3cz",
        }
    }

    pub fn qubits(self) -> usize {
        match self {
            VariantId::BulkCz2 | VariantId::Bulk4cz => 5,
            _ => 4,
        }
    }

    /// Data slots addressed by each gate window, and the pulse it plays.
    pub fn windows(self) -> Vec<(GateKind, Vec<usize>)> {
        use GateKind::{Cz, Cz2};
        match self {
            VariantId::BulkCz2 => vec![(Cz2, vec![1, 2]), (Cz2, vec![3, 4])],
            VariantId::Bulk4cz => (1..=4).map(|d| (Cz, vec![d])).collect(),
            VariantId::BoundaryCz2Global => vec![(Cz2, vec![1, 2]), (Cz2, vec![3])],
            VariantId::BoundaryCz2Local => vec![(Cz2, vec![1, 2]), (Cz, vec![3])],
            VariantId::Boundary3cz => (1..=3).map(|d| (Cz, vec![d])).collect(),
        }
    }

    pub fn needs(self, kind: GateKind) -> bool {
        self.windows().iter().any(|w| w.0 == kind)
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantId {
    type Err = TwirlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantId::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| TwirlError::UnknownVariant(s.to_string()))
    }
}

/// Pulses available for building variants.
#[derive(Debug, Clone)]
pub struct PulseSet {
    pub cz2: PulseResult,
    pub cz: Option<PulseResult>,
}

impl PulseSet {
    pub fn get(&self, kind: GateKind) -> Option<&PulseResult> {
        match kind {
            GateKind::Cz2 => Some(&self.cz2),
            GateKind::Cz => self.cz.as_ref(),
        }
    }
}

/// A readout variant bound to concrete pulses.
#[derive(Debug, Clone)]
pub struct ReadoutVariant {
    pub id: VariantId,
    pub register: AtomRegister,
    pub schedule: DriveSchedule,
    /// Accumulated single-qubit phase to undo on each atom.
    pub phase_correction: Vec<f64>,
    /// Provenance of the pulses used.
    pub pulse_hash: String,
}

impl ReadoutVariant {
    pub fn build(id: VariantId, pulses: &PulseSet) -> Result<Self, TwirlError> {
        let n = id.qubits();
        let register = AtomRegister::stabilizer(n - 1, Blockade::Infinite);
        let mut windows = Vec::new();
        let mut phases = vec![0.0; n];
        let mut hashes = Vec::new();
        for (kind, data) in id.windows() {
            let p = pulses.get(kind).ok_or(TwirlError::MissingPulse(kind))?;
            if p.kind != kind {
                return Err(TwirlError::MissingPulse(kind));
            }
            phases[0] += p.theta_m;
            for &d in &data {
                phases[d] += p.theta_d;
            }
            let h = pulse_hash(p);
            if !hashes.contains(&h) {
                hashes.push(h);
            }
            windows.push((p.waveform.clone(), 0, data));
        }
        Ok(Self {
            id,
            register,
            schedule: DriveSchedule::sequential(windows),
            phase_correction: phases,
            pulse_hash: hashes.join("+"),
        })
    }

    pub fn qubits(&self) -> usize {
        self.id.qubits()
    }

    /// Diagonal entry of the ideal readout unitary on computational state
    /// `bits` (bit `q` = qubit `q`): a CZ between the ancilla and every
    /// data qubit.
    pub fn ideal_sign(&self, bits: u64) -> f64 {
        if bits & 1 == 1 && (bits >> 1).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}
