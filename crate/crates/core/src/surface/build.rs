//! Memory-experiment circuits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::twirl::{PauliChannelTable, VariantId};

use super::circuit::{Circuit, Instruction};
use super::layout::{CodeLayout, StabilizerType};
use super::ordering::{BoundaryMode, GateOrdering};
use super::SurfaceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryBasis {
    /// Data prepared in `|0>`, `Z_L` read out.
    Z,
    /// Data prepared in `|+>`, `X_L` read out.
    X,
}

impl MemoryBasis {
    fn stabilizer_type(self) -> StabilizerType {
        match self {
            MemoryBasis::Z => StabilizerType::Z,
            MemoryBasis::X => StabilizerType::X,
        }
    }
}

impl std::str::FromStr for MemoryBasis {
    type Err = SurfaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "z" => Ok(MemoryBasis::Z),
            "x" => Ok(MemoryBasis::X),
            _ => Err(SurfaceError::InvalidArgument(format!("unknown basis {s:?}"))),
        }
    }
}

/// Channel table per readout variant.
pub type ChannelSet = BTreeMap<VariantId, PauliChannelTable>;

/// Identity tables for every variant.
pub fn noiseless_channels() -> ChannelSet {
    VariantId::ALL
        .into_iter()
        .map(|v| (v, PauliChannelTable::identity(v.qubits())))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemorySpec {
    pub ordering: GateOrdering,
    pub basis: MemoryBasis,
    pub rounds: usize,
    pub boundary: BoundaryMode,
}

/// `rounds` rounds of X-block then Z-block stabilizer readout, followed by
/// a transversal data measurement in the memory basis.
///
/// Each block resets its ancillas to `|+>`, plays the gate windows layer by
/// layer, inserts one noise channel per stabilizer and measures the
/// ancillas in X. Data qubits are conjugated by H around the X block.
pub fn build_memory_circuit(
    layout: &CodeLayout,
    spec: &MemorySpec,
    channels: &ChannelSet,
) -> Result<Circuit, SurfaceError> {
    if spec.rounds == 0 {
        return Err(SurfaceError::InvalidArgument("at least one round".into()));
    }
    spec.ordering.check(layout)?;
    layout.check()?;

    let mut c = Circuit::new(layout.num_qubits());
    let mut ids: BTreeMap<VariantId, usize> = BTreeMap::new();
    for s in &layout.stabilizers {
        let v = spec.ordering.variant(s, spec.boundary);
        if ids.contains_key(&v) {
            continue;
        }
        let t = channels.get(&v).ok_or(SurfaceError::MissingChannel(v))?;
        if t.n != v.qubits() {
            return Err(SurfaceError::InvalidArgument(format!(
                "table for {v} has {} qubits",
                t.n
            )));
        }
        ids.insert(v, c.add_channel(t.clone()));
    }

    let data: Vec<usize> = (0..layout.num_data()).collect();
    c.push(match spec.basis {
        MemoryBasis::Z => Instruction::Reset(data.clone()),
        MemoryBasis::X => Instruction::ResetPlus(data.clone()),
    });
    c.push(Instruction::Tick);

    let deterministic = spec.basis.stabilizer_type();
    let mut last: Vec<Option<usize>> = vec![None; layout.num_ancillas()];
    let mut measured = 0usize;
    for _round in 0..spec.rounds {
        for kind in [StabilizerType::X, StabilizerType::Z] {
            let stabs: Vec<usize> = layout.of_type(kind).collect();
            let anc: Vec<usize> = stabs.iter().map(|&s| layout.ancilla(s)).collect();
            let windows: Vec<Vec<Vec<usize>>> = stabs
                .iter()
                .map(|&s| spec.ordering.windows(&layout.stabilizers[s]))
                .collect();
            c.push(Instruction::ResetPlus(anc.clone()));
            if kind == StabilizerType::X {
                c.push(Instruction::H(data.clone()));
            }
            c.push(Instruction::Tick);
            let layers = windows.iter().map(|w| w.len()).max().unwrap_or(0);
            for k in 0..layers {
                let pairs: Vec<(usize, usize)> = stabs
                    .iter()
                    .zip(&windows)
                    .filter_map(|(&s, w)| w.get(k).map(|w| (layout.ancilla(s), w)))
                    .flat_map(|(a, w)| w.iter().map(move |&q| (a, q)))
                    .collect();
                c.push(Instruction::Cz(pairs));
                c.push(Instruction::Tick);
            }
            for (&s, w) in stabs.iter().zip(&windows) {
                let v = spec.ordering.variant(&layout.stabilizers[s], spec.boundary);
                let mut qubits = vec![layout.ancilla(s)];
                qubits.extend(w.iter().flatten());
                c.push(Instruction::Noise {
                    channel: ids[&v],
                    qubits,
                });
            }
            if kind == StabilizerType::X {
                c.push(Instruction::H(data.clone()));
            }
            c.push(Instruction::MeasureX(anc));
            for (i, &s) in stabs.iter().enumerate() {
                let m = measured + i;
                match last[s] {
                    Some(prev) => c.push(Instruction::Detector(vec![prev, m])),
                    None if kind == deterministic => c.push(Instruction::Detector(vec![m])),
                    None => {}
                }
                last[s] = Some(m);
            }
            measured += stabs.len();
            c.push(Instruction::Tick);
        }
    }

    c.push(match spec.basis {
        MemoryBasis::Z => Instruction::MeasureZ(data.clone()),
        MemoryBasis::X => Instruction::MeasureX(data.clone()),
    });
    for s in layout.of_type(deterministic) {
        let mut recs: Vec<usize> = layout.stabilizers[s].data().map(|q| measured + q).collect();
        recs.push(last[s].expect("every stabilizer measured"));
        recs.sort_unstable();
        c.push(Instruction::Detector(recs));
    }
    let logical = match spec.basis {
        MemoryBasis::Z => &layout.z_logical,
        MemoryBasis::X => &layout.x_logical,
    };
    c.push(Instruction::Observable {
        index: 0,
        records: logical.iter().map(|&q| measured + q).collect(),
    });
    c.validate()?;
    Ok(c)
}
