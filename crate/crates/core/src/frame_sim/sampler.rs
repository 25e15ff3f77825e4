use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rayon::prelude::*;

use crate::surface::Circuit;

use super::batch::SampleBatch;
use super::frame::{run, Frame};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerOptions {
    /// Shots per RNG stream. Each block of this many shots draws from its own
    /// ChaCha stream, so results do not depend on the thread count.
    pub block: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { block: 1024 }
    }
}

struct ChannelSampler {
    alias: Option<WeightedAliasIndex<f64>>,
    masks: Vec<(u64, u64)>,
}

impl ChannelSampler {
    fn new(table: &crate::twirl::PauliChannelTable) -> Result<Self, SimError> {
        let entries = table.entries();
        let masks = entries.iter().map(|(p, _)| (p.x_mask(), p.z_mask())).collect();
        let weights: Vec<f64> = entries.iter().map(|(_, w)| w.max(0.0)).collect();
        let alias = if entries.iter().all(|(p, _)| p.is_identity()) {
            None
        } else {
            Some(
                WeightedAliasIndex::new(weights)
                    .map_err(|e| SimError::MalformedCircuit(format!("channel weights: {e}")))?,
            )
        };
        Ok(Self { alias, masks })
    }
}

/// Samples `shots` runs of `circuit`. Deterministic in `(circuit, shots, seed)`.
pub fn sample_circuit(circuit: &Circuit, shots: usize, seed: u64) -> Result<SampleBatch, SimError> {
    sample_circuit_with(circuit, shots, seed, SamplerOptions::default())
}

pub fn sample_circuit_with(
    circuit: &Circuit,
    shots: usize,
    seed: u64,
    opts: SamplerOptions,
) -> Result<SampleBatch, SimError> {
    if shots == 0 {
        return Err(SimError::InvalidArgument("shots must be at least 1".into()));
    }
    if opts.block == 0 || opts.block % 64 != 0 {
        return Err(SimError::InvalidArgument("block must be a positive multiple of 64".into()));
    }
    circuit
        .validate()
        .map_err(|e| SimError::MalformedCircuit(e.to_string()))?;
    if circuit.num_observables() > 64 {
        return Err(SimError::MalformedCircuit("at most 64 observables".into()));
    }
    let samplers = circuit
        .channels
        .iter()
        .map(ChannelSampler::new)
        .collect::<Result<Vec<_>, _>>()?;

    let nd = circuit.num_detectors();
    let no = circuit.num_observables();
    let blocks = shots.div_ceil(opts.block);
    let parts: Vec<SampleBatch> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * opts.block;
            let n = opts.block.min(shots - start);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let mut out = SampleBatch::zeros(n, nd, no);
            for lane0 in (0..n).step_by(64) {
                let lanes = 64.min(n - lane0);
                let mut frame = Frame::new(circuit.num_qubits);
                let flips = run(circuit, 0, &mut frame, |_, ch, qubits, frame| {
                    let s = &samplers[ch];
                    let Some(alias) = &s.alias else { return };
                    for lane in 0..lanes {
                        let (x, z) = s.masks[rng.sample(alias)];
                        if x | z == 0 {
                            continue;
                        }
                        let bit = 1u64 << lane;
                        for (i, &q) in qubits.iter().enumerate() {
                            if (x >> i) & 1 == 1 {
                                frame.x[q] ^= bit;
                            }
                            if (z >> i) & 1 == 1 {
                                frame.z[q] ^= bit;
                            }
                        }
                    }
                });
                for (d, &w) in flips.detectors.iter().enumerate() {
                    let mut w = w;
                    while w != 0 {
                        out.set_detector(lane0 + w.trailing_zeros() as usize, d);
                        w &= w - 1;
                    }
                }
                for (o, &w) in flips.observables.iter().enumerate() {
                    let mut w = w;
                    while w != 0 {
                        out.set_observable(lane0 + w.trailing_zeros() as usize, o);
                        w &= w - 1;
                    }
                }
            }
            out
        })
        .collect();

    let mut batch = SampleBatch::zeros(shots, nd, no);
    let mut shot = 0;
    for part in &parts {
        batch.splice(shot, part);
        shot += part.shots;
    }
    Ok(batch)
}
