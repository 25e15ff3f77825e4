use std::collections::HashMap;

use crate::surface::Circuit;

use super::frame::noise_sensitivities;
use super::SimError;

pub const EXACT_MAX_QUBITS: usize = 12;
/// Upper bound on detectors plus observables.
pub const EXACT_MAX_BITS: usize = 22;

/// Joint distribution of detector and observable flips. Outcome keys pack
/// detector `d` at bit `d` and observable `k` at bit `num_detectors + k`.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub num_detectors: usize,
    pub num_observables: usize,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn probability(&self, detectors: u64, observables: u64) -> f64 {
        self.probs[(detectors | (observables << self.num_detectors)) as usize]
    }

    /// `(detector mask, observable mask, probability)` for every outcome
    /// with nonzero probability.
    pub fn outcomes(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        let dmask = (1u64 << self.num_detectors) - 1;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(k, &p)| (k as u64 & dmask, k as u64 >> self.num_detectors, p))
    }

    pub fn detector_marginals(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.num_detectors];
        for (d, _, p) in self.outcomes() {
            for (i, mi) in m.iter_mut().enumerate() {
                if (d >> i) & 1 == 1 {
                    *mi += p;
                }
            }
        }
        m
    }

    /// `P(d_i = 1 and d_j = 1)` for all pairs, as a dense matrix.
    pub fn detector_pair_probabilities(&self) -> Vec<Vec<f64>> {
        let n = self.num_detectors;
        let mut m = vec![vec![0.0; n]; n];
        for (d, _, p) in self.outcomes() {
            let on: Vec<usize> = (0..n).filter(|i| (d >> i) & 1 == 1).collect();
            for &i in &on {
                for &j in &on {
                    m[i][j] += p;
                }
            }
        }
        m
    }

    pub fn observable_marginal(&self, k: usize) -> f64 {
        self.outcomes()
            .filter(|(_, o, _)| (o >> k) & 1 == 1)
            .map(|(_, _, p)| p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Exact outcome distribution of a small circuit, by convolving the flip
/// distribution of every NOISE instruction over the XOR group of outcomes.
pub fn exact_distribution(circuit: &Circuit) -> Result<OutcomeDistribution, SimError> {
    circuit
        .validate()
        .map_err(|e| SimError::MalformedCircuit(e.to_string()))?;
    if circuit.num_qubits > EXACT_MAX_QUBITS {
        return Err(SimError::TooLarge(format!(
            "{} qubits, limit {EXACT_MAX_QUBITS}",
            circuit.num_qubits
        )));
    }
    let nd = circuit.num_detectors();
    let no = circuit.num_observables();
    if nd + no > EXACT_MAX_BITS {
        return Err(SimError::TooLarge(format!(
            "{} outcome bits, limit {EXACT_MAX_BITS}",
            nd + no
        )));
    }
    let mut probs = vec![0.0; 1 << (nd + no)];
    probs[0] = 1.0;
    for sens in noise_sensitivities(circuit) {
        let mut local: HashMap<u64, f64> = HashMap::new();
        for (p, w) in circuit.channels[sens.channel].entries() {
            let sig = sens.of(p.x_mask(), p.z_mask());
            let key = sig.detectors.iter().fold(0u64, |k, &d| k | (1 << d)) | (sig.observables << nd);
            *local.entry(key).or_default() += w;
        }
        let stay = local.remove(&0).unwrap_or(0.0);
        if local.is_empty() {
            probs.iter_mut().for_each(|p| *p *= stay);
            continue;
        }
        let mut next: Vec<f64> = probs.iter().map(|p| p * stay).collect();
        for (&key, &w) in &local {
            for (k, &p) in probs.iter().enumerate() {
                if p != 0.0 {
                    next[k ^ key as usize] += w * p;
                }
            }
        }
        probs = next;
    }
    Ok(OutcomeDistribution {
        num_detectors: nd,
        num_observables: no,
        probs,
    })
}
