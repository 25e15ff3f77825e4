//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, RngExt};

use rydqec::pauli::PauliString;
use rydqec::pulse::{reference_pi_2pi_pi, rydberg_occupation_times, GateKind, PulseResult};
use rydqec::twirl::PulseSet;

/// The sequential pi-2pi-pi pulse packaged as a synthesis result. It needs
/// no optimization, so tests can build readout variants in milliseconds.
pub fn reference_pulse(kind: GateKind) -> PulseResult {
    let waveform = reference_pi_2pi_pi(kind);
    let (m, d) = rydberg_occupation_times(&waveform, kind).unwrap();
    PulseResult {
        kind,
        waveform,
        theta_m: PI,
        theta_d: PI,
        infidelity: 0.0,
        rydberg_time_m: m,
        rydberg_time_d: d,
    }
}

pub fn reference_pulses() -> PulseSet {
    PulseSet {
        cz2: reference_pulse(GateKind::Cz2),
        cz: Some(reference_pulse(GateKind::Cz)),
    }
}

/// Dense matrix of a Pauli string, with bit `q` of the basis index on
/// qubit `q`.
pub fn pauli_matrix(p: &PauliString) -> DMatrix<C> {
    let d = 1usize << p.num_qubits();
    let mut m = DMatrix::zeros(d, d);
    for y in 0..d {
        m[(y ^ p.x_mask() as usize, y)] = p.column_phase(y as u64);
    }
    m
}

/// Random density matrix of rank up to `d`.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DMatrix<C> {
    let a = DMatrix::<C>::from_fn(d, d, |_, _| {
        C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Trace norm of a Hermitian matrix, halved.
pub fn trace_distance(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    let diff = a - b;
    let eig = nalgebra::SymmetricEigen::new(diff);
    0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>()
}

use rydqec::frame_sim::{exact_distribution, SampleBatch};
use rydqec::pauli::Letter;
use rydqec::surface::{Circuit, Instruction};
use rydqec::twirl::PauliChannelTable;

/// One-qubit channel applying `letter` with probability `p`.
pub fn flip_table(letter: Letter, p: f64) -> PauliChannelTable {
    PauliChannelTable::new(
        1,
        "flip",
        0.0,
        [
            (PauliString::identity(1), 1.0 - p),
            (PauliString::from_letters(&[letter]), p),
        ],
    )
    .unwrap()
}

/// Distance-3 bit-flip repetition code, one round: independent X flips
/// with probability `p` on the data, one round of `Z0Z1` and `Z1Z2`
/// checks, then a data readout. Detectors 0 and 1 are the checks, 2 and 3
/// compare them with the data; the observable is data qubit 0.
pub fn repetition_circuit(p: f64) -> Circuit {
    let mut c = Circuit::new(5);
    let flip = c.add_channel(flip_table(Letter::X, p));
    c.push(Instruction::Reset(vec![0, 1, 2]));
    for q in 0..3 {
        c.push(Instruction::Noise { channel: flip, qubits: vec![q] });
    }
    c.push(Instruction::ResetPlus(vec![3, 4]));
    c.push(Instruction::Cz(vec![(3, 0), (4, 1)]));
    c.push(Instruction::Cz(vec![(3, 1), (4, 2)]));
    c.push(Instruction::MeasureX(vec![3, 4]));
    c.push(Instruction::Detector(vec![0]));
    c.push(Instruction::Detector(vec![1]));
    c.push(Instruction::MeasureZ(vec![0, 1, 2]));
    c.push(Instruction::Detector(vec![0, 2, 3]));
    c.push(Instruction::Detector(vec![1, 3, 4]));
    c.push(Instruction::Observable { index: 0, records: vec![2] });
    c.validate().unwrap();
    c
}

/// Single weight-4 Z plaquette (ancilla 0, data 1..=4) read out `rounds`
/// times through `table`, then the data measured in Z.
pub fn plaquette_circuit(table: &PauliChannelTable, rounds: usize) -> Circuit {
    assert_eq!(table.n, 5);
    let mut c = Circuit::new(5);
    let ch = c.add_channel(table.clone());
    c.push(Instruction::Reset(vec![1, 2, 3, 4]));
    for r in 0..rounds {
        c.push(Instruction::ResetPlus(vec![0]));
        c.push(Instruction::Cz(vec![(0, 1), (0, 2)]));
        c.push(Instruction::Cz(vec![(0, 3), (0, 4)]));
        c.push(Instruction::Noise { channel: ch, qubits: vec![0, 1, 2, 3, 4] });
        c.push(Instruction::MeasureX(vec![0]));
        c.push(Instruction::Detector(if r == 0 { vec![0] } else { vec![r - 1, r] }));
    }
    c.push(Instruction::MeasureZ(vec![1, 2, 3, 4]));
    c.push(Instruction::Detector(vec![rounds - 1, rounds, rounds + 1, rounds + 2, rounds + 3]));
    c.push(Instruction::Observable { index: 0, records: vec![rounds, rounds + 1] });
    c.validate().unwrap();
    c
}

/// Random table on `n` qubits with identity weight around `1 - noise`.
pub fn random_table(n: usize, noise: f64, rng: &mut impl Rng) -> PauliChannelTable {
    let entries: Vec<(PauliString, f64)> = PauliString::all(n)
        .map(|p| {
            let w = if p.is_identity() { 1.0 - noise } else { noise * rng.random::<f64>() };
            (p, w)
        })
        .collect();
    let total: f64 = entries.iter().map(|e| e.1).sum();
    PauliChannelTable::new(n, "random", 0.0, entries.into_iter().map(|(p, w)| (p, w / total))).unwrap()
}

/// Random Clifford circuit with Pauli noise, random detectors and one
/// observable, small enough for exact enumeration.
pub fn random_small_circuit(rng: &mut impl Rng) -> Circuit {
    let n = rng.random_range(3..=8usize);
    let mut c = Circuit::new(n);
    let tables: Vec<usize> = (1..=3).map(|k| c.add_channel(random_table(k, 0.05, rng))).collect();
    let all: Vec<usize> = (0..n).collect();
    c.push(Instruction::Reset(all.clone()));
    let mut measured = 0usize;
    let mut detectors = 0usize;
    for _ in 0..rng.random_range(2..=4) {
        let h: Vec<usize> = all.iter().copied().filter(|_| rng.random_bool(0.4)).collect();
        c.push(Instruction::H(h));
        let mut order = all.clone();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let pairs: Vec<(usize, usize)> = order.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        c.push(Instruction::Cz(pairs));
        for _ in 0..rng.random_range(1..=3) {
            let k = rng.random_range(1..=3usize).min(n);
            let mut qs = all.clone();
            for i in (1..n).rev() {
                qs.swap(i, rng.random_range(0..=i));
            }
            qs.truncate(k);
            c.push(Instruction::Noise { channel: tables[k - 1], qubits: qs });
        }
        let m: Vec<usize> = all.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if m.is_empty() {
            continue;
        }
        let before = measured;
        measured += m.len();
        if rng.random_bool(0.5) {
            c.push(Instruction::MeasureZ(m));
        } else {
            c.push(Instruction::MeasureX(m));
        }
        for _ in 0..rng.random_range(1..=3) {
            if detectors == 10 {
                break;
            }
            let mut recs = vec![rng.random_range(before..measured)];
            if before > 0 && rng.random_bool(0.5) {
                recs.push(rng.random_range(0..before));
            }
            recs.sort_unstable();
            recs.dedup();
            c.push(Instruction::Detector(recs));
            detectors += 1;
        }
    }
    c.push(Instruction::MeasureZ(vec![0]));
    c.push(Instruction::Observable { index: 0, records: vec![measured] });
    c.validate().unwrap();
    c
}

/// Detector marginals and pairwise coincidences of the sampler checked
/// against exact enumeration at 3 sigma. Returns the violations.
pub fn exact_comparison(c: &Circuit, batch: &SampleBatch) -> Vec<String> {
    let exact = exact_distribution(c).unwrap();
    let n = batch.shots as f64;
    let nd = c.num_detectors();
    let mut pair_counts = vec![vec![0usize; nd]; nd];
    for s in 0..batch.shots {
        let d = batch.defects(s);
        for (i, &a) in d.iter().enumerate() {
            for &b in &d[i..] {
                pair_counts[a][b] += 1;
            }
        }
    }
    let pairs = exact.detector_pair_probabilities();
    let mut bad = Vec::new();
    let mut check = |what: String, p: f64, count: usize| {
        let est = count as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        if (est - p).abs() > 3.0 * sigma + 1e-12 {
            bad.push(format!("{what}: exact {p:.5e}, sampled {est:.5e}, sigma {sigma:.1e}"));
        }
    };
    for a in 0..nd {
        for b in a..nd {
            let what = if a == b { format!("P(d{a})") } else { format!("P(d{a} d{b})") };
            check(what, pairs[a][b], pair_counts[a][b]);
        }
    }
    let obs = (0..batch.shots).filter(|&s| batch.observables(s) & 1 == 1).count();
    check("P(L0)".into(), exact.observable_marginal(0), obs);
    bad
}

use rydqec::dem_decode::{edge_weight, DetectorErrorModel, Mechanism};

pub fn mech(p: f64, detectors: &[usize], observables: u64) -> Mechanism {
    Mechanism::new(p, detectors.to_vec(), observables)
}

pub fn dem(nd: usize, mechs: Vec<Mechanism>) -> DetectorErrorModel {
    DetectorErrorModel::new(nd, 1, mechs, "test").unwrap()
}

/// Exhaustive minimum weight per (syndrome, observable parity), by Gray
/// code over all mechanism subsets.
pub fn min_weights(d: &DetectorErrorModel) -> Vec<[f64; 2]> {
    let m = d.mechanisms.len();
    let masks: Vec<usize> = d
        .mechanisms
        .iter()
        .map(|x| x.detectors.iter().fold(0, |s, &i| s ^ (1 << i)))
        .collect();
    let w: Vec<f64> = d.mechanisms.iter().map(|x| edge_weight(x.probability).unwrap()).collect();
    let mut best = vec![[f64::INFINITY; 2]; 1 << d.num_detectors];
    let (mut syn, mut obs, mut weight) = (0usize, 0usize, 0.0f64);
    let mut on = vec![false; m];
    best[0][0] = 0.0;
    for k in 1u64..(1 << m) {
        let i = k.trailing_zeros() as usize;
        on[i] = !on[i];
        syn ^= masks[i];
        obs ^= (d.mechanisms[i].observables & 1) as usize;
        weight += if on[i] { w[i] } else { -w[i] };
        if k % 4096 == 0 {
            weight = (0..m).filter(|&j| on[j]).map(|j| w[j]).sum();
        }
        let b = &mut best[syn][obs];
        if weight < *b {
            *b = weight;
        }
    }
    best
}

pub fn random_graphlike(rng: &mut impl Rng, nd: usize, m: usize) -> DetectorErrorModel {
    let mechs = (0..m).map(|_| {
        let a = rng.random_range(0..nd);
        let dets = if rng.random_bool(0.25) {
            vec![a]
        } else {
            let mut b = rng.random_range(0..nd - 1);
            if b >= a {
                b += 1;
            }
            vec![a, b]
        };
        mech(rng.random_range(0.001..0.3), &dets, rng.random_bool(0.3) as u64)
    });
    dem(nd, mechs.collect())
}

pub fn defects_of(syndrome: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|i| (syndrome >> i) & 1 == 1).collect()
}
