//! Bit-sliced Pauli frames: one `u64` lane word per qubit, 64 frames at a
//! time.

use crate::surface::{Circuit, Instruction};

pub(crate) struct Frame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl Frame {
    pub fn new(qubits: usize) -> Self {
        Self {
            x: vec![0; qubits],
            z: vec![0; qubits],
        }
    }
}

/// Flip words of every detector and observable.
pub(crate) struct Flips {
    pub detectors: Vec<u64>,
    pub observables: Vec<u64>,
}

/// Runs the Clifford part of `circuit` from instruction `start` on the
/// frame. `noise(index, channel, qubits, frame)` is called at every NOISE
/// instruction.
pub(crate) fn run<F>(circuit: &Circuit, start: usize, frame: &mut Frame, mut noise: F) -> Flips
where
    F: FnMut(usize, usize, &[usize], &mut Frame),
{
    let mut meas: Vec<u64> = Vec::with_capacity(circuit.num_measurements());
    // Measurements before `start` cannot be flipped by this frame.
    for ins in &circuit.instructions[..start] {
        if let Instruction::MeasureZ(q) | Instruction::MeasureX(q) = ins {
            meas.extend(std::iter::repeat_n(0, q.len()));
        }
    }
    let mut detectors = Vec::with_capacity(circuit.num_detectors());
    for ins in &circuit.instructions[..start] {
        if let Instruction::Detector(_) = ins {
            detectors.push(0);
        }
    }
    let mut observables = vec![0u64; circuit.num_observables()];
    for (idx, ins) in circuit.instructions.iter().enumerate().skip(start) {
        match ins {
            Instruction::Reset(q) | Instruction::ResetPlus(q) => {
                for &q in q {
                    frame.x[q] = 0;
                    frame.z[q] = 0;
                }
            }
            Instruction::H(q) => {
                for &q in q {
                    std::mem::swap(&mut frame.x[q], &mut frame.z[q]);
                }
            }
            Instruction::Cz(pairs) => {
                for &(a, b) in pairs {
                    frame.z[a] ^= frame.x[b];
                    frame.z[b] ^= frame.x[a];
                }
            }
            Instruction::Noise { channel, qubits } => noise(idx, *channel, qubits, frame),
            Instruction::MeasureZ(q) => meas.extend(q.iter().map(|&q| frame.x[q])),
            Instruction::MeasureX(q) => meas.extend(q.iter().map(|&q| frame.z[q])),
            Instruction::Detector(r) => detectors.push(r.iter().fold(0, |acc, &m| acc ^ meas[m])),
            Instruction::Observable { index, records } => {
                observables[*index] ^= records.iter().fold(0, |acc, &m| acc ^ meas[m]);
            }
            Instruction::Tick => {}
        }
    }
    Flips {
        detectors,
        observables,
    }
}

/// Detector and observable flips caused by a single Pauli fault.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature {
    pub detectors: Vec<usize>,
    pub observables: u64,
}

impl Signature {
    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty() && self.observables == 0
    }

    /// Symmetric difference.
    pub fn xor(&self, other: &Signature) -> Signature {
        let (a, b) = (&self.detectors, &other.detectors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    out.push(*x);
                    i += 1;
                }
                (Some(x), None) => {
                    out.push(*x);
                    i += 1;
                }
                (_, Some(y)) => {
                    out.push(*y);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Signature {
            detectors: out,
            observables: self.observables ^ other.observables,
        }
    }
}

/// Per NOISE instruction: its channel, qubits and the signatures of `X_i`
/// and `Z_i` on each of its qubits, as `(x_sigs, z_sigs)`.
pub struct NoiseSensitivity {
    pub instruction: usize,
    pub channel: usize,
    pub qubits: Vec<usize>,
    pub x: Vec<Signature>,
    pub z: Vec<Signature>,
}

impl NoiseSensitivity {
    /// Signature of the Pauli with local masks `(x, z)`.
    pub fn of(&self, x: u64, z: u64) -> Signature {
        let mut s = Signature::default();
        for i in 0..self.qubits.len() {
            if (x >> i) & 1 == 1 {
                s = s.xor(&self.x[i]);
            }
            if (z >> i) & 1 == 1 {
                s = s.xor(&self.z[i]);
            }
        }
        s
    }
}

/// Forward propagation of every single-qubit generator at every NOISE
/// location to the detectors and observables.
pub fn noise_sensitivities(circuit: &Circuit) -> Vec<NoiseSensitivity> {
    let mut out = Vec::new();
    for (idx, ins) in circuit.instructions.iter().enumerate() {
        let Instruction::Noise { channel, qubits } = ins else {
            continue;
        };
        let k = qubits.len();
        assert!(2 * k <= 64, "noise channels act on at most 32 qubits");
        let mut frame = Frame::new(circuit.num_qubits);
        for (i, &q) in qubits.iter().enumerate() {
            frame.x[q] |= 1 << (2 * i);
            frame.z[q] |= 1 << (2 * i + 1);
        }
        let flips = run(circuit, idx + 1, &mut frame, |_, _, _, _| {});
        let sig = |lane: usize| Signature {
            detectors: flips
                .detectors
                .iter()
                .enumerate()
                .filter(|(_, w)| (*w >> lane) & 1 == 1)
                .map(|(d, _)| d)
                .collect(),
            observables: flips
                .observables
                .iter()
                .enumerate()
                .filter(|(_, w)| (*w >> lane) & 1 == 1)
                .fold(0, |acc, (o, _)| acc | (1 << o)),
        };
        out.push(NoiseSensitivity {
            instruction: idx,
            channel: *channel,
            qubits: qubits.clone(),
            x: (0..k).map(|i| sig(2 * i)).collect(),
            z: (0..k).map(|i| sig(2 * i + 1)).collect(),
        });
    }
    out
}
