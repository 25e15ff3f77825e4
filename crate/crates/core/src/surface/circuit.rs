//! Circuits and their text form.
//!
//! One instruction per line. Channel tables are embedded so a file is
//! self-contained:
//!
//! ```text
//! QUBITS 25
//! CHANNEL 0 bulk_cz2 5 0.001 3f0c9a...
//!   IIIII 0.99024
//!   XZZII 0.000749
//! END
//! RESET 0 1 2
//! RESET_PLUS 13 14
//! H 0 1
//! CZ 13 0 13 4
//! NOISE 0 13 0 4 1 3
//! MEASURE_X 13 14
//! DETECTOR rec[-1] rec[-13]
//! OBSERVABLE 0 rec[-1] rec[-3]
//! TICK
//! ```
//!
//! `CZ` takes qubit pairs. `rec[-k]` is the `k`-th most recent measurement.
//! Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::pauli::PauliString;
use crate::twirl::PauliChannelTable;

use super::SurfaceError;

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    /// Reset to `|0>`.
    Reset(Vec<usize>),
    /// Reset to `|+>`.
    ResetPlus(Vec<usize>),
    H(Vec<usize>),
    Cz(Vec<(usize, usize)>),
    /// Random Pauli drawn from `channels[channel]` on `qubits`, whose order
    /// matches the table's qubit order.
    Noise { channel: usize, qubits: Vec<usize> },
    MeasureZ(Vec<usize>),
    MeasureX(Vec<usize>),
    /// Parity of the listed measurements (absolute indices).
    Detector(Vec<usize>),
    Observable { index: usize, records: Vec<usize> },
    Tick,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub channels: Vec<PauliChannelTable>,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            channels: Vec::new(),
            instructions: Vec::new(),
        }
    }

    pub fn add_channel(&mut self, table: PauliChannelTable) -> usize {
        self.channels.push(table);
        self.channels.len() - 1
    }

    pub fn push(&mut self, ins: Instruction) {
        self.instructions.push(ins);
    }

    pub fn num_measurements(&self) -> usize {
        self.instructions
            .iter()
            .map(|i| match i {
                Instruction::MeasureZ(q) | Instruction::MeasureX(q) => q.len(),
                _ => 0,
            })
            .sum()
    }

    pub fn num_detectors(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Detector(_)))
            .count()
    }

    pub fn num_observables(&self) -> usize {
        self.instructions
            .iter()
            .filter_map(|i| match i {
                Instruction::Observable { index, .. } => Some(index + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn count(&self, pred: impl Fn(&Instruction) -> bool) -> usize {
        self.instructions.iter().filter(|i| pred(i)).count()
    }

    /// Structural checks: qubit ranges, noise arity and back-references.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        let bad = |m: String| Err(SurfaceError::MalformedCircuit(m));
        let mut measured = 0usize;
        for (line, ins) in self.instructions.iter().enumerate() {
            let qubits: Vec<usize> = match ins {
                Instruction::Reset(q)
                | Instruction::ResetPlus(q)
                | Instruction::H(q)
                | Instruction::MeasureZ(q)
                | Instruction::MeasureX(q) => q.clone(),
                Instruction::Cz(p) => {
                    if p.iter().any(|(a, b)| a == b) {
                        return bad(format!("instruction {line}: CZ on a single qubit"));
                    }
                    p.iter().flat_map(|&(a, b)| [a, b]).collect()
                }
                Instruction::Noise { channel, qubits } => {
                    let Some(t) = self.channels.get(*channel) else {
                        return bad(format!("instruction {line}: unknown channel {channel}"));
                    };
                    if t.n != qubits.len() {
                        return bad(format!(
                            "instruction {line}: channel {channel} has {} qubits, got {}",
                            t.n,
                            qubits.len()
                        ));
                    }
                    let mut s = qubits.clone();
                    s.sort_unstable();
                    s.dedup();
                    if s.len() != qubits.len() {
                        return bad(format!("instruction {line}: repeated qubit in NOISE"));
                    }
                    qubits.clone()
                }
                Instruction::Detector(r) | Instruction::Observable { records: r, .. } => {
                    if let Some(x) = r.iter().find(|&&x| x >= measured) {
                        return bad(format!("instruction {line}: record {x} not yet measured"));
                    }
                    vec![]
                }
                Instruction::Tick => vec![],
            };
            if let Some(q) = qubits.iter().find(|&&q| q >= self.num_qubits) {
                return bad(format!("instruction {line}: qubit {q} out of range"));
            }
            if let Instruction::MeasureZ(q) | Instruction::MeasureX(q) = ins {
                measured += q.len();
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "QUBITS {}", self.num_qubits);
        for (i, t) in self.channels.iter().enumerate() {
            let hash = if t.pulse_hash.is_empty() { "-" } else { &t.pulse_hash };
            let _ = writeln!(s, "CHANNEL {i} {} {} {} {hash}", t.variant, t.n, t.gamma);
            for (p, l) in t.entries() {
                let _ = writeln!(s, "  {p} {l}");
            }
            s.push_str("END\n");
        }
        let list = |v: &[usize]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
        let mut measured = 0usize;
        let recs = |r: &[usize], measured: usize| {
            r.iter()
                .map(|x| format!("rec[-{}]", measured - x))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for ins in &self.instructions {
            let line = match ins {
                Instruction::Reset(q) => format!("RESET {}", list(q)),
                Instruction::ResetPlus(q) => format!("RESET_PLUS {}", list(q)),
                Instruction::H(q) => format!("H {}", list(q)),
                Instruction::Cz(p) => format!(
                    "CZ {}",
                    p.iter().map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join(" ")
                ),
                Instruction::Noise { channel, qubits } => format!("NOISE {channel} {}", list(qubits)),
                Instruction::MeasureZ(q) => {
                    measured += q.len();
                    format!("MEASURE_Z {}", list(q))
                }
                Instruction::MeasureX(q) => {
                    measured += q.len();
                    format!("MEASURE_X {}", list(q))
                }
                Instruction::Detector(r) => format!("DETECTOR {}", recs(r, measured)),
                Instruction::Observable { index, records } => {
                    format!("OBSERVABLE {index} {}", recs(records, measured))
                }
                Instruction::Tick => "TICK".into(),
            };
            s.push_str(line.trim_end());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, SurfaceError> {
        let err = |n: usize, m: &str| SurfaceError::Parse {
            line: n + 1,
            message: m.to_string(),
        };
        let mut lines = text.lines().enumerate().peekable();
        let mut circuit: Option<Circuit> = None;
        let mut measured = 0usize;
        while let Some((n, raw)) = lines.next() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut words = line.split_whitespace();
            let op = words.next().unwrap();
            let args: Vec<&str> = words.collect();
            let nums = |args: &[&str]| -> Result<Vec<usize>, SurfaceError> {
                args.iter()
                    .map(|a| a.parse::<usize>().map_err(|_| err(n, &format!("bad integer {a:?}"))))
                    .collect()
            };
            let recs = |args: &[&str], measured: usize| -> Result<Vec<usize>, SurfaceError> {
                args.iter()
                    .map(|a| {
                        let k: usize = a
                            .strip_prefix("rec[-")
                            .and_then(|r| r.strip_suffix(']'))
                            .and_then(|r| r.parse().ok())
                            .ok_or_else(|| err(n, &format!("bad record {a:?}")))?;
                        if k == 0 || k > measured {
                            return Err(err(n, &format!("record {a} out of range")));
                        }
                        Ok(measured - k)
                    })
                    .collect()
            };
            if op == "QUBITS" {
                if circuit.is_some() {
                    return Err(err(n, "repeated QUBITS"));
                }
                let q = nums(&args)?;
                if q.len() != 1 {
                    return Err(err(n, "QUBITS takes one count"));
                }
                circuit = Some(Circuit::new(q[0]));
                continue;
            }
            let c = circuit.as_mut().ok_or_else(|| err(n, "QUBITS must come first"))?;
            let ins = match op {
                "CHANNEL" => {
                    if args.len() != 5 {
                        return Err(err(n, "CHANNEL id variant n gamma hash"));
                    }
                    let id: usize = args[0].parse().map_err(|_| err(n, "bad channel id"))?;
                    if id != c.channels.len() {
                        return Err(err(n, "channel ids must be consecutive from 0"));
                    }
                    let qn: usize = args[2].parse().map_err(|_| err(n, "bad qubit count"))?;
                    let gamma: f64 = args[3].parse().map_err(|_| err(n, "bad gamma"))?;
                    let mut entries = Vec::new();
                    loop {
                        let Some((m, l)) = lines.next() else {
                            return Err(err(n, "CHANNEL without END"));
                        };
                        let l = l.trim();
                        if l == "END" {
                            break;
                        }
                        let mut w = l.split_whitespace();
                        let (Some(p), Some(v), None) = (w.next(), w.next(), w.next()) else {
                            return Err(err(m, "expected `PAULI weight`"));
                        };
                        let p: PauliString = p.parse().map_err(|_| err(m, "bad Pauli string"))?;
                        let v: f64 = v.parse().map_err(|_| err(m, "bad weight"))?;
                        entries.push((p, v));
                    }
                    let mut t = PauliChannelTable::new(qn, args[1], gamma, entries)
                        .map_err(|e| err(n, &e.to_string()))?;
                    if args[4] != "-" {
                        t = t.with_pulse_hash(args[4]);
                    }
                    c.channels.push(t);
                    continue;
                }
                "RESET" => Instruction::Reset(nums(&args)?),
                "RESET_PLUS" => Instruction::ResetPlus(nums(&args)?),
                "H" => Instruction::H(nums(&args)?),
                "CZ" => {
                    let q = nums(&args)?;
                    if q.len() % 2 != 0 {
                        return Err(err(n, "CZ takes qubit pairs"));
                    }
                    Instruction::Cz(q.chunks(2).map(|p| (p[0], p[1])).collect())
                }
                "NOISE" => {
                    let q = nums(&args)?;
                    if q.len() < 2 {
                        return Err(err(n, "NOISE channel qubits..."));
                    }
                    Instruction::Noise {
                        channel: q[0],
                        qubits: q[1..].to_vec(),
                    }
                }
                "MEASURE_Z" => {
                    let q = nums(&args)?;
                    measured += q.len();
                    Instruction::MeasureZ(q)
                }
                "MEASURE_X" => {
                    let q = nums(&args)?;
                    measured += q.len();
                    Instruction::MeasureX(q)
                }
                "DETECTOR" => Instruction::Detector(recs(&args, measured)?),
                "OBSERVABLE" => {
                    let (Some(first), rest) = (args.first(), args.get(1..).unwrap_or_default()) else {
                        return Err(err(n, "OBSERVABLE index records..."));
                    };
                    Instruction::Observable {
                        index: first.parse().map_err(|_| err(n, "bad observable index"))?,
                        records: recs(rest, measured)?,
                    }
                }
                "TICK" => Instruction::Tick,
                _ => return Err(err(n, &format!("unknown instruction {op}"))),
            };
            c.instructions.push(ins);
        }
        let c = circuit.ok_or(SurfaceError::Parse {
            line: 0,
            message: "empty circuit".into(),
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SurfaceError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SurfaceError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Hex SHA-256 of the text form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}
