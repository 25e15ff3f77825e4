use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::frame_sim::noise_sensitivities;
use crate::surface::Circuit;

use super::{xor_merge, DecodeError};

/// Entries lighter than this fraction of their table's mass are dropped.
pub const DEM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub probability: f64,
    /// Sorted, distinct.
    pub detectors: Vec<usize>,
    pub observables: u64,
}

impl Mechanism {
    pub fn new(probability: f64, detectors: Vec<usize>, observables: u64) -> Self {
        Self {
            probability,
            detectors,
            observables,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<Mechanism>,
    pub circuit_hash: String,
}

impl DetectorErrorModel {
    /// Merges mechanisms with equal signatures and drops empty ones.
    /// Mechanisms come out sorted by signature.
    pub fn new(
        num_detectors: usize,
        num_observables: usize,
        mechanisms: impl IntoIterator<Item = Mechanism>,
        circuit_hash: &str,
    ) -> Result<Self, DecodeError> {
        let mut merged: BTreeMap<(Vec<usize>, u64), f64> = BTreeMap::new();
        for mut m in mechanisms {
            if !(m.probability > 0.0 && m.probability < 1.0) {
                return Err(DecodeError::Unphysical(m.probability));
            }
            m.detectors.sort_unstable();
            m.detectors.dedup();
            if let Some(&d) = m.detectors.iter().find(|&&d| d >= num_detectors) {
                return Err(DecodeError::Mismatch(format!("detector {d} out of range")));
            }
            if m.detectors.is_empty() && m.observables == 0 {
                continue;
            }
            let p = merged.entry((m.detectors, m.observables)).or_insert(0.0);
            *p = xor_merge(*p, m.probability);
        }
        Ok(Self {
            num_detectors,
            num_observables,
            mechanisms: merged
                .into_iter()
                .map(|((detectors, observables), probability)| Mechanism {
                    probability,
                    detectors,
                    observables,
                })
                .collect(),
            circuit_hash: circuit_hash.to_string(),
        })
    }

    /// Mechanisms that flip an observable without firing any detector.
    pub fn undetectable_logicals(&self) -> impl Iterator<Item = &Mechanism> {
        self.mechanisms
            .iter()
            .filter(|m| m.detectors.is_empty() && m.observables != 0)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# circuit {}", self.circuit_hash).unwrap();
        writeln!(s, "detectors {}", self.num_detectors).unwrap();
        writeln!(s, "observables {}", self.num_observables).unwrap();
        for m in &self.mechanisms {
            write!(s, "error({:.17e})", m.probability).unwrap();
            for d in &m.detectors {
                write!(s, " D{d}").unwrap();
            }
            for k in 0..64 {
                if (m.observables >> k) & 1 == 1 {
                    write!(s, " L{k}").unwrap();
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, DecodeError> {
        let mut hash = String::new();
        let (mut nd, mut no) = (None, None);
        let mut mechs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let err = |message: String| DecodeError::Parse { line: i + 1, message };
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix("# circuit ") {
                hash = rest.trim().to_string();
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap_or_default();
            let count = |t: Option<&str>| {
                t.and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err(format!("bad count in {line:?}")))
            };
            if head == "detectors" {
                nd = Some(count(tok.next())?);
            } else if head == "observables" {
                no = Some(count(tok.next())?);
            } else if let Some(p) = head.strip_prefix("error(").and_then(|h| h.strip_suffix(')')) {
                let probability = p.parse().map_err(|_| err(format!("bad probability {p:?}")))?;
                let mut m = Mechanism::new(probability, Vec::new(), 0);
                for t in tok {
                    if let Some(d) = t.strip_prefix('D').and_then(|d| d.parse().ok()) {
                        m.detectors.push(d);
                    } else if let Some(k) = t.strip_prefix('L').and_then(|k| k.parse::<u32>().ok()) {
                        if k >= 64 {
                            return Err(err(format!("observable {k} out of range")));
                        }
                        m.observables ^= 1 << k;
                    } else {
                        return Err(err(format!("bad target {t:?}")));
                    }
                }
                mechs.push(m);
            } else {
                return Err(err(format!("unknown line {line:?}")));
            }
        }
        let nd = nd.ok_or(DecodeError::Parse { line: 0, message: "missing detectors".into() })?;
        let no = no.ok_or(DecodeError::Parse { line: 0, message: "missing observables".into() })?;
        Self::new(nd, no, mechs, &hash)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DecodeError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DecodeError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Every non-identity table entry at every NOISE location becomes an
/// independent mechanism with the entry's weight as probability.
pub fn build_dem(circuit: &Circuit) -> Result<DetectorErrorModel, DecodeError> {
    circuit
        .validate()
        .map_err(|e| DecodeError::Mismatch(e.to_string()))?;
    let mut mechs = Vec::new();
    for sens in noise_sensitivities(circuit) {
        let table = &circuit.channels[sens.channel];
        let floor = DEM_FLOOR * table.total();
        for (p, w) in table.errors() {
            if *w <= floor {
                continue;
            }
            let sig = sens.of(p.x_mask(), p.z_mask());
            if sig.is_empty() {
                continue;
            }
            mechs.push(Mechanism::new(*w, sig.detectors, sig.observables));
        }
    }
    DetectorErrorModel::new(
        circuit.num_detectors(),
        circuit.num_observables(),
        mechs,
        &circuit.hash(),
    )
}
