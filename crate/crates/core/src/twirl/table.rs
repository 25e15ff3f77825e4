//! Pauli channel tables and their JSON form.
//!
//! ```json
//! {
//!   "format": "rydqec-channel",
//!   "version": 1,
//!   "n": 5,
//!   "variant": "bulk_cz2",
//!   "gamma": 0.001,
//!   "pulse_hash": "3f0c...",
//!   "imag_residual": 1.2e-17,
//!   "entries": [["IIIII", 0.9931], ["ZIIII", 0.0012], ...]
//! }
//! ```
//!
//! Entries are sorted in canonical Pauli order and weights with magnitude
//! below `1e-14` are dropped.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pauli::PauliString;

use super::TwirlError;

pub const FORMAT: &str = "rydqec-channel";
pub const VERSION: u32 = 1;

/// Weights below this magnitude are not stored.
pub const FLOOR: f64 = 1e-14;
pub const NORM_TOLERANCE: f64 = 1e-6;
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannelTable {
    pub n: usize,
    pub variant: String,
    pub gamma: f64,
    pub pulse_hash: String,
    /// Largest imaginary part seen while reducing to Pauli weights.
    pub imag_residual: f64,
    entries: Vec<(PauliString, f64)>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    format: String,
    version: u32,
    n: usize,
    variant: String,
    gamma: f64,
    pulse_hash: String,
    #[serde(default)]
    imag_residual: f64,
    entries: Vec<(String, f64)>,
}

impl PauliChannelTable {
    /// Table from explicit entries. Duplicates are summed.
    pub fn new(
        n: usize,
        variant: &str,
        gamma: f64,
        entries: impl IntoIterator<Item = (PauliString, f64)>,
    ) -> Result<Self, TwirlError> {
        let mut v: Vec<(PauliString, f64)> = Vec::new();
        for (p, l) in entries {
            if p.num_qubits() != n {
                return Err(TwirlError::InvalidArgument(format!(
                    "entry {p} does not have {n} qubits"
                )));
            }
            v.push((p, l));
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v.dedup_by(|later, first| {
            if later.0 == first.0 {
                first.1 += later.1;
                true
            } else {
                false
            }
        });
        v.retain(|e| e.1.abs() >= FLOOR);
        Ok(Self {
            n,
            variant: variant.to_string(),
            gamma,
            pulse_hash: String::new(),
            imag_residual: 0.0,
            entries: v,
        })
    }

    /// The noiseless channel.
    pub fn identity(n: usize) -> Self {
        Self::new(n, "identity", 0.0, [(PauliString::identity(n), 1.0)]).unwrap()
    }

    /// Table from a dense weight vector indexed by [`PauliString::index`].
    pub fn from_weights(
        n: usize,
        variant: &str,
        gamma: f64,
        pulse_hash: &str,
        weights: &[f64],
        imag_residual: f64,
    ) -> Self {
        assert_eq!(weights.len(), 1 << (2 * n));
        let mut entries: Vec<(PauliString, f64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() >= FLOOR)
            .map(|(i, &l)| (PauliString::from_index(n, i), l))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            n,
            variant: variant.to_string(),
            gamma,
            pulse_hash: pulse_hash.to_string(),
            imag_residual,
            entries,
        }
    }

    pub fn with_pulse_hash(mut self, hash: &str) -> Self {
        self.pulse_hash = hash.to_string();
        self
    }

    pub fn entries(&self) -> &[(PauliString, f64)] {
        &self.entries
    }

    pub fn lambda(&self, p: &PauliString) -> f64 {
        self.entries
            .binary_search_by(|e| e.0.cmp(p))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn identity_weight(&self) -> f64 {
        self.lambda(&PauliString::identity(self.n))
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Entries other than the identity.
    pub fn errors(&self) -> impl Iterator<Item = &(PauliString, f64)> {
        self.entries.iter().filter(|e| !e.0.is_identity())
    }

    /// Same channel with qubit `q` moved to `perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut t = Self::new(
            self.n,
            &self.variant,
            self.gamma,
            self.entries.iter().map(|(p, l)| (p.permuted(perm), *l)),
        )
        .expect("same qubit count");
        t.pulse_hash = self.pulse_hash.clone();
        t.imag_residual = self.imag_residual;
        t
    }

    /// Mixture `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &Self, alpha: f64) -> Result<Self, TwirlError> {
        if other.n != self.n {
            return Err(TwirlError::InvalidArgument("mixing tables of different size".into()));
        }
        Self::new(
            self.n,
            &format!("mix({},{})", self.variant, other.variant),
            alpha * self.gamma + (1.0 - alpha) * other.gamma,
            self.entries
                .iter()
                .map(|(p, l)| (*p, alpha * l))
                .chain(other.entries.iter().map(|(p, l)| (*p, (1.0 - alpha) * l))),
        )
    }

    /// Fails on normalization or negativity beyond tolerance.
    pub fn check(&self) -> Result<(), TwirlError> {
        let total = self.total();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(TwirlError::Normalization { total });
        }
        if let Some((p, l)) = self.entries.iter().find(|e| e.1 < -NEGATIVE_TOLERANCE) {
            return Err(TwirlError::Negative {
                pauli: p.to_string(),
                value: *l,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let f = TableFile {
            format: FORMAT.into(),
            version: VERSION,
            n: self.n,
            variant: self.variant.clone(),
            gamma: self.gamma,
            pulse_hash: self.pulse_hash.clone(),
            imag_residual: self.imag_residual,
            entries: self.entries.iter().map(|(p, l)| (p.to_string(), *l)).collect(),
        };
        serde_json::to_string_pretty(&f).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, TwirlError> {
        let f: TableFile = serde_json::from_str(s)?;
        if f.format != FORMAT || f.version != VERSION {
            return Err(TwirlError::InvalidArgument(format!(
                "unsupported channel file {} v{}",
                f.format, f.version
            )));
        }
        let mut entries = Vec::with_capacity(f.entries.len());
        for (s, l) in f.entries {
            let p: PauliString = s
                .parse()
                .map_err(|e| TwirlError::InvalidArgument(format!("{s}: {e}")))?;
            entries.push((p, l));
        }
        let mut t = Self::new(f.n, &f.variant, f.gamma, entries)?;
        t.pulse_hash = f.pulse_hash;
        t.imag_residual = f.imag_residual;
        Ok(t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TwirlError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TwirlError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Summary produced by [`validate_channel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub valid: bool,
    pub total: f64,
    pub min_lambda: f64,
    /// Entries below `-1e-9`.
    pub negative: Vec<(PauliString, f64)>,
    pub imag_residual: f64,
    /// Heaviest entries, identity included.
    pub heaviest: Vec<(PauliString, f64)>,
    /// Total weight on strings acting on three or more qubits.
    pub weight_3plus: f64,
}

impl std::fmt::Display for ChannelReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "{}: sum = {:.12}, min = {:.3e}, imag = {:.1e}, weight(>=3) = {:.3e}",
            if self.valid { "valid" } else { "INVALID" },
            self.total,
            self.min_lambda,
            self.imag_residual,
            self.weight_3plus
        )?;
        for (p, l) in &self.heaviest {
            writeln!(f, "  {p}  {l:.6e}")?;
        }
        Ok(())
    }
}

/// Checks a table and lists its heaviest `k` entries.
pub fn validate_channel(table: &PauliChannelTable, k: usize) -> ChannelReport {
    let total = table.total();
    let negative: Vec<_> = table
        .entries
        .iter()
        .filter(|e| e.1 < -NEGATIVE_TOLERANCE)
        .copied()
        .collect();
    let mut heaviest = table.entries.clone();
    heaviest.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    heaviest.truncate(k);
    ChannelReport {
        valid: (total - 1.0).abs() <= NORM_TOLERANCE
            && negative.is_empty()
            && table.imag_residual <= NORM_TOLERANCE,
        total,
        min_lambda: table.entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min),
        negative,
        imag_residual: table.imag_residual,
        heaviest,
        weight_3plus: table
            .entries
            .iter()
            .filter(|e| e.0.weight() >= 3)
            .map(|e| e.1)
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn identity_table_validates() {
        let t = PauliChannelTable::identity(5);
        let r = validate_channel(&t, 3);
        assert!(r.valid);
        assert_eq!(r.heaviest, vec![(PauliString::identity(5), 1.0)]);
    }

    #[test]
    fn negative_entry_is_flagged() {
        let t = PauliChannelTable::new(
            2,
            "t",
            0.0,
            [(p("II"), 1.0001), (p("XZ"), -1e-4)],
        )
        .unwrap();
        let r = validate_channel(&t, 2);
        assert!(!r.valid);
        assert_eq!(r.negative.len(), 1);
        assert!(t.check().is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = PauliChannelTable::new(
            3,
            "bulk",
            1e-3,
            [(p("III"), 0.99), (p("ZIZ"), 0.004), (p("YXI"), 0.006)],
        )
        .unwrap()
        .with_pulse_hash("abc");
        let back = PauliChannelTable::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.lambda(&p("ZIZ")), 0.004);
        assert_eq!(back.lambda(&p("XXX")), 0.0);
    }

    #[test]
    fn floor_drops_tiny_entries() {
        let t = PauliChannelTable::new(1, "t", 0.0, [(p("I"), 1.0), (p("X"), 1e-16)]).unwrap();
        assert_eq!(t.entries().len(), 1);
    }
}
