//! Gate orderings and the single-fault alignment check.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::pauli::Letter;
use crate::twirl::VariantId;

use super::layout::{CodeLayout, Slot, Stabilizer, StabilizerType};
use super::SurfaceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Two CZ2 windows per weight-4 stabilizer.
    TwoCz2,
    /// Four CZ windows per weight-4 stabilizer.
    FourCz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `(a, d)` then `(b, c)`.
    Ft,
    /// `(a, b)` then `(c, d)`.
    NonFt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// The CZ2 pulse with one data atom plays the boundary CZ.
    GlobalPulse,
    /// A time-optimal CZ plays the boundary CZ.
    LocalTimeOptimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateOrdering {
    pub scheme: Scheme,
    /// Used by [`Scheme::TwoCz2`].
    pub pairing: Pairing,
    /// Visit order of [`Scheme::FourCz`].
    #[serde(skip, default = "default_visit")]
    pub visit: [Slot; 4],
}

fn default_visit() -> [Slot; 4] {
    [Slot::A, Slot::D, Slot::C, Slot::B]
}

impl GateOrdering {
    pub fn two_cz2(pairing: Pairing) -> Self {
        Self {
            scheme: Scheme::TwoCz2,
            pairing,
            visit: default_visit(),
        }
    }

    /// Four CZs visiting north, west, east, south.
    pub fn four_cz() -> Self {
        Self {
            scheme: Scheme::FourCz,
            pairing: Pairing::Ft,
            visit: default_visit(),
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.scheme, self.pairing) {
            (Scheme::FourCz, _) => "four_cz",
            (Scheme::TwoCz2, Pairing::Ft) => "two_cz2_ft",
            (Scheme::TwoCz2, Pairing::NonFt) => "two_cz2_nonft",
        }
    }

    /// Data qubits of each gate window of a stabilizer, in time order.
    /// Weight-3 stabilizers under the CZ2 scheme get their pair first.
    pub fn windows(&self, stab: &Stabilizer) -> Vec<Vec<usize>> {
        match self.scheme {
            Scheme::FourCz => self
                .visit
                .iter()
                .filter_map(|&s| stab.qubit(s))
                .map(|q| vec![q])
                .collect(),
            Scheme::TwoCz2 => {
                let pairs = match self.pairing {
                    Pairing::Ft => [[Slot::A, Slot::D], [Slot::B, Slot::C]],
                    Pairing::NonFt => [[Slot::A, Slot::B], [Slot::C, Slot::D]],
                };
                let mut w: Vec<Vec<usize>> = pairs
                    .iter()
                    .map(|p| p.iter().filter_map(|&s| stab.qubit(s)).collect::<Vec<_>>())
                    .filter(|v| !v.is_empty())
                    .collect();
                w.sort_by_key(|v| std::cmp::Reverse(v.len()));
                w
            }
        }
    }

    /// Readout variant whose channel covers this stabilizer.
    pub fn variant(&self, stab: &Stabilizer, boundary: BoundaryMode) -> VariantId {
        match (self.scheme, stab.weight(), boundary) {
            (Scheme::TwoCz2, 4, _) => VariantId::BulkCz2,
            (Scheme::FourCz, 4, _) => VariantId::Bulk4cz,
            (Scheme::TwoCz2, _, BoundaryMode::GlobalPulse) => VariantId::BoundaryCz2Global,
            (Scheme::TwoCz2, _, BoundaryMode::LocalTimeOptimal) => VariantId::BoundaryCz2Local,
            (Scheme::FourCz, _, _) => VariantId::Boundary3cz,
        }
    }

    pub fn check(&self, layout: &CodeLayout) -> Result<(), SurfaceError> {
        let mut visit = self.visit.to_vec();
        visit.sort_by_key(|s| s.index());
        visit.dedup();
        if visit.len() != 4 {
            return Err(SurfaceError::InvalidOrdering("visit order must be a permutation".into()));
        }
        for s in &layout.stabilizers {
            let w = self.windows(s);
            let mut all: Vec<usize> = w.iter().flatten().copied().collect();
            all.sort_unstable();
            let mut expect: Vec<usize> = s.data().collect();
            expect.sort_unstable();
            if all != expect {
                return Err(SurfaceError::InvalidOrdering(format!(
                    "windows do not partition stabilizer at {:?}",
                    s.coord
                )));
            }
            if self.scheme == Scheme::TwoCz2 && s.weight() == 3 {
                let sizes: Vec<usize> = w.iter().map(|v| v.len()).collect();
                if sizes != [2, 1] {
                    return Err(SurfaceError::InvalidOrdering(format!(
                        "boundary stabilizer at {:?} split as {sizes:?}",
                        s.coord
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for GateOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GateOrdering {
    type Err = SurfaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "four_cz" | "4cz" => Ok(Self::four_cz()),
            "two_cz2_ft" | "cz2_ft" => Ok(Self::two_cz2(Pairing::Ft)),
            "two_cz2_nonft" | "cz2_nonft" => Ok(Self::two_cz2(Pairing::NonFt)),
            _ => Err(SurfaceError::InvalidOrdering(format!("unknown ordering {s:?}"))),
        }
    }
}

/// One injected fault and the data error it leaves after the round.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultRecord {
    pub stabilizer: usize,
    /// The fault acts right after this window.
    pub window: usize,
    pub fault: Vec<(usize, Letter)>,
    pub residual: Vec<(usize, Letter)>,
    pub aligned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FtReport {
    pub faults: Vec<FaultRecord>,
    /// Indices into `faults` of aligned residuals.
    pub offending: Vec<usize>,
    pub fault_tolerant: bool,
}

/// Whether a data error puts two or more X components on one column or two
/// or more Z components on one row of the minimal logical lines.
pub fn aligns_with_logical(layout: &CodeLayout, residual: &[(usize, Letter)]) -> bool {
    let mut cols: BTreeMap<i32, usize> = BTreeMap::new();
    let mut rows: BTreeMap<i32, usize> = BTreeMap::new();
    for &(q, l) in residual {
        if !layout.on_logical_lines(q) {
            continue;
        }
        let (r, c) = layout.data[q];
        let (x, z) = l.bits();
        if x {
            *cols.entry(c).or_default() += 1;
        }
        if z {
            *rows.entry(r).or_default() += 1;
        }
    }
    cols.values().chain(rows.values()).any(|&n| n >= 2)
}

/// Propagates every single-window fault through the rest of its
/// stabilizer's readout and flags aligned data errors.
pub fn analyze_ordering(layout: &CodeLayout, ordering: &GateOrdering) -> FtReport {
    let mut faults = Vec::new();
    for (si, stab) in layout.stabilizers.iter().enumerate() {
        let windows = ordering.windows(stab);
        for (w, window) in windows.iter().enumerate() {
            // Local frame: index 0 is the ancilla, then the window's data.
            let qubits: Vec<Option<usize>> =
                std::iter::once(None).chain(window.iter().map(|&q| Some(q))).collect();
            let k = qubits.len();
            for code in 1..(1usize << (2 * k)) {
                let mut ax = false;
                let mut data: BTreeMap<usize, (bool, bool)> = BTreeMap::new();
                let mut fault = Vec::new();
                for (i, q) in qubits.iter().enumerate() {
                    let l = Letter::from_code((code >> (2 * i)) & 3);
                    if l == Letter::I {
                        continue;
                    }
                    let (x, z) = l.bits();
                    match q {
                        None => {
                            ax = x;
                            fault.push((layout.ancilla(si), l));
                        }
                        Some(q) => {
                            data.insert(*q, (x, z));
                            fault.push((*q, l));
                        }
                    }
                }
                for later in &windows[w + 1..] {
                    for &q in later {
                        // CZ(anc, q): X on the ancilla adds Z on q.
                        if ax {
                            data.entry(q).or_default().1 ^= true;
                        }
                    }
                }
                let residual: Vec<(usize, Letter)> = data
                    .into_iter()
                    .filter(|(_, (x, z))| *x || *z)
                    .map(|(q, (x, z))| {
                        let (x, z) = match stab.kind {
                            StabilizerType::X => (z, x),
                            StabilizerType::Z => (x, z),
                        };
                        (q, Letter::from_bits(x, z))
                    })
                    .collect();
                let aligned = aligns_with_logical(layout, &residual);
                faults.push(FaultRecord {
                    stabilizer: si,
                    window: w,
                    fault,
                    residual,
                    aligned,
                });
            }
        }
    }
    let offending: Vec<usize> = faults
        .iter()
        .enumerate()
        .filter(|(_, f)| f.aligned)
        .map(|(i, _)| i)
        .collect();
    FtReport {
        fault_tolerant: offending.is_empty(),
        faults,
        offending,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_windows_put_the_pair_first() {
        let l = CodeLayout::new(3).unwrap();
        for o in [GateOrdering::two_cz2(Pairing::Ft), GateOrdering::two_cz2(Pairing::NonFt)] {
            o.check(&l).unwrap();
            for s in l.stabilizers.iter().filter(|s| s.weight() == 3) {
                let w = o.windows(s);
                assert_eq!(w.iter().map(|v| v.len()).collect::<Vec<_>>(), vec![2, 1]);
            }
        }
        GateOrdering::four_cz().check(&l).unwrap();
    }

    #[test]
    fn pair_on_one_column_aligns() {
        let l = CodeLayout::new(3).unwrap();
        let (q0, q1) = (l.x_logical[0], l.x_logical[1]);
        assert!(aligns_with_logical(&l, &[(q0, Letter::X), (q1, Letter::X)]));
        assert!(!aligns_with_logical(&l, &[(q0, Letter::Z), (q1, Letter::Z)]));
        assert!(aligns_with_logical(&l, &[(q0, Letter::Y), (q1, Letter::Y)]));
    }

    #[test]
    fn pairing_verdicts() {
        for d in [3, 5] {
            let l = CodeLayout::new(d).unwrap();
            assert!(analyze_ordering(&l, &GateOrdering::two_cz2(Pairing::Ft)).fault_tolerant);
            assert!(analyze_ordering(&l, &GateOrdering::four_cz()).fault_tolerant);
            let bad = analyze_ordering(&l, &GateOrdering::two_cz2(Pairing::NonFt));
            assert!(!bad.fault_tolerant);
            assert!(!bad.offending.is_empty());
        }
    }
}
