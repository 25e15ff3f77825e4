//! Unrotated surface-code geometry.
//!
//! Sites live on a `(2D-1) x (2D-1)` grid with rows growing downwards.
//! Data qubits sit where `row + col` is even; X ancillas on even rows and
//! odd columns, Z ancillas on odd rows and even columns. The minimal `X_L`
//! runs down column 0 and the minimal `Z_L` along row 0.

use serde::{Deserialize, Serialize};

use super::SurfaceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilizerType {
    X,
    Z,
}

/// Neighbour labels of a stabilizer: `a` north, `b` south, `c` east,
/// `d` west.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    A,
    B,
    C,
    D,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::A, Slot::B, Slot::C, Slot::D];

    pub fn offset(self) -> (i32, i32) {
        match self {
            Slot::A => (-1, 0),
            Slot::B => (1, 0),
            Slot::C => (0, 1),
            Slot::D => (0, -1),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stabilizer {
    pub kind: StabilizerType,
    pub coord: (i32, i32),
    /// Data qubit ids in slots `(a, b, c, d)`; `None` past the boundary.
    pub support: [Option<usize>; 4],
}

impl Stabilizer {
    pub fn weight(&self) -> usize {
        self.support.iter().flatten().count()
    }

    pub fn qubit(&self, slot: Slot) -> Option<usize> {
        self.support[slot.index()]
    }

    pub fn data(&self) -> impl Iterator<Item = usize> + '_ {
        self.support.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeLayout {
    pub distance: usize,
    /// Grid coordinates `(row, col)` of the data qubits.
    pub data: Vec<(i32, i32)>,
    pub stabilizers: Vec<Stabilizer>,
    pub x_logical: Vec<usize>,
    pub z_logical: Vec<usize>,
}

impl CodeLayout {
    pub fn new(distance: usize) -> Result<Self, SurfaceError> {
        if distance < 3 || distance % 2 == 0 || distance > 15 {
            return Err(SurfaceError::InvalidDistance(distance));
        }
        let size = 2 * distance as i32 - 1;
        let mut data = Vec::new();
        for r in 0..size {
            for c in 0..size {
                if (r + c) % 2 == 0 {
                    data.push((r, c));
                }
            }
        }
        let find = |r: i32, c: i32| data.iter().position(|&p| p == (r, c));
        let mut stabilizers = Vec::new();
        for kind in [StabilizerType::X, StabilizerType::Z] {
            for r in 0..size {
                for c in 0..size {
                    let here = match kind {
                        StabilizerType::X => r % 2 == 0 && c % 2 == 1,
                        StabilizerType::Z => r % 2 == 1 && c % 2 == 0,
                    };
                    if !here {
                        continue;
                    }
                    let support = Slot::ALL.map(|s| {
                        let (dr, dc) = s.offset();
                        find(r + dr, c + dc)
                    });
                    stabilizers.push(Stabilizer {
                        kind,
                        coord: (r, c),
                        support,
                    });
                }
            }
        }
        let x_logical = (0..size).step_by(2).map(|r| find(r, 0).unwrap()).collect();
        let z_logical = (0..size).step_by(2).map(|c| find(0, c).unwrap()).collect();
        Ok(Self {
            distance,
            data,
            stabilizers,
            x_logical,
            z_logical,
        })
    }

    pub fn num_data(&self) -> usize {
        self.data.len()
    }

    pub fn num_ancillas(&self) -> usize {
        self.stabilizers.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_data() + self.num_ancillas()
    }

    /// Circuit qubit id of stabilizer `s`'s ancilla; data qubits come first.
    pub fn ancilla(&self, s: usize) -> usize {
        self.num_data() + s
    }

    pub fn of_type(&self, kind: StabilizerType) -> impl Iterator<Item = usize> + '_ {
        (0..self.stabilizers.len()).filter(move |&s| self.stabilizers[s].kind == kind)
    }

    /// Data qubits with both coordinates even lie on minimal logical
    /// representatives: `Z_L` along their row, `X_L` down their column.
    pub fn on_logical_lines(&self, q: usize) -> bool {
        let (r, c) = self.data[q];
        r % 2 == 0 && c % 2 == 0
    }

    /// Symplectic check that all stabilizers commute with each other and
    /// with both logicals, and that the logicals anticommute.
    pub fn check(&self) -> Result<(), SurfaceError> {
        let overlap = |a: &[usize], b: &[usize]| a.iter().filter(|q| b.contains(q)).count();
        let sup: Vec<Vec<usize>> = self.stabilizers.iter().map(|s| s.data().collect()).collect();
        for (i, si) in self.stabilizers.iter().enumerate() {
            for (j, sj) in self.stabilizers.iter().enumerate().skip(i + 1) {
                if si.kind != sj.kind && overlap(&sup[i], &sup[j]) % 2 == 1 {
                    return Err(SurfaceError::NonCommuting(i, j));
                }
            }
            let logical = match si.kind {
                StabilizerType::X => &self.z_logical,
                StabilizerType::Z => &self.x_logical,
            };
            if overlap(&sup[i], logical) % 2 == 1 {
                return Err(SurfaceError::NonCommuting(i, usize::MAX));
            }
        }
        if overlap(&self.x_logical, &self.z_logical) % 2 == 0 {
            return Err(SurfaceError::NonCommuting(usize::MAX, usize::MAX));
        }
        Ok(())
    }
}
