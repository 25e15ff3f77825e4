//! Restricted product bases of three-level atoms.

/// Level codes (`0` is the plain ground level).
pub const L1: u8 = 1;
pub const LR: u8 = 2;

pub const NONE: u32 = u32::MAX;

/// Allowed levels of one atom as a bitmask over `{0, 1, r}`.
pub type LevelSet = u8;
pub const ALL_LEVELS: LevelSet = 0b111;

pub fn level_set(levels: &[u8]) -> LevelSet {
    levels.iter().fold(0, |acc, l| acc | (1 << l))
}

/// Ordered set of basis states of an `n`-atom register.
///
/// States are products of per-atom levels, minus those excluded by an
/// infinite blockade. Atom 0 is the most significant base-3 digit of the
/// full index.
#[derive(Debug, Clone)]
pub struct Space {
    pub n: usize,
    /// Full base-3 index of each kept state.
    pub states: Vec<u32>,
    lookup: Vec<u32>,
    /// Per atom: `(i, k)` with `i` holding the atom in `|1>` and `k` the
    /// same state with the atom raised to `|r>`.
    pub up: Vec<Vec<(u32, u32)>>,
    /// Per atom and ground level `q`: `(i, k)` with `i` holding the atom in
    /// `q` and `k` the same state with the atom in `|r>`.
    pub to_r: Vec<[Vec<(u32, u32)>; 2]>,
    /// Number of atoms in `|r>` per state.
    pub n_r: Vec<f64>,
}

pub fn pow3(n: usize) -> usize {
    3usize.pow(n as u32)
}

pub fn level_of(full: u32, n: usize, atom: usize) -> u8 {
    ((full as usize / pow3(n - 1 - atom)) % 3) as u8
}

pub fn with_level(full: u32, n: usize, atom: usize, level: u8) -> u32 {
    let p = pow3(n - 1 - atom) as u32;
    let cur = level_of(full, n, atom) as u32;
    full - cur * p + level as u32 * p
}

impl Space {
    /// Product of `allowed[a]` over atoms, without states where both atoms
    /// of an `excluded` pair sit in `|r>`.
    pub fn new(allowed: &[LevelSet], excluded: &[(usize, usize)]) -> Self {
        let n = allowed.len();
        let total = pow3(n);
        let mut states = Vec::new();
        let mut lookup = vec![NONE; total];
        for full in 0..total as u32 {
            let ok = (0..n).all(|a| allowed[a] & (1 << level_of(full, n, a)) != 0)
                && !excluded
                    .iter()
                    .any(|&(a, b)| level_of(full, n, a) == LR && level_of(full, n, b) == LR);
            if ok {
                lookup[full as usize] = states.len() as u32;
                states.push(full);
            }
        }
        let mut up = vec![Vec::new(); n];
        let mut to_r = vec![[Vec::new(), Vec::new()]; n];
        let mut n_r = Vec::with_capacity(states.len());
        for (i, &full) in states.iter().enumerate() {
            let mut count = 0.0;
            for a in 0..n {
                let l = level_of(full, n, a);
                if l == LR {
                    count += 1.0;
                    continue;
                }
                let k = lookup[with_level(full, n, a, LR) as usize];
                if k == NONE {
                    continue;
                }
                if l == L1 {
                    up[a].push((i as u32, k));
                }
                to_r[a][l as usize].push((i as u32, k));
            }
            n_r.push(count);
        }
        Self {
            n,
            states,
            lookup,
            up,
            to_r,
            n_r,
        }
    }

    /// Every level on every atom.
    pub fn full(n: usize, excluded: &[(usize, usize)]) -> Self {
        Self::new(&vec![ALL_LEVELS; n], excluded)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, full: u32) -> Option<usize> {
        match self.lookup.get(full as usize) {
            Some(&i) if i != NONE => Some(i as usize),
            _ => None,
        }
    }

    pub fn level(&self, i: usize, atom: usize) -> u8 {
        level_of(self.states[i], self.n, atom)
    }
}

/// Full index of a computational state given as a bitmask with bit `a`
/// holding atom `a`, the convention of [`crate::pauli::PauliString`].
pub fn computational_full(bits: u64, n: usize) -> u32 {
    (0..n).fold(0u32, |acc, a| acc * 3 + ((bits >> a) & 1) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blockade_removes_doubly_excited_states() {
        let s = Space::full(3, &[(0, 1), (0, 2)]);
        assert_eq!(s.len(), 22);
        let s = Space::full(2, &[]);
        assert_eq!(s.len(), 9);
    }

    #[test]
    fn transition_tables_are_consistent() {
        let s = Space::new(&[ALL_LEVELS, level_set(&[L1, LR])], &[(0, 1)]);
        for a in 0..2 {
            for &(i, k) in &s.up[a] {
                assert_eq!(s.level(i as usize, a), L1);
                assert_eq!(s.level(k as usize, a), LR);
            }
        }
        // |r r> is blockaded so |r 1> has no partner on atom 1.
        let r1 = s.index(computational_full(0, 2) + 2 * 3 + 1).unwrap();
        assert!(!s.up[1].iter().any(|&(i, _)| i as usize == r1));
    }

    #[test]
    fn computational_index_ordering() {
        assert_eq!(computational_full(0b01, 2), 3);
        assert_eq!(computational_full(0b10, 2), 1);
        assert_eq!(computational_full(0b111, 3), 13);
    }
}
