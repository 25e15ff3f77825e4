//! Phase-free Pauli strings over up to 64 qubits.
//!
//! A string is stored as a pair of bitmasks in the symplectic representation:
//! bit `q` of `x` (resp. `z`) is set when qubit `q` carries an X (resp. Z)
//! component, so `Y` has both bits set.
//!
//! The canonical ordering used for channel-table keys is lexicographic in the
//! qubit index with letters ordered `I < X < Y < Z`. Qubit 0 is the most
//! significant position, which makes [`PauliString::index`] agree with the
//! textual sort order of the rendered strings.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Maximum number of qubits a [`PauliString`] can address.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliParseError {
    #[error("invalid Pauli letter {0:?}")]
    BadLetter(char),
    #[error("Pauli string longer than {MAX_QUBITS} qubits")]
    TooLong,
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    /// Position in the canonical `I < X < Y < Z` order.
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Letter {
        Letter::ALL[code & 3]
    }

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// An `n`-qubit Pauli string without phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self { n, x: 0, z: 0 }
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        let mask = full_mask(n);
        Self {
            n,
            x: x & mask,
            z: z & mask,
        }
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        p
    }

    /// Inverse of [`PauliString::index`].
    pub fn from_index(n: usize, index: usize) -> Self {
        let mut p = Self::identity(n);
        let mut rest = index;
        for q in (0..n).rev() {
            p.set(q, Letter::from_code(rest & 3));
            rest >>= 2;
        }
        p
    }

    /// Rank of this string in the canonical order, in `0..4^n`.
    pub fn index(&self) -> usize {
        (0..self.n).fold(0usize, |acc, q| (acc << 2) | self.letter(q).code())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, letter: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {}-qubit string", self.n);
        let (bx, bz) = letter.bits();
        self.x = (self.x & !(1 << q)) | ((bx as u64) << q);
        self.z = (self.z & !(1 << q)) | ((bz as u64) << q);
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.n, other.n);
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// `+1` when the strings commute and `-1` otherwise.
    pub fn commutation_sign(&self, other: &PauliString) -> f64 {
        if self.commutes_with(other) {
            1.0
        } else {
            -1.0
        }
    }

    /// Phase-free product.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        debug_assert_eq!(self.n, other.n);
        PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        }
    }

    /// Relabel qubits: qubit `q` of `self` moves to position `perm[q]`.
    pub fn permuted(&self, perm: &[usize]) -> PauliString {
        assert_eq!(perm.len(), self.n);
        let mut out = PauliString::identity(self.n);
        for (q, &to) in perm.iter().enumerate() {
            out.set(to, self.letter(q));
        }
        out
    }

    /// Matrix element `<y ^ x_mask | P | y>` of the phase-free string, which
    /// is the only non-zero entry in column `y`.
    ///
    /// `Y` is taken as `i X Z`, so `Y|0> = i|1>` and `Y|1> = -i|0>`.
    pub fn column_phase(&self, y: u64) -> num_complex::Complex64 {
        let ny = (self.x & self.z).count_ones();
        let sign = if (self.z & y).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let i_pow = match ny % 4 {
            0 => num_complex::Complex64::new(1.0, 0.0),
            1 => num_complex::Complex64::new(0.0, 1.0),
            2 => num_complex::Complex64::new(-1.0, 0.0),
            _ => num_complex::Complex64::new(0.0, -1.0),
        };
        i_pow * sign
    }

    /// Iterate over all `4^n` strings in canonical order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        assert!(n <= 12, "enumerating 4^{n} strings is not supported");
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n.cmp(&other.n).then_with(|| {
            for q in 0..self.n {
                let c = self.letter(q).cmp(&other.letter(q));
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = PauliParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .trim()
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(PauliParseError::BadLetter(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if letters.len() > MAX_QUBITS {
            return Err(PauliParseError::TooLong);
        }
        Ok(PauliString::from_letters(&letters))
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
