//! n-qubit Pauli operators in symplectic (x, z) bit representation with
//! exact global phase tracking.
//!
//! An operator is stored as `i^phase_exp * s_0 ⊗ s_1 ⊗ ... ⊗ s_{n-1}` where
//! each letter `s_j ∈ {I, X, Y, Z}` is encoded by the bit pair
//! `(x_j, z_j)`: I=(0,0), X=(1,0), Y=(1,1), Z=(0,1). Qubit 0 is the leftmost
//! letter in string form. The phase is relative to the tensor product of
//! letters, so a Hermitian operator has `phase_exp ∈ {0, 2}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Bit masks are held in a single u64 word per component.
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PauliOperator {
    n: usize,
    x_bits: u64,
    z_bits: u64,
    phase_exp: u8,
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliOperator {
    pub fn new(n: usize, x_bits: u64, z_bits: u64, phase_exp: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Parse(format!(
                "qubit count {n} outside supported range 1..={MAX_QUBITS}"
            )));
        }
        if x_bits & !mask(n) != 0 || z_bits & !mask(n) != 0 {
            return Err(Error::Invariant(format!(
                "bit masks exceed qubit count {n}"
            )));
        }
        Ok(PauliOperator {
            n,
            x_bits,
            z_bits,
            phase_exp: phase_exp % 4,
        })
    }

    pub fn identity(n: usize) -> Self {
        PauliOperator {
            n,
            x_bits: 0,
            z_bits: 0,
            phase_exp: 0,
        }
    }

    /// Single-qubit letter placed on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: char) -> Result<Self> {
        if qubit >= n {
            return Err(Error::QubitOutOfRange { index: qubit, n });
        }
        let bit = 1u64 << qubit;
        let (x, z) = match letter {
            'I' => (0, 0),
            'X' => (bit, 0),
            'Y' => (bit, bit),
            'Z' => (0, bit),
            other => return Err(Error::Parse(format!("invalid Pauli letter '{other}'"))),
        };
        PauliOperator::new(n, x, z, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x_bits
    }

    pub fn z_bits(&self) -> u64 {
        self.z_bits
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    pub fn is_identity(&self) -> bool {
        self.x_bits == 0 && self.z_bits == 0
    }

    /// True when the operator has no X or Y letters.
    pub fn is_diagonal(&self) -> bool {
        self.x_bits == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase_exp % 2 == 0
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x_bits | self.z_bits).count_ones()
    }

    pub fn acts_on(&self, qubit: usize) -> bool {
        (self.x_bits | self.z_bits) >> qubit & 1 == 1
    }

    pub fn letter(&self, qubit: usize) -> char {
        match ((self.x_bits >> qubit) & 1, (self.z_bits >> qubit) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    fn letter_code(&self, qubit: usize) -> u8 {
        // Ordering I < X < Y < Z for lexicographic string comparisons.
        match ((self.x_bits >> qubit) & 1, (self.z_bits >> qubit) & 1) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        }
    }

    /// Phase exponent in the `i^k X^x Z^z` form (letters expanded via Y = iXZ).
    fn xz_phase_exp(&self) -> u8 {
        ((self.phase_exp as u32 + (self.x_bits & self.z_bits).count_ones()) % 4) as u8
    }

    /// Exact Pauli group product `self * other`.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let x = self.x_bits ^ other.x_bits;
        let z = self.z_bits ^ other.z_bits;
        // Commuting Z^z1 past X^x2 contributes (-1)^{z1·x2} = i^{2 z1·x2}.
        let k_xz = self.xz_phase_exp() as u32
            + other.xz_phase_exp() as u32
            + 2 * (self.z_bits & other.x_bits).count_ones();
        let phase = (k_xz + 4 * MAX_QUBITS as u32 - (x & z).count_ones()) % 4;
        Ok(PauliOperator {
            n: self.n,
            x_bits: x,
            z_bits: z,
            phase_exp: phase as u8,
        })
    }

    /// True iff the symplectic inner product of the bit vectors vanishes mod 2.
    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let s = (self.x_bits & other.z_bits).count_ones() + (self.z_bits & other.x_bits).count_ones();
        Ok(s % 2 == 0)
    }

    /// Strip the phase; for a Hermitian operator returns the phase-free
    /// operator and its real sign.
    pub fn sign_split(&self) -> Result<(PauliOperator, f64)> {
        let sign = match self.phase_exp {
            0 => 1.0,
            2 => -1.0,
            _ => {
                return Err(Error::Invariant(format!(
                    "operator {self} is not Hermitian"
                )))
            }
        };
        let mut op = *self;
        op.phase_exp = 0;
        Ok((op, sign))
    }

    /// Copy with the phase exponent replaced.
    pub fn with_phase(&self, phase_exp: u8) -> PauliOperator {
        let mut op = *self;
        op.phase_exp = phase_exp % 4;
        op
    }

    /// Symplectic vector (x | z << 64) for GF(2) linear algebra.
    pub fn symplectic_bits(&self) -> u128 {
        (self.x_bits as u128) | ((self.z_bits as u128) << 64)
    }

    /// Restriction to a subset of qubits, in the given order. Fails if the
    /// operator acts outside the subset.
    pub fn project_onto(&self, qubits: &[usize]) -> Result<PauliOperator> {
        let mut keep = 0u64;
        for &q in qubits {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
            keep |= 1 << q;
        }
        if (self.x_bits | self.z_bits) & !keep != 0 {
            return Err(Error::Invariant(
                "operator acts outside the projection subset".into(),
            ));
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (new_idx, &q) in qubits.iter().enumerate() {
            x |= ((self.x_bits >> q) & 1) << new_idx;
            z |= ((self.z_bits >> q) & 1) << new_idx;
        }
        PauliOperator::new(qubits.len(), x, z, self.phase_exp)
    }

    /// Dense 2^n matrix (qubit 0 is the most significant index bit).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        let xm = self.index_mask(self.x_bits);
        let zm = self.index_mask(self.z_bits);
        let phase = match self.xz_phase_exp() {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        for col in 0..dim {
            let row = col ^ xm;
            let sign = if (zm & col).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            m[(row, col)] += phase * sign;
        }
        m
    }

    /// Remap qubit-indexed bits to basis-index bits (qubit 0 = MSB).
    fn index_mask(&self, bits: u64) -> usize {
        let mut out = 0usize;
        for q in 0..self.n {
            if (bits >> q) & 1 == 1 {
                out |= 1 << (self.n - 1 - q);
            }
        }
        out
    }
}

impl PartialOrd for PauliOperator {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliOperator {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| {
                for q in 0..self.n {
                    match self.letter_code(q).cmp(&other.letter_code(q)) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.phase_exp.cmp(&other.phase_exp))
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase_exp {
            0 => {}
            1 => write!(f, "i*")?,
            2 => write!(f, "-")?,
            _ => write!(f, "-i*")?,
        }
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses the plain letter form "IXZ". Phase prefixes are not accepted:
    /// the text interface carries phase-free operators only.
    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        if s.len() > MAX_QUBITS {
            return Err(Error::Parse(format!(
                "Pauli string '{s}' longer than {MAX_QUBITS} qubits"
            )));
        }
        let n = s.chars().count();
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, c) in s.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                'Z' => z |= 1 << q,
                other => {
                    return Err(Error::Parse(format!(
                        "invalid character '{other}' in Pauli string '{s}'"
                    )))
                }
            }
        }
        PauliOperator::new(n, x, z, 0)
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i*") {
            (3u8, r)
        } else if let Some(r) = s.strip_prefix("i*") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2u8, r)
        } else {
            (0u8, s.as_str())
        };
        let op: PauliOperator = rest.parse().map_err(D::Error::custom)?;
        Ok(op.with_phase(phase))
    }
}
