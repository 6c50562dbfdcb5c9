//! Pauli strings in symplectic `(x|z)` form with a sign bit.
//!
//! Site `j` carries `I, X, Z, Y` for `(x_j, z_j) = (0,0), (1,0), (0,1), (1,1)`,
//! and the string is `(-1)^sign` times the tensor product of those single-site
//! Paulis.

use std::fmt;

use crate::error::{Error, Result};
use crate::gates::PairImage;
use crate::gf2::BitVector;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: BitVector,
    pub z: BitVector,
    pub sign: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
            sign: false,
        }
    }

    pub fn single_z(n: usize, site: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::unit(n, site),
            sign: false,
        }
    }

    pub fn single_x(n: usize, site: usize) -> Self {
        Self {
            x: BitVector::unit(n, site),
            z: BitVector::zeros(n),
            sign: false,
        }
    }

    /// Parses `"+XZIY"` / `"-ZZ"` / `"XX"`; site 0 is the leftmost letter.
    pub fn parse(s: &str) -> Result<Self> {
        let (sign, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let n = body.chars().count();
        let mut p = Self::identity(n);
        p.sign = sign;
        for (j, c) in body.chars().enumerate() {
            match c {
                'I' | '_' => {}
                'X' => p.x.set(j, true),
                'Z' => p.z.set(j, true),
                'Y' => {
                    p.x.set(j, true);
                    p.z.set(j, true);
                }
                other => return Err(Error::Parse(format!("invalid Pauli letter {other:?}"))),
            }
        }
        Ok(p)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn is_identity_at(&self, site: usize) -> bool {
        !self.x.get(site) && !self.z.get(site)
    }

    /// True if every non-identity factor is a `Z`.
    pub fn is_z_type(&self) -> bool {
        self.x.is_zero()
    }

    /// Single-site letter at `site`.
    pub fn letter(&self, site: usize) -> char {
        match (self.x.get(site), self.z.get(site)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    /// `self <- self * rhs`, for commuting strings.
    ///
    /// The phase is accumulated a word at a time; the product of two commuting Hermitian Paulis is again Hermitian, so only
    /// the sign can change.
    pub fn mul_assign_commuting(&mut self, rhs: &PauliString) {
        debug_assert_eq!(self.n_qubits(), rhs.n_qubits());
        // per site the phase is i^{+1} or i^{-1} where the factors anticommute
        let mut odd = 0u32;
        let mut minus = 0u32;
        let xs = self.x.words_mut();
        let zs = self.z.words_mut();
        for (w, (x1, z1)) in xs.iter_mut().zip(zs.iter_mut()).enumerate() {
            let x2 = rhs.x.words()[w];
            let z2 = rhs.z.words()[w];
            let x1z2 = *x1 & z2;
            let anti = (x2 & *z1) ^ x1z2;
            *x1 ^= x2;
            *z1 ^= z2;
            odd += anti.count_ones();
            minus += ((*x1 ^ *z1 ^ x1z2) & anti).count_ones();
        }
        let log_i = (odd + 2 * minus) & 3;
        debug_assert_eq!(log_i & 1, 0, "product of anticommuting strings");
        self.sign ^= rhs.sign ^ (log_i == 2);
    }

    /// Applies a two-site action table (indexed by `x | z << 2`) to sites
    /// `(q0, q1)`, where `q0` is the gate's first site.
    #[inline]
    pub(crate) fn apply_pair_table(&mut self, table: &[PairImage; 16], q0: usize, q1: usize) {
        let x = u8::from(self.x.get(q0)) | u8::from(self.x.get(q1)) << 1;
        let z = u8::from(self.z.get(q0)) | u8::from(self.z.get(q1)) << 1;
        if x | z == 0 {
            return;
        }
        let img = table[(x | z << 2) as usize];
        self.x.set(q0, img.x & 1 == 1);
        self.x.set(q1, img.x & 2 == 2);
        self.z.set(q0, img.z & 1 == 1);
        self.z.set(q1, img.z & 2 == 2);
        self.sign ^= img.sign_flip;
    }

    /// Hadamard conjugation: swaps X and Z at `site`, `Y -> -Y`.
    #[inline]
    pub fn apply_hadamard(&mut self, site: usize) {
        let x = self.x.get(site);
        let z = self.z.get(site);
        self.sign ^= x & z;
        self.x.set(site, z);
        self.z.set(site, x);
    }

    /// `(x|z)` concatenated into one vector of length `2n`.
    pub fn symplectic_row(&self) -> BitVector {
        let n = self.n_qubits();
        let mut row = BitVector::zeros(2 * n);
        for j in self.x.iter_ones() {
            row.set(j, true);
        }
        for j in self.z.iter_ones() {
            row.set(n + j, true);
        }
        row
    }
}

/// Commutation bit: `0` (false) if `a` and `b` commute.
pub fn symplectic_inner(a: &PauliString, b: &PauliString) -> Result<bool> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::Dimension(format!(
            "Pauli strings on {} and {} qubits",
            a.n_qubits(),
            b.n_qubits()
        )));
    }
    Ok(a.x.dot(&b.z) ^ a.z.dot(&b.x))
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.sign { '-' } else { '+' })?;
        for j in 0..self.n_qubits() {
            write!(f, "{}", self.letter(j))?;
        }
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
