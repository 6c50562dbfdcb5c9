//! The 24 reversible two-bit gates as affine maps `x -> A x + b` over GF(2)^2,
//! and their Clifford extension.
//!
//! Two-bit values are packed into a `u8`: bit 0 is the first site of the gate
//! (site `i`), bit 1 the second (site `i + 1`). So the string `"10"` (first
//! bit set) is the integer 1.

use rand::Rng;

/// A 2x2 matrix over GF(2), `rows[r][c]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Mat2 {
    rows: [[bool; 2]; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new([[true, false], [false, true]]);

    pub const fn new(rows: [[bool; 2]; 2]) -> Self {
        Self { rows }
    }

    pub fn from_bits(rows: [[u8; 2]; 2]) -> Self {
        Self::new([
            [rows[0][0] & 1 == 1, rows[0][1] & 1 == 1],
            [rows[1][0] & 1 == 1, rows[1][1] & 1 == 1],
        ])
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> bool {
        self.rows[r][c]
    }

    pub fn det(&self) -> bool {
        (self.rows[0][0] & self.rows[1][1]) ^ (self.rows[0][1] & self.rows[1][0])
    }

    /// Matrix-vector product on a packed two-bit vector.
    #[inline]
    pub fn apply(&self, v: u8) -> u8 {
        let v0 = v & 1 == 1;
        let v1 = v >> 1 & 1 == 1;
        let r0 = (self.rows[0][0] & v0) ^ (self.rows[0][1] & v1);
        let r1 = (self.rows[1][0] & v0) ^ (self.rows[1][1] & v1);
        u8::from(r0) | u8::from(r1) << 1
    }

    pub fn transpose(&self) -> Mat2 {
        let r = self.rows;
        Mat2::new([[r[0][0], r[1][0]], [r[0][1], r[1][1]]])
    }

    /// Inverse of an invertible matrix: `[[a,b],[c,d]]^-1 = [[d,b],[c,a]]`.
    pub fn inverse(&self) -> Mat2 {
        assert!(self.det(), "singular GF(2) matrix");
        let r = self.rows;
        Mat2::new([[r[1][1], r[0][1]], [r[1][0], r[0][0]]])
    }
}

const INVERTIBLE: [Mat2; 6] = [
    Mat2::new([[true, false], [false, true]]),
    Mat2::new([[false, true], [true, false]]),
    Mat2::new([[true, false], [true, true]]),
    Mat2::new([[true, true], [false, true]]),
    Mat2::new([[false, true], [true, true]]),
    Mat2::new([[true, true], [true, false]]),
];

/// Number of distinct two-bit reversible gates, `|S4|`.
pub const GATE_COUNT: usize = 24;

/// A reversible two-bit gate `g(x) = A x + b`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct AffineGate {
    a: Mat2,
    b: u8,
}

/// Image of a Pauli restricted to the two gate sites.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PairImage {
    pub x: u8,
    pub z: u8,
    pub sign_flip: bool,
}

impl AffineGate {
    pub const IDENTITY: AffineGate = AffineGate {
        a: Mat2::IDENTITY,
        b: 0,
    };

    /// Returns `None` when `a` is singular.
    pub fn new(a: Mat2, b: u8) -> Option<Self> {
        a.det().then_some(Self { a, b: b & 3 })
    }

    /// The gate with canonical index `idx` in `0..24`.
    pub fn from_index(idx: usize) -> Self {
        assert!(idx < GATE_COUNT);
        Self {
            a: INVERTIBLE[idx / 4],
            b: (idx % 4) as u8,
        }
    }

    pub fn index(&self) -> usize {
        let a = INVERTIBLE
            .iter()
            .position(|m| *m == self.a)
            .expect("gate matrix is invertible");
        a * 4 + self.b as usize
    }

    pub fn matrix(&self) -> Mat2 {
        self.a
    }

    pub fn offset(&self) -> u8 {
        self.b
    }

    #[inline]
    pub fn apply(&self, beta: u8) -> u8 {
        self.a.apply(beta) ^ self.b
    }

    pub fn to_permutation(&self) -> PermutationTable {
        let mut map = [0u8; 4];
        for (beta, out) in map.iter_mut().enumerate() {
            *out = self.apply(beta as u8);
        }
        PermutationTable { map }
    }

    pub fn inverse(&self) -> AffineGate {
        // x = A^-1 (y + b) = A^-1 y + A^-1 b
        let inv = self.a.inverse();
        AffineGate {
            a: inv,
            b: inv.apply(self.b),
        }
    }

    /// Conjugation `U P U^dagger` of a two-site Pauli by the gate's
    /// permutation unitary.
    ///
    /// `x` and `z` are packed two-bit vectors, and a site with both bits set
    /// is a `Y`. `sign_flip` is the change of the Pauli's sign bit in the
    /// convention where `Y` (not `XZ`) carries no phase.
    pub fn symplectic_action(&self, x: u8, z: u8) -> PairImage {
        let inv = self.a.inverse();
        let x_out = self.a.apply(x);
        let z_out = inv.transpose().apply(z);
        // U X^x Z^z U^dagger = (-1)^{z . A^-1 b} X^{Ax} Z^{A^-T z}
        let shift = inv.apply(self.b);
        let mut flip = (z & shift).count_ones() & 1 == 1;
        // Y = i XZ: converting between the two forms costs i^{#Y}; the
        // difference between input and output is always even
        let w_in = (x & z).count_ones() as i32;
        let w_out = (x_out & z_out).count_ones() as i32;
        let diff = (w_in - w_out).rem_euclid(4);
        debug_assert!(diff % 2 == 0);
        flip ^= diff == 2;
        PairImage {
            x: x_out,
            z: z_out,
            sign_flip: flip,
        }
    }

    /// The action on all 16 two-site Paulis, indexed by `x | z << 2`.
    pub fn action_table(&self) -> [PairImage; 16] {
        std::array::from_fn(|i| self.symplectic_action((i & 3) as u8, (i >> 2) as u8))
    }
}

/// The permutation of `{0,1,2,3}` a gate induces: `map[beta] = g(beta)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct PermutationTable {
    pub map: [u8; 4],
}

impl PermutationTable {
    pub fn is_bijection(&self) -> bool {
        let mut seen = [false; 4];
        for &m in &self.map {
            if m > 3 || seen[m as usize] {
                return false;
            }
            seen[m as usize] = true;
        }
        true
    }

    /// `T[alpha][beta] = 1` iff `g(beta) = alpha`.
    pub fn matrix(&self) -> [[u8; 4]; 4] {
        let mut t = [[0u8; 4]; 4];
        for (beta, &alpha) in self.map.iter().enumerate() {
            t[alpha as usize][beta] = 1;
        }
        t
    }
}

/// All 24 affine gates in canonical index order.
pub fn enumerate_gates() -> Vec<AffineGate> {
    (0..GATE_COUNT).map(AffineGate::from_index).collect()
}

/// Uniform draw from the 24 gates.
pub fn sample_gate<R: Rng + ?Sized>(rng: &mut R) -> AffineGate {
    AffineGate::from_index(rng.gen_range(0..GATE_COUNT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn all_bijections() -> BTreeSet<[u8; 4]> {
        let mut out = BTreeSet::new();
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        let t = PermutationTable { map: [a, b, c, d] };
                        if t.is_bijection() {
                            out.insert(t.map);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn twenty_four_gates_exhaust_s4() {
        let gates = enumerate_gates();
        assert_eq!(gates.len(), 24);
        assert!(gates.contains(&AffineGate::IDENTITY));
        let tables: BTreeSet<[u8; 4]> = gates.iter().map(|g| g.to_permutation().map).collect();
        assert_eq!(tables.len(), 24);
        assert_eq!(tables, all_bijections());
        for (i, g) in gates.iter().enumerate() {
            assert_eq!(g.index(), i);
            assert!(g.matrix().det());
        }
    }

    #[test]
    fn permutation_examples() {
        assert_eq!(AffineGate::IDENTITY.to_permutation().map, [0, 1, 2, 3]);
        let cnot = AffineGate::new(Mat2::from_bits([[1, 0], [1, 1]]), 0).unwrap();
        // "10" -> "11", "11" -> "10" with the first character as bit 0
        assert_eq!(cnot.to_permutation().map, [0, 3, 2, 1]);
        let flip_first = AffineGate::new(Mat2::IDENTITY, 0b01).unwrap();
        // 00->10, 01->11, 10->00, 11->01 in string notation
        assert_eq!(flip_first.to_permutation().map, [1, 0, 3, 2]);
    }

    #[test]
    fn symplectic_examples() {
        let cnot = AffineGate::new(Mat2::from_bits([[1, 0], [1, 1]]), 0).unwrap();
        let z2 = cnot.symplectic_action(0, 0b10);
        assert_eq!(z2, PairImage { x: 0, z: 0b11, sign_flip: false });
        let x1 = cnot.symplectic_action(0b01, 0);
        assert_eq!((x1.x, x1.z), (0b11, 0));
        let flip_first = AffineGate::new(Mat2::IDENTITY, 0b01).unwrap();
        let z1 = flip_first.symplectic_action(0, 0b01);
        assert_eq!(z1, PairImage { x: 0, z: 0b01, sign_flip: true });
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(AffineGate::new(Mat2::from_bits([[1, 1], [1, 1]]), 0).is_none());
    }

    #[test]
    fn inverse_composes_to_identity() {
        for g in enumerate_gates() {
            let inv = g.inverse();
            for beta in 0..4 {
                assert_eq!(inv.apply(g.apply(beta)), beta);
            }
        }
    }

    #[test]
    fn symplectic_form_and_sectors_preserved() {
        let inner = |x1: u8, z1: u8, x2: u8, z2: u8| ((x1 & z2) ^ (z1 & x2)).count_ones() & 1;
        for g in enumerate_gates() {
            for p in 0..16u8 {
                for q in 0..16u8 {
                    let a = g.symplectic_action(p & 3, p >> 2);
                    let b = g.symplectic_action(q & 3, q >> 2);
                    assert_eq!(
                        inner(p & 3, p >> 2, q & 3, q >> 2),
                        inner(a.x, a.z, b.x, b.z)
                    );
                }
                let img = g.symplectic_action(p & 3, p >> 2);
                if p & 3 == 0 {
                    assert_eq!(img.x, 0, "Z sector must stay closed");
                }
                if p >> 2 == 0 {
                    assert_eq!(img.z, 0, "X sector must stay closed");
                    assert!(!img.sign_flip);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_roughly_uniform() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            assert_eq!(sample_gate(&mut a), sample_gate(&mut b));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 24];
        for _ in 0..24_000 {
            counts[sample_gate(&mut rng).index()] += 1;
        }
        for c in counts {
            assert!((800..=1200).contains(&c), "count {c} outside 5 sigma band");
        }
    }

    #[test]
    fn chi_square_uniformity() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000usize;
        let mut counts = [0usize; 24];
        for _ in 0..n {
            counts[sample_gate(&mut rng).index()] += 1;
        }
        let expected = n as f64 / 24.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // upper 1e-3 quantile of chi-square with 23 degrees of freedom
        assert!(chi2 < 49.73, "chi2 = {chi2}");
    }
}
