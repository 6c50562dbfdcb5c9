//! Packed linear algebra over GF(2).
//!
//! Vectors store bit `j` in word `j / 64`, position `j % 64`. Bits past the
//! logical length are always zero, so word-level comparisons and popcounts
//! need no masking.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A vector in GF(2)^len.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn unit(len: usize, bit: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(bit, true);
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (j, b) in bits.into_iter().enumerate() {
            if b {
                v.set(j, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, leftmost character = bit 0.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(bits))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len, "bit {j} out of range for length {}", self.len);
        let mask = 1u64 << (j % WORD_BITS);
        if value {
            self.words[j / WORD_BITS] |= mask;
        } else {
            self.words[j / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        assert!(j < self.len);
        self.words[j / WORD_BITS] ^= 1u64 << (j % WORD_BITS);
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// In-place `self ^= other`.
    ///
    /// Panics if the lengths differ.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    /// Parity of the bitwise AND, i.e. the GF(2) dot product.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(i * WORD_BITS + tz)
                }
            })
        })
    }

    /// Copies the bits at `cols` (in order) into a new vector.
    pub fn select(&self, cols: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(cols.len());
        for (dst, &src) in cols.iter().enumerate() {
            if self.get(src) {
                out.set(dst, true);
            }
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for j in 0..self.len {
            write!(f, "{}", u8::from(self.get(j)))?;
        }
        write!(f, ")")
    }
}

/// Dense matrix over GF(2), stored as packed rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: Vec<BitVector>,
    n_cols: usize,
}

impl BitMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            rows: vec![BitVector::zeros(n_cols); n_rows],
            n_cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
            n_cols: n,
        }
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: Vec<BitVector>, n_cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::Dimension(format!(
                "row of length {} in matrix with {} columns",
                bad.len(),
                n_cols
            )));
        }
        Ok(Self { rows, n_cols })
    }

    /// Parses rows such as `["110", "011"]`.
    pub fn parse_rows(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| BitVector::parse(r))
            .collect::<Result<Vec<_>>>()?;
        let n_cols = parsed.first().map_or(0, BitVector::len);
        Self::from_rows(parsed, n_cols)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(Error::Dimension(format!(
                "pushing row of length {} onto {} columns",
                row.len(),
                self.n_cols
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        self.rows.swap(a, b);
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        let (d, s) = if dst < src {
            let (lo, hi) = self.rows.split_at_mut(src);
            (&mut lo[dst], &hi[0])
        } else {
            let (lo, hi) = self.rows.split_at_mut(dst);
            (&mut hi[0], &lo[src])
        };
        d.xor_assign(s);
    }

    /// GF(2) row rank.
    pub fn rank(&self) -> usize {
        let mut work = self.rows.clone();
        eliminate(&mut work, self.n_cols).len()
    }

    /// Reduced row-echelon form and its pivot columns.
    ///
    /// Zero rows are kept (moved to the bottom) so the output has the same
    /// shape as the input.
    pub fn row_reduce(&self) -> (BitMatrix, Vec<usize>) {
        let mut work = self.rows.clone();
        let pivots = eliminate(&mut work, self.n_cols);
        (
            BitMatrix {
                rows: work,
                n_cols: self.n_cols,
            },
            pivots,
        )
    }

    /// Submatrix keeping only `cols`, in the order given.
    pub fn restrict_columns(&self, cols: &[usize]) -> Result<BitMatrix> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                bound: self.n_cols,
            });
        }
        Ok(BitMatrix {
            rows: self.rows.iter().map(|r| r.select(cols)).collect(),
            n_cols: cols.len(),
        })
    }
}

/// Gauss-Jordan elimination in place; returns pivot columns.
///
/// Rows are reordered so that the first `pivots.len()` rows are the reduced
/// basis; the remaining rows end up zero.
pub(crate) fn eliminate(rows: &mut [BitVector], n_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    let n_words = words_for(n_cols);
    'words: for w in 0..n_words {
        loop {
            if next == rows.len() {
                break 'words;
            }
            // lowest column in this word that still has a candidate below `next`
            let mut live = 0u64;
            for r in &rows[next..] {
                live |= r.words()[w];
            }
            if live == 0 {
                continue 'words;
            }
            let bit = live.trailing_zeros() as usize;
            let mask = 1u64 << bit;
            let col = w * WORD_BITS + bit;
            let src = (next..rows.len())
                .find(|&r| rows[r].words()[w] & mask != 0)
                .expect("live bit has a row");
            rows.swap(next, src);
            let (head, tail) = rows.split_at_mut(next);
            let (pivot, tail) = tail.split_first_mut().expect("pivot row");
            for r in head.iter_mut().chain(tail.iter_mut()) {
                if r.words()[w] & mask != 0 {
                    for (a, b) in r.words_mut()[w..].iter_mut().zip(&pivot.words()[w..]) {
                        *a ^= *b;
                    }
                }
            }
            pivots.push(col);
            next += 1;
        }
    }
    pivots
}

/// Rank of a list of vectors of equal length, consuming a scratch copy.
pub fn rank_of(rows: &[BitVector], n_cols: usize) -> usize {
    let mut work = rows.to_vec();
    eliminate(&mut work, n_cols).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(m: &BitMatrix) -> std::collections::BTreeSet<Vec<u64>> {
        let k = m.n_rows();
        (0u32..(1 << k))
            .map(|mask| {
                let mut acc = BitVector::zeros(m.n_cols());
                for r in 0..k {
                    if mask >> r & 1 == 1 {
                        acc.xor_assign(m.row(r));
                    }
                }
                acc.words().to_vec()
            })
            .collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(3).rank(), 3);
        assert_eq!(BitMatrix::zeros(4, 4).rank(), 0);
        let m = BitMatrix::parse_rows(&["110", "011", "101"]).unwrap();
        // brute force: the largest k such that some k rows have only the trivial
        // zero combination
        let brute = (1u32..8)
            .filter(|mask| {
                let mut acc = BitVector::zeros(3);
                for r in 0..3 {
                    if mask >> r & 1 == 1 {
                        acc.xor_assign(m.row(r));
                    }
                }
                acc.is_zero()
            })
            .count();
        assert_eq!(brute, 1);
        assert_eq!(span(&m).len(), 4);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rank_of_empty_matrix() {
        assert_eq!(BitMatrix::zeros(0, 0).rank(), 0);
        assert_eq!(BitMatrix::zeros(0, 7).rank(), 0);
        assert_eq!(BitMatrix::zeros(3, 0).rank(), 0);
    }

    #[test]
    fn row_reduce_examples() {
        let (r, p) = BitMatrix::identity(3).row_reduce();
        assert_eq!(r, BitMatrix::identity(3));
        assert_eq!(p, vec![0, 1, 2]);

        let m = BitMatrix::parse_rows(&["11", "11"]).unwrap();
        let (r, p) = m.row_reduce();
        assert_eq!(r, BitMatrix::parse_rows(&["11", "00"]).unwrap());
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn row_reduce_preserves_span_6x6() {
        let m = BitMatrix::parse_rows(&[
            "101100", "011010", "110110", "000111", "101011", "011101",
        ])
        .unwrap();
        let (r, pivots) = m.row_reduce();
        assert_eq!(span(&m), span(&r));
        // reduced echelon: each pivot column has a single one
        for (i, &c) in pivots.iter().enumerate() {
            for j in 0..r.n_rows() {
                assert_eq!(r.get(j, c), i == j);
            }
        }
    }

    #[test]
    fn restrict_columns_examples() {
        let m = BitMatrix::parse_rows(&["1010", "0110"]).unwrap();
        assert_eq!(m.restrict_columns(&[0, 1, 2, 3]).unwrap(), m);
        let empty = m.restrict_columns(&[]).unwrap();
        assert_eq!((empty.n_rows(), empty.n_cols(), empty.rank()), (2, 0, 0));
        assert_eq!(
            m.restrict_columns(&[1, 2]).unwrap(),
            BitMatrix::parse_rows(&["01", "11"]).unwrap()
        );
        assert!(matches!(
            m.restrict_columns(&[4]),
            Err(Error::IndexOutOfRange { index: 4, bound: 4 })
        ));
    }

    #[test]
    fn elimination_crosses_word_boundaries() {
        let n = 150;
        let mut rows = Vec::new();
        for i in 0..n {
            let mut v = BitVector::unit(n, i);
            v.set((i * 7 + 3) % n, true);
            rows.push(v);
        }
        let m = BitMatrix::from_rows(rows, n).unwrap();
        let (r, p) = m.row_reduce();
        assert_eq!(r.rank(), m.rank());
        assert_eq!(p.len(), m.rank());
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(BitVector::parse("10x").is_err());
        assert!(BitMatrix::parse_rows(&["10", "1"]).is_err());
    }

    #[test]
    fn iter_ones_and_first_one() {
        let v = BitVector::parse(&format!("{}1{}1", "0".repeat(70), "0".repeat(5))).unwrap();
        assert_eq!(v.first_one(), Some(70));
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![70, 76]);
        assert_eq!(v.count_ones(), 2);
    }
}
