//! Fast path for classical dynamics: every generator is a Z-string, so the
//! state is a `k x N` binary matrix. It is stored column-major (one packed
//! column of generator bits per site), which turns a two-site gate into two
//! word-level column combinations and erasure into a single column
//! elimination. Signs are not tracked; no observable depends on them.

use crate::error::{Error, Result};
use crate::gates::AffineGate;
use crate::gf2::{self, words_for, BitVector};
use crate::pauli::PauliString;
use crate::stabilizer::StabilizerState;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZSectorState {
    n_qubits: usize,
    ring: usize,
    k: usize,
    /// Words per column.
    wpc: usize,
    /// `cols[c * wpc + w]`: bit `r` set iff generator `r` has `Z` at site `c`.
    cols: Vec<u64>,
}

impl ZSectorState {
    pub fn new_maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("need at least one qubit".into()));
        }
        let wpc = words_for(n);
        Ok(Self {
            n_qubits: n,
            ring: n,
            k: 0,
            wpc,
            cols: vec![0; n * wpc],
        })
    }

    /// `Z_i Z_{i+n}` pairs; gates act on the system ring `0..n`.
    pub fn new_referenced_classical(n: usize) -> Result<Self> {
        let mut s = Self::new_maximally_mixed(2 * n)?;
        s.ring = n;
        for i in 0..n {
            s.set(i, i);
            s.set(i + n, i);
        }
        s.k = n;
        Ok(s)
    }

    /// Converts a Z-sector stabilizer state; fails if any generator has an
    /// X component.
    pub fn from_state(state: &StabilizerState) -> Result<Self> {
        if !state.is_z_sector() {
            return Err(Error::InvalidConfig("state has X-type generators".into()));
        }
        let mut s = Self::new_maximally_mixed(state.n_qubits())?;
        s.ring = state.ring();
        for (r, g) in state.generators().iter().enumerate() {
            for c in g.z.iter_ones() {
                s.set(c, r);
            }
        }
        s.k = state.rank();
        Ok(s)
    }

    /// Back to the general representation, all signs `+`.
    pub fn to_state(&self) -> StabilizerState {
        let n = self.n_qubits;
        let mut gens = vec![PauliString::identity(n); self.k];
        for c in 0..n {
            for r in self.column_ones(c) {
                gens[r].z.set(c, true);
            }
        }
        let state = StabilizerState::from_generators(n, gens).expect("valid Z-sector state");
        state.with_ring(self.ring).expect("ring fits")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ring(&self) -> usize {
        self.ring
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn entropy(&self) -> usize {
        self.n_qubits - self.k
    }

    #[inline]
    fn col(&self, c: usize) -> &[u64] {
        &self.cols[c * self.wpc..(c + 1) * self.wpc]
    }

    #[inline]
    fn set(&mut self, c: usize, r: usize) {
        self.cols[c * self.wpc + r / 64] |= 1 << (r % 64);
    }

    fn column_ones(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.col(c).iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                (rest != 0).then(|| {
                    let tz = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    w * 64 + tz
                })
            })
        })
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                index: site,
                bound: self.n_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &AffineGate, site: usize) -> Result<()> {
        if site >= self.ring {
            return Err(Error::IndexOutOfRange {
                index: site,
                bound: self.ring,
            });
        }
        self.apply_gate_on(gate, site, (site + 1) % self.ring)
    }

    /// Z-strings transform by `z -> A^{-T} z` on the pair.
    pub fn apply_gate_on(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        self.check_site(q0)?;
        self.check_site(q1)?;
        if q0 == q1 {
            return Err(Error::InvalidConfig(format!("gate on repeated site {q0}")));
        }
        let m = gate.matrix().inverse().transpose();
        let (m00, m01, m10, m11) = (m.entry(0, 0), m.entry(0, 1), m.entry(1, 0), m.entry(1, 1));
        let mask = |b: bool| if b { u64::MAX } else { 0 };
        let (m00, m01, m10, m11) = (mask(m00), mask(m01), mask(m10), mask(m11));
        let (o0, o1) = (q0 * self.wpc, q1 * self.wpc);
        for w in 0..self.wpc {
            let a = self.cols[o0 + w];
            let b = self.cols[o1 + w];
            self.cols[o0 + w] = (m00 & a) ^ (m01 & b);
            self.cols[o1 + w] = (m10 & a) ^ (m11 & b);
        }
        Ok(())
    }

    /// Eliminates site `site` from all generators but one pivot; returns the
    /// pivot row if there is one.
    fn eliminate_site(&mut self, site: usize) -> Option<usize> {
        let wpc = self.wpc;
        let base = site * wpc;
        let pivot = self.cols[base..base + wpc]
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(w, &word)| w * 64 + word.trailing_zeros() as usize)?;
        let (pw, pb) = (pivot / 64, 1u64 << (pivot % 64));
        // rows that must absorb the pivot: support at `site`, minus the pivot
        let mut others: Vec<u64> = self.cols[base..base + wpc].to_vec();
        others[pw] &= !pb;
        if others.iter().any(|&w| w != 0) {
            for c in 0..self.n_qubits {
                let o = c * wpc;
                if self.cols[o + pw] & pb != 0 {
                    for (dst, src) in self.cols[o..o + wpc].iter_mut().zip(&others) {
                        *dst ^= *src;
                    }
                }
            }
        }
        Some(pivot)
    }

    fn remove_row(&mut self, r: usize) {
        let last = self.k - 1;
        let wpc = self.wpc;
        let (rw, rb) = (r / 64, 1u64 << (r % 64));
        let (lw, lb) = (last / 64, 1u64 << (last % 64));
        for c in 0..self.n_qubits {
            let o = c * wpc;
            let moved = self.cols[o + lw] & lb != 0 && r != last;
            self.cols[o + lw] &= !lb;
            if moved {
                self.cols[o + rw] |= rb;
            } else {
                self.cols[o + rw] &= !rb;
            }
        }
        self.k -= 1;
    }

    /// Reset to `0`: after elimination the pivot row is replaced by `Z_site`.
    pub fn apply_erasure(&mut self, site: usize) -> Result<()> {
        self.check_site(site)?;
        match self.eliminate_site(site) {
            Some(r) => {
                let (rw, rb) = (r / 64, 1u64 << (r % 64));
                for c in 0..self.n_qubits {
                    if c != site {
                        self.cols[c * self.wpc + rw] &= !rb;
                    }
                }
            }
            None => {
                let r = self.k;
                self.set(site, r);
                self.k += 1;
            }
        }
        Ok(())
    }

    /// Replace the bit by a fresh random one: drop the pivot row.
    pub fn apply_junk_noise(&mut self, site: usize) -> Result<()> {
        self.check_site(site)?;
        if let Some(r) = self.eliminate_site(site) {
            self.remove_row(r);
        }
        Ok(())
    }

    pub fn subsystem_entropy(&self, region: &[usize]) -> Result<usize> {
        let mut inside = vec![false; self.n_qubits];
        for &s in region {
            self.check_site(s)?;
            inside[s] = true;
        }
        let size = inside.iter().filter(|&&b| b).count();
        let complement: Vec<usize> = (0..self.n_qubits).filter(|&c| !inside[c]).collect();
        let mut rows = vec![BitVector::zeros(complement.len()); self.k];
        for (j, &c) in complement.iter().enumerate() {
            for r in self.column_ones(c) {
                rows[r].set(j, true);
            }
        }
        let outside = gf2::rank_of(&rows, complement.len());
        Ok(size - (self.k - outside))
    }

    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        if let Some(&s) = b.iter().find(|s| a.contains(s)) {
            return Err(Error::OverlappingRegions(s));
        }
        let union: Vec<usize> = a.iter().chain(b).copied().collect();
        Ok(self.subsystem_entropy(a)? + self.subsystem_entropy(b)? - self.subsystem_entropy(&union)?)
    }
}
