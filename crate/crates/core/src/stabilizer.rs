//! Mixed stabilizer states stored as `k <= N` independent commuting
//! generators (no destabilizers). The entropy of such a state is `N - k`
//! bits, for every Rényi index.

use crate::error::{Error, Result};
use crate::gates::AffineGate;
use crate::gf2::{self, BitVector};
use crate::pauli::{symplectic_inner, PauliString};

/// How a system is paired with its reference qubits.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// `Z_i Z_{i+n}`: classically correlated pairs, one bit each.
    Classical,
    /// `X_i X_{i+n}, Z_i Z_{i+n}`: Bell pairs, two bits each.
    Bell,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n_qubits: usize,
    /// Gates act on the ring formed by qubits `0..ring`.
    ring: usize,
    generators: Vec<PauliString>,
}

impl StabilizerState {
    /// The maximally mixed state on `n` qubits (no generators).
    pub fn new_maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("need at least one qubit".into()));
        }
        Ok(Self {
            n_qubits: n,
            ring: n,
            generators: Vec::new(),
        })
    }

    /// `|0...0>`.
    pub fn new_zero(n: usize) -> Result<Self> {
        let mut s = Self::new_maximally_mixed(n)?;
        s.generators = (0..n).map(|i| PauliString::single_z(n, i)).collect();
        Ok(s)
    }

    /// `n` system qubits (`0..n`) each paired with a reference qubit
    /// (`n..2n`). The gate ring covers only the system.
    pub fn new_referenced(n: usize, kind: ReferenceKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("need at least one system qubit".into()));
        }
        let total = 2 * n;
        let mut generators = Vec::with_capacity(2 * n);
        for i in 0..n {
            if kind == ReferenceKind::Bell {
                let mut xx = PauliString::single_x(total, i);
                xx.x.set(i + n, true);
                generators.push(xx);
            }
            let mut zz = PauliString::single_z(total, i);
            zz.z.set(i + n, true);
            generators.push(zz);
        }
        Ok(Self {
            n_qubits: total,
            ring: n,
            generators,
        })
    }

    /// Builds a state from explicit generators, checking that they commute
    /// and are independent.
    pub fn from_generators(n: usize, generators: Vec<PauliString>) -> Result<Self> {
        let s = Self {
            n_qubits: n,
            ring: n,
            generators,
        };
        s.check_invariants()?;
        Ok(s)
    }

    /// Restricts gate placement to the ring `0..ring`.
    pub fn with_ring(mut self, ring: usize) -> Result<Self> {
        if ring < 2 || ring > self.n_qubits {
            return Err(Error::InvalidConfig(format!(
                "ring of {ring} sites on {} qubits",
                self.n_qubits
            )));
        }
        self.ring = ring;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ring(&self) -> usize {
        self.ring
    }

    /// Number of generators `k`.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// True if every generator is a pure Z-string.
    pub fn is_z_sector(&self) -> bool {
        self.generators.iter().all(PauliString::is_z_type)
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

    /// Gate on ring sites `(site, site + 1 mod ring)`; `site` is the gate's
    /// first bit.
    pub fn apply_gate(&mut self, gate: &AffineGate, site: usize) -> Result<()> {
        if site >= self.ring {
            return Err(Error::IndexOutOfRange {
                index: site,
                bound: self.ring,
            });
        }
        self.apply_gate_on(gate, site, (site + 1) % self.ring)
    }

    /// Gate on an arbitrary ordered pair of distinct qubits.
    pub fn apply_gate_on(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        self.check_site(q0)?;
        self.check_site(q1)?;
        if q0 == q1 {
            return Err(Error::InvalidConfig(format!("gate on repeated site {q0}")));
        }
        let table = gate.action_table();
        for g in &mut self.generators {
            g.apply_pair_table(&table, q0, q1);
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, site: usize) -> Result<()> {
        self.check_site(site)?;
        for g in &mut self.generators {
            g.apply_hadamard(site);
        }
        Ok(())
    }

    /// `rho -> |0><0|_site (x) Tr_site(rho)`.
    pub fn apply_erasure(&mut self, site: usize) -> Result<()> {
        self.trace_out(site)?;
        self.generators.push(PauliString::single_z(self.n_qubits, site));
        Ok(())
    }

    /// `rho -> (I/2)_site (x) Tr_site(rho)`.
    pub fn apply_junk_noise(&mut self, site: usize) -> Result<()> {
        self.trace_out(site)
    }

    /// Keeps only the subgroup acting trivially on `site`.
    fn trace_out(&mut self, site: usize) -> Result<()> {
        self.check_site(site)?;
        let gens = &mut self.generators;
        let mut drop = Vec::with_capacity(2);
        if let Some(a) = gens.iter().position(|g| g.x.get(site)) {
            let pivot = gens[a].clone();
            for (r, g) in gens.iter_mut().enumerate() {
                if r != a && g.x.get(site) {
                    g.mul_assign_commuting(&pivot);
                }
            }
            drop.push(a);
        }
        // every generator other than the x-pivot now has x = 0 at `site`
        if let Some(b) = gens
            .iter()
            .enumerate()
            .position(|(r, g)| !drop.contains(&r) && g.z.get(site))
        {
            let pivot = gens[b].clone();
            for (r, g) in gens.iter_mut().enumerate() {
                if r != b && !drop.contains(&r) && g.z.get(site) {
                    g.mul_assign_commuting(&pivot);
                }
            }
            drop.push(b);
        }
        drop.sort_unstable();
        for r in drop.into_iter().rev() {
            gens.swap_remove(r);
        }
        Ok(())
    }

    /// Von Neumann entropy in bits, `N - k`.
    pub fn entropy(&self) -> usize {
        self.n_qubits - self.generators.len()
    }

    fn check_region(&self, region: &[usize]) -> Result<Vec<bool>> {
        let mut inside = vec![false; self.n_qubits];
        for &s in region {
            self.check_site(s)?;
            inside[s] = true;
        }
        Ok(inside)
    }

    /// Entropy of the reduced state on `region`:
    /// `|A| - dim{g in span : supp(g) in A}`.
    pub fn subsystem_entropy(&self, region: &[usize]) -> Result<usize> {
        let inside = self.check_region(region)?;
        let size = inside.iter().filter(|&&b| b).count();
        let complement: Vec<usize> = (0..self.n_qubits).filter(|&j| !inside[j]).collect();
        let width = 2 * complement.len();
        let rows: Vec<BitVector> = self
            .generators
            .iter()
            .map(|g| {
                let mut row = BitVector::zeros(width);
                for (c, &j) in complement.iter().enumerate() {
                    if g.x.get(j) {
                        row.set(c, true);
                    }
                    if g.z.get(j) {
                        row.set(complement.len() + c, true);
                    }
                }
                row
            })
            .collect();
        let outside_rank = gf2::rank_of(&rows, width);
        let supported_in_region = self.generators.len() - outside_rank;
        Ok(size - supported_in_region)
    }

    /// `S_A + S_B - S_{AB}` for disjoint regions.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        let in_a = self.check_region(a)?;
        if let Some(&s) = b.iter().find(|&&s| s < self.n_qubits && in_a[s]) {
            return Err(Error::OverlappingRegions(s));
        }
        let union: Vec<usize> = a.iter().chain(b).copied().collect();
        let sa = self.subsystem_entropy(a)?;
        let sb = self.subsystem_entropy(b)?;
        let sab = self.subsystem_entropy(&union)?;
        Ok(sa + sb - sab)
    }

    /// Commutation, independence and size of the generator set.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.generators.len();
        if k > self.n_qubits {
            return Err(Error::Dimension(format!(
                "{k} generators on {} qubits",
                self.n_qubits
            )));
        }
        for g in &self.generators {
            if g.n_qubits() != self.n_qubits {
                return Err(Error::Dimension("generator length".into()));
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if symplectic_inner(&self.generators[i], &self.generators[j])? {
                    return Err(Error::InvalidConfig(format!(
                        "generators {i} and {j} anticommute"
                    )));
                }
            }
        }
        let rows: Vec<BitVector> = self.generators.iter().map(|g| g.symplectic_row()).collect();
        if gf2::rank_of(&rows, 2 * self.n_qubits) != k {
            return Err(Error::InvalidConfig("generators are dependent".into()));
        }
        Ok(())
    }
}
