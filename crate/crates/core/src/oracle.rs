//! Brute-force references for small systems: the exact probability
//! distribution over all `2^N` bit strings, the deterministic input/output
//! map of one classical realization, and dense density matrices.
//!
//! Basis index convention everywhere: bit `i` of the index is site `i`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::AffineGate;
use crate::pauli::PauliString;
use crate::schedule::{CircuitBackend, Schedule};
use crate::stabilizer::StabilizerState;

pub const MAX_DISTRIBUTION_BITS: usize = 20;
pub const MAX_DENSE_QUBITS: usize = 6;

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn check_index(site: usize, n: usize) -> Result<()> {
    if site >= n {
        return Err(Error::IndexOutOfRange { index: site, bound: n });
    }
    Ok(())
}

/// Gathers the bits of `x` at `sites` into a compact index.
fn gather(x: usize, sites: &[usize]) -> usize {
    sites
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &s)| acc | ((x >> s) & 1) << j)
}

fn pair_bits(x: usize, q0: usize, q1: usize) -> u8 {
    (((x >> q0) & 1) | ((x >> q1) & 1) << 1) as u8
}

fn with_pair_bits(x: usize, q0: usize, q1: usize, v: u8) -> usize {
    let cleared = x & !(1 << q0) & !(1 << q1);
    cleared | (usize::from(v & 1)) << q0 | (usize::from(v >> 1 & 1)) << q1
}

#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    n_bits: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn uniform(n: usize) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        Ok(Self {
            n_bits: n,
            probs: vec![1.0 / dim as f64; dim],
        })
    }

    pub fn point_mass(n: usize, x: usize) -> Result<Self> {
        Self::check_size(n)?;
        check_index(x, 1 << n)?;
        let mut probs = vec![0.0; 1 << n];
        probs[x] = 1.0;
        Ok(Self { n_bits: n, probs })
    }

    /// `2n` bits; bit `i + n` is a copy of input bit `i`, input uniform.
    pub fn referenced(n: usize) -> Result<Self> {
        Self::check_size(2 * n)?;
        let mut probs = vec![0.0; 1 << (2 * n)];
        let w = 1.0 / (1usize << n) as f64;
        for x in 0..1usize << n {
            probs[x | x << n] = w;
        }
        Ok(Self { n_bits: 2 * n, probs })
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if !probs.len().is_power_of_two() || probs.len() < 2 {
            return Err(Error::Dimension(format!(
                "{} probabilities is not 2^N with N >= 1",
                probs.len()
            )));
        }
        let n = probs.len().trailing_zeros() as usize;
        Self::check_size(n)?;
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidConfig("negative or NaN probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("probabilities sum to {total}")));
        }
        Ok(Self { n_bits: n, probs })
    }

    fn check_size(n: usize) -> Result<()> {
        if n == 0 || n > MAX_DISTRIBUTION_BITS {
            return Err(Error::InvalidConfig(format!(
                "distribution oracle supports 1..={MAX_DISTRIBUTION_BITS} bits, got {n}"
            )));
        }
        Ok(())
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn apply_gate_on(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        check_index(q0, self.n_bits)?;
        check_index(q1, self.n_bits)?;
        let perm = gate.to_permutation();
        let mut out = vec![0.0; self.probs.len()];
        for (x, &p) in self.probs.iter().enumerate() {
            let beta = pair_bits(x, q0, q1);
            out[with_pair_bits(x, q0, q1, perm.map[beta as usize])] += p;
        }
        self.probs = out;
        Ok(())
    }

    /// Moves the mass of every string with bit `site` set onto the string
    /// with that bit cleared.
    pub fn apply_erasure(&mut self, site: usize) -> Result<()> {
        check_index(site, self.n_bits)?;
        let bit = 1 << site;
        for x in 0..self.probs.len() {
            if x & bit != 0 {
                self.probs[x & !bit] += self.probs[x];
                self.probs[x] = 0.0;
            }
        }
        Ok(())
    }

    /// Replaces bit `site` by a fair coin.
    pub fn apply_junk_noise(&mut self, site: usize) -> Result<()> {
        check_index(site, self.n_bits)?;
        let bit = 1 << site;
        for x in 0..self.probs.len() {
            if x & bit == 0 {
                let avg = 0.5 * (self.probs[x] + self.probs[x | bit]);
                self.probs[x] = avg;
                self.probs[x | bit] = avg;
            }
        }
        Ok(())
    }

    pub fn shannon_entropy(&self) -> f64 {
        self.probs.iter().map(|&p| plogp(p)).sum()
    }

    pub fn collision_probability(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    /// Marginal on `sites`, in the given order.
    pub fn marginal(&self, sites: &[usize]) -> Result<Vec<f64>> {
        for &s in sites {
            check_index(s, self.n_bits)?;
        }
        let mut out = vec![0.0; 1 << sites.len()];
        for (x, &p) in self.probs.iter().enumerate() {
            out[gather(x, sites)] += p;
        }
        Ok(out)
    }

    pub fn subsystem_entropy(&self, sites: &[usize]) -> Result<f64> {
        Ok(self.marginal(sites)?.iter().map(|&p| plogp(p)).sum())
    }

    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        if let Some(&s) = b.iter().find(|s| a.contains(s)) {
            return Err(Error::OverlappingRegions(s));
        }
        let union: Vec<usize> = a.iter().chain(b).copied().collect();
        Ok(self.subsystem_entropy(a)? + self.subsystem_entropy(b)? - self.subsystem_entropy(&union)?)
    }
}

impl CircuitBackend for Distribution {
    fn gate(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        self.apply_gate_on(gate, q0, q1)
    }
    fn hadamard(&mut self, _site: usize) -> Result<()> {
        Err(Error::InvalidConfig(
            "a probability distribution cannot represent a Hadamard".into(),
        ))
    }
    fn junk(&mut self, site: usize) -> Result<()> {
        self.apply_junk_noise(site)
    }
    fn erase(&mut self, site: usize) -> Result<()> {
        self.apply_erasure(site)
    }
}

/// Evolves `d` through every layer of `schedule`.
pub fn evolve_distribution(d: &Distribution, schedule: &Schedule) -> Result<Distribution> {
    let mut out = d.clone();
    schedule.run(&mut out)?;
    Ok(out)
}

/// The deterministic map `x -> f(x)` of one realization without junk noise
/// or Hadamards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitFunction {
    n_bits: usize,
    map: Vec<usize>,
}

struct BitString(usize);

impl CircuitBackend for BitString {
    fn gate(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        let beta = pair_bits(self.0, q0, q1);
        self.0 = with_pair_bits(self.0, q0, q1, gate.apply(beta));
        Ok(())
    }
    fn hadamard(&mut self, _site: usize) -> Result<()> {
        Err(Error::InvalidConfig("Hadamard in a classical realization".into()))
    }
    fn junk(&mut self, _site: usize) -> Result<()> {
        Err(Error::InvalidConfig("junk noise makes the realization random".into()))
    }
    fn erase(&mut self, site: usize) -> Result<()> {
        self.0 &= !(1 << site);
        Ok(())
    }
}

impl CircuitFunction {
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        if !map.len().is_power_of_two() || map.len() < 2 {
            return Err(Error::Dimension(format!("map of length {} is not 2^N", map.len())));
        }
        let n = map.len().trailing_zeros() as usize;
        Distribution::check_size(n)?;
        if let Some(&y) = map.iter().find(|&&y| y >= map.len()) {
            return Err(Error::IndexOutOfRange { index: y, bound: map.len() });
        }
        Ok(Self { n_bits: n, map })
    }

    pub fn from_schedule(schedule: &Schedule) -> Result<Self> {
        let n = schedule.n;
        Distribution::check_size(n)?;
        let map = (0..1usize << n)
            .map(|x| {
                let mut s = BitString(x);
                schedule.run(&mut s).map(|_| s.0)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_bits: n, map })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        self.map.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn pushforward(&self, input: &Distribution) -> Result<Distribution> {
        self.check_input(input)?;
        let mut probs = vec![0.0; self.map.len()];
        for (x, &p) in input.probs.iter().enumerate() {
            probs[self.map[x]] += p;
        }
        Ok(Distribution { n_bits: self.n_bits, probs })
    }

    fn check_input(&self, input: &Distribution) -> Result<()> {
        if input.n_bits != self.n_bits {
            return Err(Error::Dimension(format!(
                "input on {} bits, map on {}",
                input.n_bits, self.n_bits
            )));
        }
        Ok(())
    }

    /// `I(X;Y) = S(X) + S(Y) - S(XY)` for `Y = f(X)`.
    pub fn io_mutual_information(&self, input: &Distribution) -> Result<f64> {
        self.check_input(input)?;
        let sx = input.shannon_entropy();
        let sy = self.pushforward(input)?.shannon_entropy();
        // the joint (x, f(x)) has one cell per input string
        let sxy: f64 = input.probs.iter().map(|&p| plogp(p)).sum();
        Ok(sx + sy - sxy)
    }
}

/// Matrix of a Pauli string in the computational basis.
pub fn pauli_matrix(p: &PauliString) -> DMatrix<Complex64> {
    let n = p.n_qubits();
    let dim = 1usize << n;
    let bits = |v: &crate::gf2::BitVector| v.iter_ones().fold(0usize, |acc, j| acc | 1 << j);
    let (x, z) = (bits(&p.x), bits(&p.z));
    let y_count = (x & z).count_ones();
    let mut base = Complex64::i().powu(y_count);
    if p.sign {
        base = -base;
    }
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let phase = if (b & z).count_ones() % 2 == 1 { -base } else { base };
        m[(b ^ x, b)] = phase;
    }
    m
}

type Op2 = [[Complex64; 2]; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n_qubits: usize,
    rho: DMatrix<Complex64>,
}

impl DenseState {
    fn check_size(n: usize) -> Result<()> {
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "dense oracle supports 1..={MAX_DENSE_QUBITS} qubits, got {n}"
            )));
        }
        Ok(())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        Ok(Self {
            n_qubits: n,
            rho: DMatrix::identity(dim, dim) / Complex64::from(dim as f64),
        })
    }

    pub fn from_matrix(rho: DMatrix<Complex64>) -> Result<Self> {
        let dim = rho.nrows();
        if dim != rho.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Dimension(format!("{}x{} density matrix", rho.nrows(), rho.ncols())));
        }
        let n = dim.trailing_zeros() as usize;
        Self::check_size(n)?;
        Ok(Self { n_qubits: n, rho })
    }

    /// `rho = 2^-N prod_g (I + g)` over the generators.
    pub fn from_stabilizer(state: &StabilizerState) -> Result<Self> {
        let n = state.n_qubits();
        Self::check_size(n)?;
        let dim = 1usize << n;
        let id = DMatrix::<Complex64>::identity(dim, dim);
        let mut rho = id.clone();
        for g in state.generators() {
            rho = &rho * (&id + pauli_matrix(g));
        }
        rho /= Complex64::from(dim as f64);
        Ok(Self { n_qubits: n, rho })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn apply_gate_on(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        check_index(q0, self.n_qubits)?;
        check_index(q1, self.n_qubits)?;
        if q0 == q1 {
            return Err(Error::InvalidConfig(format!("gate on repeated site {q0}")));
        }
        let perm = gate.to_permutation();
        let dim = self.rho.nrows();
        let pi: Vec<usize> = (0..dim)
            .map(|x| with_pair_bits(x, q0, q1, perm.map[pair_bits(x, q0, q1) as usize]))
            .collect();
        let mut out = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                out[(pi[a], pi[b])] = self.rho[(a, b)];
            }
        }
        self.rho = out;
        Ok(())
    }

    /// `sum_k K rho K^dagger` for single-site Kraus operators.
    fn apply_kraus(&mut self, site: usize, kraus: &[Op2]) -> Result<()> {
        check_index(site, self.n_qubits)?;
        let dim = self.rho.nrows();
        let bit = 1 << site;
        let mut out = DMatrix::zeros(dim, dim);
        for k in kraus {
            // (K rho K^dagger)[a, b] = sum_{i,j} K[a_s, i] rho[a', b'] conj(K[b_s, j])
            for a in 0..dim {
                let (a_s, a0) = ((a >> site) & 1, a & !bit);
                for b in 0..dim {
                    let (b_s, b0) = ((b >> site) & 1, b & !bit);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..2 {
                        if k[a_s][i] == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for j in 0..2 {
                            let r = self.rho[(a0 | i << site, b0 | j << site)];
                            acc += k[a_s][i] * r * k[b_s][j].conj();
                        }
                    }
                    out[(a, b)] += acc;
                }
            }
        }
        self.rho = out;
        Ok(())
    }

    pub fn apply_hadamard(&mut self, site: usize) -> Result<()> {
        let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        self.apply_kraus(site, &[[[h, h], [h, -h]]])
    }

    /// Kraus set `{|0><0|, |0><1|}`.
    pub fn apply_erasure(&mut self, site: usize) -> Result<()> {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        self.apply_kraus(site, &[[[l, o], [o, o]], [[o, l], [o, o]]])
    }

    /// Kraus set `{|a><b|} / sqrt 2`.
    pub fn apply_junk_noise(&mut self, site: usize) -> Result<()> {
        let (o, l) = (
            Complex64::new(0.0, 0.0),
            Complex64::from(std::f64::consts::FRAC_1_SQRT_2),
        );
        self.apply_kraus(
            site,
            &[
                [[l, o], [o, o]],
                [[o, l], [o, o]],
                [[o, o], [l, o]],
                [[o, o], [o, l]],
            ],
        )
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.rho.clone()).eigenvalues.iter().copied().collect()
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues().into_iter().map(|l| plogp(l.max(0.0))).sum()
    }

    /// Reduced state on `keep`, qubits in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DenseState> {
        if keep.is_empty() {
            return Err(Error::InvalidConfig("cannot keep zero qubits".into()));
        }
        for (j, &s) in keep.iter().enumerate() {
            check_index(s, self.n_qubits)?;
            if keep[..j].contains(&s) {
                return Err(Error::InvalidConfig(format!("site {s} repeated")));
            }
        }
        let keep_mask = keep.iter().fold(0usize, |m, &s| m | 1 << s);
        let dim = self.rho.nrows();
        let sub = 1usize << keep.len();
        let mut out = DMatrix::zeros(sub, sub);
        for a in 0..dim {
            for b in 0..dim {
                if a & !keep_mask == b & !keep_mask {
                    out[(gather(a, keep), gather(b, keep))] += self.rho[(a, b)];
                }
            }
        }
        Ok(DenseState {
            n_qubits: keep.len(),
            rho: out,
        })
    }

    pub fn subsystem_entropy(&self, region: &[usize]) -> Result<f64> {
        if region.is_empty() {
            return Ok(0.0);
        }
        Ok(self.partial_trace(region)?.von_neumann_entropy())
    }

    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        if let Some(&s) = b.iter().find(|s| a.contains(s)) {
            return Err(Error::OverlappingRegions(s));
        }
        let union: Vec<usize> = a.iter().chain(b).copied().collect();
        Ok(self.subsystem_entropy(a)? + self.subsystem_entropy(b)? - self.subsystem_entropy(&union)?)
    }

    /// Largest deviation from Hermiticity, unit trace and positivity.
    pub fn validity_defect(&self) -> f64 {
        let herm = (&self.rho - self.rho.adjoint()).camax();
        let trace = (self.trace() - Complex64::new(1.0, 0.0)).norm();
        let neg = self
            .eigenvalues()
            .into_iter()
            .fold(0.0f64, |m, l| m.max(-l));
        herm.max(trace).max(neg)
    }
}

impl CircuitBackend for DenseState {
    fn gate(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        self.apply_gate_on(gate, q0, q1)
    }
    fn hadamard(&mut self, site: usize) -> Result<()> {
        self.apply_hadamard(site)
    }
    fn junk(&mut self, site: usize) -> Result<()> {
        self.apply_junk_noise(site)
    }
    fn erase(&mut self, site: usize) -> Result<()> {
        self.apply_erasure(site)
    }
}

pub fn evolve_dense(s: &DenseState, schedule: &Schedule) -> Result<DenseState> {
    let mut out = s.clone();
    schedule.run(&mut out)?;
    Ok(out)
}
