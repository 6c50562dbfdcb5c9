//! Circuit configuration and pre-drawn brickwork schedules.
//!
//! One time step is one brickwork layer. Within a step the order is fixed:
//! two-site gates on the pairs of the layer's parity, then Hadamards, then
//! junk noise, then erasures. Layer `t` (0-based) pairs sites
//! `(2j + t mod 2, 2j + 1 + t mod 2)` on a periodic ring.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{sample_gate, AffineGate};
use crate::seeding::{stream, Role};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    MaximallyMixed,
    ReferencedClassical,
    ReferencedBell,
}

impl InitialState {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "maximally_mixed" | "mixed" => Ok(Self::MaximallyMixed),
            "referenced_classical" | "classical" => Ok(Self::ReferencedClassical),
            "referenced_bell" | "bell" => Ok(Self::ReferencedBell),
            other => Err(Error::InvalidConfig(format!("unknown initial state {other:?}"))),
        }
    }

    pub fn is_referenced(&self) -> bool {
        !matches!(self, Self::MaximallyMixed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    /// System size; even, periodic boundaries.
    pub n: usize,
    /// Erasure probability per site per layer.
    pub p: f64,
    /// Hadamard probability per site per layer.
    pub q: f64,
    /// Junk-noise probability per site per layer.
    pub h: f64,
    pub depth: usize,
    #[serde(default)]
    pub initial_state: InitialState,
}

impl CircuitConfig {
    pub fn new(n: usize, p: f64, q: f64, h: f64, depth: usize) -> Self {
        Self {
            n,
            p,
            q,
            h,
            depth,
            initial_state: InitialState::MaximallyMixed,
        }
    }

    pub fn with_initial_state(mut self, init: InitialState) -> Self {
        self.initial_state = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "system size must be even and at least 2, got {}",
                self.n
            )));
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("h", self.h)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} = {v} is not in [0, 1]")));
            }
        }
        if self.depth == 0 {
            return Err(Error::InvalidConfig("depth must be at least 1".into()));
        }
        Ok(())
    }

    /// True when the run never leaves the Z sector.
    pub fn is_classical(&self) -> bool {
        self.q == 0.0 && self.initial_state != InitialState::ReferencedBell
    }
}

/// Everything that happens in one time step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Layer {
    /// `(first site, gate)`; the second site is `first + 1 mod n`.
    pub gates: Vec<(usize, AffineGate)>,
    pub hadamards: Vec<usize>,
    pub junk: Vec<usize>,
    pub erasures: Vec<usize>,
}

/// A target that a schedule can drive: simulator or oracle.
pub trait CircuitBackend {
    fn gate(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()>;
    fn hadamard(&mut self, site: usize) -> Result<()>;
    fn junk(&mut self, site: usize) -> Result<()>;
    fn erase(&mut self, site: usize) -> Result<()>;
}

impl Layer {
    pub fn apply<B: CircuitBackend + ?Sized>(&self, ring: usize, backend: &mut B) -> Result<()> {
        for (site, g) in &self.gates {
            backend.gate(g, *site, (site + 1) % ring)?;
        }
        for &s in &self.hadamards {
            backend.hadamard(s)?;
        }
        for &s in &self.junk {
            backend.junk(s)?;
        }
        for &s in &self.erasures {
            backend.erase(s)?;
        }
        Ok(())
    }

    pub fn is_gates_only(&self) -> bool {
        self.hadamards.is_empty() && self.junk.is_empty() && self.erasures.is_empty()
    }
}

/// Lazily draws the layers of one trajectory; [`Schedule::materialize`]
/// collects exactly the same layers.
pub struct LayerSampler {
    n: usize,
    p: f64,
    q: f64,
    h: f64,
    t: usize,
    gates: ChaCha8Rng,
    hadamard: ChaCha8Rng,
    junk: ChaCha8Rng,
    erasure: ChaCha8Rng,
}

fn bernoulli_sites(rng: &mut ChaCha8Rng, n: usize, prob: f64, out: &mut Vec<usize>) {
    out.clear();
    if prob <= 0.0 {
        return;
    }
    if prob >= 1.0 {
        out.extend(0..n);
        return;
    }
    for i in 0..n {
        if rng.gen_bool(prob) {
            out.push(i);
        }
    }
}

impl LayerSampler {
    pub fn new(config: &CircuitConfig, master_seed: u64, trajectory: u64) -> Self {
        Self {
            n: config.n,
            p: config.p,
            q: config.q,
            h: config.h,
            t: 0,
            gates: stream(master_seed, trajectory, Role::Gates),
            hadamard: stream(master_seed, trajectory, Role::Hadamard),
            junk: stream(master_seed, trajectory, Role::Junk),
            erasure: stream(master_seed, trajectory, Role::Erasure),
        }
    }

    /// Overwrites `layer` with the next time step.
    pub fn fill(&mut self, layer: &mut Layer) {
        let parity = self.t % 2;
        layer.gates.clear();
        for j in 0..self.n / 2 {
            layer
                .gates
                .push(((2 * j + parity) % self.n, sample_gate(&mut self.gates)));
        }
        bernoulli_sites(&mut self.hadamard, self.n, self.q, &mut layer.hadamards);
        bernoulli_sites(&mut self.junk, self.n, self.h, &mut layer.junk);
        bernoulli_sites(&mut self.erasure, self.n, self.p, &mut layer.erasures);
        self.t += 1;
    }

    pub fn next_layer(&mut self) -> Layer {
        let mut layer = Layer::default();
        self.fill(&mut layer);
        layer
    }
}

/// A fully drawn circuit realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub n: usize,
    pub layers: Vec<Layer>,
}

impl Schedule {
    /// Deterministic in `(config, master_seed, trajectory)`.
    pub fn materialize(config: &CircuitConfig, master_seed: u64, trajectory: u64) -> Self {
        let mut sampler = LayerSampler::new(config, master_seed, trajectory);
        Self {
            n: config.n,
            layers: (0..config.depth).map(|_| sampler.next_layer()).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn has_hadamards(&self) -> bool {
        self.layers.iter().any(|l| !l.hadamards.is_empty())
    }

    pub fn has_junk(&self) -> bool {
        self.layers.iter().any(|l| !l.junk.is_empty())
    }

    pub fn run<B: CircuitBackend + ?Sized>(&self, backend: &mut B) -> Result<()> {
        for layer in &self.layers {
            layer.apply(self.n, backend)?;
        }
        Ok(())
    }
}

/// `materialize_schedule(config, seed)` with the trajectory index folded in.
pub fn materialize_schedule(config: &CircuitConfig, master_seed: u64, trajectory: u64) -> Schedule {
    Schedule::materialize(config, master_seed, trajectory)
}

impl CircuitBackend for crate::stabilizer::StabilizerState {
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

impl CircuitBackend for crate::zsector::ZSectorState {
    fn gate(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        self.apply_gate_on(gate, q0, q1)
    }
    fn hadamard(&mut self, _site: usize) -> Result<()> {
        Err(Error::InvalidConfig(
            "Hadamard leaves the Z sector; use the general simulator".into(),
        ))
    }
    fn junk(&mut self, site: usize) -> Result<()> {
        self.apply_junk_noise(site)
    }
    fn erase(&mut self, site: usize) -> Result<()> {
        self.apply_erasure(site)
    }
}
