//! Self-verification suite: exact identities and per-realization agreement
//! between the stabilizer simulator and the brute-force oracles.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dp::{verify_gate_average_identity, WeightMatrix};
use crate::error::Result;
use crate::gates::{enumerate_gates, AffineGate, PermutationTable};
use crate::oracle::{pauli_matrix, CircuitFunction, DenseState, Distribution};
use crate::pauli::PauliString;
use crate::schedule::{CircuitConfig, InitialState, Schedule};
use crate::stabilizer::StabilizerState;
use crate::zsector::ZSectorState;

pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const SHANNON_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Schedules per `(p, q, h)` combination in the oracle comparison.
    pub schedules_per_point: usize,
    pub depth: usize,
    pub classical_realizations: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            schedules_per_point: 4,
            depth: 8,
            classical_realizations: 120,
        }
    }
}

pub fn check_gate_identity() -> CheckResult {
    let check = verify_gate_average_identity(&WeightMatrix::canonical());
    CheckResult {
        name: "gate-average identity",
        passed: check.passed(),
        detail: match check.worst_entry {
            None => "16x16 identity holds exactly".into(),
            Some((r, c)) => format!("entry ({r}, {c}) deviates by {}", check.max_deviation),
        },
    }
}

fn permutation_unitary(gate: &AffineGate) -> DMatrix<Complex64> {
    let perm = gate.to_permutation();
    let mut u = DMatrix::zeros(4, 4);
    for beta in 0..4 {
        u[(perm.map[beta] as usize, beta)] = Complex64::new(1.0, 0.0);
    }
    u
}

/// Largest entry of `U P U^dagger - (+-) P'` over all 16 two-site Paulis.
pub fn symplectic_action_defect(gate: &AffineGate) -> f64 {
    let u = permutation_unitary(gate);
    let mut worst = 0.0f64;
    for x in 0..4u8 {
        for z in 0..4u8 {
            let mut p = PauliString::identity(2);
            let mut q = PauliString::identity(2);
            let img = gate.symplectic_action(x, z);
            for j in 0..2 {
                p.x.set(j, x >> j & 1 == 1);
                p.z.set(j, z >> j & 1 == 1);
                q.x.set(j, img.x >> j & 1 == 1);
                q.z.set(j, img.z >> j & 1 == 1);
            }
            q.sign = img.sign_flip;
            let lhs = &u * pauli_matrix(&p) * u.adjoint();
            worst = worst.max((lhs - pauli_matrix(&q)).camax());
        }
    }
    worst
}

pub fn check_gate_set() -> CheckResult {
    let gates = enumerate_gates();
    let tables: HashSet<PermutationTable> = gates.iter().map(AffineGate::to_permutation).collect();
    let all_bijections = tables.iter().all(PermutationTable::is_bijection);
    let defect = gates.iter().map(symplectic_action_defect).fold(0.0, f64::max);
    let passed = gates.len() == 24 && tables.len() == 24 && all_bijections && defect < 1e-12;
    CheckResult {
        name: "gate set completeness",
        passed,
        detail: format!(
            "{} gates, {} distinct permutations, max conjugation defect {defect:.1e}",
            gates.len(),
            tables.len()
        ),
    }
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << n)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// Largest deviation between simulator and oracle over entropy, every
/// subsystem entropy and every mutual information between disjoint
/// non-empty regions.
fn compare_with_dense(state: &StabilizerState, dense: &DenseState) -> Result<f64> {
    let n = state.n_qubits();
    let mut worst = (state.entropy() as f64 - dense.von_neumann_entropy()).abs();
    let all = subsets(n);
    let mut cache = Vec::with_capacity(all.len());
    for region in &all {
        let s = state.subsystem_entropy(region)?;
        let d = dense.subsystem_entropy(region)?;
        worst = worst.max((s as f64 - d).abs());
        cache.push((s, d));
    }
    for a in 1..all.len() {
        for b in 1..all.len() {
            if a & b != 0 {
                continue;
            }
            let mi_state = state.mutual_information(&all[a], &all[b])? as f64;
            let (sa, sb, sab) = (cache[a].1, cache[b].1, cache[a | b].1);
            worst = worst.max((mi_state - (sa + sb - sab)).abs());
        }
    }
    Ok(worst)
}

fn compare_with_distribution(state: &StabilizerState, dist: &Distribution) -> Result<f64> {
    let mut worst = (state.entropy() as f64 - dist.shannon_entropy()).abs();
    for region in subsets(state.n_qubits()) {
        worst = worst.max((state.subsystem_entropy(&region)? as f64 - dist.subsystem_entropy(&region)?).abs());
    }
    Ok(worst)
}

pub const RATE_GRID: [f64; 4] = [0.0, 0.2, 0.5, 1.0];

/// Every `(p, q, h)` on [`RATE_GRID`] at `N = 4`.
pub fn check_oracle_equivalence(options: &VerifyOptions) -> Result<CheckResult> {
    let n = 4;
    let mut count = 0usize;
    let mut worst_dense = 0.0f64;
    let mut worst_shannon = 0.0f64;
    let mut index = 0u64;
    for &p in &RATE_GRID {
        for &q in &RATE_GRID {
            for &h in &RATE_GRID {
                let cfg = CircuitConfig::new(n, p, q, h, options.depth);
                for _ in 0..options.schedules_per_point {
                    let sched = Schedule::materialize(&cfg, options.seed, index);
                    index += 1;
                    let mut state = StabilizerState::new_maximally_mixed(n)?;
                    let mut dense = DenseState::maximally_mixed(n)?;
                    sched.run(&mut state)?;
                    sched.run(&mut dense)?;
                    state.check_invariants()?;
                    worst_dense = worst_dense.max(compare_with_dense(&state, &dense)?);
                    if !sched.has_hadamards() {
                        let mut dist = Distribution::uniform(n)?;
                        sched.run(&mut dist)?;
                        worst_shannon = worst_shannon.max(compare_with_distribution(&state, &dist)?);
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(CheckResult {
        name: "oracle equivalence",
        passed: count >= 200 && worst_dense < ORACLE_TOLERANCE && worst_shannon < SHANNON_TOLERANCE,
        detail: format!(
            "{count} schedules at N = {n}: max density-matrix deviation {worst_dense:.1e}, max Shannon deviation {worst_shannon:.1e}"
        ),
    })
}

/// `I(X;Y) = S(Y)` for uniform inputs, and `S(Y)` equals the simulated
/// entropy of the same realization.
pub fn check_io_equivalence(options: &VerifyOptions) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 0..options.classical_realizations {
        let n = if i % 2 == 0 { 4 } else { 2 };
        let p = RATE_GRID[i % 3];
        let cfg = CircuitConfig::new(n, p, 0.0, 0.0, 1 + i % options.depth.max(1));
        let sched = Schedule::materialize(&cfg, options.seed ^ 0xa5a5, i as u64);
        let f = CircuitFunction::from_schedule(&sched)?;
        let input = Distribution::uniform(n)?;
        let info = f.io_mutual_information(&input)?;
        let sy = f.pushforward(&input)?.shannon_entropy();
        let mut state = StabilizerState::new_maximally_mixed(n)?;
        sched.run(&mut state)?;
        worst = worst.max((info - sy).abs()).max((state.entropy() as f64 - sy).abs());
        count += 1;
    }
    Ok(CheckResult {
        name: "input/output equivalence",
        passed: count >= 100 && worst < ORACLE_TOLERANCE,
        detail: format!("{count} classical realizations: max |I(X;Y) - S(Y)| {worst:.1e}"),
    })
}

/// Z-sector fast path against the general simulator, and referenced
/// classical information against the Shannon oracle.
pub fn check_fast_path(options: &VerifyOptions) -> Result<CheckResult> {
    let mut mismatches = 0usize;
    let mut worst_info = 0.0f64;
    let mut count = 0;
    for i in 0..50u64 {
        let n = 2 + 2 * (i as usize % 8);
        let cfg = CircuitConfig::new(n, 0.05 + 0.01 * (i % 10) as f64, 0.0, if i % 3 == 0 { 0.05 } else { 0.0 }, 30);
        let sched = Schedule::materialize(&cfg, options.seed ^ 0x77, i);
        let mut fast = ZSectorState::new_maximally_mixed(n)?;
        let mut general = StabilizerState::new_maximally_mixed(n)?;
        for layer in &sched.layers {
            layer.apply(n, &mut fast)?;
            layer.apply(n, &mut general)?;
            if fast.entropy() != general.entropy() {
                mismatches += 1;
            }
        }
        let half: Vec<usize> = (0..n / 2).collect();
        if fast.subsystem_entropy(&half)? != general.subsystem_entropy(&half)? {
            mismatches += 1;
        }
        count += 1;

        if n <= 4 {
            let cfg = cfg.clone().with_initial_state(InitialState::ReferencedClassical);
            let sched = Schedule::materialize(&cfg, options.seed ^ 0x99, i);
            let mut state = ZSectorState::new_referenced_classical(n)?;
            let mut dist = Distribution::referenced(n)?;
            sched.run(&mut state)?;
            sched.run(&mut dist)?;
            let (s, r): (Vec<usize>, Vec<usize>) = ((0..n).collect(), (n..2 * n).collect());
            let exact = dist.mutual_information(&s, &r)?;
            worst_info = worst_info.max((state.mutual_information(&s, &r)? as f64 - exact).abs());
        }
    }
    Ok(CheckResult {
        name: "fast path agreement",
        passed: mismatches == 0 && worst_info < SHANNON_TOLERANCE,
        detail: format!(
            "{count} classical runs, {mismatches} mismatches; max referenced information deviation {worst_info:.1e}"
        ),
    })
}

/// Runs every check; a check that errors counts as failed.
pub fn run_all(options: &VerifyOptions) -> VerifyReport {
    let wrap = |name: &'static str, r: Result<CheckResult>| {
        r.unwrap_or_else(|e| CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        })
    };
    VerifyReport {
        checks: vec![
            check_gate_identity(),
            check_gate_set(),
            wrap("oracle equivalence", check_oracle_equivalence(options)),
            wrap("input/output equivalence", check_io_equivalence(options)),
            wrap("fast path agreement", check_fast_path(options)),
        ],
    }
}
