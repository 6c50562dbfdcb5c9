//! Diffusion-reaction lattice model of the averaged collision probability.
//!
//! Each site is empty (`0`) or occupied (`1`). On every brickwork pair an
//! empty pair stays empty and an occupied pair goes to one of `01`, `10`,
//! `11` with probability `1/3` each; afterwards every site is emptied with
//! probability `p`. The all-empty lattice is absorbing, and the probability
//! of having been absorbed at depth `t` from a half-filled random start is
//! the circuit average of the collision probability.
//!
//! The same Markov kernel is certified by [`verify_gate_average_identity`],
//! which checks in exact arithmetic that averaging `T_g (x) T_g` over the 24
//! gates equals the expansion through the weight matrix [`WeightMatrix`].

use num_rational::Rational64;
use num_traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::gates::enumerate_gates;
use crate::gf2::BitVector;
use crate::seeding::{stream, Role};

/// Occupied pairs land uniformly on one of these.
const OCCUPIED_OUTCOMES: [(bool, bool); 3] = [(false, true), (true, false), (true, true)];

pub fn pair_update<R: Rng + ?Sized>(left: bool, right: bool, rng: &mut R) -> (bool, bool) {
    if !left && !right {
        return (false, false);
    }
    OCCUPIED_OUTCOMES[rng.gen_range(0..3)]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpLattice {
    occupancy: BitVector,
}

impl DpLattice {
    pub fn empty(n: usize) -> Self {
        Self {
            occupancy: BitVector::zeros(n),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            occupancy: BitVector::from_bits((0..n).map(|_| true)),
        }
    }

    /// Each site occupied independently with probability 1/2.
    pub fn random_half<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            occupancy: BitVector::from_bits((0..n).map(|_| rng.gen_bool(0.5))),
        }
    }

    pub fn from_bits(occupancy: BitVector) -> Self {
        Self { occupancy }
    }

    pub fn n_sites(&self) -> usize {
        self.occupancy.len()
    }

    pub fn occupancy(&self) -> &BitVector {
        &self.occupancy
    }

    pub fn count(&self) -> usize {
        self.occupancy.count_ones()
    }

    pub fn is_absorbed(&self) -> bool {
        self.occupancy.is_zero()
    }

    /// Pair updates on pairs `(2j + parity, 2j + parity + 1 mod n)`, then
    /// erasure of every site with probability `p`.
    pub fn step<R: Rng + ?Sized>(&mut self, p: f64, parity: usize, rng: &mut R) {
        let n = self.n_sites();
        if self.is_absorbed() {
            return;
        }
        for j in 0..n / 2 {
            let a = (2 * j + parity % 2) % n;
            let b = (a + 1) % n;
            let (l, r) = (self.occupancy.get(a), self.occupancy.get(b));
            if l || r {
                let (l2, r2) = pair_update(l, r, rng);
                self.occupancy.set(a, l2);
                self.occupancy.set(b, r2);
            }
        }
        if p >= 1.0 {
            self.occupancy = BitVector::zeros(n);
        } else if p > 0.0 {
            let occupied: Vec<usize> = self.occupancy.iter_ones().collect();
            for site in occupied {
                if rng.gen_bool(p) {
                    self.occupancy.set(site, false);
                }
            }
        }
    }
}

/// A fraction with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proportion {
    pub estimate: f64,
    pub stderr: f64,
}

impl Proportion {
    pub fn from_counts(hits: usize, total: usize) -> Self {
        if total == 0 {
            return Self { estimate: f64::NAN, stderr: f64::NAN };
        }
        let f = hits as f64 / total as f64;
        Self {
            estimate: f,
            stderr: (f * (1.0 - f) / total as f64).sqrt(),
        }
    }
}

fn random_start_trajectory(n: usize, depth: usize, p: f64, master: u64, index: u64) -> Vec<usize> {
    let mut init = stream(master, index, Role::LatticeInit);
    let mut rng = stream(master, index, Role::Lattice);
    let mut lattice = DpLattice::random_half(n, &mut init);
    let mut counts = Vec::with_capacity(depth + 1);
    counts.push(lattice.count());
    for t in 0..depth {
        lattice.step(p, t % 2, &mut rng);
        counts.push(lattice.count());
    }
    counts
}

/// Fraction of random-start trajectories absorbed at `depth`.
pub fn estimate_q_bar(n: usize, depth: usize, p: f64, n_trajectories: usize, master_seed: u64) -> Proportion {
    let hits: usize = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|i| usize::from(*random_start_trajectory(n, depth, p, master_seed, i).last().unwrap() == 0))
        .sum();
    Proportion::from_counts(hits, n_trajectories)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpRow {
    pub t: usize,
    pub density_mean: f64,
    pub density_stderr: f64,
    pub survival_prob: f64,
    pub qbar_estimate: f64,
    pub qbar_stderr: f64,
}

/// Per-step occupied counts of a set of trajectories, reduced to density
/// and survival. `counts[i][t]` is the count of trajectory `i` at step `t`.
pub fn dp_observables(n: usize, counts: &[Vec<usize>]) -> Vec<(f64, f64, f64)> {
    let depth = counts.iter().map(Vec::len).min().unwrap_or(0);
    let m = counts.len() as f64;
    (0..depth)
        .map(|t| {
            let dens: Vec<f64> = counts.iter().map(|c| c[t] as f64 / n as f64).collect();
            let mean = dens.iter().sum::<f64>() / m;
            let var = if counts.len() > 1 {
                dens.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            let alive = counts.iter().filter(|c| c[t] > 0).count() as f64 / m;
            (mean, (var / m).sqrt(), alive)
        })
        .collect()
}

fn full_start_trajectory(n: usize, depth: usize, p: f64, master: u64, index: u64) -> Vec<usize> {
    let mut rng = stream(master, index, Role::Lattice);
    let mut lattice = DpLattice::full(n);
    let mut counts = Vec::with_capacity(depth + 1);
    counts.push(lattice.count());
    for t in 0..depth {
        lattice.step(p, t % 2, &mut rng);
        counts.push(lattice.count());
    }
    counts
}

/// Density and survival from a fully occupied start, plus the absorbed
/// fraction from a random half-filled start, for `t = 0..=depth`.
pub fn run_dp(n: usize, p: f64, depth: usize, n_trajectories: usize, master_seed: u64) -> Vec<DpRow> {
    let full: Vec<Vec<usize>> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|i| full_start_trajectory(n, depth, p, master_seed, i))
        .collect();
    // random starts use a disjoint index range of the same master seed
    let offset = 1u64 << 62;
    let random: Vec<Vec<usize>> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|i| random_start_trajectory(n, depth, p, master_seed, offset + i))
        .collect();
    let obs = dp_observables(n, &full);
    obs.into_iter()
        .enumerate()
        .map(|(t, (density_mean, density_stderr, survival_prob))| {
            let absorbed = random.iter().filter(|c| c[t] == 0).count();
            let q = Proportion::from_counts(absorbed, n_trajectories);
            DpRow {
                t,
                density_mean,
                density_stderr,
                survival_prob,
                qbar_estimate: q.estimate,
                qbar_stderr: q.stderr,
            }
        })
        .collect()
}

/// Steps until a fully occupied lattice empties; `None` if still alive at
/// `cap`.
pub fn absorption_time(n: usize, p: f64, cap: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
    let mut lattice = DpLattice::full(n);
    for t in 0..cap {
        lattice.step(p, t % 2, rng);
        if lattice.is_absorbed() {
            return Some(t + 1);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorptionStats {
    pub mean: f64,
    pub stderr: f64,
    pub censored_fraction: f64,
}

/// Mean absorption time over trajectories; censored runs count as `cap`.
pub fn mean_absorption_time(n: usize, p: f64, cap: usize, n_trajectories: usize, master_seed: u64) -> AbsorptionStats {
    let times: Vec<Option<usize>> = (0..n_trajectories as u64)
        .into_par_iter()
        .map(|i| absorption_time(n, p, cap, &mut stream(master_seed, i, Role::Lattice)))
        .collect();
    let m = times.len() as f64;
    let vals: Vec<f64> = times.iter().map(|t| t.unwrap_or(cap) as f64).collect();
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    AbsorptionStats {
        mean,
        stderr: (var / m).sqrt(),
        censored_fraction: times.iter().filter(|t| t.is_none()).count() as f64 / m,
    }
}

/// The 4x4 weight matrix over pair configurations ordered
/// `(1,1), (1,x), (x,1), (x,x)`, i.e. index `2 [first = x] + [second = x]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightMatrix(pub [[Rational64; 4]; 4]);

impl WeightMatrix {
    pub fn canonical() -> Self {
        let zero = Rational64::from_integer(0);
        let third = Rational64::new(1, 3);
        let mut m = [[zero; 4]; 4];
        m[0][0] = Rational64::from_integer(1);
        for row in m.iter_mut().skip(1) {
            for e in row.iter_mut().skip(1) {
                *e = third;
            }
        }
        Self(m)
    }

    pub fn row_sums(&self) -> [Rational64; 4] {
        self.0.map(|r| r.iter().sum())
    }

    pub fn column_sums(&self) -> [Rational64; 4] {
        let mut out = [Rational64::from_integer(0); 4];
        for row in &self.0 {
            for (o, e) in out.iter_mut().zip(row) {
                *o += e;
            }
        }
        out
    }
}

pub type Matrix16 = [[Rational64; 16]; 16];

/// `(1/24) sum_g T_g (x) T_g`, indexed `(4 alpha + alpha', 4 beta + beta')`.
pub fn gate_average_lhs() -> Matrix16 {
    let zero = Rational64::from_integer(0);
    let mut out = [[zero; 16]; 16];
    let gates = enumerate_gates();
    let w = Rational64::new(1, gates.len() as i64);
    for g in &gates {
        let perm = g.to_permutation();
        for beta in 0..4 {
            for beta2 in 0..4 {
                let alpha = perm.map[beta] as usize;
                let alpha2 = perm.map[beta2] as usize;
                out[4 * alpha + alpha2][4 * beta + beta2] += w;
            }
        }
    }
    out
}

/// Single-site operator entry: `I` or `X` (as `x = true`), at `(a, a')`.
fn site_entry(x: bool, a: usize, a2: usize) -> bool {
    (a != a2) == x
}

/// `sum M[tau][sigma] tau1 (x) tau2 (x) sigma1 (x) sigma2` with
/// `tau = I/2` or `X/2` on the outputs and `sigma = I` or `X` on the inputs.
pub fn gate_average_rhs(m: &WeightMatrix) -> Matrix16 {
    let zero = Rational64::from_integer(0);
    let quarter = Rational64::new(1, 4);
    let mut out = [[zero; 16]; 16];
    for (row, out_row) in out.iter_mut().enumerate() {
        let (alpha, alpha2) = (row / 4, row % 4);
        for (col, entry) in out_row.iter_mut().enumerate() {
            let (beta, beta2) = (col / 4, col % 4);
            for tau in 0..4 {
                let (t1, t2) = (tau & 2 != 0, tau & 1 != 0);
                if !site_entry(t1, alpha & 1, alpha2 & 1) || !site_entry(t2, alpha >> 1, alpha2 >> 1) {
                    continue;
                }
                for sigma in 0..4 {
                    let (s1, s2) = (sigma & 2 != 0, sigma & 1 != 0);
                    if site_entry(s1, beta & 1, beta2 & 1) && site_entry(s2, beta >> 1, beta2 >> 1) {
                        *entry += m.0[tau][sigma] * quarter;
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub max_deviation: Rational64,
    /// Entry with the largest deviation, if any deviates.
    pub worst_entry: Option<(usize, usize)>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.worst_entry.is_none()
    }
}

/// Compares both sides entrywise in exact rational arithmetic.
pub fn verify_gate_average_identity(m: &WeightMatrix) -> IdentityCheck {
    let lhs = gate_average_lhs();
    let rhs = gate_average_rhs(m);
    let mut check = IdentityCheck {
        max_deviation: Rational64::from_integer(0),
        worst_entry: None,
    };
    for r in 0..16 {
        for c in 0..16 {
            let dev = (lhs[r][c] - rhs[r][c]).abs();
            if dev > check.max_deviation {
                check.max_deviation = dev;
                check.worst_entry = Some((r, c));
            }
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn identity_holds_exactly() {
        let check = verify_gate_average_identity(&WeightMatrix::canonical());
        assert!(check.passed(), "{check:?}");
        assert_eq!(check.max_deviation, Rational64::from_integer(0));
    }

    #[test]
    fn perturbed_weight_matrix_fails() {
        let mut m = WeightMatrix::canonical();
        m.0[1][2] += Rational64::new(1, 1000);
        let check = verify_gate_average_identity(&m);
        assert!(!check.passed());
        assert!(check.max_deviation > Rational64::from_integer(0));
    }

    #[test]
    fn weight_matrix_is_doubly_stochastic() {
        let m = WeightMatrix::canonical();
        let one = Rational64::from_integer(1);
        assert!(m.row_sums().iter().all(|&s| s == one));
        assert!(m.column_sums().iter().all(|&s| s == one));
    }

    #[test]
    fn gate_average_is_doubly_stochastic() {
        let lhs = gate_average_lhs();
        let one = Rational64::from_integer(1);
        for r in 0..16 {
            assert_eq!(lhs[r].iter().sum::<Rational64>(), one);
            assert_eq!((0..16).map(|c| lhs[c][r]).sum::<Rational64>(), one);
        }
        // known entries: diagonal block 1/4, off-diagonal 1/12
        assert_eq!(lhs[0][0], Rational64::new(1, 4));
        assert_eq!(lhs[1][1], Rational64::new(1, 12));
        assert_eq!(lhs[0][1], Rational64::from_integer(0));
    }

    #[test]
    fn pair_update_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        let draws = 100_000;
        for _ in 0..draws {
            let (l, r) = pair_update(true, false, &mut rng);
            counts[usize::from(l) | usize::from(r) << 1] += 1;
        }
        assert_eq!(counts[0], 0);
        let sigma = (draws as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &c in &counts[1..] {
            assert!((c as f64 - draws as f64 / 3.0).abs() < 5.0 * sigma, "{counts:?}");
        }
        assert_eq!(pair_update(false, false, &mut rng), (false, false));
        for _ in 0..1000 {
            assert_ne!(pair_update(true, true, &mut rng), (false, false));
        }
    }

    #[test]
    fn lattice_step_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut l = DpLattice::full(10);
        l.step(1.0, 0, &mut rng);
        assert!(l.is_absorbed());
        for parity in 0..2 {
            for _ in 0..200 {
                let mut single = DpLattice::from_bits(BitVector::unit(10, 3));
                single.step(0.0, parity, &mut rng);
                assert!((1..=2).contains(&single.count()));
            }
        }
        let mut e = DpLattice::empty(10);
        e.step(0.3, 1, &mut rng);
        assert!(e.is_absorbed());
    }

    #[test]
    fn q_bar_limits() {
        let q = estimate_q_bar(6, 3, 1.0, 100, 1);
        assert_eq!(q.estimate, 1.0);
        // without erasure only the initially empty lattices are absorbed
        let q = estimate_q_bar(4, 20, 0.0, 40_000, 2);
        assert!((q.estimate - 1.0 / 16.0).abs() < 4.0 * q.stderr, "{q:?}");
    }

    #[test]
    fn run_dp_limits() {
        let rows = run_dp(8, 1.0, 5, 50, 0);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].survival_prob, 1.0);
        assert!(rows[1..].iter().all(|r| r.survival_prob == 0.0 && r.qbar_estimate == 1.0));
        let rows = run_dp(8, 0.0, 5, 50, 0);
        assert!(rows.iter().all(|r| r.survival_prob == 1.0));
    }

    #[test]
    fn q_bar_matches_exact_markov_chain() {
        // exact absorbed probability for N = 4, depth 3 by enumerating the
        // 16-state chain
        let (n, depth, p) = (4usize, 3usize, 0.3f64);
        let mut dist = vec![1.0 / 16.0; 16];
        for t in 0..depth {
            let parity = t % 2;
            let mut after_pairs = vec![0.0; 16];
            for (s, &w) in dist.iter().enumerate() {
                // pairs (0,1),(2,3) or (1,2),(3,0)
                let pairs: [(usize, usize); 2] = if parity == 0 { [(0, 1), (2, 3)] } else { [(1, 2), (3, 0)] };
                let mut branches = vec![(s, w)];
                for (a, b) in pairs {
                    let mut next = Vec::new();
                    for (state, weight) in branches {
                        if state >> a & 1 == 0 && state >> b & 1 == 0 {
                            next.push((state, weight));
                        } else {
                            for (l, r) in OCCUPIED_OUTCOMES {
                                let cleared = state & !(1 << a) & !(1 << b);
                                next.push((cleared | usize::from(l) << a | usize::from(r) << b, weight / 3.0));
                            }
                        }
                    }
                    branches = next;
                }
                for (state, weight) in branches {
                    after_pairs[state] += weight;
                }
            }
            let mut after = vec![0.0; 16];
            for (s, &w) in after_pairs.iter().enumerate() {
                for target in 0..16usize {
                    if target & !s != 0 {
                        continue;
                    }
                    let removed = (s & !target).count_ones() as i32;
                    let kept = (target).count_ones() as i32;
                    after[target] += w * p.powi(removed) * (1.0 - p).powi(kept);
                }
            }
            dist = after;
        }
        let exact = dist[0];
        let q = estimate_q_bar(n, depth, p, 200_000, 9);
        assert!((q.estimate - exact).abs() < 4.0 * q.stderr, "{} vs {exact}", q.estimate);
    }
}
