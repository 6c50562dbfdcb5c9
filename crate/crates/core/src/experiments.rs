//! Seeded, parallel experiment drivers.
//!
//! Realization `i` of a run draws its schedule from `(master_seed, i)` (see
//! [`crate::seeding`]). Realizations run on the rayon pool, results are
//! collected in index order and reduced sequentially, so every output is
//! independent of the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::AffineGate;
use crate::scaling::{extract_tau, DecayCurve, Tau};
use crate::schedule::{CircuitBackend, CircuitConfig, InitialState, Layer, LayerSampler};
use crate::seeding::{stream, Role};
use crate::stabilizer::{ReferenceKind, StabilizerState};
use crate::zsector::ZSectorState;

pub use crate::schedule::{materialize_schedule, Schedule};

/// Default exponent for the antipodal mutual-information evaluation time.
pub const DEFAULT_MI_EXPONENT: f64 = 1.51;
/// Default input:output information threshold in bits.
pub const DEFAULT_MI_THRESHOLD: f64 = 1.0;
/// Bootstrap resamples used for the uncertainty of a decay time.
pub const TAU_BOOTSTRAP: usize = 64;

/// Simulator state: the Z-sector fast path when the run is classical,
/// otherwise the general stabilizer representation.
#[derive(Clone, Debug)]
pub enum SimState {
    ZSector(ZSectorState),
    General(StabilizerState),
}

impl SimState {
    pub fn initial(config: &CircuitConfig) -> Result<Self> {
        let n = config.n;
        let fast = config.is_classical();
        Ok(match (config.initial_state, fast) {
            (InitialState::MaximallyMixed, true) => Self::ZSector(ZSectorState::new_maximally_mixed(n)?),
            (InitialState::MaximallyMixed, false) => Self::General(StabilizerState::new_maximally_mixed(n)?),
            (InitialState::ReferencedClassical, true) => {
                Self::ZSector(ZSectorState::new_referenced_classical(n)?)
            }
            (InitialState::ReferencedClassical, false) => {
                Self::General(StabilizerState::new_referenced(n, ReferenceKind::Classical)?)
            }
            (InitialState::ReferencedBell, _) => {
                Self::General(StabilizerState::new_referenced(n, ReferenceKind::Bell)?)
            }
        })
    }

    pub fn is_fast_path(&self) -> bool {
        matches!(self, Self::ZSector(_))
    }

    pub fn entropy(&self) -> usize {
        match self {
            Self::ZSector(s) => s.entropy(),
            Self::General(s) => s.entropy(),
        }
    }

    pub fn subsystem_entropy(&self, region: &[usize]) -> Result<usize> {
        match self {
            Self::ZSector(s) => s.subsystem_entropy(region),
            Self::General(s) => s.subsystem_entropy(region),
        }
    }

    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        match self {
            Self::ZSector(s) => s.mutual_information(a, b),
            Self::General(s) => s.mutual_information(a, b),
        }
    }
}

impl CircuitBackend for SimState {
    fn gate(&mut self, gate: &AffineGate, q0: usize, q1: usize) -> Result<()> {
        match self {
            Self::ZSector(s) => s.gate(gate, q0, q1),
            Self::General(s) => s.gate(gate, q0, q1),
        }
    }
    fn hadamard(&mut self, site: usize) -> Result<()> {
        match self {
            Self::ZSector(s) => s.hadamard(site),
            Self::General(s) => s.hadamard(site),
        }
    }
    fn junk(&mut self, site: usize) -> Result<()> {
        match self {
            Self::ZSector(s) => s.junk(site),
            Self::General(s) => s.junk(site),
        }
    }
    fn erase(&mut self, site: usize) -> Result<()> {
        match self {
            Self::ZSector(s) => s.erase(site),
            Self::General(s) => s.erase(site),
        }
    }
}

/// Runs realization `index` for `steps` layers, calling `observe(t, state)`
/// at `t = 0..=steps` until it returns `false`.
pub fn simulate<F>(config: &CircuitConfig, steps: usize, master_seed: u64, index: u64, mut observe: F) -> Result<()>
where
    F: FnMut(usize, &SimState) -> Result<bool>,
{
    let mut state = SimState::initial(config)?;
    let mut sampler = LayerSampler::new(config, master_seed, index);
    let mut layer = Layer::default();
    if !observe(0, &state)? {
        return Ok(());
    }
    for t in 1..=steps {
        sampler.fill(&mut layer);
        layer.apply(config.n, &mut state)?;
        if !observe(t, &state)? {
            break;
        }
    }
    Ok(())
}

/// Classical runs without junk noise cannot leave the zero-entropy state.
fn absorbed(config: &CircuitConfig, state: &SimState) -> bool {
    state.is_fast_path() && config.h == 0.0 && state.entropy() == 0
}

/// Entropy `S(t)` of one realization, `t = 0..=depth`.
pub fn entropy_trajectory(config: &CircuitConfig, master_seed: u64, index: u64) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(config.depth + 1);
    simulate(config, config.depth, master_seed, index, |_, s| {
        out.push(s.entropy() as u32);
        Ok(!absorbed(config, s))
    })?;
    out.resize(config.depth + 1, 0);
    Ok(out)
}

pub fn entropy_trajectories(config: &CircuitConfig, master_seed: u64, n_realizations: usize) -> Result<Vec<Vec<u32>>> {
    config.validate()?;
    (0..n_realizations as u64)
        .into_par_iter()
        .map(|i| entropy_trajectory(config, master_seed, i))
        .collect()
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub version: String,
}

impl Metadata {
    pub fn now() -> Self {
        Self {
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: CircuitConfig,
    pub master_seed: u64,
    pub n_realizations: usize,
    pub series: Vec<SeriesPoint>,
    pub metadata: Metadata,
}

impl ExperimentRecord {
    pub fn decay_curve(&self) -> DecayCurve {
        DecayCurve {
            times: self.series.iter().map(|s| s.t as f64).collect(),
            values: self.series.iter().map(|s| s.mean).collect(),
            std_errors: self.series.iter().map(|s| s.stderr).collect(),
            n: self.config.n,
            p: self.config.p,
            q: self.config.q,
            h: self.config.h,
        }
    }
}

fn aggregate(trajectories: &[Vec<u32>], depth: usize) -> Vec<SeriesPoint> {
    (0..=depth)
        .map(|t| {
            let vals: Vec<f64> = trajectories.iter().map(|tr| f64::from(tr[t])).collect();
            let (mean, stderr) = mean_stderr(&vals);
            SeriesPoint { t, mean, stderr }
        })
        .collect()
}

/// Mean entropy `S(t)` over realizations.
pub fn run_entropy_decay(config: &CircuitConfig, master_seed: u64, n_realizations: usize) -> Result<ExperimentRecord> {
    if config.initial_state != InitialState::MaximallyMixed {
        return Err(Error::InvalidConfig(
            "entropy decay starts from the maximally mixed state".into(),
        ));
    }
    if n_realizations == 0 {
        return Err(Error::InvalidConfig("need at least one realization".into()));
    }
    let trajectories = entropy_trajectories(config, master_seed, n_realizations)?;
    Ok(ExperimentRecord {
        config: config.clone(),
        master_seed,
        n_realizations,
        series: aggregate(&trajectories, config.depth),
        metadata: Metadata::now(),
    })
}

/// Default transient cutoff `max(10, N/4)` layers.
pub fn default_t0(n: usize) -> usize {
    (n / 4).max(10)
}

/// Default depth `4 N^1.6` for decay-time sweeps.
pub fn default_sweep_depth(n: usize) -> usize {
    (4.0 * (n as f64).powf(1.6)).round() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: f64,
    /// Decay time of the realization-averaged curve; NaN if censored.
    pub tau_mean: f64,
    /// Bootstrap standard error over realizations.
    pub tau_stderr: f64,
    /// Fraction of individual realizations that never decayed.
    pub censored_fraction: f64,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub n_list: Vec<usize>,
    pub p_list: Vec<f64>,
    pub q: f64,
    pub h: f64,
    /// Layers per system size; `None` uses [`default_sweep_depth`].
    pub depth: Option<usize>,
    /// Transient cutoff; `None` uses [`default_t0`].
    pub t0: Option<usize>,
    pub fraction: f64,
    pub realizations: usize,
    pub seed: u64,
}

fn curve_of(trajs: &[&Vec<u32>]) -> Vec<f64> {
    let m = trajs.len() as f64;
    (0..trajs[0].len())
        .map(|t| trajs.iter().map(|tr| f64::from(tr[t])).sum::<f64>() / m)
        .collect()
}

fn tau_of(values: &[f64], t0: usize, fraction: f64, n: usize) -> Result<Tau> {
    let curve = DecayCurve::from_values(values.to_vec(), n);
    extract_tau(&curve, t0 as f64, fraction)
}

/// One decay time per `(N, p)` grid point.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.n_list.is_empty() || spec.p_list.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one N and one p".into()));
    }
    if spec.realizations == 0 {
        return Err(Error::InvalidConfig("need at least one realization".into()));
    }
    let mut rows = Vec::new();
    for (ni, &n) in spec.n_list.iter().enumerate() {
        let depth = spec.depth.unwrap_or_else(|| default_sweep_depth(n));
        let t0 = spec.t0.unwrap_or_else(|| default_t0(n));
        if t0 >= depth {
            return Err(Error::InvalidConfig(format!(
                "transient cutoff {t0} is not below depth {depth}"
            )));
        }
        for (pi, &p) in spec.p_list.iter().enumerate() {
            let config = CircuitConfig::new(n, p, spec.q, spec.h, depth);
            config.validate()?;
            let trajs = entropy_trajectories(&config, spec.seed, spec.realizations)?;
            let all: Vec<&Vec<u32>> = trajs.iter().collect();
            let tau = tau_of(&curve_of(&all), t0, spec.fraction, n)?;
            let censored = trajs
                .iter()
                .map(|tr| {
                    let v: Vec<f64> = tr.iter().map(|&x| f64::from(x)).collect();
                    tau_of(&v, t0, spec.fraction, n).map(|t| matches!(t, Tau::Censored))
                })
                .collect::<Result<Vec<bool>>>()?;
            let censored_fraction = censored.iter().filter(|&&c| c).count() as f64 / trajs.len() as f64;

            let tau_mean = match tau {
                Tau::Time(t) => t,
                Tau::Censored => f64::NAN,
            };
            let tau_stderr = if tau_mean.is_nan() {
                f64::NAN
            } else {
                let grid_index = (ni * spec.p_list.len() + pi) as u64;
                bootstrap_tau(&trajs, t0, spec.fraction, n, spec.seed, grid_index)?
            };
            rows.push(SweepRow {
                n,
                p,
                tau_mean,
                tau_stderr,
                censored_fraction,
                realizations: spec.realizations,
                seed: spec.seed,
            });
        }
    }
    Ok(rows)
}

fn bootstrap_tau(trajs: &[Vec<u32>], t0: usize, fraction: f64, n: usize, seed: u64, grid_index: u64) -> Result<f64> {
    use rand::Rng;
    let mut rng = stream(seed, grid_index, Role::Bootstrap);
    let m = trajs.len();
    let mut taus = Vec::with_capacity(TAU_BOOTSTRAP);
    for _ in 0..TAU_BOOTSTRAP {
        let pick: Vec<&Vec<u32>> = (0..m).map(|_| &trajs[rng.gen_range(0..m)]).collect();
        if let Tau::Time(t) = tau_of(&curve_of(&pick), t0, fraction, n)? {
            taus.push(t);
        }
    }
    if taus.len() < 2 {
        return Ok(f64::NAN);
    }
    let (mean, _) = mean_stderr(&taus);
    let var = taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (taus.len() - 1) as f64;
    Ok(var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IoDecayResult {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    /// Mean first time with `I(S:R) < threshold` over realizations that
    /// got there; equals the cap if none did.
    pub timescale_mean: f64,
    pub timescale_stderr: f64,
    /// Fraction of realizations still above threshold at the cap.
    pub capped_fraction: f64,
    pub cap: usize,
}

/// Input:output information decay time of one realization, `None` if it
/// stays above `threshold` through `config.depth` layers.
pub fn io_decay_time(config: &CircuitConfig, threshold: f64, master_seed: u64, index: u64) -> Result<Option<usize>> {
    let n = config.n;
    let system: Vec<usize> = (0..n).collect();
    let reference: Vec<usize> = (n..2 * n).collect();
    let mut hit = None;
    simulate(config, config.depth, master_seed, index, |t, s| {
        if (s.mutual_information(&system, &reference)? as f64) < threshold {
            hit = Some(t);
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(hit)
}

pub fn run_io_mi_decay(config: &CircuitConfig, master_seed: u64, n_realizations: usize, threshold: f64) -> Result<IoDecayResult> {
    config.validate()?;
    if !config.initial_state.is_referenced() {
        return Err(Error::InvalidConfig(
            "input:output information needs a referenced initial state".into(),
        ));
    }
    if n_realizations == 0 {
        return Err(Error::InvalidConfig("need at least one realization".into()));
    }
    let times: Vec<Option<usize>> = (0..n_realizations as u64)
        .into_par_iter()
        .map(|i| io_decay_time(config, threshold, master_seed, i))
        .collect::<Result<_>>()?;
    let reached: Vec<f64> = times.iter().flatten().map(|&t| t as f64).collect();
    let capped_fraction = 1.0 - reached.len() as f64 / times.len() as f64;
    let (timescale_mean, timescale_stderr) = if reached.is_empty() {
        (config.depth as f64, 0.0)
    } else {
        mean_stderr(&reached)
    };
    Ok(IoDecayResult {
        n: config.n,
        p: config.p,
        q: config.q,
        timescale_mean,
        timescale_stderr,
        capped_fraction,
        cap: config.depth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiResult {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub t_eval: usize,
    pub mi_mean: f64,
    pub mi_stderr: f64,
}

/// `round(N^z)`.
pub fn antipodal_time(n: usize, z: f64) -> usize {
    (n as f64).powf(z).round() as usize
}

/// Antipodal regions `[0, N/4)` and `[N/2, 3N/4)`.
pub fn antipodal_regions(n: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if n % 4 != 0 || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "antipodal segments need N divisible by 4, got {n}"
        )));
    }
    Ok(((0..n / 4).collect(), (n / 2..3 * n / 4).collect()))
}

/// Mutual information between antipodal quarter segments at
/// `t = round(N^z)`; `config.depth` is ignored.
pub fn run_antipodal_mi(config: &CircuitConfig, z: f64, master_seed: u64, n_realizations: usize) -> Result<MiResult> {
    let (a, b) = antipodal_regions(config.n)?;
    let t_eval = antipodal_time(config.n, z).max(1);
    let mut cfg = config.clone();
    cfg.depth = t_eval;
    cfg.validate()?;
    if n_realizations == 0 {
        return Err(Error::InvalidConfig("need at least one realization".into()));
    }
    let values: Vec<f64> = (0..n_realizations as u64)
        .into_par_iter()
        .map(|i| {
            let mut mi = 0.0;
            simulate(&cfg, t_eval, master_seed, i, |t, s| {
                if absorbed(&cfg, s) {
                    return Ok(false);
                }
                if t == t_eval {
                    mi = s.mutual_information(&a, &b)? as f64;
                }
                Ok(true)
            })?;
            Ok(mi)
        })
        .collect::<Result<_>>()?;
    let (mi_mean, mi_stderr) = mean_stderr(&values);
    Ok(MiResult {
        n: config.n,
        p: config.p,
        q: config.q,
        t_eval,
        mi_mean,
        mi_stderr,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Q,
    H,
}

impl SweepVariable {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "q" => Ok(Self::Q),
            "h" => Ok(Self::H),
            other => Err(Error::InvalidConfig(format!("sweep variable must be q or h, got {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationMember {
    pub value: f64,
    pub record: ExperimentRecord,
    /// Mean entropy over the final 10% of time steps.
    pub saturation: f64,
    pub saturation_stderr: f64,
}

/// Start of the final-10% window for a run of `depth` layers.
pub fn saturation_window_start(depth: usize) -> usize {
    depth + 1 - ((depth + 1) / 10).max(1)
}

/// One entropy-decay family per value of the swept rate; the other rate
/// is held at zero.
pub fn run_perturbation(
    base: &CircuitConfig,
    variable: SweepVariable,
    values: &[f64],
    master_seed: u64,
    n_realizations: usize,
) -> Result<Vec<PerturbationMember>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("no sweep values".into()));
    }
    values
        .iter()
        .map(|&v| {
            let mut cfg = base.clone();
            match variable {
                SweepVariable::Q => {
                    cfg.q = v;
                    cfg.h = 0.0;
                }
                SweepVariable::H => {
                    cfg.h = v;
                    cfg.q = 0.0;
                }
            }
            cfg.initial_state = InitialState::MaximallyMixed;
            cfg.validate()?;
            let trajs = entropy_trajectories(&cfg, master_seed, n_realizations)?;
            let start = saturation_window_start(cfg.depth);
            let per_real: Vec<f64> = trajs
                .iter()
                .map(|tr| {
                    let w = &tr[start..];
                    w.iter().map(|&x| f64::from(x)).sum::<f64>() / w.len() as f64
                })
                .collect();
            let (saturation, saturation_stderr) = mean_stderr(&per_real);
            Ok(PerturbationMember {
                value: v,
                record: ExperimentRecord {
                    series: aggregate(&trajs, cfg.depth),
                    config: cfg,
                    master_seed,
                    n_realizations,
                    metadata: Metadata::now(),
                },
                saturation,
                saturation_stderr,
            })
        })
        .collect()
}
