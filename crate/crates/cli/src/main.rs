//! `semicirc`: run circuit experiments, fit scaling forms, verify the build.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use semicirc::experiments::{self, SweepSpec, SweepVariable};
use semicirc::io::{self, DecayRow, DpCsvRow, PhaseRow, RunManifest};
use semicirc::scaling::{self, CollapseOptions, CollapseSpec, CrossingOptions};
use semicirc::schedule::{CircuitConfig, InitialState};
use semicirc::verify::{self, VerifyOptions};

/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser, Debug)]
#[command(name = "semicirc", version, about = "Random semi-classical circuits with erasure errors")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean entropy S(t) from the maximally mixed state.
    Decay(DecayArgs),
    /// Decay time for every (N, p) on a grid.
    Sweep(SweepArgs),
    /// Diffusion-reaction lattice observables.
    Dp(DpArgs),
    /// Mutual information between antipodal quarter segments.
    Mi(MiArgs),
    /// Entropy families with Hadamard or junk noise switched on.
    Perturb(PerturbArgs),
    /// Input:output information decay time over a (p, q) grid.
    PhaseDiagram(PhaseArgs),
    /// Fit a data collapse to a sweep or decay table.
    Collapse(CollapseArgs),
    /// Run the exact identity and oracle-equivalence suite.
    Verify(VerifyArgs),
}

/// Flags every subcommand accepts.
#[derive(Args, Debug, Serialize)]
struct Common {
    /// Master seed; drawn from system entropy when absent.
    #[arg(long)]
    #[serde(skip)]
    seed: Option<u64>,

    /// Flat key = value file whose keys mirror the flags; flags win.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DecayArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    p_list: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    /// Layers per size (default 4 N^1.6).
    #[arg(long)]
    depth: Option<usize>,
    /// Transient cutoff (default max(10, N/4)).
    #[arg(long)]
    t0: Option<usize>,
    #[arg(long, default_value_t = scaling::DEFAULT_FRACTION)]
    fraction: f64,
    #[arg(long, default_value_t = 200)]
    realizations: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct DpArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 1000)]
    trajectories: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct MiArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    p_list: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    /// Evaluation time is round(N^z).
    #[arg(long, default_value_t = experiments::DEFAULT_MI_EXPONENT)]
    z: f64,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SweepVar {
    Q,
    H,
}

#[derive(Args, Debug, Serialize)]
struct PerturbArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = scaling::REFERENCE_P_C)]
    p: f64,
    #[arg(long, value_enum)]
    sweep: SweepVar,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct PhaseArgs {
    #[arg(long)]
    n: usize,
    /// Number of p values, evenly spaced on [0, p-max].
    #[arg(long)]
    p_grid: usize,
    /// Number of q values, evenly spaced on [0, q-max].
    #[arg(long)]
    q_grid: usize,
    #[arg(long, default_value_t = 0.2)]
    p_max: f64,
    #[arg(long, default_value_t = 0.1)]
    q_max: f64,
    /// Cap on the decay time (default 4 N^1.6).
    #[arg(long)]
    depth: Option<usize>,
    /// Information threshold in bits.
    #[arg(long, default_value_t = experiments::DEFAULT_MI_THRESHOLD)]
    threshold: f64,
    /// Bell-pair references instead of classically correlated ones.
    #[arg(long)]
    bell: bool,
    #[arg(long, default_value_t = 20)]
    realizations: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Ansatz {
    /// tau / N^z against (p - pc) N^(1/nu), from a sweep table.
    Tau,
    /// S / q^a against t q^b, from a decay table with several q (or h).
    Crossover,
}

#[derive(Args, Debug, Serialize)]
struct CollapseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    ansatz: Ansatz,
    /// Parameter bounds, e.g. `z=1:2,nu=0.5:2,pc=0.05:0.12`.
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Fit result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Schedules per (p, q, h) grid point.
    #[arg(long, default_value_t = 4)]
    schedules: usize,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

enum Failure {
    Usage(String),
    Verification,
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<semicirc::Error>() {
            Some(semicirc::Error::InvalidConfig(_) | semicirc::Error::Parse(_)) => Failure::Usage(format!("{e:#}")),
            _ => Failure::Runtime(e),
        }
    }
}

impl From<semicirc::Error> for Failure {
    fn from(e: semicirc::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

/// Inserts the flags from `--config FILE` right after the subcommand name,
/// so that flags given on the command line override them.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| Failure::Usage("--config needs a file".into()))?,
    };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    let extra = io::config_to_args(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    let names: Vec<String> = Cli::command().get_subcommands().map(|s| s.get_name().to_string()).collect();
    let sub = args
        .iter()
        .position(|a| names.contains(a))
        .ok_or_else(|| Failure::Usage("--config needs a subcommand".into()))?;
    let mut out = args[..=sub].to_vec();
    out.extend(extra);
    out.extend(args[sub + 1..].iter().cloned());
    Ok(out)
}

fn parse(args: Vec<String>) -> Result<Cli, clap::Error> {
    let cmd = Cli::command().args_override_self(true).mut_subcommands(|s| s.args_override_self(true));
    let matches: ArgMatches = cmd.try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(f) => return report(f),
    };
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return report(Failure::Runtime(e.into()));
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    match f {
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Failure::Verification => ExitCode::from(2),
        Failure::Runtime(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn seed_of(common: &Common) -> u64 {
    common.seed.unwrap_or_else(rand::random)
}

/// Data file plus its manifest, written under temporary names and renamed
/// into place only when both are complete.
struct Emit<'a> {
    out: &'a Path,
    subcommand: &'static str,
    seed: u64,
    started: Instant,
}

fn partial(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

impl Emit<'_> {
    fn write<A: Serialize>(&self, args: &A, body: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>) -> Result<(), Failure> {
        let manifest_path = io::manifest_path(self.out);
        let (tmp_data, tmp_manifest) = (partial(self.out), partial(&manifest_path));
        let result = (|| -> anyhow::Result<()> {
            let mut w = BufWriter::new(
                File::create(&tmp_data).with_context(|| format!("cannot create {}", tmp_data.display()))?,
            );
            body(&mut w)?;
            w.flush()?;
            drop(w);
            let config = match serde_json::to_value(args)? {
                serde_json::Value::Object(m) => m,
                _ => return Err(anyhow!("arguments did not serialize to an object")),
            };
            let manifest = RunManifest {
                config,
                seed: self.seed,
                subcommand: self.subcommand.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                duration_s: self.started.elapsed().as_secs_f64(),
            };
            fs::write(&tmp_manifest, manifest.to_json()? + "\n")?;
            fs::rename(&tmp_data, self.out)?;
            fs::rename(&tmp_manifest, &manifest_path)?;
            Ok(())
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp_data);
            let _ = fs::remove_file(&tmp_manifest);
            return Err(e.into());
        }
        Ok(())
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let started = Instant::now();
    match command {
        Command::Decay(a) => {
            let seed = seed_of(&a.common);
            let cfg = CircuitConfig::new(a.n, a.p, a.q, a.h, a.depth);
            cfg.validate()?;
            let record = experiments::run_entropy_decay(&cfg, seed, a.realizations)?;
            let emit = Emit { out: &a.out, subcommand: "decay", seed, started };
            emit.write(&a, |w| Ok(io::write_decay(w, &io::decay_rows(&record))?))
        }
        Command::Sweep(a) => {
            let seed = seed_of(&a.common);
            let spec = SweepSpec {
                n_list: a.n_list.clone(),
                p_list: a.p_list.clone(),
                q: a.q,
                h: a.h,
                depth: a.depth,
                t0: a.t0,
                fraction: a.fraction,
                realizations: a.realizations,
                seed,
            };
            let rows = experiments::run_sweep(&spec)?;
            let emit = Emit { out: &a.out, subcommand: "sweep", seed, started };
            emit.write(&a, |w| Ok(io::write_sweep(w, &rows)?))
        }
        Command::Dp(a) => {
            let seed = seed_of(&a.common);
            if a.n < 2 || a.n % 2 != 0 {
                return Err(Failure::Usage(format!("lattice size must be even and at least 2, got {}", a.n)));
            }
            if !(0.0..=1.0).contains(&a.p) || a.trajectories == 0 {
                return Err(Failure::Usage("p must lie in [0, 1] and trajectories must be positive".into()));
            }
            let rows: Vec<DpCsvRow> = semicirc::dp::run_dp(a.n, a.p, a.depth, a.trajectories, seed)
                .iter()
                .map(DpCsvRow::from)
                .collect();
            let emit = Emit { out: &a.out, subcommand: "dp", seed, started };
            emit.write(&a, |w| Ok(io::write_dp(w, &rows)?))
        }
        Command::Mi(a) => {
            let seed = seed_of(&a.common);
            let mut rows = Vec::new();
            for &n in &a.n_list {
                for &p in &a.p_list {
                    let cfg = CircuitConfig::new(n, p, a.q, a.h, 1);
                    rows.push(experiments::run_antipodal_mi(&cfg, a.z, seed, a.realizations)?);
                }
            }
            let emit = Emit { out: &a.out, subcommand: "mi", seed, started };
            emit.write(&a, |w| Ok(io::write_mi(w, &rows)?))
        }
        Command::Perturb(a) => {
            let seed = seed_of(&a.common);
            let var = match a.sweep {
                SweepVar::Q => SweepVariable::Q,
                SweepVar::H => SweepVariable::H,
            };
            let base = CircuitConfig::new(a.n, a.p, 0.0, 0.0, a.depth);
            let family = experiments::run_perturbation(&base, var, &a.values, seed, a.realizations)?;
            let rows: Vec<DecayRow> = family.iter().flat_map(|m| io::decay_rows(&m.record)).collect();
            for m in &family {
                say!(
                    "{}={}: saturation {:.4} +- {:.4}",
                    match a.sweep {
                        SweepVar::Q => "q",
                        SweepVar::H => "h",
                    },
                    m.value,
                    m.saturation,
                    m.saturation_stderr
                );
            }
            let emit = Emit { out: &a.out, subcommand: "perturb", seed, started };
            emit.write(&a, |w| Ok(io::write_decay(w, &rows)?))
        }
        Command::PhaseDiagram(a) => {
            let seed = seed_of(&a.common);
            if a.p_grid == 0 || a.q_grid == 0 {
                return Err(Failure::Usage("grid sizes must be positive".into()));
            }
            let depth = a.depth.unwrap_or_else(|| experiments::default_sweep_depth(a.n));
            let init = if a.bell { InitialState::ReferencedBell } else { InitialState::ReferencedClassical };
            let grid = |count: usize, max: f64| -> Vec<f64> {
                if count == 1 {
                    vec![0.0]
                } else {
                    (0..count).map(|i| max * i as f64 / (count - 1) as f64).collect()
                }
            };
            let mut rows = Vec::new();
            for p in grid(a.p_grid, a.p_max) {
                for q in grid(a.q_grid, a.q_max) {
                    let cfg = CircuitConfig::new(a.n, p, q, 0.0, depth).with_initial_state(init);
                    let r = experiments::run_io_mi_decay(&cfg, seed, a.realizations, a.threshold)?;
                    rows.push(PhaseRow::from(&r));
                }
            }
            let emit = Emit { out: &a.out, subcommand: "phase-diagram", seed, started };
            emit.write(&a, |w| Ok(io::write_phase(w, &rows)?))
        }
        Command::Collapse(a) => run_collapse(&a, started),
        Command::Verify(a) => {
            let options = VerifyOptions {
                seed: a.common.seed.unwrap_or(VerifyOptions::default().seed),
                schedules_per_point: a.schedules,
                ..VerifyOptions::default()
            };
            let report = verify::run_all(&options);
            for c in &report.checks {
                say!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
    }
}

fn parse_bounds(text: &str, spec: &mut CollapseSpec) -> Result<(), Failure> {
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Failure::Usage(format!("bound {part:?} is not name=lo:hi"));
        let (name, range) = part.split_once('=').ok_or_else(bad)?;
        let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let idx = spec.index_of(name.trim()).ok_or_else(|| {
            Failure::Usage(format!("unknown parameter {name:?}; expected one of {}", spec.names.join(", ")))
        })?;
        spec.bounds[idx] = (lo, hi);
    }
    spec.validate()?;
    Ok(())
}

#[derive(Serialize)]
struct CollapseReport {
    ansatz: Ansatz,
    names: Vec<String>,
    params: Vec<f64>,
    objective: f64,
    converged: bool,
    degenerate: bool,
    crossing: Option<scaling::CrossingFit>,
}

fn run_collapse(a: &CollapseArgs, started: Instant) -> Result<(), Failure> {
    let seed = a.common.seed.unwrap_or(0);
    let file = File::open(&a.input).with_context(|| format!("cannot open {}", a.input.display()))?;
    let options = CollapseOptions {
        restarts: a.restarts,
        seed,
        ..CollapseOptions::default()
    };
    let (mut spec, curves, crossing) = match a.ansatz {
        Ansatz::Tau => {
            let table = io::tau_points(&io::read_sweep(file)?);
            let crossing = scaling::fit_crossing(&table, &CrossingOptions { seed, ..CrossingOptions::default() })?;
            let spec = CollapseSpec::tau_ansatz([(1.0, 2.0), (0.5, 2.0), (0.05, 0.12)]);
            (spec, scaling::tau_curves(&table), Some(crossing))
        }
        Ansatz::Crossover => {
            let rows = io::read_decay(file)?;
            let spec = CollapseSpec::crossover_ansatz([(0.0, 1.0), (0.2, 1.5)]);
            (spec, io::crossover_curves(&rows), None)
        }
    };
    if let Some(b) = &a.bounds {
        parse_bounds(b, &mut spec)?;
    }
    let fit = scaling::fit_collapse(&curves, &spec, &options)?;
    if let Some(c) = &crossing {
        say!(
            "crossing: pc = {:.5} +- {:.5}, z = {:.4} +- {:.4}",
            c.p_c,
            c.covariance[0][0].sqrt(),
            c.z,
            c.covariance[1][1].sqrt()
        );
    }
    let params: Vec<String> = spec.names.iter().zip(&fit.params).map(|(n, v)| format!("{n} = {v:.5}")).collect();
    say!("collapse: {} (objective {:.4e}{})", params.join(", "), fit.objective, if fit.converged { "" } else { ", not converged" });
    if let Some(out) = &a.out {
        let report = CollapseReport {
            ansatz: a.ansatz,
            names: spec.names.clone(),
            params: fit.params.clone(),
            objective: fit.objective,
            converged: fit.converged,
            degenerate: fit.degenerate,
            crossing,
        };
        let emit = Emit { out, subcommand: "collapse", seed, started };
        emit.write(a, |w| {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    Ok(())
}
