//! Decay-time extraction, crossing analysis and data collapse.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{stream, Role};

/// Directed-percolation reference exponents, for comparison only.
pub const DP_Z: f64 = 1.58;
pub const DP_NU: f64 = 1.09;
pub const DP_GAMMA: f64 = 0.75;
pub const DP_ETA: f64 = 2.34;

/// Reference values for the circuit model at the encoding transition.
pub const REFERENCE_P_C: f64 = 0.081;
pub const REFERENCE_Z: f64 = 1.51;
pub const REFERENCE_NU: f64 = 1.1;

/// Default decay fraction for [`extract_tau`].
pub const DEFAULT_FRACTION: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub h: f64,
}

impl DecayCurve {
    /// Values sampled at `t = 0, 1, 2, ...` with no error bars.
    pub fn from_values(values: Vec<f64>, n: usize) -> Self {
        Self {
            times: (0..values.len()).map(|t| t as f64).collect(),
            std_errors: vec![0.0; values.len()],
            values,
            n,
            p: 0.0,
            q: 0.0,
            h: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() || self.times.len() != self.std_errors.len() {
            return Err(Error::Dimension("curve columns differ in length".into()));
        }
        if self.times.is_empty() {
            return Err(Error::Degenerate("empty curve".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("times are not strictly increasing".into()));
        }
        if self.values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig("negative or NaN curve value".into()));
        }
        Ok(())
    }

    /// Linear interpolation inside the sampled range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        interpolate(&self.times, &self.values, t)
    }
}

/// Linear interpolation on sorted `xs`; `None` outside `[xs[0], xs[last]]`.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let (first, last) = (*xs.first()?, *xs.last()?);
    if x < first || x > last {
        return None;
    }
    let i = xs.partition_point(|&v| v <= x);
    if i == 0 {
        return Some(ys[0]);
    }
    if i == xs.len() {
        return Some(ys[xs.len() - 1]);
    }
    let (x0, x1) = (xs[i - 1], xs[i]);
    if x1 == x0 {
        return Some(ys[i - 1]);
    }
    Some(ys[i - 1] + (ys[i] - ys[i - 1]) * (x - x0) / (x1 - x0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau {
    /// Time after `t0` at which the curve first reaches the target.
    Time(f64),
    Censored,
}

impl Tau {
    pub fn time(&self) -> Option<f64> {
        match self {
            Tau::Time(t) => Some(*t),
            Tau::Censored => None,
        }
    }
}

/// Time, measured from `t0`, for the curve to fall to `fraction` of its
/// value at `t0`, linearly interpolated between samples.
pub fn extract_tau(curve: &DecayCurve, t0: f64, fraction: f64) -> Result<Tau> {
    curve.validate()?;
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidConfig(format!("fraction {fraction} is not in [0, 1)")));
    }
    let v0 = curve.value_at(t0).ok_or_else(|| {
        Error::InvalidConfig(format!("t0 = {t0} is outside the sampled times"))
    })?;
    if v0 <= 0.0 {
        return Ok(Tau::Censored);
    }
    let target = fraction * v0;
    let start = curve.times.partition_point(|&t| t <= t0);
    let (mut t_prev, mut v_prev) = (t0, v0);
    for i in start..curve.times.len() {
        let (t, v) = (curve.times[i], curve.values[i]);
        if v <= target {
            let t_hit = t_prev + (v_prev - target) / (v_prev - v) * (t - t_prev);
            return Ok(Tau::Time(t_hit - t0));
        }
        t_prev = t;
        v_prev = v;
    }
    Ok(Tau::Censored)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauPoint {
    pub n: usize,
    pub p: f64,
    /// NaN for censored points.
    pub tau: f64,
    pub tau_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub n_small: usize,
    pub n_large: usize,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingFit {
    pub p_c: f64,
    pub z: f64,
    /// Bootstrap covariance of `(p_c, z)`; NaN without error bars.
    pub covariance: [[f64; 2]; 2],
    pub crossings: Vec<Crossing>,
    /// Spread (variance) of the pairwise crossings at the optimum.
    pub spread: f64,
    pub bootstrap_samples: usize,
}

#[derive(Clone, Debug)]
pub struct CrossingOptions {
    pub z_range: (f64, f64),
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self {
            z_range: (0.5, 3.0),
            bootstrap: 100,
            seed: 0,
        }
    }
}

/// Curves `log tau(p)` per system size, censored points dropped, p sorted.
fn curves_by_n(table: &[TauPoint]) -> Result<Vec<(usize, Vec<f64>, Vec<f64>)>> {
    let mut sizes: Vec<usize> = table.iter().map(|t| t.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::Degenerate(format!(
            "crossing analysis needs at least 3 distinct system sizes, got {}",
            sizes.len()
        )));
    }
    sizes
        .into_iter()
        .map(|n| {
            let mut pts: Vec<(f64, f64)> = table
                .iter()
                .filter(|t| t.n == n && t.tau.is_finite() && t.tau > 0.0)
                .map(|t| (t.p, t.tau.ln()))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pts.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Degenerate(format!("repeated p value for N = {n}")));
            }
            if pts.len() < 2 {
                return Err(Error::Degenerate(format!("fewer than 2 uncensored points for N = {n}")));
            }
            let (ps, ls) = pts.into_iter().unzip();
            Ok((n, ps, ls))
        })
        .collect()
}

/// First crossing of `log(tau/N^z)` for a pair of sizes where the smaller
/// system goes from below to above the larger one as `p` increases.
fn pair_crossing(a: &(usize, Vec<f64>, Vec<f64>), b: &(usize, Vec<f64>, Vec<f64>), z: f64) -> Option<f64> {
    let lo = a.1[0].max(b.1[0]);
    let hi = a.1[a.1.len() - 1].min(b.1[b.1.len() - 1]);
    if !(lo < hi) {
        return None;
    }
    let mut grid: Vec<f64> = a.1.iter().chain(&b.1).copied().filter(|&p| p >= lo && p <= hi).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let offset = z * ((b.0 as f64).ln() - (a.0 as f64).ln());
    let diff = |p: f64| interpolate(&a.1, &a.2, p).unwrap() - interpolate(&b.1, &b.2, p).unwrap() + offset;
    let mut prev = (grid[0], diff(grid[0]));
    if prev.1 == 0.0 {
        return Some(prev.0);
    }
    for &p in &grid[1..] {
        let d = diff(p);
        if prev.1 < 0.0 && d >= 0.0 {
            return Some(prev.0 + (0.0 - prev.1) / (d - prev.1) * (p - prev.0));
        }
        prev = (p, d);
    }
    None
}

fn crossings_at(curves: &[(usize, Vec<f64>, Vec<f64>)], z: f64) -> std::result::Result<Vec<Crossing>, (usize, usize)> {
    let mut out = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let p = pair_crossing(&curves[i], &curves[j], z).ok_or((curves[i].0, curves[j].0))?;
            out.push(Crossing {
                n_small: curves[i].0,
                n_large: curves[j].0,
                p,
            });
        }
    }
    Ok(out)
}

fn spread(cs: &[Crossing]) -> f64 {
    let m = cs.len() as f64;
    let mean = cs.iter().map(|c| c.p).sum::<f64>() / m;
    cs.iter().map(|c| (c.p - mean).powi(2)).sum::<f64>() / m
}

fn fit_crossing_point(curves: &[(usize, Vec<f64>, Vec<f64>)], z_range: (f64, f64)) -> Result<(f64, Vec<Crossing>)> {
    let objective = |z: f64| crossings_at(curves, z).map(|c| spread(&c)).unwrap_or(f64::INFINITY);
    let steps = 500;
    let h = (z_range.1 - z_range.0) / steps as f64;
    let mut best = (f64::INFINITY, z_range.0);
    for k in 0..=steps {
        let z = z_range.0 + h * k as f64;
        let v = objective(z);
        if v < best.0 {
            best = (v, z);
        }
    }
    if !best.0.is_finite() {
        // report a pair that never crosses at the central exponent
        let mid = 0.5 * (z_range.0 + z_range.1);
        let pair = crossings_at(curves, mid).err().unwrap_or((curves[0].0, curves[1].0));
        return Err(Error::NoCrossing(pair.0, pair.1));
    }
    let z = golden_section(objective, (best.1 - h).max(z_range.0), (best.1 + h).min(z_range.1), 1e-9);
    let z = if objective(z) <= best.0 { z } else { best.1 };
    let cs = crossings_at(curves, z).map_err(|(a, b)| Error::NoCrossing(a, b))?;
    Ok((z, cs))
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Finds the exponent `z` that makes the pairwise crossings of
/// `tau(p)/N^z` coincide and reports their mean as `p_c`. Uncertainty is a
/// parametric bootstrap over the reported standard errors of `tau`.
pub fn fit_crossing(table: &[TauPoint], options: &CrossingOptions) -> Result<CrossingFit> {
    let curves = curves_by_n(table)?;
    let (z, crossings) = fit_crossing_point(&curves, options.z_range)?;
    let p_c = crossings.iter().map(|c| c.p).sum::<f64>() / crossings.len() as f64;

    let has_errors = table.iter().any(|t| t.tau_stderr.is_finite() && t.tau_stderr > 0.0);
    let mut samples = Vec::new();
    if has_errors && options.bootstrap > 0 {
        let mut rng = stream(options.seed, 0, Role::Bootstrap);
        for _ in 0..options.bootstrap {
            let resampled: Vec<TauPoint> = table
                .iter()
                .map(|t| {
                    let rel = if t.tau > 0.0 && t.tau_stderr.is_finite() { t.tau_stderr / t.tau } else { 0.0 };
                    TauPoint {
                        tau: t.tau * (rel * standard_normal(&mut rng)).exp(),
                        ..*t
                    }
                })
                .collect();
            let Ok(curves_b) = curves_by_n(&resampled) else { continue };
            if let Ok((zb, cb)) = fit_crossing_point(&curves_b, options.z_range) {
                samples.push((cb.iter().map(|c| c.p).sum::<f64>() / cb.len() as f64, zb));
            }
        }
    }
    let covariance = if samples.len() >= 2 {
        let m = samples.len() as f64;
        let mp = samples.iter().map(|s| s.0).sum::<f64>() / m;
        let mz = samples.iter().map(|s| s.1).sum::<f64>() / m;
        let c = |f: &dyn Fn(&(f64, f64)) -> f64| samples.iter().map(f).sum::<f64>() / (m - 1.0);
        let cpp = c(&|s| (s.0 - mp).powi(2));
        let czz = c(&|s| (s.1 - mz).powi(2));
        let cpz = c(&|s| (s.0 - mp) * (s.1 - mz));
        [[cpp, cpz], [cpz, czz]]
    } else {
        [[f64::NAN; 2]; 2]
    };
    Ok(CrossingFit {
        p_c,
        z,
        covariance,
        spread: spread(&crossings),
        crossings,
        bootstrap_samples: samples.len(),
    })
}

/// A power of a curve's scale variable, built from the fit parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Const(f64),
    Param(usize),
    NegParam(usize),
    Reciprocal(usize),
}

impl Exponent {
    fn eval(&self, params: &[f64]) -> f64 {
        match *self {
            Exponent::Const(c) => c,
            Exponent::Param(i) => params[i],
            Exponent::NegParam(i) => -params[i],
            Exponent::Reciprocal(i) => 1.0 / params[i],
        }
    }
}

/// `v' = (v - shift) * s^exponent`, compared on a log scale if `log`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisTransform {
    pub shift: Option<usize>,
    pub exponent: Exponent,
    pub log: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseSpec {
    pub names: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    pub x: AxisTransform,
    pub y: AxisTransform,
}

impl CollapseSpec {
    /// `tau / N^z` against `(p - p_c) N^(1/nu)`; params `(z, nu, pc)`.
    pub fn tau_ansatz(bounds: [(f64, f64); 3]) -> Self {
        Self {
            names: vec!["z".into(), "nu".into(), "pc".into()],
            bounds: bounds.to_vec(),
            x: AxisTransform {
                shift: Some(2),
                exponent: Exponent::Reciprocal(1),
                log: false,
            },
            y: AxisTransform {
                shift: None,
                exponent: Exponent::NegParam(0),
                log: true,
            },
        }
    }

    /// `S / q^a` against `t q^b`; params `(a, b)` = `(gamma/eta, z/eta)`.
    pub fn crossover_ansatz(bounds: [(f64, f64); 2]) -> Self {
        Self {
            names: vec!["gamma_over_eta".into(), "z_over_eta".into()],
            bounds: bounds.to_vec(),
            x: AxisTransform {
                shift: None,
                exponent: Exponent::Param(1),
                log: true,
            },
            y: AxisTransform {
                shift: None,
                exponent: Exponent::NegParam(0),
                log: true,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn in_bounds(&self, params: &[f64]) -> bool {
        params.len() == self.dim() && params.iter().zip(&self.bounds).all(|(v, (lo, hi))| v >= lo && v <= hi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.names.len() != self.bounds.len() || self.names.is_empty() {
            return Err(Error::InvalidConfig("one bound per parameter required".into()));
        }
        if let Some((lo, hi)) = self.bounds.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidConfig(format!("empty bound [{lo}, {hi}]")));
        }
        let check = |e: &Exponent| match *e {
            Exponent::Param(i) | Exponent::NegParam(i) | Exponent::Reciprocal(i) => i < self.dim(),
            Exponent::Const(_) => true,
        };
        let shifts_ok = [self.x.shift, self.y.shift].iter().flatten().all(|&i| i < self.dim());
        if !check(&self.x.exponent) || !check(&self.y.exponent) || !shifts_ok {
            return Err(Error::InvalidConfig("transform refers to a missing parameter".into()));
        }
        Ok(())
    }
}

/// One curve of a collapse family; `scale` is the variable the exponents
/// act on (system size or rate).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseCurve {
    pub scale: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub err: Vec<f64>,
}

struct Rescaled {
    x: Vec<f64>,
    y: Vec<f64>,
    err: Vec<f64>,
}

fn rescale(curve: &CollapseCurve, spec: &CollapseSpec, params: &[f64]) -> Rescaled {
    let sx = curve.scale.powf(spec.x.exponent.eval(params));
    let sy = curve.scale.powf(spec.y.exponent.eval(params));
    let shift = |t: &AxisTransform| t.shift.map_or(0.0, |i| params[i]);
    let (dx, dy) = (shift(&spec.x), shift(&spec.y));
    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(curve.x.len());
    for ((&x, &y), &e) in curve.x.iter().zip(&curve.y).zip(&curve.err) {
        let mut xr = (x - dx) * sx;
        let mut yr = (y - dy) * sy;
        let mut er = e.abs() * sy.abs();
        if spec.x.log {
            if !(xr > 0.0) {
                continue;
            }
            xr = xr.ln();
        }
        if spec.y.log {
            if !(yr > 0.0) {
                continue;
            }
            er /= yr;
            yr = yr.ln();
        }
        if xr.is_finite() && yr.is_finite() {
            pts.push((xr, yr, if er.is_finite() { er } else { 0.0 }));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rescaled {
        x: pts.iter().map(|p| p.0).collect(),
        y: pts.iter().map(|p| p.1).collect(),
        err: pts.iter().map(|p| p.2).collect(),
    }
}

/// Weighted mean squared residual of every rescaled point against the
/// linear interpolation of each other curve that brackets it.
pub fn collapse_objective(curves: &[CollapseCurve], spec: &CollapseSpec, params: &[f64]) -> Result<f64> {
    spec.validate()?;
    if params.len() != spec.dim() {
        return Err(Error::Dimension(format!("{} parameters for a {}-parameter ansatz", params.len(), spec.dim())));
    }
    if curves.len() < 2 {
        return Err(Error::Degenerate("collapse needs at least 2 curves".into()));
    }
    for c in curves {
        if c.x.len() != c.y.len() || c.x.len() != c.err.len() {
            return Err(Error::Dimension("curve columns differ in length".into()));
        }
    }
    let rescaled: Vec<Rescaled> = curves.iter().map(|c| rescale(c, spec, params)).collect();
    let use_weights = rescaled.iter().all(|r| r.err.iter().all(|&e| e > 0.0));
    let (mut num, mut den) = (0.0, 0.0);
    for (i, a) in rescaled.iter().enumerate() {
        for (k, b) in rescaled.iter().enumerate() {
            if i == k || b.x.len() < 2 {
                continue;
            }
            for j in 0..a.x.len() {
                let Some(yb) = interpolate(&b.x, &b.y, a.x[j]) else { continue };
                let w = if use_weights {
                    let eb = interpolate(&b.x, &b.err, a.x[j]).unwrap_or(0.0);
                    1.0 / (a.err[j].powi(2) + eb.powi(2))
                } else {
                    1.0
                };
                num += w * (a.y[j] - yb).powi(2);
                den += w;
            }
        }
    }
    if den == 0.0 {
        return Err(Error::NoOverlap);
    }
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseFit {
    pub params: Vec<f64>,
    pub objective: f64,
    /// False when no restart improved on the centre of the bounds.
    pub converged: bool,
    /// Fewer than two curves: every parameter collapses trivially.
    pub degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct CollapseOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_evaluations: usize,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            max_evaluations: 4000,
        }
    }
}

/// Bounded Nelder-Mead over the box; out-of-box points score infinity.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64], bounds: &[(f64, f64)], max_evals: usize) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut v = start.to_vec();
        let width = bounds[i].1 - bounds[i].0;
        let step = 0.1 * width;
        v[i] = if v[i] + step <= bounds[i].1 { v[i] + step } else { v[i] - step };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = simplex.len();
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let size = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .zip(bounds)
                    .map(|((a, b), (lo, hi))| ((a - b) / (hi - lo)).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < 1e-9 || (values[dim] - values[0]).abs() <= 1e-14 * values[0].abs().max(1e-300) {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[dim]).map(|(c, w)| c + t * (w - c)).collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let contracted = if fr < values[dim] { along(-0.5) } else { along(0.5) };
            let fc = f(&contracted);
            evals += 1;
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for i in 1..=dim {
                    simplex[i] = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
                evals += dim;
            }
        }
    }
    let best = (0..=dim).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best].clone(), values[best])
}

/// Minimizes [`collapse_objective`] from the centre of the bounds and from
/// `restarts` seeded random starts; ties go to the earlier restart.
pub fn fit_collapse(curves: &[CollapseCurve], spec: &CollapseSpec, options: &CollapseOptions) -> Result<CollapseFit> {
    spec.validate()?;
    let center = spec.center();
    if curves.len() < 2 {
        return Ok(CollapseFit {
            params: center,
            objective: 0.0,
            converged: true,
            degenerate: true,
        });
    }
    let f = |p: &[f64]| {
        if !spec.in_bounds(p) {
            return f64::INFINITY;
        }
        collapse_objective(curves, spec, p).unwrap_or(f64::INFINITY)
    };
    let center_value = f(&center);
    let mut rng = stream(options.seed, 0, Role::Restart);
    let mut starts = vec![center.clone()];
    for _ in 0..options.restarts {
        starts.push(spec.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect());
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in &starts {
        let (p, v) = nelder_mead(&f, s, &spec.bounds, options.max_evaluations);
        // polish from the result to escape premature simplex collapse
        let (p, v) = {
            let (p2, v2) = nelder_mead(&f, &p, &spec.bounds, options.max_evaluations);
            if v2 < v { (p2, v2) } else { (p, v) }
        };
        if best.as_ref().map_or(true, |b| v < b.1) {
            best = Some((p, v));
        }
    }
    let (params, objective) = best.expect("at least one start");
    if !objective.is_finite() {
        return Err(Error::NoOverlap);
    }
    Ok(CollapseFit {
        converged: objective < center_value || center_value == 0.0,
        params,
        objective,
        degenerate: false,
    })
}

/// Collapse curves for the decay-time ansatz: one curve per system size,
/// censored points dropped.
pub fn tau_curves(table: &[TauPoint]) -> Vec<CollapseCurve> {
    let mut sizes: Vec<usize> = table.iter().map(|t| t.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let mut pts: Vec<&TauPoint> = table.iter().filter(|t| t.n == n && t.tau.is_finite()).collect();
            pts.sort_by(|a, b| a.p.total_cmp(&b.p));
            CollapseCurve {
                scale: n as f64,
                x: pts.iter().map(|t| t.p).collect(),
                y: pts.iter().map(|t| t.tau).collect(),
                err: pts.iter().map(|t| if t.tau_stderr.is_finite() { t.tau_stderr } else { 0.0 }).collect(),
            }
        })
        .collect()
}
