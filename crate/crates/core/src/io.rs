//! CSV tables, run manifests and flat configuration files.
//!
//! Column orders are fixed and shared with downstream plotting:
//!
//! | table  | columns |
//! |--------|---------|
//! | decay  | `t,s_mean,s_stderr,n,p,q,h,realizations,seed` |
//! | sweep  | `n,p,tau_mean,tau_stderr,censored_fraction,realizations,seed` |
//! | mi     | `n,p,q,t_eval,mi_mean,mi_stderr` |
//! | phase  | `n,p,q,timescale_mean,timescale_stderr,capped_fraction` |
//! | dp     | `t,density_mean,survival_prob,qbar_estimate,qbar_stderr` |
//!
//! Censored or undefined values are written as `NaN`.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentRecord, IoDecayResult, MiResult, SweepRow};
use crate::scaling::{CollapseCurve, TauPoint};

pub const DECAY_COLUMNS: [&str; 9] = ["t", "s_mean", "s_stderr", "n", "p", "q", "h", "realizations", "seed"];
pub const SWEEP_COLUMNS: [&str; 7] = ["n", "p", "tau_mean", "tau_stderr", "censored_fraction", "realizations", "seed"];
pub const MI_COLUMNS: [&str; 6] = ["n", "p", "q", "t_eval", "mi_mean", "mi_stderr"];
pub const PHASE_COLUMNS: [&str; 6] = ["n", "p", "q", "timescale_mean", "timescale_stderr", "capped_fraction"];
pub const DP_COLUMNS: [&str; 5] = ["t", "density_mean", "survival_prob", "qbar_estimate", "qbar_stderr"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: usize,
    pub s_mean: f64,
    pub s_stderr: f64,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub h: f64,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub timescale_mean: f64,
    pub timescale_stderr: f64,
    pub capped_fraction: f64,
}

impl From<&IoDecayResult> for PhaseRow {
    fn from(r: &IoDecayResult) -> Self {
        Self {
            n: r.n,
            p: r.p,
            q: r.q,
            timescale_mean: r.timescale_mean,
            timescale_stderr: r.timescale_stderr,
            capped_fraction: r.capped_fraction,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpCsvRow {
    pub t: usize,
    pub density_mean: f64,
    pub survival_prob: f64,
    pub qbar_estimate: f64,
    pub qbar_stderr: f64,
}

impl From<&crate::dp::DpRow> for DpCsvRow {
    fn from(r: &crate::dp::DpRow) -> Self {
        Self {
            t: r.t,
            density_mean: r.density_mean,
            survival_prob: r.survival_prob,
            qbar_estimate: r.qbar_estimate,
            qbar_stderr: r.qbar_stderr,
        }
    }
}

/// One decay-table row per time step of the record.
pub fn decay_rows(record: &ExperimentRecord) -> Vec<DecayRow> {
    record
        .series
        .iter()
        .map(|s| DecayRow {
            t: s.t,
            s_mean: s.mean,
            s_stderr: s.stderr,
            n: record.config.n,
            p: record.config.p,
            q: record.config.q,
            h: record.config.h,
            realizations: record.n_realizations,
            seed: record.master_seed,
        })
        .collect()
}

pub fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T], columns: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(columns)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table whose header must contain every column in `columns`.
pub fn read_rows<R: Read, T: DeserializeOwned>(reader: R, columns: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    if let Some(missing) = columns.iter().find(|c| !header.iter().any(|h| h == **c)) {
        return Err(Error::Parse(format!("missing column {missing:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_decay<W: Write>(writer: W, rows: &[DecayRow]) -> Result<()> {
    write_rows(writer, rows, &DECAY_COLUMNS)
}

pub fn read_decay<R: Read>(reader: R) -> Result<Vec<DecayRow>> {
    read_rows(reader, &DECAY_COLUMNS)
}

pub fn write_sweep<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    write_rows(writer, rows, &SWEEP_COLUMNS)
}

pub fn read_sweep<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    read_rows(reader, &SWEEP_COLUMNS)
}

pub fn write_mi<W: Write>(writer: W, rows: &[MiResult]) -> Result<()> {
    write_rows(writer, rows, &MI_COLUMNS)
}

pub fn write_phase<W: Write>(writer: W, rows: &[PhaseRow]) -> Result<()> {
    write_rows(writer, rows, &PHASE_COLUMNS)
}

pub fn write_dp<W: Write>(writer: W, rows: &[DpCsvRow]) -> Result<()> {
    write_rows(writer, rows, &DP_COLUMNS)
}

pub fn tau_points(rows: &[SweepRow]) -> Vec<TauPoint> {
    rows.iter()
        .map(|r| TauPoint {
            n: r.n,
            p: r.p,
            tau: r.tau_mean,
            tau_stderr: r.tau_stderr,
        })
        .collect()
}

/// Groups a decay table into one collapse curve per non-zero value of the
/// swept rate (`h` if only `h` varies, otherwise `q`); `t = 0` is dropped.
pub fn crossover_curves(rows: &[DecayRow]) -> Vec<CollapseCurve> {
    let sweeps_h = rows.iter().any(|r| r.h > 0.0) && rows.iter().all(|r| r.q == 0.0);
    let mut curves: Vec<CollapseCurve> = Vec::new();
    for r in rows {
        let scale = if sweeps_h { r.h } else { r.q };
        if scale <= 0.0 || r.t == 0 {
            continue;
        }
        match curves.iter_mut().find(|c| c.scale == scale) {
            Some(c) => {
                c.x.push(r.t as f64);
                c.y.push(r.s_mean);
                c.err.push(r.s_stderr);
            }
            None => curves.push(CollapseCurve {
                scale,
                x: vec![r.t as f64],
                y: vec![r.s_mean],
                err: vec![r.s_stderr],
            }),
        }
    }
    curves
}

/// Provenance of one CLI invocation. `config` maps flag names to the values
/// that were in effect, so the run can be repeated with
/// `--config <manifest>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: serde_json::Map<String, serde_json::Value>,
    pub seed: u64,
    pub subcommand: String,
    pub version: String,
    pub duration_s: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Manifest written next to a data file: `sweep.csv` -> `sweep.manifest.json`.
pub fn manifest_path(out: &std::path::Path) -> std::path::PathBuf {
    out.with_extension("manifest.json")
}

fn scalar_to_arg(key: &str, v: &serde_json::Value) -> Result<Option<String>> {
    use serde_json::Value;
    Ok(match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(_) | Value::Null => None,
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|i| match i {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(Error::Parse(format!("key {key:?}: arrays may hold only numbers and strings"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Some(parts.join(","))
        }
        Value::Object(_) => return Err(Error::Parse(format!("key {key:?}: nested tables are not supported"))),
    })
}

fn map_to_args(map: &serde_json::Map<String, serde_json::Value>) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (key, value) in map {
        if key.is_empty() || key.starts_with('-') || key.chars().any(char::is_whitespace) {
            return Err(Error::Parse(format!("invalid key {key:?}")));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            serde_json::Value::Bool(true) => args.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            other => {
                if let Some(v) = scalar_to_arg(key, other)? {
                    args.push(flag);
                    args.push(v);
                }
            }
        }
    }
    Ok(args)
}

/// Turns a configuration file into command-line flags.
///
/// Accepts flat TOML (`n = 40`, `p_list = [0.07, 0.08]`, `bell = true`) or
/// a run manifest, whose `config` and `seed` are replayed. Keys map to
/// flags with `_` replaced by `-`; arrays become comma-separated values.
pub fn config_to_args(text: &str) -> Result<Vec<String>> {
    if text.trim_start().starts_with('{') {
        let manifest = RunManifest::parse(text)?;
        let mut map = manifest.config.clone();
        map.insert("seed".into(), manifest.seed.into());
        return map_to_args(&map);
    }
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let json = serde_json::to_value(table)?;
    match json {
        serde_json::Value::Object(map) => map_to_args(&map),
        _ => Err(Error::Parse("configuration is not a table".into())),
    }
}
