//! One run per value of a single parameter, plus an index CSV.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dce_kerr::analytic::{classify_regime, RegimeKind};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::{execute, fmt_g15, write_outputs, RunResult};

pub const INDEX_HEADER: &str = "parameter,value,K,method,regime,peak_n_mean,first_zero_t,file";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Kerr,
    Epsilon,
    Omega0,
    Dim,
    Dt,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Kerr => "kerr",
            SweepParam::Epsilon => "epsilon",
            SweepParam::Omega0 => "omega0",
            SweepParam::Dim => "dim",
            SweepParam::Dt => "dt",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(&self, base: &RunConfig, value: f64) -> Result<RunConfig, CliError> {
        let mut c = base.clone();
        match self {
            SweepParam::Kerr => c.kerr = vec![value],
            SweepParam::Epsilon => c.epsilon = value,
            SweepParam::Omega0 => c.omega0 = value,
            SweepParam::Dt => c.dt = value,
            SweepParam::Dim => {
                if !(value >= 2.0 && value.fract() == 0.0) {
                    return Err(CliError::config("dim", format!("{value} is not an integer >= 2")));
                }
                c.dim = Some(value as usize)
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SweepParam::Kerr,
            SweepParam::Epsilon,
            SweepParam::Omega0,
            SweepParam::Dim,
            SweepParam::Dt,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or_else(|| format!("unknown sweep parameter '{s}' (kerr, epsilon, omega0, dim, dt)"))
    }
}

/// First minimum of an oscillating `<n>` curve: the lowest sample between the
/// first upward crossing of half the peak and the next one (or the end).
pub fn first_zero_time(times: &[f64], values: &[f64]) -> Option<f64> {
    let peak = values.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return None;
    }
    let half = 0.5 * peak;
    let up = |from: usize| (from.max(1)..values.len()).find(|&i| values[i - 1] < half && values[i] >= half);
    let first_up = up(0)?;
    let first_down = (first_up..values.len()).find(|&i| values[i] < half)?;
    let end = up(first_down).unwrap_or(values.len());
    (first_down..end)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .map(|i| times[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub value: f64,
    pub kerr: f64,
    pub method: String,
    pub regime: RegimeKind,
    pub peak: f64,
    pub first_zero: Option<f64>,
    pub file: String,
}

#[derive(Debug)]
pub struct SweepResult {
    pub param: SweepParam,
    pub runs: Vec<RunResult>,
    pub index: Vec<IndexRow>,
}

fn run_file(param: SweepParam, value: f64) -> String {
    format!("{param}_{}.csv", fmt_g15(value))
}

/// Runs `base` once per value, at most `workers` at a time, writing one CSV
/// and sidecar per value and `index.csv` into `dir`.
pub fn sweep(
    base: &RunConfig,
    param: SweepParam,
    values: &[f64],
    dir: &Path,
    workers: usize,
) -> Result<SweepResult, CliError> {
    if values.is_empty() {
        return Err(CliError::config("values", "at least one value is required"));
    }
    if base.preset.is_some() {
        return Err(CliError::config("preset", "sweeps start from explicit parameters"));
    }
    let configs = values
        .iter()
        .map(|&v| {
            let mut c = param.apply(base, v)?;
            c.output = dir.join(run_file(param, v));
            Ok(c)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::config("workers", e.to_string()))?;
    let runs = pool.install(|| {
        configs
            .par_iter()
            .map(|c| {
                let r = execute(c)?;
                write_outputs(&r)?;
                Ok(r)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let mut index = Vec::new();
    for (&value, run) in values.iter().zip(&runs) {
        for s in &run.series {
            let p = run.config.params(s.kerr)?;
            let regime = classify_regime(&p).kind;
            let first_zero = match regime {
                RegimeKind::Trigonometric => first_zero_time(&s.n_mean.times, &s.n_mean.values),
                _ => None,
            };
            index.push(IndexRow {
                value,
                kerr: s.kerr,
                method: s.method.to_string(),
                regime,
                peak: s.n_mean.max_value(),
                first_zero,
                file: run_file(param, value),
            });
        }
    }
    let path = index_path(dir);
    let mut text = format!("{INDEX_HEADER}\n");
    for r in &index {
        text.push_str(&format!(
            "{param},{},{},{},{},{},{},{}\n",
            fmt_g15(r.value),
            fmt_g15(r.kerr),
            r.method,
            r.regime.as_str(),
            fmt_g15(r.peak),
            r.first_zero.map(fmt_g15).unwrap_or_default(),
            r.file
        ));
    }
    fs::File::create(&path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| CliError::io(&path, e))?;
    Ok(SweepResult {
        param,
        runs,
        index,
    })
}

pub fn index_path(dir: &Path) -> PathBuf {
    dir.join("index.csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zero_of_sine_square() {
        let t: Vec<f64> = (0..=600).map(|k| k as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|&t| (0.2 * t).sin().powi(2)).collect();
        let z = first_zero_time(&t, &v).unwrap();
        assert!((z - std::f64::consts::PI / 0.2).abs() <= 0.1);
        assert_eq!(first_zero_time(&t, &vec![0.0; t.len()]), None);
        let grow: Vec<f64> = t.iter().map(|&t| t * t).collect();
        assert_eq!(first_zero_time(&t, &grow), None);
    }

    #[test]
    fn params_parse_and_apply() {
        let base = RunConfig::default();
        assert_eq!("dt".parse::<SweepParam>().unwrap(), SweepParam::Dt);
        assert!("foo".parse::<SweepParam>().is_err());
        assert_eq!(SweepParam::Dim.apply(&base, 64.0).unwrap().dim, Some(64));
        assert!(SweepParam::Dim.apply(&base, 64.5).is_err());
        assert!(SweepParam::Epsilon.apply(&base, 2.0).is_err());
        assert_eq!(SweepParam::Kerr.apply(&base, 0.3).unwrap().kerr, vec![0.3]);
    }
}
