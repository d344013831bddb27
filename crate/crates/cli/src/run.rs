//! Executing a [`RunConfig`] and writing its CSV and metadata sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use dce_kerr::analytic::vacuum_photon_number;
use dce_kerr::propagator::{
    corotating_number_trace, default_dim, peak_photon_estimate, stepped_su11_number_trace,
    NumberTrace, TimeSeries, TAIL_EXPONENT,
};
use dce_kerr::{FockVector, ModelParams};
use rayon::prelude::*;

use crate::config::{Method, RunConfig};
use crate::error::CliError;

pub const CSV_HEADER: &str = "t,method,K,epsilon,omega0,dim,dt,n_mean,norm";

/// `<n>` of one method at one Kerr value.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSeries {
    pub method: Method,
    pub kerr: f64,
    pub dim: usize,
    pub n_mean: TimeSeries,
    /// Absent for the closed form.
    pub norm: Option<TimeSeries>,
}

/// Truncation used for one Kerr value and the tail bound behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub kerr: f64,
    pub dim: usize,
    /// Peak closed-form `<n>` over the window.
    pub peak_estimate: f64,
    /// Squeezed-vacuum population bound `tanh^dim r` at that peak.
    pub tail_bound: f64,
    /// Whether `dim` came from the default rule.
    pub automatic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: RunConfig,
    pub series: Vec<MethodSeries>,
    pub truncations: Vec<Truncation>,
    pub wall_time: f64,
}

impl RunResult {
    pub fn get(&self, method: Method, kerr: f64) -> Option<&MethodSeries> {
        self.series
            .iter()
            .find(|s| s.method == method && s.kerr == kerr)
    }
}

fn truncation(config: &RunConfig, kerr: f64) -> Result<Truncation, CliError> {
    let p = config.params(kerr)?;
    let peak = peak_photon_estimate(&p, config.t_max);
    let dim = config.dim.unwrap_or_else(|| default_dim(&p, config.t_max));
    let tail_bound = if peak > 0.0 {
        (0.5 * dim as f64 * (peak / (peak + 1.0)).ln()).exp()
    } else {
        0.0
    };
    Ok(Truncation {
        kerr,
        dim,
        peak_estimate: peak,
        tail_bound,
        automatic: config.dim.is_none(),
    })
}

/// Evolves the vacuum with one method.
pub fn run_method(
    method: Method,
    p: &ModelParams,
    config: &RunConfig,
) -> Result<MethodSeries, CliError> {
    let grid = config.grid()?;
    let name = method.as_str();
    let vacuum = FockVector::vacuum(p.dim()).map_err(CliError::from_core_config)?;
    let (n_mean, norm) = match method {
        Method::Analytic => {
            let times = grid.sample_times();
            let values = times.iter().map(|&t| vacuum_photon_number(p, t)).collect();
            (TimeSeries::new("n_mean", times, values), None)
        }
        Method::Su11Stepped => {
            let NumberTrace { n_mean, norm } = stepped_su11_number_trace(p, &grid, &vacuum)
                .map_err(|e| CliError::from_core_run(name, e))?;
            (n_mean, Some(norm))
        }
        _ => {
            let h = method.hamiltonian(*p).expect("RK4 method");
            let NumberTrace { n_mean, norm } = corotating_number_trace(&h, &vacuum, &grid)
                .map_err(|e| CliError::from_core_run(name, e))?;
            (n_mean, Some(norm))
        }
    };
    if let Some((t, _)) = n_mean.iter().find(|(_, v)| !v.is_finite()) {
        return Err(CliError::Divergence {
            method: name.to_string(),
            t,
            reason: "non-finite photon number".into(),
        });
    }
    Ok(MethodSeries {
        method,
        kerr: p.kerr(),
        dim: p.dim(),
        n_mean,
        norm,
    })
}

/// Runs every (Kerr value, method) pair; pairs run in parallel on the
/// current rayon pool, results are collected in config order.
pub fn execute(config: &RunConfig) -> Result<RunResult, CliError> {
    config.validate()?;
    let start = Instant::now();
    let truncations = config
        .kerr
        .iter()
        .map(|&k| truncation(config, k))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(Method, ModelParams)> = truncations
        .iter()
        .map(|tr| {
            let p = config
                .params(tr.kerr)?
                .with_dim(tr.dim)
                .map_err(CliError::from_core_config)?;
            Ok(config.methods.iter().map(move |&m| (m, p)))
        })
        .collect::<Result<Vec<_>, CliError>>()?
        .into_iter()
        .flatten()
        .collect();
    let series = jobs
        .par_iter()
        .map(|(m, p)| run_method(*m, p, config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunResult {
        config: config.clone(),
        series,
        truncations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// `printf("%.15g")`: 15 significant digits, trailing zeros trimmed,
/// exponent form below `1e-5` or from `1e15`.
pub fn fmt_g15(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..15).contains(&exp) {
        let decimals = (14 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn write_csv(result: &RunResult, out: &mut impl Write) -> std::io::Result<()> {
    let c = &result.config;
    writeln!(out, "{CSV_HEADER}")?;
    for &k in &c.kerr {
        let rows: Vec<&MethodSeries> = c
            .methods
            .iter()
            .filter_map(|&m| result.get(m, k))
            .collect();
        let Some(first) = rows.first() else { continue };
        for i in 0..first.n_mean.len() {
            for s in &rows {
                let norm = s
                    .norm
                    .as_ref()
                    .map(|n| fmt_g15(n.values[i]))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    fmt_g15(s.n_mean.times[i]),
                    s.method,
                    fmt_g15(k),
                    fmt_g15(c.epsilon),
                    fmt_g15(c.omega0),
                    s.dim,
                    fmt_g15(c.dt),
                    fmt_g15(s.n_mean.values[i]),
                    norm
                )?;
            }
        }
    }
    Ok(())
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

/// Sidecar in the config-file format. Only `wall_time_s` varies between
/// identical runs.
pub fn write_metadata(result: &RunResult, out: &mut impl Write) -> std::io::Result<()> {
    let c = &result.config;
    let tr = &result.truncations;
    writeln!(out, "# dce-kerr run metadata")?;
    writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"))?;
    if let Some(p) = c.preset {
        writeln!(out, "preset = {}", p.as_str())?;
    }
    writeln!(out, "omega0 = {}", fmt_g15(c.omega0))?;
    writeln!(out, "epsilon = {}", fmt_g15(c.epsilon))?;
    writeln!(out, "kerr = {}", join(&c.kerr, |k| fmt_g15(*k)))?;
    writeln!(out, "dim = {}", join(tr, |t| t.dim.to_string()))?;
    writeln!(
        out,
        "dim_rule = {}",
        if c.dim.is_some() { "fixed" } else { "tail-estimate" }
    )?;
    writeln!(out, "# squeezed-vacuum tail bound tanh^dim(r) at the peak closed-form <n>")?;
    writeln!(out, "tail_exponent = {}", fmt_g15(TAIL_EXPONENT))?;
    writeln!(out, "peak_estimate = {}", join(tr, |t| fmt_g15(t.peak_estimate)))?;
    writeln!(out, "tail_bound = {}", join(tr, |t| fmt_g15(t.tail_bound)))?;
    writeln!(out, "dt = {}", fmt_g15(c.dt))?;
    writeln!(out, "tmax = {}", fmt_g15(c.t_max))?;
    writeln!(out, "stride = {}", c.stride)?;
    writeln!(out, "methods = {}", join(&c.methods, |m| m.to_string()))?;
    writeln!(out, "integrator = rk4-corotating")?;
    writeln!(out, "initial_state = vacuum")?;
    writeln!(out, "wall_time_s = {:.3}", result.wall_time)?;
    Ok(())
}

pub fn metadata_path(output: &Path) -> PathBuf {
    output.with_extension("meta")
}

fn write_file(
    path: &Path,
    result: &RunResult,
    f: impl Fn(&RunResult, &mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(result, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Writes the CSV and its sidecar.
pub fn write_outputs(result: &RunResult) -> Result<(), CliError> {
    let out = &result.config.output;
    write_file(out, result, |r, w| write_csv(r, w))?;
    write_file(&metadata_path(out), result, |r, w| write_metadata(r, w))
}

/// Executes and writes.
pub fn run(config: &RunConfig) -> Result<RunResult, CliError> {
    let result = execute(config)?;
    write_outputs(&result)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    #[test]
    fn g15_format() {
        assert_eq!(fmt_g15(0.0), "0");
        assert_eq!(fmt_g15(1.0), "1");
        assert_eq!(fmt_g15(0.1), "0.1");
        assert_eq!(fmt_g15(100.0 * 1e-3 * 3.0), "0.3");
        assert_eq!(fmt_g15(1e-3), "0.001");
        assert_eq!(fmt_g15(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_g15(123456.789), "123456.789");
        assert_eq!(fmt_g15(2.5e-7), "2.5e-07");
        assert_eq!(fmt_g15(-1.25e20), "-1.25e+20");
        assert_eq!(fmt_g15(1e15), "1e+15");
        assert_eq!(fmt_g15(999999999999999.0), "999999999999999");
        assert_eq!(fmt_g15(0.00001), "1e-05");
        assert_eq!(fmt_g15(0.0001), "0.0001");
        assert_eq!(fmt_g15(f64::NAN), "nan");
        for x in [0.1f64, 1.0 / 7.0, 2.0f64.sqrt() * 1e-9, 12345.6789e10] {
            let back: f64 = fmt_g15(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-14 * x.abs());
        }
    }

    fn small(methods: Vec<Method>, kerr: Vec<f64>) -> RunConfig {
        RunConfig {
            kerr,
            dim: Some(32),
            t_max: 2.0,
            dt: 1e-2,
            stride: 10,
            methods,
            ..RunConfig::default()
        }
    }

    #[test]
    fn csv_layout() {
        let c = small(vec![Method::Analytic, Method::Rwa], vec![0.2, 0.5]);
        let r = execute(&c).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2 * 21);
        assert_eq!(lines[1], "0,analytic,0.2,0.1,1,32,0.01,0,");
        assert_eq!(lines[2], "0,rwa,0.2,0.1,1,32,0.01,0,1");
        assert!(lines[3].starts_with("0.1,analytic,0.2,"));
        assert!(lines[43].starts_with("0,analytic,0.5,"));
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 9));
    }

    #[test]
    fn no_drive_gives_zero_columns() {
        let mut c = small(Method::ALL.to_vec(), vec![0.0, 0.3]);
        c.epsilon = 0.0;
        let r = execute(&c).unwrap();
        assert_eq!(r.series.len(), 10);
        for s in &r.series {
            assert!(s.n_mean.values.iter().all(|&v| v == 0.0), "{}", s.method);
        }
    }

    #[test]
    fn automatic_dims() {
        let c = RunConfig {
            dim: None,
            ..Preset::Figure1.config("x.csv")
        };
        let dims: Vec<usize> = c
            .kerr
            .iter()
            .map(|&k| truncation(&c, k).unwrap().dim)
            .collect();
        assert_eq!(dims[0], 8192);
        assert!(dims[1..].iter().all(|&d| d <= 128));
        assert!(truncation(&c, 0.0).unwrap().tail_bound <= (-TAIL_EXPONENT).exp());
    }

    #[test]
    fn metadata_differs_only_in_wall_time() {
        let c = small(vec![Method::Full], vec![0.2]);
        let meta = |r: &RunResult| {
            let mut buf = Vec::new();
            write_metadata(r, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = meta(&execute(&c).unwrap());
        let b = meta(&execute(&c).unwrap());
        let strip = |s: &str| {
            s.lines()
                .filter(|l| !l.starts_with("wall_time_s"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.contains("kerr = 0.2\n"));
        assert!(a.contains("dim = 32\n"));
        assert_eq!(metadata_path(Path::new("out/run.csv")), PathBuf::from("out/run.meta"));
    }
}
