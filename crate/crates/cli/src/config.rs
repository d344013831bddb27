//! Run configuration: flat `key = value` files, flag overrides, presets.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dce_kerr::propagator::TimeGrid;
use dce_kerr::{ChiMode, Hamiltonian, ModelParams};

use crate::error::CliError;

/// Keys accepted in config files and as `--key value` flags.
pub const KEYS: [&str; 11] = [
    "preset", "omega0", "epsilon", "kerr", "dim", "dt", "tmax", "stride", "methods", "output",
    "workers",
];

/// Keys a preset fixes; setting any of them in preset mode is an error.
const PRESET_FIXED: [&str; 7] = ["omega0", "epsilon", "kerr", "dt", "tmax", "stride", "methods"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Analytic,
    Full,
    FullApproxChi,
    Rwa,
    Su11Stepped,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Analytic,
        Method::Full,
        Method::FullApproxChi,
        Method::Rwa,
        Method::Su11Stepped,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Full => "full",
            Method::FullApproxChi => "full-approx-chi",
            Method::Rwa => "rwa",
            Method::Su11Stepped => "su11-stepped",
        }
    }

    /// Numerical methods report a norm; the closed form does not.
    pub fn is_numerical(&self) -> bool {
        *self != Method::Analytic
    }

    /// Generator integrated by RK4, if the method is RK4-based.
    pub fn hamiltonian(&self, params: ModelParams) -> Option<Hamiltonian> {
        match self {
            Method::Full => Some(Hamiltonian::Full {
                params,
                mode: ChiMode::Exact,
            }),
            Method::FullApproxChi => Some(Hamiltonian::Full {
                params,
                mode: ChiMode::Approximate,
            }),
            Method::Rwa => Some(Hamiltonian::Rwa { params }),
            Method::Analytic | Method::Su11Stepped => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Figure1,
    Figure2,
}

impl Preset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Figure1 => "figure1",
            Preset::Figure2 => "figure2",
        }
    }

    pub fn kerr_values(&self) -> Vec<f64> {
        match self {
            Preset::Figure1 => vec![0.0, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5],
            Preset::Figure2 => vec![0.0, 0.001, 0.005, 0.01, 0.05, 0.07, 0.085, 0.25, 0.45],
        }
    }

    pub fn methods(&self) -> Vec<Method> {
        match self {
            Preset::Figure1 => vec![Method::Analytic, Method::Full],
            Preset::Figure2 => vec![Method::Full, Method::Rwa],
        }
    }

    pub fn config(&self, output: impl Into<PathBuf>) -> RunConfig {
        RunConfig {
            omega0: 1.0,
            epsilon: 0.1,
            kerr: self.kerr_values(),
            dim: None,
            t_max: 60.0,
            dt: 1e-3,
            stride: 100,
            methods: self.methods(),
            output: output.into(),
            preset: Some(*self),
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "figure1" => Ok(Preset::Figure1),
            "figure2" => Ok(Preset::Figure2),
            _ => Err(format!("unknown preset '{s}' (expected figure1 or figure2)")),
        }
    }
}

/// One run: every method at every Kerr value, from the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega0: f64,
    pub epsilon: f64,
    pub kerr: Vec<f64>,
    /// Fixed truncation; `None` picks `default_dim` per Kerr value.
    pub dim: Option<usize>,
    pub t_max: f64,
    pub dt: f64,
    pub stride: usize,
    pub methods: Vec<Method>,
    pub output: PathBuf,
    pub preset: Option<Preset>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            epsilon: 0.1,
            kerr: vec![0.0],
            dim: None,
            t_max: 60.0,
            dt: 1e-3,
            stride: 100,
            methods: vec![Method::Analytic, Method::Full],
            output: PathBuf::from("dce-kerr.csv"),
            preset: None,
        }
    }
}

impl RunConfig {
    /// Model parameters for one Kerr value; the dimension is a placeholder
    /// when no fixed `dim` is configured.
    pub fn params(&self, kerr: f64) -> Result<ModelParams, CliError> {
        ModelParams::new(self.omega0, self.epsilon, kerr, self.dim.unwrap_or(2))
            .map_err(CliError::from_core_config)
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(0.0, self.t_max, self.dt, self.stride).map_err(|e| CliError::Config {
            field: "dt",
            reason: e.to_string(),
        })
    }

    /// Checks every field; errors name the first offending one.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.methods.is_empty() {
            return Err(CliError::config("methods", "at least one method is required"));
        }
        if self.kerr.is_empty() {
            return Err(CliError::config("kerr", "at least one value is required"));
        }
        if let Some(dim) = self.dim {
            if dim < 2 {
                return Err(CliError::config("dim", format!("{dim} is below the minimum 2")));
            }
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(CliError::config("tmax", format!("{} must be positive", self.t_max)));
        }
        if self.stride == 0 {
            return Err(CliError::config("stride", "must be positive"));
        }
        for &k in &self.kerr {
            self.params(k)?;
        }
        self.grid()?;
        Ok(())
    }

    /// Builds a config from raw settings (file values overridden by flags).
    pub fn from_settings(settings: &Settings) -> Result<Self, CliError> {
        let preset = settings.parse::<Preset>("preset")?;
        let mut config = match preset {
            Some(p) => {
                if let Some(key) = PRESET_FIXED.iter().find(|k| settings.get(k).is_some()) {
                    return Err(CliError::config(
                        key,
                        format!("fixed by preset {}; drop the preset to change it", p.as_str()),
                    ));
                }
                p.config(RunConfig::default().output)
            }
            None => RunConfig::default(),
        };
        if let Some(v) = settings.parse("omega0")? {
            config.omega0 = v;
        }
        if let Some(v) = settings.parse("epsilon")? {
            config.epsilon = v;
        }
        if let Some(v) = settings.parse_list("kerr")? {
            config.kerr = v;
        }
        if let Some(v) = settings.parse("dim")? {
            config.dim = Some(v);
        }
        if let Some(v) = settings.parse("dt")? {
            config.dt = v;
        }
        if let Some(v) = settings.parse("tmax")? {
            config.t_max = v;
        }
        if let Some(v) = settings.parse("stride")? {
            config.stride = v;
        }
        if let Some(v) = settings.parse_list("methods")? {
            config.methods = v;
        }
        if let Some(v) = settings.get("output") {
            config.output = PathBuf::from(v);
        }
        config.validate()?;
        Ok(config)
    }
}

/// Raw `key = value` settings, later sources overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses flat `key = value` lines; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self, CliError> {
        let mut settings = Settings::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config("config", format!("line {}: expected 'key = value'", i + 1))
            })?;
            settings.set(key.trim(), value.trim())?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| CliError::Config {
                field: "config",
                reason: format!("unknown key '{key}'"),
            })?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Overrides with every key set in `other`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::config(key, format!("'{v}': {e}")))
            })
            .transpose()
    }

    pub fn parse_list<T: FromStr>(&self, key: &'static str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|e| CliError::config(key, format!("'{s}': {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}
