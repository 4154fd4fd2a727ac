//! Flat `key = value` configuration files.
//!
//! Every key is optional; missing keys take the defaults of
//! [`Config::default`]. Unknown keys are rejected so that typos in override
//! scripts do not pass silently.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::grid::{GridError, PeriodicGrid};
use crate::params::{validate_elastic, validate_leslie, ModelParams, ParamError};

pub const KEYS: &[&str] = &[
    "k1",
    "k2",
    "k3",
    "k4",
    "alpha1",
    "alpha2",
    "alpha3",
    "alpha4",
    "alpha5",
    "alpha6",
    "epsilon",
    "dt",
    "t_end",
    "nx",
    "ny",
    "nz",
    "lx",
    "ly",
    "lz",
    "scheme",
    "dealias",
    "seed",
    "band_lo",
    "band_hi",
    "out_dir",
    "snapshot_every",
    "initial",
    "amplitude",
    "v_amplitude",
    "l3_radius",
    "l3_threshold",
    "l3_stride",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("override must look like key=value, got `{0}`")]
    BadOverride(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitRk2,
    Imex,
}

impl FromStr for Scheme {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "explicit-rk2" => Ok(Scheme::ExplicitRk2),
            "imex" => Ok(Scheme::Imex),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ExplicitRk2 => "explicit-rk2",
            Scheme::Imex => "imex",
        })
    }
}

/// Time stepping, grid and output controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub grid_dims: Vec<usize>,
    pub domain_lengths: Vec<f64>,
    pub scheme: Scheme,
    pub dealias: bool,
    pub director_band: (f64, f64),
    /// Allowed `max|div v| / (1 + max|v|)`.
    pub divergence_tol: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Snapshot cadence in steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub initial: String,
    pub amplitude: f64,
    pub v_amplitude: f64,
    /// Window radius of the L3 concentration scan; `None` uses an eighth of
    /// the shortest side.
    pub l3_radius: Option<f64>,
    /// Concentration event threshold; `None` reports without events.
    pub l3_threshold: Option<f64>,
    pub l3_stride: usize,
}

impl SimulationConfig {
    pub fn dim(&self) -> usize {
        self.grid_dims.len()
    }

    pub fn grid(&self) -> Result<Arc<PeriodicGrid>, GridError> {
        PeriodicGrid::new(&self.grid_dims, &self.domain_lengths)
    }

    pub fn l3_radius_or_default(&self) -> f64 {
        self.l3_radius.unwrap_or_else(|| self.domain_lengths.iter().cloned().fold(f64::INFINITY, f64::min) / 8.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be nonnegative");
        }
        if self.grid_dims.iter().any(|&n| n < 4 || n % 2 != 0) {
            return bad("grid sizes must be even and at least 4");
        }
        if self.domain_lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return bad("domain lengths must be positive");
        }
        let (lo, hi) = self.director_band;
        if !(lo > 0.0 && lo <= 1.0 && hi >= 1.0 && hi.is_finite()) {
            return bad("director band must lie in (0, inf) and contain 1");
        }
        if self.l3_stride == 0 {
            return bad("l3_stride must be at least 1");
        }
        Ok(())
    }
}

/// A complete, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub model: ModelParams,
    pub sim: SimulationConfig,
}

impl Default for Config {
    fn default() -> Self {
        let entries = BTreeMap::new();
        build(&entries).expect("defaults are valid")
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with_overrides(text, &[] as &[String])
    }

    /// Parses `text`, then applies `key=value` overrides in order.
    pub fn parse_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self, ConfigError> {
        let mut entries = parse_entries(text)?;
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::BadOverride(o.to_string()))?;
            insert(&mut entries, k.trim(), v.trim())?;
        }
        build(&entries)
    }

    /// Serializes every effective setting; re-parsing yields an equal config.
    pub fn dump(&self) -> String {
        let m = &self.model;
        let s = &self.sim;
        let mut out = String::new();
        let k = m.elastic.raw();
        for (i, v) in k.iter().enumerate() {
            let _ = writeln!(out, "k{} = {:?}", i + 1, v);
        }
        for (i, v) in m.leslie.raw().iter().enumerate() {
            let _ = writeln!(out, "alpha{} = {:?}", i + 1, v);
        }
        let _ = writeln!(out, "epsilon = {:?}", s.epsilon);
        let _ = writeln!(out, "dt = {:?}", s.dt);
        let _ = writeln!(out, "t_end = {:?}", s.t_end);
        for (name, n) in ["nx", "ny", "nz"].iter().zip(&s.grid_dims) {
            let _ = writeln!(out, "{name} = {n}");
        }
        for (name, l) in ["lx", "ly", "lz"].iter().zip(&s.domain_lengths) {
            let _ = writeln!(out, "{name} = {l:?}");
        }
        let _ = writeln!(out, "scheme = {}", s.scheme);
        let _ = writeln!(out, "dealias = {}", s.dealias);
        let _ = writeln!(out, "seed = {}", s.seed);
        let _ = writeln!(out, "band_lo = {:?}", s.director_band.0);
        let _ = writeln!(out, "band_hi = {:?}", s.director_band.1);
        let _ = writeln!(out, "out_dir = {}", s.out_dir.display());
        let _ = writeln!(out, "snapshot_every = {}", s.snapshot_every);
        let _ = writeln!(out, "initial = {}", s.initial);
        let _ = writeln!(out, "amplitude = {:?}", s.amplitude);
        let _ = writeln!(out, "v_amplitude = {:?}", s.v_amplitude);
        if let Some(r) = s.l3_radius {
            let _ = writeln!(out, "l3_radius = {r:?}");
        }
        if let Some(t) = s.l3_threshold {
            let _ = writeln!(out, "l3_threshold = {t:?}");
        }
        let _ = writeln!(out, "l3_stride = {}", s.l3_stride);
        out
    }
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut entries = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: n + 1, text: raw.to_string() })?;
        insert(&mut entries, k.trim(), v.trim())?;
    }
    Ok(entries)
}

fn insert(entries: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<(), ConfigError> {
    if !KEYS.contains(&key) {
        return Err(ConfigError::UnknownKey(key.to_string()));
    }
    entries.insert(key.to_string(), value.to_string());
    Ok(())
}

fn get<T: FromStr>(e: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, ConfigError> {
    match e.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.clone() }),
    }
}

fn get_opt<T: FromStr>(e: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    e.get(key).map(|v| v.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.clone() })).transpose()
}

fn build(e: &BTreeMap<String, String>) -> Result<Config, ConfigError> {
    let dk = [1.0, 0.8, 1.2, 0.2];
    let da = [0.1, -0.6, 0.4, 1.0, 0.5, 0.3];
    let mut k = [0.0; 4];
    for (i, v) in k.iter_mut().enumerate() {
        *v = get(e, &format!("k{}", i + 1), dk[i])?;
    }
    let mut a = [0.0; 6];
    for (i, v) in a.iter_mut().enumerate() {
        *v = get(e, &format!("alpha{}", i + 1), da[i])?;
    }
    let model = ModelParams { elastic: validate_elastic(k)?, leslie: validate_leslie(a)? };

    let mut grid_dims = vec![get(e, "nx", 64usize)?, get(e, "ny", 64usize)?];
    let mut domain_lengths = vec![get(e, "lx", 2.0 * PI)?, get(e, "ly", 2.0 * PI)?];
    if let Some(nz) = get_opt::<usize>(e, "nz")? {
        grid_dims.push(nz);
        domain_lengths.push(get(e, "lz", 2.0 * PI)?);
    }
    let scheme = match e.get("scheme") {
        None => Scheme::ExplicitRk2,
        Some(v) => v.parse().map_err(|_| ConfigError::BadValue { key: "scheme".into(), value: v.clone() })?,
    };
    let sim = SimulationConfig {
        epsilon: get(e, "epsilon", 0.25)?,
        dt: get(e, "dt", 2e-4)?,
        t_end: get(e, "t_end", 0.2)?,
        grid_dims,
        domain_lengths,
        scheme,
        dealias: get(e, "dealias", true)?,
        director_band: (get(e, "band_lo", 0.5)?, get(e, "band_hi", 1.5)?),
        divergence_tol: 1e-9,
        seed: get(e, "seed", 0u64)?,
        out_dir: PathBuf::from(get(e, "out_dir", "out".to_string())?),
        snapshot_every: get(e, "snapshot_every", 0usize)?,
        initial: get(e, "initial", "twist".to_string())?,
        amplitude: get(e, "amplitude", 1.0)?,
        v_amplitude: get(e, "v_amplitude", 0.0)?,
        l3_radius: get_opt(e, "l3_radius")?,
        l3_threshold: get_opt(e, "l3_threshold")?,
        l3_stride: get(e, "l3_stride", 1usize)?,
    };
    sim.validate()?;
    Ok(Config { model, sim })
}
