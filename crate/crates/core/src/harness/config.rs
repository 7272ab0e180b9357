//! Flat `key = value` run configuration.
//!
//! ```text
//! # shockwave, over-relaxed
//! case = shockwave
//! nx = 1000
//! c = 2.7
//! lambda = 1.29
//! lbm_tau = 0.51
//! ```
//!
//! Lists are comma separated; `sweep_u` also accepts `start:stop:step`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::flga::{NegativePolicy, Normalization};
use crate::lattice::{Model, Multiplicity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    Equilibrium1d,
    Equilibrium2d,
    Shockwave,
    TaylorGreen,
    LidCavity,
}

impl CaseKind {
    pub const ALL: [CaseKind; 5] =
        [CaseKind::Equilibrium1d, CaseKind::Equilibrium2d, CaseKind::Shockwave, CaseKind::TaylorGreen, CaseKind::LidCavity];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Equilibrium1d => "equilibrium-1d",
            CaseKind::Equilibrium2d => "equilibrium-2d",
            CaseKind::Shockwave => "shockwave",
            CaseKind::TaylorGreen => "taylor-green",
            CaseKind::LidCavity => "lid-cavity",
        }
    }

    pub fn model(self) -> Model {
        match self {
            CaseKind::Equilibrium1d | CaseKind::Shockwave => Model::D1Q3,
            _ => Model::D2Q9,
        }
    }
}

impl FromStr for CaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown case `{s}` (expected one of {})", CaseKind::ALL.map(|c| c.name()).join(", ")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Compare {
    None,
    Lbm,
    Analytic,
    Qflga,
}

impl FromStr for Compare {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Compare::None),
            "lbm" => Ok(Compare::Lbm),
            "analytic" => Ok(Compare::Analytic),
            "qflga" => Ok(Compare::Qflga),
            _ => Err(format!("unknown comparison `{s}` (expected none, lbm, analytic, qflga)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum LambdaSpec {
    Uniform(f64),
    PerClass(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub case: CaseKind,
    pub model: Model,
    pub nx: usize,
    pub ny: usize,
    pub bodies: Vec<usize>,
    /// Collision scale per entry of `bodies`.
    pub c: Vec<f64>,
    pub lambda: LambdaSpec,
    pub steps: usize,
    pub warmup: usize,
    pub snapshot_every: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub compare: Compare,
    pub lbm_tau: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub u_max: f64,
    pub rho0: f64,
    pub u_lid: f64,
    pub sweep_u: Vec<f64>,
    pub c_list: Vec<f64>,
    pub normalization: Normalization,
    pub negative: NegativePolicy,
    pub multiplicity: Multiplicity,
    pub smoothing: usize,
    pub shots: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for i in &self.issues {
            write!(f, "\n  {}: {}", i.key, i.message)?;
        }
        Ok(())
    }
}

impl ConfigError {
    pub fn single(key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { issues: vec![ConfigIssue { key: key.into(), message: message.into() }] }
    }

    /// Offending keys, each once, in first-reported order.
    pub fn keys(&self) -> Vec<&str> {
        let mut keys: Vec<&str> = Vec::new();
        for i in &self.issues {
            if !keys.contains(&i.key.as_str()) {
                keys.push(&i.key);
            }
        }
        keys
    }
}

pub const KEYS: &[&str] = &[
    "case", "model", "nx", "ny", "bodies", "c", "lambda", "steps", "warmup", "snapshot_every", "seed", "output_dir",
    "compare", "lbm_tau", "rho1", "rho2", "u_max", "rho0", "u_lid", "sweep_u", "c_list", "normalization", "negative",
    "multiplicity", "smoothing", "shots",
];

impl RunConfig {
    /// Defaults for a case, matching the reference experiments.
    pub fn defaults(case: CaseKind) -> RunConfig {
        let model = case.model();
        let mut cfg = RunConfig {
            case,
            model,
            nx: 100,
            ny: 1,
            bodies: vec![2],
            c: vec![1.0],
            lambda: LambdaSpec::Uniform(1.0),
            steps: 1000,
            warmup: 0,
            snapshot_every: if model == Model::D1Q3 { 10 } else { 100 },
            seed: 0,
            output_dir: PathBuf::from(case.name()),
            compare: Compare::None,
            lbm_tau: 2.1,
            rho1: 4.0,
            rho2: 2.0,
            u_max: 0.1,
            rho0: 1.0,
            u_lid: 0.2,
            sweep_u: Vec::new(),
            c_list: Vec::new(),
            normalization: Normalization::Local,
            negative: NegativePolicy::Clamp,
            multiplicity: Multiplicity::Unordered,
            smoothing: 10,
            shots: 0,
        };
        match case {
            CaseKind::Equilibrium1d => {
                cfg.lambda = LambdaSpec::Uniform(1.5);
                cfg.warmup = 500;
                cfg.sweep_u = range(-1.0, 1.0, 0.1);
            }
            CaseKind::Equilibrium2d => {
                cfg.nx = 15;
                cfg.ny = 15;
                cfg.steps = 400;
                cfg.warmup = 300;
                cfg.sweep_u = range(-1.0, 1.0, 0.2);
            }
            CaseKind::Shockwave => {
                cfg.nx = 1000;
                cfg.steps = 1280;
                cfg.lambda = LambdaSpec::Uniform(1.29);
                cfg.compare = Compare::Lbm;
            }
            CaseKind::TaylorGreen => {
                cfg.nx = 50;
                cfg.ny = 50;
                cfg.steps = 5000;
                cfg.c = vec![0.3];
                cfg.compare = Compare::Analytic;
            }
            CaseKind::LidCavity => {
                cfg.nx = 100;
                cfg.ny = 100;
                cfg.steps = 20000;
                cfg.bodies = vec![2, 3];
                cfg.c = vec![0.2, 1.23];
                cfg.snapshot_every = 1000;
            }
        }
        cfg
    }

    /// Parses a config file body, then applies `overrides` (`key=value`).
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
        let mut pairs = parse_pairs(text)?;
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| ConfigError::single(o, "override must look like key=value"))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(&pairs)
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        Self::parse_with_overrides(text, &[])
    }

    pub fn from_pairs(pairs: &[(String, String)]) -> Result<RunConfig, ConfigError> {
        let mut issues = Vec::new();
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in pairs {
            if KEYS.contains(&k.as_str()) {
                map.insert(k, v);
            } else {
                issues.push(ConfigIssue { key: k.clone(), message: "unknown key".into() });
            }
        }
        let case = match map.get("case").map(|v| v.parse::<CaseKind>()) {
            Some(Ok(c)) => c,
            Some(Err(e)) => {
                issues.push(ConfigIssue { key: "case".into(), message: e });
                return Err(ConfigError { issues });
            }
            None => {
                issues.push(ConfigIssue { key: "case".into(), message: "required".into() });
                return Err(ConfigError { issues });
            }
        };
        let mut cfg = RunConfig::defaults(case);
        for (&k, &v) in &map {
            if let Err(message) = cfg.set(k, v) {
                issues.push(ConfigIssue { key: k.into(), message });
            }
        }
        if !map.contains_key("c") && cfg.c.len() != cfg.bodies.len() && map.contains_key("bodies") {
            cfg.c = vec![1.0; cfg.bodies.len()];
        }
        issues.extend(cfg.validate());
        if issues.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { issues })
        }
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "case" => {}
            "model" => self.model = v.parse().map_err(|e: crate::lattice::LatticeError| e.to_string())?,
            "nx" => self.nx = num(v)?,
            "ny" => self.ny = num(v)?,
            "bodies" => self.bodies = list(v)?,
            "c" => self.c = list(v)?,
            "lambda" => {
                let l: Vec<f64> = list(v)?;
                self.lambda = match l.as_slice() {
                    [x] => LambdaSpec::Uniform(*x),
                    _ => LambdaSpec::PerClass(l),
                }
            }
            "steps" => self.steps = num(v)?,
            "warmup" => self.warmup = num(v)?,
            "snapshot_every" => self.snapshot_every = num(v)?,
            "seed" => self.seed = num(v)?,
            "output_dir" => {
                if v.is_empty() {
                    return Err("empty path".into());
                }
                self.output_dir = PathBuf::from(v)
            }
            "compare" => self.compare = v.parse()?,
            "lbm_tau" => self.lbm_tau = num(v)?,
            "rho1" => self.rho1 = num(v)?,
            "rho2" => self.rho2 = num(v)?,
            "u_max" => self.u_max = num(v)?,
            "rho0" => self.rho0 = num(v)?,
            "u_lid" => self.u_lid = num(v)?,
            "sweep_u" => {
                self.sweep_u = match v.split(':').collect::<Vec<_>>().as_slice() {
                    [a, b, s] => {
                        let (a, b, s): (f64, f64, f64) = (num(a)?, num(b)?, num(s)?);
                        if !(s > 0.0) || b < a || (b - a) / s > 1e6 {
                            return Err("range needs start <= stop and a positive step".into());
                        }
                        range(a, b, s)
                    }
                    _ => list(v)?,
                }
            }
            "c_list" => self.c_list = list(v)?,
            "normalization" => {
                self.normalization = match v {
                    "local" => Normalization::Local,
                    "global" => Normalization::GlobalMean,
                    _ => return Err("expected local or global".into()),
                }
            }
            "negative" => {
                self.negative = match v {
                    "clamp" => NegativePolicy::Clamp,
                    "strict" => NegativePolicy::Strict,
                    _ => return Err("expected clamp or strict".into()),
                }
            }
            "multiplicity" => {
                self.multiplicity = match v {
                    "unordered" => Multiplicity::Unordered,
                    "ordered" => Multiplicity::Ordered,
                    _ => return Err("expected unordered or ordered".into()),
                }
            }
            "smoothing" => self.smoothing = num(v)?,
            "shots" => self.shots = num(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Cross-field checks; empty when the config is runnable.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut bad = |key: &str, msg: String| out.push(ConfigIssue { key: key.into(), message: msg });
        if self.model != self.case.model() {
            bad("model", format!("case {} runs on {}", self.case.name(), self.case.model()));
        }
        if self.nx == 0 || self.nx > 1 << 14 {
            bad("nx", "must be in 1..=16384".into());
        }
        if self.model == Model::D1Q3 && self.ny != 1 {
            bad("ny", "must be 1 for d1q3".into());
        }
        if self.ny == 0 || self.ny > 1 << 14 {
            bad("ny", "must be in 1..=16384".into());
        }
        let mut seen = Vec::new();
        for &k in &self.bodies {
            if !(2..=4).contains(&k) || seen.contains(&k) {
                bad("bodies", "entries must be distinct values from 2, 3, 4".into());
                break;
            }
            if self.model == Model::D1Q3 && k == 3 {
                bad("bodies", "d1q3 has no three-body collisions".into());
                break;
            }
            seen.push(k);
        }
        if self.bodies.is_empty() {
            bad("bodies", "at least one collision order".into());
        }
        if self.c.len() != self.bodies.len() {
            bad("c", format!("needs one value per body order ({})", self.bodies.len()));
        }
        if self.c.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            bad("c", "values must be finite and non-negative".into());
        }
        match &self.lambda {
            LambdaSpec::Uniform(l) if !(l.is_finite() && *l >= 0.0) => bad("lambda", "must be finite and non-negative".into()),
            LambdaSpec::PerClass(l) => {
                if self.bodies.len() != 1 {
                    bad("lambda", "per-class rates need a single body order".into());
                }
                if l.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    bad("lambda", "must be finite and non-negative".into());
                }
            }
            _ => {}
        }
        if self.warmup > self.steps {
            bad("warmup", "cannot exceed steps".into());
        }
        if self.snapshot_every == 0 {
            bad("snapshot_every", "must be positive".into());
        }
        if self.smoothing == 0 {
            bad("smoothing", "must be positive".into());
        }
        if self.steps > 100_000_000 {
            bad("steps", "too large".into());
        }
        if self.compare == Compare::Lbm && !(self.lbm_tau > 0.5 && self.lbm_tau.is_finite()) {
            bad("lbm_tau", "must exceed 0.5".into());
        }
        for (key, v) in [("rho1", self.rho1), ("rho2", self.rho2), ("rho0", self.rho0)] {
            if !(v.is_finite() && v > 0.0) {
                bad(key, "must be positive".into());
            }
        }
        if !(self.u_max.is_finite() && self.u_max.abs() < 0.5) {
            bad("u_max", "must satisfy |u_max| < 0.5".into());
        }
        if !(self.u_lid.is_finite() && self.u_lid.abs() < 1.0) {
            bad("u_lid", "must satisfy |u_lid| < 1".into());
        }
        if self.sweep_u.iter().any(|u| !(-1.0..=1.0).contains(u)) {
            bad("sweep_u", "values must lie in [-1, 1]".into());
        }
        if self.c_list.iter().any(|c| !(c.is_finite() && *c > 0.0)) || self.c_list.windows(2).any(|w| w[1] <= w[0]) {
            bad("c_list", "must be positive and strictly increasing".into());
        }
        match self.case {
            CaseKind::Shockwave if self.nx < 4 || !self.nx.is_multiple_of(2) => bad("nx", "shockwave needs an even length >= 4".into()),
            CaseKind::LidCavity if self.nx != self.ny || self.nx < 3 => bad("ny", "cavity must be square, >= 3".into()),
            _ => {}
        }
        match self.compare {
            Compare::Qflga => {
                if self.model != Model::D1Q3 || self.bodies != [2] {
                    bad("compare", "qflga comparison needs d1q3 with two-body collisions".into());
                }
                if !self.nx.is_power_of_two() {
                    bad("nx", "qflga comparison needs a power-of-two length".into());
                }
                if self.nx > 1 << 16 {
                    bad("nx", "qflga comparison limited to 65536 sites".into());
                }
            }
            Compare::Analytic if self.case != CaseKind::TaylorGreen => {
                bad("compare", "analytic comparison exists for taylor-green only".into())
            }
            _ => {}
        }
        out
    }

    /// Collision scale for a body order.
    pub fn c_for(&self, k: usize) -> Option<f64> {
        self.bodies.iter().position(|&b| b == k).map(|i| self.c[i])
    }
}

fn range(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9).collect()
}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    let v = v.trim().trim_start_matches('[').trim_end_matches(']');
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    let out: Vec<T> = v.split(',').map(num).collect::<Result<_, _>>()?;
    if out.len() > 4096 {
        return Err("list too long".into());
    }
    Ok(out)
}

/// Splits the text into `(key, value)` pairs; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    let mut issues = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => pairs.push((k.trim().to_string(), v.trim().to_string())),
            _ => issues.push(ConfigIssue { key: format!("line {}", n + 1), message: "expected key = value".into() }),
        }
    }
    if issues.is_empty() {
        Ok(pairs)
    } else {
        Err(ConfigError { issues })
    }
}
