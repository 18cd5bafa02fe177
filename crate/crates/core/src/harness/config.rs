//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! experiment = heat_depth_dt_table
//! dt = [1e-4, 1e-3]
//! depth = [0, 10]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::problems::{FhnParams, InitialField, MassMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    FhnCompare,
    FhnConvergence,
    FhnDepthSweep,
    HeatDepthDtTable,
    HeatPlapTable,
    CflProbe,
    AaGmresCheck,
    BurgersDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::FhnCompare,
        ExperimentKind::FhnConvergence,
        ExperimentKind::FhnDepthSweep,
        ExperimentKind::HeatDepthDtTable,
        ExperimentKind::HeatPlapTable,
        ExperimentKind::CflProbe,
        ExperimentKind::AaGmresCheck,
        ExperimentKind::BurgersDemo,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::FhnCompare => "fhn_compare",
            ExperimentKind::FhnConvergence => "fhn_convergence",
            ExperimentKind::FhnDepthSweep => "fhn_depth_sweep",
            ExperimentKind::HeatDepthDtTable => "heat_depth_dt_table",
            ExperimentKind::HeatPlapTable => "heat_plap_table",
            ExperimentKind::CflProbe => "cfl_probe",
            ExperimentKind::AaGmresCheck => "aa_gmres_check",
            ExperimentKind::BurgersDemo => "burgers_demo",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.as_str()).collect();
                format!("unknown experiment '{s}' (expected one of {})", names.join(", "))
            })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }

    fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: Some(key.to_owned()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "'{key}': ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// CSV destination, overridable from the command line.
    pub output: String,
    pub seed: u64,

    pub dt: Vec<f64>,
    pub depth: Vec<usize>,
    pub p: Vec<f64>,
    pub cells: Vec<usize>,
    /// Multiples of the stability threshold probed by `cfl_probe`.
    pub dt_factor: Vec<f64>,

    pub dims: usize,
    pub mu: f64,
    pub nu: f64,
    pub mass_mode: MassMode,
    /// Initial field of the PDE problems; `random` draws from `seed`.
    pub initial: InitialField,
    pub amplitude: f64,

    /// Final time of the FitzHugh-Nagumo runs.
    pub t_end: f64,
    /// Time steps taken by the PDE runs.
    pub steps: usize,
    pub reference_dt: f64,

    pub max_iter: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub damping: f64,
    pub alternation: usize,

    pub fhn: FhnParams,

    pub systems: usize,
    pub size: usize,
    pub condition: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Name,
    Text,
    Int,
    Float,
    IntList,
    FloatList,
}

/// Every accepted key, in normalized output order.
const KEYS: &[(&str, Kind)] = &[
    ("experiment", Kind::Name),
    ("output", Kind::Text),
    ("seed", Kind::Int),
    ("dt", Kind::FloatList),
    ("depth", Kind::IntList),
    ("p", Kind::FloatList),
    ("cells", Kind::IntList),
    ("dt_factor", Kind::FloatList),
    ("dims", Kind::Int),
    ("mu", Kind::Float),
    ("nu", Kind::Float),
    ("mass_mode", Kind::Name),
    ("initial", Kind::Name),
    ("amplitude", Kind::Float),
    ("t_end", Kind::Float),
    ("steps", Kind::Int),
    ("reference_dt", Kind::Float),
    ("max_iter", Kind::Int),
    ("rel_tol", Kind::Float),
    ("abs_tol", Kind::Float),
    ("damping", Kind::Float),
    ("alternation", Kind::Int),
    ("fhn_a", Kind::Float),
    ("fhn_b", Kind::Float),
    ("fhn_r", Kind::Float),
    ("fhn_tau", Kind::Float),
    ("fhn_i_ext", Kind::Float),
    ("systems", Kind::Int),
    ("size", Kind::Int),
    ("condition", Kind::Float),
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Word(String),
    Int(u64),
    Float(f64),
    IntList(Vec<u64>),
    FloatList(Vec<f64>),
}

fn parse_float(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_value(kind: Kind, raw: &str) -> Result<Value, String> {
    let list_items = |raw: &str| -> Result<Vec<String>, String> {
        let inner = raw
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| format!("expected a bracketed list like [1, 2], got '{raw}'"))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(Vec::new());
        }
        Ok(inner.split(',').map(|s| s.trim().to_owned()).collect())
    };
    match kind {
        Kind::Name => {
            if !raw.is_empty() && raw.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                Ok(Value::Word(raw.to_owned()))
            } else {
                Err(format!("expected an identifier, got '{raw}'"))
            }
        }
        Kind::Text => {
            let unquoted = raw
                .strip_prefix('"')
                .and_then(|r| r.strip_suffix('"'))
                .unwrap_or(raw);
            if unquoted.is_empty() {
                Err("expected a non-empty value".into())
            } else {
                Ok(Value::Word(unquoted.to_owned()))
            }
        }
        Kind::Int => raw
            .parse()
            .map(Value::Int)
            .map_err(|_| format!("expected a non-negative integer, got '{raw}'")),
        Kind::Float => parse_float(raw)
            .map(Value::Float)
            .ok_or_else(|| format!("expected a number, got '{raw}'")),
        Kind::IntList => {
            let items = list_items(raw)?;
            let parsed = items
                .iter()
                .map(|s| s.parse().map_err(|_| format!("expected integers in list, got '{s}'")))
                .collect::<Result<_, _>>()?;
            Ok(Value::IntList(parsed))
        }
        Kind::FloatList => {
            let items = list_items(raw)?;
            let parsed = items
                .iter()
                .map(|s| parse_float(s).ok_or_else(|| format!("expected numbers in list, got '{s}'")))
                .collect::<Result<_, _>>()?;
            Ok(Value::FloatList(parsed))
        }
    }
}

impl ExperimentConfig {
    /// Defaults for `experiment`; every other key starts from here.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let mut c = Self {
            experiment,
            output: format!("{}.csv", experiment.as_str()),
            seed: 42,
            dt: vec![0.1],
            depth: vec![0, 10],
            p: vec![2.0],
            cells: vec![32],
            dt_factor: vec![0.9, 1.1],
            dims: 2,
            mu: 0.1,
            nu: 0.05,
            mass_mode: MassMode::IdentityFd,
            initial: InitialField::Sine,
            amplitude: 1.0,
            t_end: 2.0,
            steps: 3,
            reference_dt: 1e-3,
            max_iter: 500,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            damping: 1.0,
            alternation: 1,
            fhn: FhnParams::default(),
            systems: 10,
            size: 20,
            condition: 100.0,
        };
        match experiment {
            ExperimentKind::FhnCompare => {
                c.depth = vec![2];
                c.t_end = 20.0;
            }
            ExperimentKind::FhnConvergence => {
                c.dt = vec![0.1, 0.05, 0.025, 0.0125];
                c.depth = vec![2];
            }
            ExperimentKind::FhnDepthSweep => {
                c.depth = vec![0, 1, 2, 3, 5, 10];
                c.t_end = 20.0;
            }
            ExperimentKind::HeatDepthDtTable => {
                c.dt = vec![1e-4, 1e-3, 1e-2, 1e-1];
                c.depth = vec![0, 10, 50];
                c.mass_mode = MassMode::ConsistentFe;
                c.initial = InitialField::Random;
            }
            ExperimentKind::HeatPlapTable => {
                c.dt = vec![1e-4];
                c.depth = vec![10];
                c.p = vec![2.0, 3.0, 4.0, 5.0];
                c.cells = vec![8, 16, 32];
                c.initial = InitialField::Bubble;
                c.amplitude = 0.25;
            }
            ExperimentKind::CflProbe => {
                c.depth = vec![0, 10, 50];
                c.dt_factor = vec![0.9, 1.1, 10.0, 20.0, 40.0];
                c.initial = InitialField::Random;
            }
            ExperimentKind::AaGmresCheck => {
                c.depth = vec![];
            }
            ExperimentKind::BurgersDemo => {
                c.dt = vec![1e-3, 1e-2, 5e-2];
                c.depth = vec![0, 5];
                c.cells = vec![64];
                c.dims = 1;
            }
        }
        c
    }

    pub fn parse_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<&'static str, (usize, Value)> = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line_no, None, format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            let raw = raw.trim();
            let &(name, kind) = KEYS
                .iter()
                .find(|(k, _)| *k == key)
                .ok_or_else(|| ConfigError::at(line_no, Some(key), "unknown key"))?;
            if let Some((first, _)) = values.get(name) {
                return Err(ConfigError::at(
                    line_no,
                    Some(key),
                    format!("duplicate key (first set on line {first})"),
                ));
            }
            let value = parse_value(kind, raw).map_err(|m| ConfigError::at(line_no, Some(key), m))?;
            values.insert(name, (line_no, value));
        }

        let (exp_line, exp) = values
            .remove("experiment")
            .ok_or_else(|| ConfigError::invalid("experiment", "missing required key"))?;
        let Value::Word(name) = exp else { unreachable!() };
        let kind: ExperimentKind = name
            .parse()
            .map_err(|m: String| ConfigError::at(exp_line, Some("experiment"), m))?;
        let mut cfg = Self::defaults(kind);

        for (key, (line_no, value)) in values {
            let err = |m: String| ConfigError::at(line_no, Some(key), m);
            let to_usize = |v: u64| usize::try_from(v).map_err(|_| err(format!("{v} is out of range")));
            match (key, value) {
                ("output", Value::Word(s)) => cfg.output = s,
                ("seed", Value::Int(v)) => cfg.seed = v,
                ("dt", Value::FloatList(v)) => cfg.dt = v,
                ("depth", Value::IntList(v)) => cfg.depth = v.into_iter().map(to_usize).collect::<Result<_, _>>()?,
                ("p", Value::FloatList(v)) => cfg.p = v,
                ("cells", Value::IntList(v)) => cfg.cells = v.into_iter().map(to_usize).collect::<Result<_, _>>()?,
                ("dt_factor", Value::FloatList(v)) => cfg.dt_factor = v,
                ("dims", Value::Int(v)) => cfg.dims = to_usize(v)?,
                ("mu", Value::Float(v)) => cfg.mu = v,
                ("nu", Value::Float(v)) => cfg.nu = v,
                ("mass_mode", Value::Word(s)) => cfg.mass_mode = s.parse().map_err(|e: crate::Error| err(e.to_string()))?,
                ("initial", Value::Word(s)) => cfg.initial = s.parse().map_err(|e: crate::Error| err(e.to_string()))?,
                ("amplitude", Value::Float(v)) => cfg.amplitude = v,
                ("t_end", Value::Float(v)) => cfg.t_end = v,
                ("steps", Value::Int(v)) => cfg.steps = to_usize(v)?,
                ("reference_dt", Value::Float(v)) => cfg.reference_dt = v,
                ("max_iter", Value::Int(v)) => cfg.max_iter = to_usize(v)?,
                ("rel_tol", Value::Float(v)) => cfg.rel_tol = v,
                ("abs_tol", Value::Float(v)) => cfg.abs_tol = v,
                ("damping", Value::Float(v)) => cfg.damping = v,
                ("alternation", Value::Int(v)) => cfg.alternation = to_usize(v)?,
                ("fhn_a", Value::Float(v)) => cfg.fhn.a = v,
                ("fhn_b", Value::Float(v)) => cfg.fhn.b = v,
                ("fhn_r", Value::Float(v)) => cfg.fhn.r = v,
                ("fhn_tau", Value::Float(v)) => cfg.fhn.tau = v,
                ("fhn_i_ext", Value::Float(v)) => cfg.fhn.i_ext = v,
                ("systems", Value::Int(v)) => cfg.systems = to_usize(v)?,
                ("size", Value::Int(v)) => cfg.size = to_usize(v)?,
                ("condition", Value::Float(v)) => cfg.condition = v,
                (k, v) => unreachable!("key {k} parsed as {v:?}"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks ranges and cross-key constraints. Errors name the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, format!("must be positive, got {v}")))
            }
        };
        let non_empty = |key: &str, len: usize| {
            if len > 0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, "sweep list must not be empty"))
            }
        };
        let at_least = |key: &str, v: usize, min: usize| {
            if v >= min {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, format!("must be at least {min}, got {v}")))
            }
        };

        non_empty("dt", self.dt.len())?;
        for &dt in &self.dt {
            positive("dt", dt)?;
        }
        if self.experiment != ExperimentKind::AaGmresCheck {
            non_empty("depth", self.depth.len())?;
        }
        non_empty("p", self.p.len())?;
        for &p in &self.p {
            if p < 2.0 {
                return Err(ConfigError::invalid("p", format!("exponent must be at least 2, got {p}")));
            }
        }
        non_empty("cells", self.cells.len())?;
        for &c in &self.cells {
            at_least("cells", c, 2)?;
        }
        non_empty("dt_factor", self.dt_factor.len())?;
        for &f in &self.dt_factor {
            positive("dt_factor", f)?;
        }
        if !(1..=3).contains(&self.dims) {
            return Err(ConfigError::invalid("dims", format!("must be 1, 2 or 3, got {}", self.dims)));
        }
        if self.experiment == ExperimentKind::BurgersDemo && self.dims != 1 {
            return Err(ConfigError::invalid("dims", "burgers_demo runs on a 1D grid"));
        }
        positive("mu", self.mu)?;
        positive("nu", self.nu)?;
        positive("amplitude", self.amplitude)?;
        positive("t_end", self.t_end)?;
        at_least("steps", self.steps, 1)?;
        positive("reference_dt", self.reference_dt)?;
        at_least("max_iter", self.max_iter, 1)?;
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(ConfigError::invalid("damping", format!("must lie in (0, 1], got {}", self.damping)));
        }
        at_least("alternation", self.alternation, 1)?;
        positive("fhn_tau", self.fhn.tau)?;
        at_least("systems", self.systems, 1)?;
        at_least("size", self.size, 1)?;
        if !(self.condition >= 1.0) {
            return Err(ConfigError::invalid("condition", format!("must be at least 1, got {}", self.condition)));
        }

        if matches!(
            self.experiment,
            ExperimentKind::FhnCompare | ExperimentKind::FhnConvergence | ExperimentKind::FhnDepthSweep
        ) {
            if !whole_multiple(self.t_end, self.reference_dt) {
                return Err(ConfigError::invalid(
                    "reference_dt",
                    format!("t_end {} is not a whole number of steps of {}", self.t_end, self.reference_dt),
                ));
            }
            for &dt in &self.dt {
                if !whole_multiple(self.t_end, dt) {
                    return Err(ConfigError::invalid(
                        "dt",
                        format!("t_end {} is not a whole number of steps of {dt}", self.t_end),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Normalized text form: every key, fixed order, shortest round-trip numbers.
    pub fn to_config_string(&self) -> String {
        fn floats(v: &[f64]) -> String {
            let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
            format!("[{}]", items.join(", "))
        }
        fn ints(v: &[usize]) -> String {
            let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("[{}]", items.join(", "))
        }
        let mut out = String::new();
        for (key, _) in KEYS {
            let value = match *key {
                "experiment" => self.experiment.as_str().to_owned(),
                "output" => format!("\"{}\"", self.output),
                "seed" => self.seed.to_string(),
                "dt" => floats(&self.dt),
                "depth" => ints(&self.depth),
                "p" => floats(&self.p),
                "cells" => ints(&self.cells),
                "dt_factor" => floats(&self.dt_factor),
                "dims" => self.dims.to_string(),
                "mu" => format!("{:?}", self.mu),
                "nu" => format!("{:?}", self.nu),
                "mass_mode" => self.mass_mode.as_str().to_owned(),
                "initial" => self.initial.as_str().to_owned(),
                "amplitude" => format!("{:?}", self.amplitude),
                "t_end" => format!("{:?}", self.t_end),
                "steps" => self.steps.to_string(),
                "reference_dt" => format!("{:?}", self.reference_dt),
                "max_iter" => self.max_iter.to_string(),
                "rel_tol" => format!("{:?}", self.rel_tol),
                "abs_tol" => format!("{:?}", self.abs_tol),
                "damping" => format!("{:?}", self.damping),
                "alternation" => self.alternation.to_string(),
                "fhn_a" => format!("{:?}", self.fhn.a),
                "fhn_b" => format!("{:?}", self.fhn.b),
                "fhn_r" => format!("{:?}", self.fhn.r),
                "fhn_tau" => format!("{:?}", self.fhn.tau),
                "fhn_i_ext" => format!("{:?}", self.fhn.i_ext),
                "systems" => self.systems.to_string(),
                "size" => self.size.to_string(),
                "condition" => format!("{:?}", self.condition),
                other => unreachable!("unlisted key {other}"),
            };
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }
}

fn whole_multiple(a: f64, b: f64) -> bool {
    let r = a / b;
    r >= 1.0 - 1e-9 && (r - r.round()).abs() <= 1e-9 * r.max(1.0)
}
