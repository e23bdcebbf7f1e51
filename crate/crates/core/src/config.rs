//! Run configuration: `key = value` files, presets and flag overrides.
//!
//! Precedence is preset, then file, then command-line flags. A written run
//! manifest is itself a valid configuration file, so re-running it
//! reproduces the same outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{FvmError, Result};
use crate::graph::BoundaryMode;
use crate::initial::InitialCondition;
use crate::scheme::{CflPolicy, Scheme, SchemeConfig};

pub const KEYS: &[&str] = &[
    "d",
    "m",
    "T",
    "N",
    "scheme",
    "boundary",
    "ghost_increment",
    "cfl_policy",
    "snapshots",
    "initial",
    "cg_tolerance",
    "cg_max_iterations",
];

const REQUIRED: &[&str] = &["d", "m", "T", "N"];

/// Snapshot steps used when none are given (N is appended).
pub const DEFAULT_SNAPSHOTS: &[usize] = &[0, 10, 100, 500];

/// Raw values keyed by name, each remembering where it came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDraft {
    entries: BTreeMap<String, (String, String)>,
}

impl ConfigDraft {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets a value; `origin` is quoted in error messages.
    pub fn set(&mut self, key: &str, value: impl Into<String>, origin: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(FvmError::Config(format!("{}: unknown key '{key}'", origin.into())));
        }
        self.entries.insert(key.to_string(), (value.into(), origin.into()));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut draft = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = format!("{source}:{} ('{}')", i + 1, raw.trim());
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| FvmError::Config(format!("{origin}: expected key = value")))?;
            draft.set(k.trim(), v.trim(), origin)?;
        }
        Ok(draft)
    }

    /// Values of `other` win.
    pub fn merge(mut self, other: ConfigDraft) -> Self {
        self.entries.extend(other.entries);
        self
    }

    pub fn preset(name: &str) -> Result<Self> {
        let origin = format!("preset {name}");
        let mut draft = Self::new();
        let values: &[(&str, &str)] = match name {
            "gasket-paper" => &[
                ("d", "3"),
                ("m", "6"),
                ("T", "1"),
                ("N", "200000"),
                ("scheme", "explicit"),
                ("initial", "spline:1:1"),
            ],
            "tetra-paper" => &[
                ("d", "4"),
                ("m", "4"),
                ("T", "1"),
                ("N", "100000"),
                ("scheme", "explicit"),
                ("initial", "spline:1:1"),
                ("snapshots", "0,10,50,100,500,100000"),
            ],
            other => return Err(FvmError::Config(format!("unknown preset '{other}'"))),
        };
        for (k, v) in values {
            draft.set(k, *v, origin.clone())?;
        }
        Ok(draft)
    }

    fn typed<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, origin)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| FvmError::Config(format!("{origin}: key '{key}' expects {what}, got '{v}'"))),
        }
    }

    pub fn finish(&self) -> Result<RunConfig> {
        let missing: Vec<&str> =
            REQUIRED.iter().copied().filter(|k| !self.entries.contains_key(*k)).collect();
        if !missing.is_empty() {
            return Err(FvmError::Config(format!("missing required keys: {}", missing.join(", "))));
        }
        let d: usize = self.typed("d", "an integer")?.unwrap();
        let m: usize = self.typed("m", "an integer")?.unwrap();
        let t_final: f64 = self.typed("T", "a number")?.unwrap();
        let n_steps: usize = self.typed("N", "an integer")?.unwrap();
        let scheme = self.typed::<Scheme>("scheme", "explicit|implicit")?.unwrap_or_default();
        let mut boundary =
            self.typed::<BoundaryMode>("boundary", "neumann-cells|dirichlet-ghost")?.unwrap_or_default();
        if let Some(inc) = self.typed::<f64>("ghost_increment", "a number")? {
            if let BoundaryMode::DirichletGhost { increment } = &mut boundary {
                *increment = inc;
            }
        }
        let cfl_policy = self.typed::<CflPolicy>("cfl_policy", "enforce|warn|ignore")?.unwrap_or_default();
        let snapshots = match self.entries.get("snapshots") {
            None => None,
            Some((v, origin)) => Some(
                v.split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| {
                    FvmError::Config(format!("{origin}: key 'snapshots' expects comma-separated integers"))
                })?,
            ),
        };
        let initial = match self.entries.get("initial") {
            None => InitialCondition::from_str("spline:1:1")?,
            Some((v, origin)) => {
                InitialCondition::from_str(v).map_err(|e| FvmError::Config(format!("{origin}: {e}")))?
            }
        };
        let cg_tolerance = self.typed::<f64>("cg_tolerance", "a number")?.unwrap_or(1e-10);
        let cg_max_iterations = self.typed::<usize>("cg_max_iterations", "an integer")?;
        let cfg = RunConfig {
            d,
            m,
            t_final,
            n_steps,
            scheme,
            boundary,
            cfl_policy,
            snapshots,
            initial,
            cg_tolerance,
            cg_max_iterations,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully validated configuration of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    pub m: usize,
    pub t_final: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
    pub boundary: BoundaryMode,
    pub cfl_policy: CflPolicy,
    /// `None` means [`DEFAULT_SNAPSHOTS`] plus N.
    pub snapshots: Option<Vec<usize>>,
    pub initial: InitialCondition,
    pub cg_tolerance: f64,
    pub cg_max_iterations: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(FvmError::InvalidDimension(self.d));
        }
        self.scheme_config().validate()
    }

    pub fn snapshot_steps(&self) -> Vec<usize> {
        match &self.snapshots {
            Some(s) => s.clone(),
            None => {
                let mut s: Vec<usize> =
                    DEFAULT_SNAPSHOTS.iter().copied().filter(|&k| k <= self.n_steps).collect();
                s.push(self.n_steps);
                s.dedup();
                s
            }
        }
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let mut sc = SchemeConfig::new(self.t_final, self.n_steps)
            .with_scheme(self.scheme)
            .with_boundary(self.boundary)
            .with_cfl_policy(self.cfl_policy)
            .with_snapshots(self.snapshot_steps());
        sc.cg_tolerance = self.cg_tolerance;
        sc.cg_max_iterations = self.cg_max_iterations;
        sc
    }

    /// Configuration echo in `key = value` form, readable by [`ConfigDraft::parse`].
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d = {}", self.d);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "T = {:?}", self.t_final);
        let _ = writeln!(s, "N = {}", self.n_steps);
        let _ = writeln!(s, "scheme = {}", self.scheme);
        let _ = writeln!(s, "boundary = {}", self.boundary);
        if let BoundaryMode::DirichletGhost { increment } = self.boundary {
            let _ = writeln!(s, "ghost_increment = {increment:?}");
        }
        let _ = writeln!(s, "cfl_policy = {}", self.cfl_policy);
        let snaps: Vec<String> = self.snapshot_steps().iter().map(|k| k.to_string()).collect();
        let _ = writeln!(s, "snapshots = {}", snaps.join(","));
        let _ = writeln!(s, "initial = {}", self.initial);
        let _ = writeln!(s, "cg_tolerance = {:?}", self.cg_tolerance);
        if let Some(it) = self.cg_max_iterations {
            let _ = writeln!(s, "cg_max_iterations = {it}");
        }
        s
    }
}
