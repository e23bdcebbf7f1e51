//! Explicit and implicit Euler finite volume schemes on the cell graph.
//!
//! Integrating the heat equation over a cell and approximating the flux at
//! each junction through the matching condition gives
//!
//! ```text
//! u_J^{n+1} = u_J^n + (h / mu(C_J)) r^{-m} (d/2) sum_L (u_L^n - u_J^n)
//! ```
//!
//! With `mu(C_J) = d^{-m}` and renormalisation `r = d/(d+2)` the prefactor
//! collapses to `h c` with `c = (d/2)(d+2)^m`, the same constant that scales
//! the eigenvalues in the CFL bound. Everything below uses that single
//! coefficient against the combinatorial Laplacian `L`.

use std::fmt;
use std::str::FromStr;

use crate::cg::{self, CgOutcome};
use crate::error::{FvmError, Result};
use crate::graph::{BoundaryMode, CellLaplacian};
use crate::initial::InitialCondition;
use crate::simplex::{cell_count, MeasureSpec};
use crate::spectral::{cfl_admissible_steps, cfl_max_h};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Explicit,
    Implicit,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Explicit => "explicit",
            Scheme::Implicit => "implicit",
        })
    }
}

impl FromStr for Scheme {
    type Err = FvmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "implicit" => Ok(Scheme::Implicit),
            other => Err(FvmError::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CflPolicy {
    #[default]
    Enforce,
    Warn,
    Ignore,
}

impl fmt::Display for CflPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CflPolicy::Enforce => "enforce",
            CflPolicy::Warn => "warn",
            CflPolicy::Ignore => "ignore",
        })
    }
}

impl FromStr for CflPolicy {
    type Err = FvmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enforce" => Ok(CflPolicy::Enforce),
            "warn" => Ok(CflPolicy::Warn),
            "ignore" => Ok(CflPolicy::Ignore),
            other => Err(FvmError::Config(format!("unknown cfl policy '{other}'"))),
        }
    }
}

/// `c(d, m) = (d/2)(d+2)^m`.
pub fn scheme_coefficient(d: usize, m: usize) -> f64 {
    d as f64 / 2.0 * (d as f64 + 2.0).powi(m as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub t_final: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
    pub boundary: BoundaryMode,
    pub cfl_policy: CflPolicy,
    pub snapshot_steps: Vec<usize>,
    pub cg_tolerance: f64,
    /// Defaults to `10 * n_cells` when unset.
    pub cg_max_iterations: Option<usize>,
    pub measure: Option<MeasureSpec>,
    /// Keep every intermediate state, not only the snapshots.
    pub record_trajectory: bool,
}

impl SchemeConfig {
    pub fn new(t_final: f64, n_steps: usize) -> Self {
        Self {
            t_final,
            n_steps,
            scheme: Scheme::Explicit,
            boundary: BoundaryMode::dirichlet(),
            cfl_policy: CflPolicy::Enforce,
            snapshot_steps: vec![0, n_steps],
            cg_tolerance: 1e-10,
            cg_max_iterations: None,
            measure: None,
            record_trajectory: false,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_cfl_policy(mut self, policy: CflPolicy) -> Self {
        self.cfl_policy = policy;
        self
    }

    pub fn with_snapshots(mut self, steps: Vec<usize>) -> Self {
        self.snapshot_steps = steps;
        self
    }

    pub fn h(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(FvmError::Config("N must be at least 1".into()));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(FvmError::Config(format!("T={} must be finite and non-negative", self.t_final)));
        }
        if let Some(&bad) = self.snapshot_steps.iter().find(|&&s| s > self.n_steps) {
            return Err(FvmError::Config(format!("snapshot step {bad} exceeds N={}", self.n_steps)));
        }
        if self.cg_tolerance.is_nan() || self.cg_tolerance <= 0.0 {
            return Err(FvmError::Config("cg tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Sorted, de-duplicated snapshot schedule.
    pub fn schedule(&self) -> Vec<usize> {
        let mut s = self.snapshot_steps.clone();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// `I - h c L` or `I + h c L`, stored as `L` plus scalars.
#[derive(Debug, Clone)]
pub struct SchemeMatrix {
    d: usize,
    m: usize,
    scheme: Scheme,
    h: f64,
    coefficient: f64,
    laplacian: CellLaplacian,
    cg_tolerance: f64,
    cg_max_iterations: usize,
}

impl SchemeMatrix {
    pub fn from_laplacian(laplacian: CellLaplacian, scheme: Scheme, h: f64) -> Self {
        let (d, m) = (laplacian.d(), laplacian.level());
        let n = laplacian.dim();
        Self {
            d,
            m,
            scheme,
            h,
            coefficient: scheme_coefficient(d, m),
            laplacian,
            cg_tolerance: 1e-10,
            cg_max_iterations: 10 * n.max(1),
        }
    }

    pub fn with_cg(mut self, tolerance: f64, max_iterations: usize) -> Self {
        self.cg_tolerance = tolerance;
        self.cg_max_iterations = max_iterations;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> usize {
        self.m
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    /// `h c`.
    pub fn step_coefficient(&self) -> f64 {
        self.h * self.coefficient
    }

    pub fn laplacian(&self) -> &CellLaplacian {
        &self.laplacian
    }

    pub fn dim(&self) -> usize {
        self.laplacian.dim()
    }

    fn check_input(&self, u: &[f64], step: usize) -> Result<()> {
        if u.len() != self.dim() {
            return Err(FvmError::LengthMismatch { got: u.len(), expected: self.dim() });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(FvmError::NonFinite { step });
        }
        Ok(())
    }

    /// `u - h c L u`; `step` only labels errors.
    pub fn step_explicit(&self, u: &[f64], step: usize) -> Result<Vec<f64>> {
        self.check_input(u, step)?;
        let hc = self.step_coefficient();
        let lu = self.laplacian.apply(u);
        Ok(u.iter().zip(lu).map(|(a, b)| a - hc * b).collect())
    }

    /// Solves `(I + h c L) v = u` by conjugate gradients, warm-started at `u`.
    pub fn step_implicit(&self, u: &[f64], step: usize) -> Result<(Vec<f64>, CgOutcome)> {
        self.check_input(u, step)?;
        let hc = self.step_coefficient();
        let lap = self.laplacian.matrix();
        let apply = |x: &[f64], y: &mut [f64]| {
            lap.matvec_into(x, y);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = xi + hc * *yi;
            }
        };
        let mut v = u.to_vec();
        let outcome = cg::solve(apply, u, &mut v, self.cg_tolerance, self.cg_max_iterations)?;
        Ok((v, outcome))
    }

    /// Advances one step with whichever scheme this matrix was built for.
    pub fn step(&self, u: &[f64], step: usize) -> Result<(Vec<f64>, usize)> {
        match self.scheme {
            Scheme::Explicit => Ok((self.step_explicit(u, step)?, 0)),
            Scheme::Implicit => self.step_implicit(u, step).map(|(v, o)| (v, o.iterations)),
        }
    }
}

/// Builds the scheme operator for `(d, m)` and applies the CFL policy.
pub fn assemble(d: usize, m: usize, config: &SchemeConfig) -> Result<SchemeMatrix> {
    config.validate()?;
    if let Some(measure) = &config.measure {
        if measure.weights().len() != d || !measure.is_standard() {
            return Err(FvmError::NonStandardMeasure);
        }
    }
    let h = config.h();
    if config.scheme == Scheme::Explicit && !cfl_admissible_steps(config.t_final, config.n_steps as u64, d, m)
    {
        let err = FvmError::CflViolation { h, bound: cfl_max_h(d, m), d, m };
        match config.cfl_policy {
            CflPolicy::Enforce => return Err(err),
            CflPolicy::Warn => log::warn!("{err}"),
            CflPolicy::Ignore => {}
        }
    }
    let lap = CellLaplacian::for_level(d, m, config.boundary)?;
    let max_iter = config.cg_max_iterations.unwrap_or(10 * lap.dim().max(1));
    Ok(SchemeMatrix::from_laplacian(lap, config.scheme, h).with_cg(config.cg_tolerance, max_iter))
}

/// `d^{-m} sum u_J`, the integral of the piecewise-constant state.
pub fn mass(u: &[f64]) -> f64 {
    u.iter().sum::<f64>() / u.len() as f64
}

/// `(d^{-m} sum u_J^2)^{1/2}`.
pub fn scaled_l2(u: &[f64]) -> f64 {
    (u.iter().map(|v| v * v).sum::<f64>() / u.len() as f64).sqrt()
}

pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub values: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    pub d: usize,
    pub m: usize,
    pub h: f64,
    pub snapshots: Vec<Snapshot>,
    /// Running `max_n ||U(n)||_2` over every step taken, not just snapshots.
    pub norm_2_inf: f64,
    pub cg_iterations: usize,
    /// Every state `U(0..=N)` when requested.
    pub trajectory: Option<Vec<Vec<f64>>>,
}

impl StateSeries {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn snapshot(&self, step: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.step == step)
    }
}

/// A run that stopped early; `partial` holds whatever was recorded.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub step: usize,
    pub error: FvmError,
    pub partial: StateSeries,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run failed at step {}: {}", self.step, self.error)
    }
}

impl std::error::Error for RunFailure {}

/// Iterates the scheme `N` times from `U(0)`.
pub fn run_state(
    matrix: &SchemeMatrix,
    config: &SchemeConfig,
    u0: Vec<f64>,
) -> std::result::Result<StateSeries, Box<RunFailure>> {
    let schedule = config.schedule();
    let h = config.h();
    let mut series = StateSeries {
        d: matrix.d(),
        m: matrix.level(),
        h,
        snapshots: Vec::with_capacity(schedule.len()),
        norm_2_inf: scaled_l2(&u0),
        cg_iterations: 0,
        trajectory: config.record_trajectory.then(|| Vec::with_capacity(config.n_steps + 1)),
    };
    let (t_final, n_steps) = (config.t_final, config.n_steps as f64);
    let mut next_snap = schedule.iter().peekable();
    let mut record = |series: &mut StateSeries, step: usize, u: &[f64]| {
        if next_snap.peek() == Some(&&step) {
            next_snap.next();
            series.snapshots.push(Snapshot {
                step,
                time: t_final * step as f64 / n_steps,
                values: u.to_vec(),
                mass: mass(u),
            });
        }
        if let Some(t) = series.trajectory.as_mut() {
            t.push(u.to_vec());
        }
    };
    record(&mut series, 0, &u0);
    let mut u = u0;
    for step in 1..=config.n_steps {
        match matrix.step(&u, step) {
            Ok((next, iters)) => {
                u = next;
                series.cg_iterations += iters;
            }
            Err(error) => return Err(Box::new(RunFailure { step, error, partial: series })),
        }
        series.norm_2_inf = series.norm_2_inf.max(scaled_l2(&u));
        record(&mut series, step, &u);
    }
    Ok(series)
}

/// Assembles, builds `U(0)` and runs.
pub fn run(
    config: &SchemeConfig,
    initial: &InitialCondition,
    d: usize,
    m: usize,
) -> std::result::Result<StateSeries, Box<RunFailure>> {
    let fail = |error: FvmError| {
        Box::new(RunFailure {
            step: 0,
            error,
            partial: StateSeries {
                d,
                m,
                h: config.h(),
                snapshots: Vec::new(),
                norm_2_inf: 0.0,
                cg_iterations: 0,
                trajectory: None,
            },
        })
    };
    let matrix = assemble(d, m, config).map_err(fail)?;
    let u0 = initial.state(d, m).map_err(fail)?;
    debug_assert_eq!(u0.len(), cell_count(d, m).unwrap_or(0));
    run_state(&matrix, config, u0)
}
