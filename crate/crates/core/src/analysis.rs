//! Error norms, inter-level restriction, self-convergence studies and the
//! finite difference comparison.
//!
//! There is no closed-form solution on the simplex, so convergence is
//! measured against a run one level finer, restricted back down.

use crate::error::{FvmError, Result};
use crate::graph::{build_vertex_laplacian, BoundaryMode, VertexVariant};
use crate::initial::InitialCondition;
use crate::parallel;
use crate::scheme::{run, scaled_l2, scheme_coefficient, sup_norm, Scheme, SchemeConfig, StateSeries};
use crate::simplex::{VertexAddr, Word};
use crate::spectral::cfl_max_h;

/// `max_k (d^{-m} sum_i |u_i^k|^2)^{1/2}` over the recorded states: the
/// full trajectory when present, otherwise the snapshots.
pub fn norm_2_inf(series: &StateSeries) -> f64 {
    match &series.trajectory {
        Some(t) => t.iter().map(|u| scaled_l2(u)).fold(0.0, f64::max),
        None => series.snapshots.iter().map(|s| scaled_l2(&s.values)).fold(0.0, f64::max),
    }
}

/// Mean over the d children `J.1 .. J.d` of every coarse cell `J`.
pub fn restrict(fine: &[f64], d: usize) -> Result<Vec<f64>> {
    if fine.len() < d || !fine.len().is_multiple_of(d) {
        return Err(FvmError::LengthMismatch { got: fine.len(), expected: d * (fine.len() / d).max(1) });
    }
    Ok(fine.chunks_exact(d).map(|c| c.iter().sum::<f64>() / d as f64).collect())
}

/// Restricts `levels` times.
pub fn restrict_levels(fine: &[f64], d: usize, levels: usize) -> Result<Vec<f64>> {
    let mut u = fine.to_vec();
    for _ in 0..levels {
        u = restrict(&u, d)?;
    }
    Ok(u)
}

/// Piecewise-constant prolongation: every child copies its parent.
pub fn prolong(coarse: &[f64], d: usize) -> Vec<f64> {
    coarse.iter().flat_map(|&v| std::iter::repeat_n(v, d)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub d: usize,
    /// Ascending levels to test; the reference runs at `max + 1`.
    pub levels: Vec<usize>,
    pub scheme: Scheme,
    pub boundary: BoundaryMode,
    pub t_final: f64,
    pub n_steps: usize,
    pub initial: InitialCondition,
}

impl StudyConfig {
    /// Implicit, Dirichlet, T = 0.1, N = 1000, started from the level-1
    /// harmonic spline at the junction `f_1(P_1) = f_2(P_0)`.
    pub fn new(d: usize, levels: Vec<usize>) -> Self {
        Self {
            d,
            levels,
            scheme: Scheme::Implicit,
            boundary: BoundaryMode::dirichlet(),
            t_final: 0.1,
            n_steps: 1000,
            initial: study_initial_condition(),
        }
    }

    pub fn reference_level(&self) -> usize {
        self.levels.iter().copied().max().unwrap_or(0) + 1
    }
}

/// Level-1 harmonic spline at `f_1(P_1)`; a fixed function at every mesh level.
pub fn study_initial_condition() -> InitialCondition {
    InitialCondition::VertexSpline {
        vertex: VertexAddr { word: Word::repeated(1, 1), corner: 1 },
        level: Some(1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub h: f64,
    /// Discrepancy against the restricted reference, or why the row failed.
    pub error: std::result::Result<f64, String>,
    /// `log2(e_m / e_{m+1})` against the next row.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub d: usize,
    pub scheme: Scheme,
    pub t_final: f64,
    pub n_steps: usize,
    pub reference_level: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn errors(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.error.as_ref().ok().copied()).collect()
    }

    /// Every row succeeded and the errors strictly decrease with m.
    pub fn strictly_decreasing(&self) -> bool {
        let errs: Option<Vec<f64>> = self.errors().into_iter().collect();
        match errs {
            Some(e) => e.windows(2).all(|w| w[1] < w[0]),
            None => false,
        }
    }
}

fn study_run(cfg: &StudyConfig, m: usize) -> Result<StateSeries> {
    let mut sc = SchemeConfig::new(cfg.t_final, cfg.n_steps)
        .with_scheme(cfg.scheme)
        .with_boundary(cfg.boundary)
        .with_snapshots(vec![cfg.n_steps]);
    sc.record_trajectory = true;
    run(&sc, &cfg.initial, cfg.d, m).map_err(|f| f.error)
}

/// Runs every level and the reference (concurrently when enabled) and
/// tabulates `max_n ||R u_ref(n) - u_m(n)||_2` over all time steps.
pub fn self_convergence_study(cfg: &StudyConfig) -> Result<ConvergenceTable> {
    if cfg.levels.is_empty() || cfg.levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FvmError::Config("study levels must be non-empty and strictly ascending".into()));
    }
    let m_ref = cfg.reference_level();
    let mut jobs = cfg.levels.clone();
    jobs.push(m_ref);
    let mut results = parallel::map_jobs(jobs, |m| study_run(cfg, m));
    let reference = results.pop().expect("reference job")?;
    let ref_traj = reference.trajectory.as_ref().expect("trajectory recorded");

    let mut rows: Vec<ConvergenceRow> = cfg
        .levels
        .iter()
        .zip(results)
        .map(|(&m, res)| {
            let error = res.map_err(|e| e.to_string()).and_then(|series| {
                let traj = series.trajectory.expect("trajectory recorded");
                let mut worst = 0.0f64;
                for (fine, coarse) in ref_traj.iter().zip(&traj) {
                    let r = restrict_levels(fine, cfg.d, m_ref - m).map_err(|e| e.to_string())?;
                    let diff: Vec<f64> = r.iter().zip(coarse).map(|(a, b)| a - b).collect();
                    worst = worst.max(scaled_l2(&diff));
                }
                Ok(worst)
            });
            ConvergenceRow { m, h: cfg.t_final / cfg.n_steps as f64, error, rate: None }
        })
        .collect();
    for i in 0..rows.len().saturating_sub(1) {
        if let (Ok(a), Ok(b)) = (&rows[i].error, &rows[i + 1].error) {
            if *a > 0.0 && *b > 0.0 {
                rows[i].rate = Some((a / b).log2());
            }
        }
    }
    Ok(ConvergenceTable {
        d: cfg.d,
        scheme: cfg.scheme,
        t_final: cfg.t_final,
        n_steps: cfg.n_steps,
        reference_level: m_ref,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdmSnapshot {
    pub step: usize,
    pub time: f64,
    /// Pearson correlation of the two per-cell vectors; `None` when either
    /// is constant.
    pub correlation: Option<f64>,
    pub sup_difference: f64,
    pub fvm_sup: f64,
    pub fdm_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdmComparison {
    pub d: usize,
    pub m: usize,
    pub h: f64,
    pub snapshots: Vec<FdmSnapshot>,
}

fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Largest explicit step for the vertex-graph scheme; its Laplacian has
/// spectrum inside `[0, 4(d-1)]`.
pub fn fdm_max_h(d: usize, m: usize) -> f64 {
    2.0 / (scheme_coefficient(d, m) * 4.0 * (d as f64 - 1.0))
}

/// Explicit FVM (Dirichlet ghost cells) against explicit FDM on the merged
/// vertex graph (outer corners held at zero), same `h` and coefficient.
/// FVM starts from the vertex spline at `vertex`, FDM from the matching
/// spike; the FDM state is compared through its per-cell corner mean.
pub fn fdm_compare(
    d: usize,
    m: usize,
    t_final: f64,
    n_steps: usize,
    vertex: &VertexAddr,
    snapshot_steps: &[usize],
    amplitude: f64,
) -> Result<FdmComparison> {
    let h = t_final / n_steps as f64;
    if h > fdm_max_h(d, m) || h > cfl_max_h(d, m) {
        return Err(FvmError::CflViolation { h, bound: fdm_max_h(d, m).min(cfl_max_h(d, m)), d, m });
    }
    let vg = build_vertex_laplacian(d, m, VertexVariant::Merged)?;
    let lv = vg.laplacian_f64();
    let cell = vertex.lift(m).index(d);
    if cell >= vg.cell_corners.len() || vertex.corner >= d {
        return Err(FvmError::IndexOutOfRange { index: cell, len: vg.cell_corners.len() });
    }
    let mut fdm = vec![0.0; vg.n_vertices()];
    fdm[vg.cell_corners[cell][vertex.corner]] = amplitude;
    for &c in &vg.corner_labels {
        fdm[c] = 0.0;
    }

    let mut sc = SchemeConfig::new(t_final, n_steps).with_snapshots(snapshot_steps.to_vec());
    sc.record_trajectory = false;
    let initial = InitialCondition::VertexSpline { vertex: vertex.clone(), level: None };
    let mut u0 = initial.state(d, m)?;
    u0.iter_mut().for_each(|v| *v *= amplitude);
    let matrix = crate::scheme::assemble(d, m, &sc)?;
    let fvm = crate::scheme::run_state(&matrix, &sc, u0).map_err(|f| f.error)?;

    let hc = h * scheme_coefficient(d, m);
    let cell_mean = |v: &[f64]| -> Vec<f64> {
        vg.cell_corners.iter().map(|cs| cs.iter().map(|&i| v[i]).sum::<f64>() / d as f64).collect()
    };
    let mut out = Vec::new();
    let mut snaps = fvm.snapshots.iter().peekable();
    for step in 0..=n_steps {
        if step > 0 {
            let lu = lv.matvec(&fdm);
            for (x, l) in fdm.iter_mut().zip(lu) {
                *x -= hc * l;
            }
            for &c in &vg.corner_labels {
                fdm[c] = 0.0;
            }
        }
        if let Some(s) = snaps.next_if(|s| s.step == step) {
            let fdm_cells = cell_mean(&fdm);
            let sup_difference =
                s.values.iter().zip(&fdm_cells).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            out.push(FdmSnapshot {
                step,
                time: s.time,
                correlation: correlation(&s.values, &fdm_cells),
                sup_difference,
                fvm_sup: sup_norm(&s.values),
                fdm_sup: sup_norm(&fdm_cells),
            });
        }
    }
    Ok(FdmComparison { d, m, h, snapshots: out })
}
