//! Spectral decimation maps, dense cell-Laplacian spectra, CFL bounds and
//! spectral radii of the time-stepping operators.

use std::fmt;

use nalgebra::SymmetricEigen;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;

use crate::error::{FvmError, Result};
use crate::graph::{BoundaryMode, CellLaplacian};
use crate::parallel;
use crate::scheme::{Scheme, SchemeMatrix};

/// Largest matrix handed to the dense eigensolver.
pub const DENSE_BUDGET: usize = 4096;

/// Absolute tolerance for grouping eigenvalues and for calling a
/// decimation residual conforming.
pub const GROUP_TOL: f64 = 1e-8;

/// `Phi(x) = x (d + 2 - x)`.
pub fn phi(d: usize, x: f64) -> f64 {
    x * (d as f64 + 2.0 - x)
}

/// Branch point `(d+2)^2 / 4` of the inverse maps.
pub fn branch_point(d: usize) -> f64 {
    let s = d as f64 + 2.0;
    s * s / 4.0
}

/// `(phi_minus(x), phi_plus(x))`, the two preimages of `x` under [`phi`].
pub fn phi_branches(d: usize, x: f64) -> Result<(f64, f64)> {
    let bound = branch_point(d);
    if x > bound {
        return Err(FvmError::BranchDomain { x, bound });
    }
    let s = d as f64 + 2.0;
    let root = (s * s - 4.0 * x).max(0.0).sqrt();
    Ok(((s - root) / 2.0, (s + root) / 2.0))
}

/// `d/dx phi_minus`, singular at the branch point.
pub fn phi_minus_slope(d: usize, x: f64) -> f64 {
    let s = d as f64 + 2.0;
    1.0 / (s * s - 4.0 * x).sqrt()
}

/// `d/dx phi_plus`.
pub fn phi_plus_slope(d: usize, x: f64) -> f64 {
    -phi_minus_slope(d, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    DirectEigensolver,
    PhiMinusLift,
    PhiPlusLift,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::DirectEigensolver => "direct-eigensolver",
            Provenance::PhiMinusLift => "phi-minus-lift",
            Provenance::PhiPlusLift => "phi-plus-lift",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    pub value: f64,
    pub multiplicity: usize,
    pub provenance: Provenance,
    /// `dist(Phi(value), spec(L_{m-1}))`, when the coarser level exists.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub d: usize,
    pub level: usize,
    pub boundary: BoundaryMode,
    pub groups: Vec<EigenGroup>,
}

impl SpectrumReport {
    pub fn eigenvalue_count(&self) -> usize {
        self.groups.iter().map(|g| g.multiplicity).sum()
    }

    /// Expanded, ascending eigenvalue list (group representatives repeated).
    pub fn values(&self) -> Vec<f64> {
        self.groups.iter().flat_map(|g| std::iter::repeat_n(g.value, g.multiplicity)).collect()
    }
}

/// Ascending eigenvalues of a symmetric cell Laplacian.
pub fn eigenvalues(lap: &CellLaplacian) -> Result<Vec<f64>> {
    let n = lap.dim();
    if n > DENSE_BUDGET {
        return Err(FvmError::EigenBudget { n, budget: DENSE_BUDGET });
    }
    let eig = SymmetricEigen::new(lap.matrix().to_dense());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Groups a sorted list into `(value, multiplicity)` with chained tolerance.
pub fn group_eigenvalues(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some((sum, count, last)) if v - *last <= tol => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(sum, count, _)| (sum / count as f64, count)).collect()
}

/// Full dense eigendecomposition, every value tagged as a direct result.
pub fn direct_spectrum(lap: &CellLaplacian) -> Result<SpectrumReport> {
    let vals = eigenvalues(lap)?;
    Ok(SpectrumReport {
        d: lap.d(),
        level: lap.level(),
        boundary: lap.boundary(),
        groups: group_eigenvalues(&vals, GROUP_TOL)
            .into_iter()
            .map(|(value, multiplicity)| EigenGroup {
                value,
                multiplicity,
                provenance: Provenance::DirectEigensolver,
                residual: None,
            })
            .collect(),
    })
}

fn nearest_distance(sorted: &[f64], x: f64) -> f64 {
    let pos = sorted.partition_point(|&v| v < x);
    let mut best = f64::INFINITY;
    if pos < sorted.len() {
        best = best.min((sorted[pos] - x).abs());
    }
    if pos > 0 {
        best = best.min((sorted[pos - 1] - x).abs());
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCheck {
    pub eigenvalue: f64,
    pub multiplicity: usize,
    /// `dist(Phi(eigenvalue), spec(L_{m-1}))`.
    pub residual: f64,
    pub conforming: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftCheck {
    pub coarse: f64,
    pub minus: f64,
    pub plus: f64,
    pub minus_residual: f64,
    pub plus_residual: f64,
}

/// Diagnostic comparison of `spec(L_m)` against `spec(L_{m-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecimationReport {
    pub d: usize,
    pub level: usize,
    pub boundary: BoundaryMode,
    pub forward: Vec<ForwardCheck>,
    pub lifts: Vec<LiftCheck>,
}

impl DecimationReport {
    pub fn conforming(&self) -> Vec<f64> {
        self.forward.iter().filter(|f| f.conforming).map(|f| f.eigenvalue).collect()
    }

    pub fn exceptional(&self) -> Vec<f64> {
        self.forward.iter().filter(|f| !f.conforming).map(|f| f.eigenvalue).collect()
    }
}

/// Computes both spectra directly and reports how well `Phi` and its
/// branches relate them. Never fails on a mismatch; only on size.
pub fn verify_decimation(d: usize, m: usize, boundary: BoundaryMode) -> Result<DecimationReport> {
    if m == 0 {
        return Err(FvmError::Config("decimation needs m >= 1".into()));
    }
    let n = crate::simplex::cell_count(d, m)?;
    if n > DENSE_BUDGET {
        return Err(FvmError::EigenBudget { n, budget: DENSE_BUDGET });
    }
    let (fine, coarse) = parallel::join(
        || CellLaplacian::for_level(d, m, boundary).and_then(|l| eigenvalues(&l)),
        || CellLaplacian::for_level(d, m - 1, boundary).and_then(|l| eigenvalues(&l)),
    );
    let (fine, coarse) = (fine?, coarse?);
    let forward = group_eigenvalues(&fine, GROUP_TOL)
        .into_iter()
        .map(|(value, multiplicity)| {
            let residual = nearest_distance(&coarse, phi(d, value));
            ForwardCheck { eigenvalue: value, multiplicity, residual, conforming: residual <= GROUP_TOL }
        })
        .collect();
    let lifts = group_eigenvalues(&coarse, GROUP_TOL)
        .into_iter()
        .filter_map(|(nu, _)| {
            let (minus, plus) = phi_branches(d, nu).ok()?;
            Some(LiftCheck {
                coarse: nu,
                minus,
                plus,
                minus_residual: nearest_distance(&fine, minus),
                plus_residual: nearest_distance(&fine, plus),
            })
        })
        .collect();
    Ok(DecimationReport { d, level: m, boundary, forward, lifts })
}

/// Direct spectrum annotated with decimation provenance: a conforming
/// eigenvalue below the midpoint `(d+2)/2` is a `phi_minus` lift, above it a
/// `phi_plus` lift.
pub fn annotated_spectrum(d: usize, m: usize, boundary: BoundaryMode) -> Result<SpectrumReport> {
    if m == 0 {
        return direct_spectrum(&CellLaplacian::for_level(d, 0, boundary)?);
    }
    let report = verify_decimation(d, m, boundary)?;
    let mid = (d as f64 + 2.0) / 2.0;
    let groups = report
        .forward
        .iter()
        .map(|f| EigenGroup {
            value: f.eigenvalue,
            multiplicity: f.multiplicity,
            provenance: match (f.conforming, f.eigenvalue <= mid) {
                (false, _) => Provenance::DirectEigensolver,
                (true, true) => Provenance::PhiMinusLift,
                (true, false) => Provenance::PhiPlusLift,
            },
            residual: Some(f.residual),
        })
        .collect();
    Ok(SpectrumReport { d, level: m, boundary, groups })
}

/// Largest explicit step satisfying `h (d+2)^m <= 2 / d^2`.
pub fn cfl_max_h(d: usize, m: usize) -> f64 {
    2.0 / ((d * d) as f64 * (d as f64 + 2.0).powi(m as i32))
}

/// Exact test of `h (d+2)^m <= 2/d^2` on the binary value of `h`.
pub fn cfl_admissible(h: f64, d: usize, m: usize) -> bool {
    let Some(h) = BigRational::from_f64(h) else {
        return false;
    };
    let scale = BigInt::from(d * d) * BigInt::from(d + 2).pow(m as u32);
    h * BigRational::from_integer(scale) <= BigRational::from_integer(BigInt::from(2))
}

/// Exact test with `h = t / n`, where `t` is taken at its binary value.
pub fn cfl_admissible_steps(t: f64, n: u64, d: usize, m: usize) -> bool {
    let Some(t) = BigRational::from_f64(t) else {
        return false;
    };
    let scale = BigInt::from(d * d) * BigInt::from(d + 2).pow(m as u32);
    t * BigRational::from_integer(scale) <= BigRational::from_integer(BigInt::from(2u64) * BigInt::from(n))
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 200_000;

fn power_iteration<F: Fn(&[f64]) -> Vec<f64>>(n: usize, apply: F) -> Result<f64> {
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|a| *a /= nx);
    let mut estimate = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let y = apply(&x);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ny = norm(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        x = y.into_iter().map(|a| a / ny).collect();
        if (rayleigh - estimate).abs() <= POWER_TOL * rayleigh.abs().max(1.0) {
            return Ok(rayleigh);
        }
        estimate = rayleigh;
    }
    Err(FvmError::PowerIteration { iterations: POWER_MAX_ITER })
}

/// Extreme eigenvalues of `L` by power iteration (on `L` and `2d I - L`).
pub fn extreme_eigenvalues_iterative(lap: &CellLaplacian) -> Result<(f64, f64)> {
    let shift = 2.0 * lap.d() as f64 + lap.boundary().ghost_increment();
    let max = power_iteration(lap.dim(), |x| lap.apply(x))?;
    let top = power_iteration(lap.dim(), |x| {
        let lx = lap.apply(x);
        x.iter().zip(lx).map(|(a, b)| shift * a - b).collect()
    })?;
    Ok((shift - top, max))
}

/// `rho = max_i |gamma_i|` of the amplification operator, using the
/// eigenvalues `lambda_i` of `L`: `gamma = 1 - h c lambda` (explicit) or
/// `1 / (1 + h c lambda)` (implicit). `A` is symmetric, so this equals
/// `sqrt(lambda_max(A^T A))`.
pub fn spectral_radius(scheme: &SchemeMatrix) -> Result<f64> {
    let lap = scheme.laplacian();
    let (lo, hi) = if lap.dim() <= DENSE_BUDGET {
        let vals = eigenvalues(lap)?;
        (vals[0], vals[vals.len() - 1])
    } else {
        extreme_eigenvalues_iterative(lap)?
    };
    let hc = scheme.step_coefficient();
    let gamma = |lam: f64| match scheme.scheme() {
        Scheme::Explicit => 1.0 - hc * lam,
        Scheme::Implicit => 1.0 / (1.0 + hc * lam),
    };
    // gamma is monotone in lambda, so the extremes bound every |gamma_i|.
    Ok(gamma(lo).abs().max(gamma(hi).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert_eq!(phi(3, 0.0), 0.0);
        assert_eq!(phi(3, 4.0), 4.0);
        assert_eq!(phi(3, 2.0), 6.0);
    }

    #[test]
    fn branch_examples() {
        assert_eq!(phi_branches(3, 0.0).unwrap(), (0.0, 5.0));
        assert_eq!(phi_branches(3, 25.0 / 4.0).unwrap(), (2.5, 2.5));
        assert_eq!(phi_branches(4, 0.0).unwrap(), (0.0, 6.0));
        assert_eq!(phi_branches(3, 7.0), Err(FvmError::BranchDomain { x: 7.0, bound: 6.25 }));
    }

    #[test]
    fn fixed_points_and_slopes() {
        for d in 2..7 {
            let df = d as f64;
            assert_eq!(phi_branches(d, 0.0).unwrap().0, 0.0);
            let plus = phi_branches(d, df + 1.0).unwrap().1;
            assert!((plus - (df + 1.0)).abs() < 1e-12);
            assert!((phi_minus_slope(d, 0.0) - 1.0 / (df + 2.0)).abs() < 1e-15);
            assert!((phi_plus_slope(d, df + 1.0).abs() - 1.0 / df).abs() < 1e-15);
        }
    }

    #[test]
    fn direct_spectrum_examples() {
        let neu = CellLaplacian::for_level(3, 1, BoundaryMode::NeumannCells).unwrap();
        let rep = direct_spectrum(&neu).unwrap();
        assert_eq!(rep.groups.len(), 2);
        assert!(rep.groups[0].value.abs() < 1e-12 && rep.groups[0].multiplicity == 1);
        assert!((rep.groups[1].value - 3.0).abs() < 1e-12 && rep.groups[1].multiplicity == 2);

        let ghost = CellLaplacian::for_level(3, 1, BoundaryMode::dirichlet()).unwrap();
        let rep = direct_spectrum(&ghost).unwrap();
        assert!((rep.groups[0].value - 2.0).abs() < 1e-12 && rep.groups[0].multiplicity == 1);
        assert!((rep.groups[1].value - 5.0).abs() < 1e-12 && rep.groups[1].multiplicity == 2);
    }

    #[test]
    fn grouping_chains() {
        let g = group_eigenvalues(&[0.0, 1.0, 1.0 + 5e-9, 1.0 + 1e-8, 2.0], 1e-8);
        assert_eq!(g.len(), 3);
        assert_eq!(g[1].1, 3);
    }

    #[test]
    fn cfl_examples() {
        assert!((cfl_max_h(3, 1) - 2.0 / 45.0).abs() < 1e-17);
        assert!((cfl_max_h(3, 6) - 2.0 / 140625.0).abs() < 1e-20);
        assert_eq!(cfl_max_h(4, 0), 0.125);
        assert!(cfl_admissible(0.125, 4, 0));
        assert!(!cfl_admissible(0.125 + 1e-16, 4, 0));
        assert!(cfl_admissible(5e-6, 3, 6));
        assert!(cfl_admissible_steps(1.0, 200_000, 3, 6));
        assert!(cfl_admissible_steps(2.0, 45, 3, 1));
        assert!(!cfl_admissible_steps(2.0, 44, 3, 1));
    }

    #[test]
    fn cfl_bound_monotone() {
        for d in 2..6 {
            for m in 0..8 {
                assert!(cfl_max_h(d, m + 1) < cfl_max_h(d, m));
                assert!(cfl_max_h(d + 1, m) < cfl_max_h(d, m));
            }
        }
    }

    #[test]
    fn iterative_extremes_match_dense() {
        let lap = CellLaplacian::for_level(3, 3, BoundaryMode::dirichlet()).unwrap();
        let vals = eigenvalues(&lap).unwrap();
        let (lo, hi) = extreme_eigenvalues_iterative(&lap).unwrap();
        assert!((hi - vals[vals.len() - 1]).abs() < 1e-6);
        assert!((lo - vals[0]).abs() < 1e-6);
    }
}
