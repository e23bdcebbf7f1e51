//! Conjugate gradients for the SPD systems `(I + s L) v = b`.

use crate::error::{FvmError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` given as a closure,
/// starting from the initial guess already in `x`. Stops when
/// `||b - A x|| <= tol ||b||`.
pub fn solve<F>(apply: F, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, relative_residual: 0.0 });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    let target = tol * b_norm;
    for it in 0..=max_iter {
        if rr.sqrt() <= target {
            return Ok(CgOutcome { iterations: it, relative_residual: rr.sqrt() / b_norm });
        }
        if it == max_iter {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_next;
    }
    Err(FvmError::CgDivergence { iterations: max_iter, residual: rr.sqrt() / b_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd() {
        // [[4,1],[1,3]] x = [1,2] -> x = [1/11, 7/11]
        let a = |x: &[f64], y: &mut [f64]| {
            y[0] = 4.0 * x[0] + x[1];
            y[1] = x[0] + 3.0 * x[1];
        };
        let mut x = vec![0.0; 2];
        let out = solve(a, &[1.0, 2.0], &mut x, 1e-14, 10).unwrap();
        assert!(out.iterations <= 2);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs() {
        let mut x = vec![3.0; 3];
        let out = solve(|x, y| y.copy_from_slice(x), &[0.0; 3], &mut x, 1e-10, 5).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn reports_cap() {
        let a = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = (i + 1) as f64 * x[i];
            }
        };
        let mut x = vec![0.0; 5];
        let err = solve(a, &[1.0; 5], &mut x, 1e-14, 2).unwrap_err();
        assert!(matches!(err, FvmError::CgDivergence { iterations: 2, .. }));
    }
}
