//! Thin switch between rayon and sequential execution.
//!
//! With the `parallel` feature disabled every helper runs on the calling
//! thread. Results are identical either way: work is split by output slot
//! and no floating-point reduction crosses a thread boundary.

/// Row count below which a mat-vec stays on one thread.
pub const PAR_ROW_THRESHOLD: usize = 2048;

pub fn use_parallel(n: usize) -> bool {
    cfg!(feature = "parallel") && n >= PAR_ROW_THRESHOLD
}

/// `out[i] = f(i)` for every slot.
#[cfg(feature = "parallel")]
pub fn fill_rows<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    out.par_iter_mut().enumerate().with_min_len(256).for_each(|(i, y)| *y = f(i));
}

#[cfg(not(feature = "parallel"))]
pub fn fill_rows<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    for (i, y) in out.iter_mut().enumerate() {
        *y = f(i);
    }
}

/// Maps independent jobs, preserving input order.
#[cfg(feature = "parallel")]
pub fn map_jobs<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_jobs<I, O, F>(items: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Runs two closures, concurrently when rayon is enabled.
#[cfg(feature = "parallel")]
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    (a(), b())
}
