//! Compressed sparse row storage for the small symmetric operators used here.

use nalgebra::DMatrix;

use crate::parallel;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Copy + PartialEq + Default + std::ops::AddAssign> CsrMatrix<T> {
    /// Square matrix from unsorted triplets; duplicates are summed and
    /// explicit zeros are dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r},{c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        let zero = T::default();
        let keep: Vec<bool> = vals.iter().map(|v| *v != zero).collect();
        let mut k = 0;
        let (mut cols2, mut vals2) = (Vec::new(), Vec::new());
        for (i, &r) in rows.iter().enumerate() {
            if keep[i] {
                row_ptr[r + 1] += 1;
                cols2.push(cols[i]);
                vals2.push(vals[i]);
                k += 1;
            }
        }
        debug_assert_eq!(k, cols2.len());
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols: cols2, vals: vals2 }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => T::default(),
        }
    }

    /// Row-major `(row, col, value)` triples.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        (0..self.n).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.triplets().iter().all(|&(r, c, v)| self.get(c, r) == v)
    }

    pub fn map<U, F: Fn(T) -> U>(&self, f: F) -> CsrMatrix<U> {
        CsrMatrix {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl CsrMatrix<f64> {
    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.vals[k] * x[self.cols[k]];
        }
        acc
    }

    /// `y = A x`, splitting rows across threads for large matrices. Each
    /// output entry is reduced in a fixed order, so results do not depend on
    /// the thread count.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        if parallel::use_parallel(self.n) {
            parallel::fill_rows(y, |r| self.row_dot(r, x));
        } else {
            self.matvec_seq(x, y);
        }
    }

    pub fn matvec_seq(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row_dot(r, x);
        }
    }

    #[cfg(feature = "parallel")]
    pub fn matvec_par(&self, x: &[f64], y: &mut [f64]) {
        parallel::fill_rows(y, |r| self.row_dot(r, x));
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|r| x[r] * self.row_dot(r, x)).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.row(r).map(|(_, v)| v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_summed_zeros_dropped() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![(1, 0, 1.0), (0, 0, 2.0), (0, 0, 1.0), (0, 1, 0.0), (1, 1, -1.0)],
        );
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.matvec(&[1.0, 2.0]), vec![3.0, -1.0]);
    }

    #[test]
    fn quadratic_form_matches_dense() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)]);
        assert!(m.is_symmetric());
        let x = [1.0, 3.0];
        let dense = m.to_dense();
        let v = nalgebra::DVector::from_row_slice(&x);
        assert!((m.quadratic_form(&x) - v.dot(&(&dense * &v))).abs() < 1e-14);
    }
}
