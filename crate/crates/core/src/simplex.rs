//! Sierpinski simplex geometry: the contraction family, cell addresses and
//! the standard self-similar measure.
//!
//! Words are composed with the leftmost letter outermost, so the cell of
//! `[w1, w2, ..., wm]` is `f_{w1}(f_{w2}(... f_{wm}(K)))`. Letters are
//! 1-based; point `P_{i-1}` is the fixed point of `f_i`.

use std::fmt;

use num_rational::Ratio;

use crate::error::{FvmError, Result};

/// The branching number `d` together with the fixed points `P_0..P_{d-1}`
/// embedded in `R^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSpace {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl SimplexSpace {
    /// Regular (d-1)-simplex with unit edge length, `P_0` at the origin.
    pub fn regular(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(FvmError::InvalidDimension(d));
        }
        let dim = d - 1;
        let mut points: Vec<Vec<f64>> = vec![vec![0.0; dim]];
        for k in 1..d {
            let mut centroid = vec![0.0; dim];
            for p in &points {
                for (c, x) in centroid.iter_mut().zip(p) {
                    *c += x / k as f64;
                }
            }
            let r2: f64 = centroid.iter().map(|c| c * c).sum();
            let mut next = centroid;
            next[k - 1] = (1.0 - r2).sqrt();
            points.push(next);
        }
        Ok(Self { d, points })
    }

    /// Custom embedding; rejects wrong dimensions and degenerate simplices.
    pub fn with_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points.len();
        if d < 2 {
            return Err(FvmError::InvalidDimension(d));
        }
        for p in &points {
            if p.len() != d - 1 {
                return Err(FvmError::PointDimension { got: p.len(), expected: d - 1 });
            }
        }
        let dim = d - 1;
        let edges = nalgebra::DMatrix::from_fn(dim, dim, |r, c| points[c + 1][r] - points[0][r]);
        let scale = edges.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
        if edges.determinant().abs() <= 1e-12 * scale.powi(dim as i32) {
            return Err(FvmError::DegenerateSimplex);
        }
        Ok(Self { d, points })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Fixed point `P_i` (0-based).
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.d - 1];
        for p in &self.points {
            for (ci, x) in c.iter_mut().zip(p) {
                *ci += x;
            }
        }
        c.iter_mut().for_each(|x| *x /= self.d as f64);
        c
    }

    /// `f_i(x) = (x + P_{i-1}) / 2`.
    pub fn apply_contraction(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        if i == 0 || i > self.d {
            return Err(FvmError::InvalidLetter { letter: i, d: self.d });
        }
        if x.len() != self.d - 1 {
            return Err(FvmError::PointDimension { got: x.len(), expected: self.d - 1 });
        }
        Ok(x.iter().zip(&self.points[i - 1]).map(|(a, p)| 0.5 * (a + p)).collect())
    }

    /// Image of `x` under `F_w`.
    pub fn apply_word(&self, w: &Word, x: &[f64]) -> Result<Vec<f64>> {
        w.check(self.d)?;
        let mut y = x.to_vec();
        for &letter in w.letters().iter().rev() {
            y = self.apply_contraction(letter as usize, &y)?;
        }
        Ok(y)
    }

    /// `F_w` applied to the centroid of the base simplex.
    pub fn cell_barycenter(&self, w: &Word) -> Result<Vec<f64>> {
        self.apply_word(w, &self.centroid())
    }
}

/// Cell address over the alphabet `{1..d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<u8>,
}

impl Word {
    pub fn new(letters: Vec<u8>, d: usize) -> Result<Self> {
        let w = Self { letters };
        w.check(d)?;
        Ok(w)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Word of letter `i` repeated `m` times.
    pub fn repeated(i: u8, m: usize) -> Self {
        Self { letters: vec![i; m] }
    }

    /// Inverse of [`Word::index`].
    pub fn from_index(mut index: usize, d: usize, m: usize) -> Self {
        let mut letters = vec![0u8; m];
        for slot in letters.iter_mut().rev() {
            *slot = (index % d) as u8 + 1;
            index /= d;
        }
        Self { letters }
    }

    /// Parses a digit string such as `"123"`; the empty string is the empty word.
    pub fn parse(s: &str, d: usize) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|v| v as u8)
                    .ok_or_else(|| FvmError::Config(format!("bad word letter '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters, d)
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn level(&self) -> usize {
        self.letters.len()
    }

    pub fn check(&self, d: usize) -> Result<()> {
        match self.letters.iter().find(|&&l| l == 0 || l as usize > d) {
            Some(&l) => Err(FvmError::InvalidLetter { letter: l as usize, d }),
            None => Ok(()),
        }
    }

    /// Zero-based lexicographic index among words of the same length.
    pub fn index(&self, d: usize) -> usize {
        self.letters.iter().fold(0, |acc, &l| acc * d + (l as usize - 1))
    }

    pub fn push(&mut self, letter: u8) {
        self.letters.push(letter);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A point of `V_m` written as `F_w(P_corner)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexAddr {
    pub word: Word,
    /// 0-based index of the fixed point `P_corner`.
    pub corner: usize,
}

impl VertexAddr {
    /// The same point addressed through a word of length `m >= word.level()`.
    /// `P_c` is fixed by `f_{c+1}`, so padding with that letter is exact.
    pub fn lift(&self, m: usize) -> Word {
        let mut w = self.word.clone();
        while w.level() < m {
            w.push(self.corner as u8 + 1);
        }
        w
    }
}

/// Exact barycentric coordinates of `F_w(P_corner)` scaled by `2^m`.
/// Two vertices at the same level coincide iff their keys are equal.
pub fn vertex_key(w: &Word, corner: usize, d: usize) -> Vec<u64> {
    let m = w.level();
    let mut key = vec![0u64; d];
    key[corner] += 1;
    for (k, &l) in w.letters().iter().enumerate() {
        key[l as usize - 1] += 1u64 << (m - 1 - k);
    }
    key
}

/// Self-similar measure weights `mu_i = R_i^{D_H}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    weights: Vec<f64>,
    ratios: Vec<f64>,
    hausdorff_dim: f64,
}

impl MeasureSpec {
    /// All ratios 1/2, `mu_i = 1/d`.
    pub fn standard(d: usize) -> Self {
        Self {
            weights: vec![1.0 / d as f64; d],
            ratios: vec![0.5; d],
            hausdorff_dim: (d as f64).ln() / 2f64.ln(),
        }
    }

    /// Solves `sum R_i^D = 1` for the similarity dimension and sets `mu_i = R_i^D`.
    pub fn from_ratios(ratios: Vec<f64>) -> Result<Self> {
        if ratios.len() < 2 {
            return Err(FvmError::InvalidMeasure("need at least two ratios".into()));
        }
        if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(FvmError::InvalidMeasure("ratios must lie in (0,1)".into()));
        }
        let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
        // f is strictly decreasing with f(0) = n - 1 > 0.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while f(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let dim = 0.5 * (lo + hi);
        let weights = ratios.iter().map(|r| r.powf(dim)).collect();
        Ok(Self { weights, ratios, hausdorff_dim: dim })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn hausdorff_dim(&self) -> f64 {
        self.hausdorff_dim
    }

    pub fn is_standard(&self) -> bool {
        let d = self.weights.len() as f64;
        self.ratios.iter().all(|&r| r == 0.5) && self.weights.iter().all(|&w| (w - 1.0 / d).abs() <= 1e-12)
    }
}

/// Number of vertices of the level-m vertex graph, `(d^{m+1} + d) / 2`.
pub fn vertex_count(d: usize, m: usize) -> Result<u64> {
    if d < 2 {
        return Err(FvmError::InvalidDimension(d));
    }
    let overflow = FvmError::Overflow { what: "vertex count", d, m };
    let pow = (d as u64).checked_pow(m as u32 + 1).ok_or(overflow.clone())?;
    Ok(pow.checked_add(d as u64).ok_or(overflow)? / 2)
}

/// Same count through `N_m = d N_{m-1} - d(d-1)/2`, `N_0 = d`.
pub fn vertex_count_recursive(d: usize, m: usize) -> Result<u64> {
    if d < 2 {
        return Err(FvmError::InvalidDimension(d));
    }
    let d64 = d as u64;
    let shared = d64 * (d64 - 1) / 2;
    let mut n = d64;
    for level in 1..=m {
        n = n.checked_mul(d64).ok_or(FvmError::Overflow { what: "vertex count", d, m: level })? - shared;
    }
    Ok(n)
}

/// Number of m-cells, `d^m`.
pub fn cell_count(d: usize, m: usize) -> Result<usize> {
    d.checked_pow(m as u32).ok_or(FvmError::Overflow { what: "cell count", d, m })
}

/// `mu(C_m) = d^{-m}` under the standard measure, exactly.
pub fn cell_measure(d: usize, m: usize) -> Result<Ratio<u64>> {
    if d < 2 {
        return Err(FvmError::InvalidDimension(d));
    }
    let den = (d as u64).checked_pow(m as u32).ok_or(FvmError::Overflow { what: "cell measure", d, m })?;
    Ok(Ratio::new(1, den))
}
