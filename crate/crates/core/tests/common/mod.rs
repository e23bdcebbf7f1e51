//! Independent oracles: exact rational geometry and golden files.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;

pub type Q = Ratio<i64>;

/// Base-d digits of `index`, most significant first, as letters 1..=d.
pub fn letters(index: usize, d: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % d + 1;
        rest /= d;
    }
    out
}

/// Barycentric coordinates of the d corners of cell `word`, exact.
pub fn cell_corners(word: &[usize], d: usize) -> Vec<Vec<Q>> {
    (0..d)
        .map(|k| {
            let mut x = vec![Q::from_integer(0); d];
            x[k] = Q::from_integer(1);
            for &l in word.iter().rev() {
                for (i, xi) in x.iter_mut().enumerate() {
                    let p = if i == l - 1 { Q::from_integer(1) } else { Q::from_integer(0) };
                    *xi = (*xi + p) / 2;
                }
            }
            x
        })
        .collect()
}

/// Edges `(a, b)`, `a < b`, between cells sharing a corner point.
pub fn brute_force_edges(d: usize, m: usize) -> BTreeSet<(usize, usize)> {
    let n = d.pow(m as u32);
    let corners: Vec<Vec<Vec<Q>>> = (0..n).map(|i| cell_corners(&letters(i, d, m), d)).collect();
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            if corners[a].iter().any(|p| corners[b].contains(p)) {
                edges.insert((a, b));
            }
        }
    }
    edges
}

/// Vertex Laplacian with vertices numbered in order of first appearance
/// while scanning cells, then corners.
pub fn brute_force_vertex_laplacian(d: usize, m: usize) -> (usize, HashMap<(usize, usize), i64>) {
    let n = d.pow(m as u32);
    let mut ids: HashMap<Vec<Q>, usize> = HashMap::new();
    let mut lap: HashMap<(usize, usize), i64> = HashMap::new();
    for c in 0..n {
        let vs: Vec<usize> = cell_corners(&letters(c, d, m), d)
            .into_iter()
            .map(|p| {
                let next = ids.len();
                *ids.entry(p).or_insert(next)
            })
            .collect();
        for &p in &vs {
            for &q in &vs {
                if p != q {
                    *lap.entry((p, q)).or_insert(0) -= 1;
                    *lap.entry((p, p)).or_insert(0) += 1;
                }
            }
        }
    }
    (ids.len(), lap)
}

/// `(value, multiplicity)` rows of a golden CSV.
pub fn golden_spectrum(name: &str) -> Vec<(f64, usize)> {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    text.lines()
        .skip(1)
        .map(|l| {
            let (v, k) = l.split_once(',').unwrap();
            (v.parse().unwrap(), k.parse().unwrap())
        })
        .collect()
}

/// Max column of a snapshot CSV (`...,value` last).
pub fn snapshot_sup(csv: &str) -> f64 {
    csv.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max)
}
