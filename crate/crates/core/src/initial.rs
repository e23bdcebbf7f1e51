//! Initial cell averages `u^0_J`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{FvmError, Result};
use crate::simplex::{cell_count, vertex_key, VertexAddr, Word};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// 1 on one cell, 0 elsewhere.
    Spike(usize),
    /// Harmonic spline equal to 1 at `vertex` and 0 at the other vertices of
    /// `V_level`; `level = None` means the mesh level. Each cell receives
    /// the mean of the spline over its d corners.
    VertexSpline { vertex: VertexAddr, level: Option<usize> },
    /// Explicit per-cell values, optionally remembering the source file.
    Custom { values: Vec<f64>, source: Option<PathBuf> },
}

impl InitialCondition {
    pub fn spline_at(word: Word, corner: usize) -> Self {
        InitialCondition::VertexSpline { vertex: VertexAddr { word, corner }, level: None }
    }

    /// Reads one value per line; blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            values.push(line.parse::<f64>().map_err(|_| {
                FvmError::Config(format!("{}:{}: not a number: '{line}'", path.display(), lineno + 1))
            })?);
        }
        Ok(InitialCondition::Custom { values, source: Some(path.to_path_buf()) })
    }

    pub fn state(&self, d: usize, m: usize) -> Result<Vec<f64>> {
        let n = cell_count(d, m)?;
        match self {
            InitialCondition::Spike(index) => {
                if *index >= n {
                    return Err(FvmError::IndexOutOfRange { index: *index, len: n });
                }
                let mut u = vec![0.0; n];
                u[*index] = 1.0;
                Ok(u)
            }
            InitialCondition::Custom { values, .. } => {
                if values.len() != n {
                    return Err(FvmError::LengthMismatch { got: values.len(), expected: n });
                }
                Ok(values.clone())
            }
            InitialCondition::VertexSpline { vertex, level } => {
                spline_state(vertex, level.unwrap_or(m), d, m)
            }
        }
    }
}

/// Corner values of child `i` (1-based) of a cell whose corner values are
/// `a`: the harmonic extension puts `(a_i + a_j + sum a) / (d + 2)` at the
/// new vertex between corners i and j.
pub fn harmonic_child(a: &[f64], i: usize) -> Vec<f64> {
    let d = a.len();
    let total: f64 = a.iter().sum();
    let ai = a[i - 1];
    (0..d).map(|j| if j == i - 1 { ai } else { (ai + a[j] + total) / (d as f64 + 2.0) }).collect()
}

fn spline_state(vertex: &VertexAddr, level: usize, d: usize, m: usize) -> Result<Vec<f64>> {
    vertex.word.check(d)?;
    if vertex.corner >= d {
        return Err(FvmError::IndexOutOfRange { index: vertex.corner, len: d });
    }
    if vertex.word.level() > level {
        return Err(FvmError::Config(format!(
            "spline vertex word '{}' is longer than the spline level {level}",
            vertex.word
        )));
    }
    if level > m {
        return Err(FvmError::Config(format!("spline level {level} exceeds mesh level {m}")));
    }
    let target = vertex_key(&vertex.lift(level), vertex.corner, d);
    let n_coarse = cell_count(d, level)?;
    let sub = cell_count(d, m - level)?;
    let mut u = vec![0.0; n_coarse * sub];
    for coarse in 0..n_coarse {
        let w = Word::from_index(coarse, d, level);
        let corners: Vec<f64> =
            (0..d).map(|c| if vertex_key(&w, c, d) == target { 1.0 } else { 0.0 }).collect();
        if corners.iter().all(|&v| v == 0.0) {
            continue;
        }
        for s in 0..sub {
            let suffix = Word::from_index(s, d, m - level);
            let mut vals = corners.clone();
            for &letter in suffix.letters() {
                vals = harmonic_child(&vals, letter as usize);
            }
            u[coarse * sub + s] = vals.iter().sum::<f64>() / d as f64;
        }
    }
    Ok(u)
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Spike(i) => write!(f, "spike:{i}"),
            InitialCondition::VertexSpline { vertex, level } => {
                write!(f, "spline:{}:{}", vertex.word, vertex.corner)?;
                if let Some(l) = level {
                    write!(f, ":{l}")?;
                }
                Ok(())
            }
            InitialCondition::Custom { source: Some(p), .. } => write!(f, "file:{}", p.display()),
            InitialCondition::Custom { values, source: None } => write!(f, "custom[{}]", values.len()),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = FvmError;

    /// `spike:IDX`, `spline:WORD:CORNER[:LEVEL]` or `file:PATH`. Words are
    /// checked against d later, when the state is built.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || FvmError::Config(format!("bad initial condition '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "spike" => Ok(InitialCondition::Spike(rest.parse().map_err(|_| bad())?)),
            "spline" => {
                let parts: Vec<&str> = rest.split(':').collect();
                if !(2..=3).contains(&parts.len()) {
                    return Err(bad());
                }
                let word = Word::parse(parts[0], 9)?;
                let corner = parts[1].parse().map_err(|_| bad())?;
                let level = match parts.get(2) {
                    Some(l) => Some(l.parse().map_err(|_| bad())?),
                    None => None,
                };
                Ok(InitialCondition::VertexSpline { vertex: VertexAddr { word, corner }, level })
            }
            "file" => InitialCondition::from_file(Path::new(rest)),
            _ => Err(bad()),
        }
    }
}
