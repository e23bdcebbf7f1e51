//! CSV and text writers. Floats use Rust's shortest round-trip formatting,
//! so every written value parses back to the identical `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{ConvergenceTable, FdmComparison};
use crate::error::Result;
use crate::scheme::Snapshot;
use crate::simplex::{cell_count, cell_measure, SimplexSpace, Word};
use crate::sparse::CsrMatrix;
use crate::spectral::SpectrumReport;

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn coord_header(d: usize) -> String {
    (1..d).map(|k| format!(",x{k}")).collect()
}

fn coords(p: &[f64]) -> String {
    p.iter().map(|x| format!(",{}", num(*x))).collect()
}

/// `word,level,x1..x_{d-1},measure`, one row per m-cell barycentre.
pub fn write_geometry<W: Write>(out: &mut W, space: &SimplexSpace, m: usize) -> Result<()> {
    let d = space.d();
    let mu = cell_measure(d, m)?;
    let mu = *mu.numer() as f64 / *mu.denom() as f64;
    writeln!(out, "word,level{},measure", coord_header(d))?;
    for i in 0..cell_count(d, m)? {
        let w = Word::from_index(i, d, m);
        let b = space.cell_barycenter(&w)?;
        writeln!(out, "{w},{m}{},{}", coords(&b), num(mu))?;
    }
    Ok(())
}

/// `step,time,word,x1..x_{d-1},value`.
pub fn write_snapshot<W: Write>(out: &mut W, space: &SimplexSpace, m: usize, snap: &Snapshot) -> Result<()> {
    let d = space.d();
    writeln!(out, "step,time,word{},value", coord_header(d))?;
    let time = num(snap.time);
    for (i, v) in snap.values.iter().enumerate() {
        let w = Word::from_index(i, d, m);
        let b = space.cell_barycenter(&w)?;
        writeln!(out, "{},{time},{w}{},{}", snap.step, coords(&b), num(*v))?;
    }
    Ok(())
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snapshot_{step:08}.csv"))
}

/// `key = value` lines.
pub fn write_summary<W: Write>(out: &mut W, entries: &[(String, String)]) -> Result<()> {
    for (k, v) in entries {
        writeln!(out, "{k} = {v}")?;
    }
    Ok(())
}

/// Matrix Market coordinate format, 1-based indices.
pub fn write_matrix_market<W: Write>(out: &mut W, a: &CsrMatrix<f64>) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.dim(), a.dim(), a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(out, "{} {} {}", r + 1, c + 1, num(v))?;
    }
    Ok(())
}

/// Inverse of [`write_matrix_market`] (for the writer's own output).
pub fn read_matrix_market(text: &str) -> Result<CsrMatrix<f64>> {
    let bad = |msg: &str| crate::FvmError::Config(format!("matrix market: {msg}"));
    let mut lines = text.lines().filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let header: Vec<usize> = lines
        .next()
        .ok_or_else(|| bad("missing size line"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("bad size line")))
        .collect::<Result<_>>()?;
    if header.len() != 3 || header[0] != header[1] {
        return Err(bad("expected a square size line"));
    }
    let mut triplets = Vec::with_capacity(header[2]);
    for line in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(bad(line));
        }
        let r: usize = t[0].parse().map_err(|_| bad(line))?;
        let c: usize = t[1].parse().map_err(|_| bad(line))?;
        let v: f64 = t[2].parse().map_err(|_| bad(line))?;
        triplets.push((r - 1, c - 1, v));
    }
    Ok(CsrMatrix::from_triplets(header[0], triplets))
}

pub fn write_spectrum<W: Write>(out: &mut W, report: &SpectrumReport) -> Result<()> {
    writeln!(out, "eigenvalue,multiplicity,provenance,residual")?;
    for g in &report.groups {
        let res = g.residual.map(num).unwrap_or_default();
        writeln!(out, "{},{},{},{res}", num(g.value), g.multiplicity, g.provenance)?;
    }
    Ok(())
}

pub fn write_convergence<W: Write>(out: &mut W, table: &ConvergenceTable) -> Result<()> {
    writeln!(out, "m,h,error,rate")?;
    for row in &table.rows {
        let err = match &row.error {
            Ok(e) => num(*e),
            Err(msg) => format!("failed: {}", msg.replace(',', ";")),
        };
        let rate = row.rate.map(num).unwrap_or_default();
        writeln!(out, "{},{},{err},{rate}", row.m, num(row.h))?;
    }
    Ok(())
}

pub fn write_fdm<W: Write>(out: &mut W, cmp: &FdmComparison) -> Result<()> {
    writeln!(out, "step,time,correlation,sup_difference,fvm_sup,fdm_sup")?;
    for s in &cmp.snapshots {
        let corr = s.correlation.map(num).unwrap_or_default();
        writeln!(
            out,
            "{},{},{corr},{},{},{}",
            s.step,
            num(s.time),
            num(s.sup_difference),
            num(s.fvm_sup),
            num(s.fdm_sup)
        )?;
    }
    Ok(())
}
