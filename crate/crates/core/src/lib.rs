//! Finite volume heat-equation solver on Sierpinski simplices.
//!
//! The mesh is the cell graph of the level-m simplex: one control volume
//! per m-cell, neighbours wherever two cells touch. The explicit scheme is
//! `U(n+1) = (I - h c L) U(n)` and the implicit scheme solves
//! `(I + h c L) U(n) = U(n-1)`, with `L` the combinatorial cell Laplacian
//! and `c = (d/2)(d+2)^m`.

pub mod analysis;
pub mod cg;
pub mod config;
pub mod error;
pub mod graph;
pub mod initial;
pub mod output;
pub mod parallel;
pub mod scheme;
pub mod simplex;
pub mod sparse;
pub mod spectral;

pub use error::{FvmError, Result};
pub use graph::{BoundaryMode, CellGraph, CellLaplacian, VertexGraph, VertexVariant};
pub use scheme::{CflPolicy, Scheme, SchemeConfig, SchemeMatrix, StateSeries};
pub use simplex::{MeasureSpec, SimplexSpace, VertexAddr, Word};
