mod common;

use std::collections::BTreeSet;

use num_rational::Ratio;

use fvm_simplex::analysis::fdm_compare;
use fvm_simplex::graph::{build_vertex_laplacian, corner_cells};
use fvm_simplex::simplex::{cell_count, cell_measure, vertex_count, vertex_count_recursive};
use fvm_simplex::spectral::{annotated_spectrum, phi_branches, Provenance};
use fvm_simplex::{BoundaryMode, CellGraph, SimplexSpace, VertexAddr, VertexVariant, Word};

#[test]
fn cell_graph_matches_geometry_d5() {
    for m in 0..=2 {
        let g = CellGraph::build(5, m).unwrap();
        let got: BTreeSet<_> = g.edges().into_iter().collect();
        assert_eq!(got, common::brute_force_edges(5, m), "m={m}");
    }
}

#[test]
fn word_indices_match_digits() {
    for d in 2..=5usize {
        for m in 0..=3 {
            for i in 0..d.pow(m as u32) {
                let w = Word::from_index(i, d, m);
                let expect: Vec<u8> = common::letters(i, d, m).into_iter().map(|l| l as u8).collect();
                assert_eq!(w.letters(), &expect[..]);
                assert_eq!(w.index(d), i);
            }
        }
    }
}

#[test]
fn merged_vertex_graph_matches_geometry() {
    for (d, mmax) in [(3, 3), (4, 3), (5, 2)] {
        for m in 0..=mmax {
            let (n, oracle) = common::brute_force_vertex_laplacian(d, m);
            let g = build_vertex_laplacian(d, m, VertexVariant::Merged).unwrap();
            assert_eq!(g.n_vertices(), n);
            assert_eq!(vertex_count(d, m).unwrap() as usize, n);
            assert_eq!(vertex_count_recursive(d, m).unwrap() as usize, n);
            let got: BTreeSet<_> = g.laplacian.triplets().into_iter().collect();
            let want: BTreeSet<_> =
                oracle.into_iter().map(|((r, c), v)| (r, c, v)).filter(|t| t.2 != 0).collect();
            assert_eq!(got, want, "d={d} m={m}");
        }
    }
}

#[test]
fn corner_cells_hold_outer_corners() {
    for d in [3, 4] {
        for m in 1..=3 {
            let cells = corner_cells(d, m);
            for (k, &c) in cells.iter().enumerate() {
                let corners = common::cell_corners(&common::letters(c, d, m), d);
                let mut p = vec![Ratio::from_integer(0); d];
                p[k] = Ratio::from_integer(1);
                assert!(corners.contains(&p), "d={d} m={m} corner {k}");
            }
        }
    }
}

#[test]
fn barycentres_match_exact_corners() {
    for d in [3, 4] {
        let space = SimplexSpace::regular(d).unwrap();
        let m = 2;
        for i in 0..cell_count(d, m).unwrap() {
            let corners = common::cell_corners(&common::letters(i, d, m), d);
            let mut expect = vec![0.0; d - 1];
            for bary in &corners {
                for (k, b) in bary.iter().enumerate() {
                    let w = *b.numer() as f64 / *b.denom() as f64 / d as f64;
                    for (e, p) in expect.iter_mut().zip(space.point(k)) {
                        *e += w * p;
                    }
                }
            }
            let got = space.cell_barycenter(&Word::from_index(i, d, m)).unwrap();
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn measures_sum_to_one() {
    for d in 2..=5 {
        for m in 0..=4 {
            let total = cell_measure(d, m).unwrap() * Ratio::from_integer(cell_count(d, m).unwrap() as u64);
            assert_eq!(total, Ratio::from_integer(1));
        }
    }
}

#[test]
fn decimation_closed_forms() {
    // Level-1 Neumann spectrum is {0, 3}; its lifts are 0, 5 and (5 -+ sqrt 13)/2.
    let golden = common::golden_spectrum("decimation_d3_m2_neumann.csv");
    let (a, b) = phi_branches(3, 0.0).unwrap();
    let (c, e) = phi_branches(3, 3.0).unwrap();
    let mut lifts = [a, b, c, e];
    lifts.sort_by(f64::total_cmp);
    for ((v, _), l) in golden.iter().zip(lifts) {
        assert!((v - l).abs() < 1e-12, "{v} vs {l}");
    }
    assert!((c - (5.0 - 13f64.sqrt()) / 2.0).abs() < 1e-15);
    // m = 3 also contains (5 -+ sqrt 5)/2 = phi_-+(5)
    let g3 = common::golden_spectrum("decimation_d3_m3_neumann.csv");
    for target in [(5.0 - 5f64.sqrt()) / 2.0, (5.0 + 5f64.sqrt()) / 2.0] {
        assert!(g3.iter().any(|(v, _)| (v - target).abs() < 1e-12));
    }
}

#[test]
fn provenance_labels() {
    let report = annotated_spectrum(3, 2, BoundaryMode::NeumannCells).unwrap();
    assert_eq!(report.eigenvalue_count(), 9);
    for g in &report.groups {
        let expect = if (g.value - 3.0).abs() < 1e-8 {
            Provenance::DirectEigensolver
        } else if g.value <= 2.5 {
            Provenance::PhiMinusLift
        } else {
            Provenance::PhiPlusLift
        };
        assert_eq!(g.provenance, expect, "{}", g.value);
    }
}

#[test]
fn fdm_comparison_golden() {
    let text =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/fdm_d3_m3.csv")).unwrap();
    let vertex = VertexAddr { word: Word::repeated(1, 1), corner: 1 };
    let cmp = fdm_compare(3, 3, 0.01, 100, &vertex, &[0, 10, 50, 100], 1.0).unwrap();
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for (s, line) in cmp.snapshots.iter().zip(text.lines().skip(1)) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(s.step.to_string(), cols[0]);
        let corr: f64 = cols[2].parse().unwrap();
        assert!((s.correlation.unwrap() - corr).abs() < 1e-12);
        let fvm: f64 = cols[4].parse().unwrap();
        assert!((s.fvm_sup - fvm).abs() < 1e-12 * fvm);
        assert!(s.fvm_sup < prev.0 || s.step == 0);
        assert!(s.fdm_sup < prev.1 || s.step == 0);
        prev = (s.fvm_sup, s.fdm_sup);
    }
}
