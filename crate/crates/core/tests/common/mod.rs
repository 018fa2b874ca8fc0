#![allow(dead_code)]

use std::f64::consts::PI;

use clifford_tori::intersect::PhasePoint;
use clifford_tori::matcore::{cis, UnitaryMatrix};
use num_complex::Complex64;
use rayon::prelude::*;

/// Result of the brute-force winding scan.
pub struct GridCount {
    /// Cells around which `(f_1, f_2)` winds.
    pub count: usize,
    /// Sum of the windings, the signed root count.
    pub signed: i64,
}

/// Counts roots of `(f_1, f_2)` for an N = 3 pair by the winding number of the
/// residual vector around every cell of an `m × m` grid on the torus.
///
/// Independent of the solver: no Newton, no Jacobian, only residual values.
pub fn grid_root_count(u: &UnitaryMatrix, m: usize) -> GridCount {
    assert_eq!(u.dim(), 3);
    let c: Vec<Complex64> = (0..m).map(|k| cis(2.0 * PI * k as f64 / m as f64)).collect();
    let row = |j: usize| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let v = [Complex64::new(1.0, 0.0), c[i], c[j]];
                let f = |r: usize| (u.get(r, 0) * v[0] + u.get(r, 1) * v[1] + u.get(r, 2) * v[2]).norm_sqr() - 1.0;
                f(2).atan2(f(1))
            })
            .collect()
    };
    let angles: Vec<Vec<f64>> = (0..m).into_par_iter().map(row).collect();
    let wrap = |d: f64| (d + PI).rem_euclid(2.0 * PI) - PI;
    let per_row: Vec<(usize, i64)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let (a, b) = (&angles[j], &angles[(j + 1) % m]);
            let mut count = 0;
            let mut signed = 0;
            for i in 0..m {
                let k = (i + 1) % m;
                let loop_ = [a[i], a[k], b[k], b[i], a[i]];
                let turn: f64 = loop_.windows(2).map(|w| wrap(w[1] - w[0])).sum();
                let w = (turn / (2.0 * PI)).round() as i64;
                if w != 0 {
                    count += w.unsigned_abs() as usize;
                    signed += w;
                }
            }
            (count, signed)
        })
        .collect();
    GridCount {
        count: per_row.iter().map(|r| r.0).sum(),
        signed: per_row.iter().map(|r| r.1).sum(),
    }
}

/// Every point of `a` has a partner in `b` within `tol`, and the sizes agree.
pub fn same_point_set(a: &[PhasePoint], b: &[PhasePoint], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| p.distance(q) < tol))
}
