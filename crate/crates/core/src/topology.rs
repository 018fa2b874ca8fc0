//! Intersection indices of two Clifford tori.
//!
//! At a transversal intersection the tangent spaces of the two tori span the
//! tangent space of CP^{N-1}. Ordering the frame as the pushforwards of the
//! fixed torus angles `ν_r` followed by those of the shifted torus angles `α_r`
//! and taking the real determinant in an affine chart gives the index.
//!
//! Also here: quadratic residues and Gauss sums, which govern the sign pattern
//! of the indices for the Fourier pair in odd prime dimensions.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::intersect::{self, IntersectionPoint, IntersectionSet, PhasePoint, SolverConfig};
use crate::matcore::{self, root_of_unity, UnitaryMatrix};

/// Below this modulus the chart coordinate is treated as vanishing.
pub const CHART_TOL: f64 = 1e-10;

/// Tangent vectors of both tori at one point, in the affine chart `w_s = ψ_s / ψ_chart`.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    pub chart: usize,
    /// Affine coordinates of the point (the `N-1` components other than `chart`).
    pub point: Vec<Complex64>,
    pub fixed_torus_vectors: Vec<Vec<Complex64>>,
    pub shifted_torus_vectors: Vec<Vec<Complex64>>,
}

impl TangentFrame {
    /// Real determinant of `[∂ν_1..∂ν_n, ∂α_1..∂α_n]` in `(Re w_1, Im w_1, ...)`,
    /// scaled by `2^n` and calibrated in sign (see [`orientation`]).
    pub fn determinant(&self) -> f64 {
        orientation() * raw_determinant(&self.fixed_torus_vectors, &self.shifted_torus_vectors)
    }
}

// The scaling 2^n is the volume of the change from (∂_x, ∂_y) to (∂_z, ∂_z̄) per
// complex coordinate; it makes the Fourier determinants come out as ±N.
fn raw_determinant(fixed: &[Vec<Complex64>], shifted: &[Vec<Complex64>]) -> f64 {
    let n = fixed.len();
    let m = DMatrix::from_fn(2 * n, 2 * n, |row, col| {
        let v = if col < n { &fixed[col][row / 2] } else { &shifted[col - n][row / 2] };
        if row % 2 == 0 { v.re } else { v.im }
    });
    m.determinant() * 2f64.powi(n as i32)
}

/// Global sign making the Fourier pair in N = 3 assign +1 to the points of the
/// quadratic-residue basis `|1, a⟩`. Computed once from `|1, 0⟩`.
pub fn orientation() -> f64 {
    static SIGN: OnceLock<f64> = OnceLock::new();
    *SIGN.get_or_init(|| {
        let f = matcore::fourier_matrix(3).expect("N = 3");
        let alpha = mub_alpha(3, 1, 0).expect("valid MUB label");
        let frame = tangent_frame(&f, &alpha).expect("chart 0 is valid at a MUB point");
        raw_determinant(&frame.fixed_torus_vectors, &frame.shifted_torus_vectors).signum()
    })
}

/// Frame at `U (1, e^{iα_1}, ...)` in the chart of the zeroth coordinate.
pub fn tangent_frame(u: &UnitaryMatrix, alpha: &PhasePoint) -> Result<TangentFrame> {
    tangent_frame_in_chart(u, alpha, 0)
}

/// Frame in the affine chart dividing by component `chart`.
///
/// Tangent vectors are formed in homogeneous coordinates and pushed forward by
/// `δw_s = (δψ_s ψ_k - ψ_s δψ_k) / ψ_k²`. The fixed torus vectors always come
/// from the angles of components `1..N` relative to component 0, so the frame
/// orientation does not depend on the chart.
pub fn tangent_frame_in_chart(u: &UnitaryMatrix, alpha: &PhasePoint, chart: usize) -> Result<TangentFrame> {
    let n_dim = u.dim();
    if alpha.dim() + 1 != n_dim {
        return Err(Error::InvalidDimension(alpha.dim(), "phase point must have N - 1 angles"));
    }
    if chart >= n_dim {
        return Err(Error::InvalidDimension(chart, "chart index out of range"));
    }
    let phases = alpha.phases();
    let psi = u.apply(&phases);
    let pk = psi[chart];
    if pk.norm() < CHART_TOL {
        return Err(Error::ChartFailure { chart, modulus: pk.norm() });
    }
    let coords: Vec<usize> = (0..n_dim).filter(|&s| s != chart).collect();
    let push = |d: &[Complex64]| -> Vec<Complex64> {
        coords.iter().map(|&s| (d[s] * pk - psi[s] * d[chart]) / (pk * pk)).collect()
    };
    let i = Complex64::i();
    let fixed = (1..n_dim)
        .map(|r| {
            let mut d = vec![Complex64::new(0.0, 0.0); n_dim];
            d[r] = i * psi[r];
            push(&d)
        })
        .collect();
    let shifted = (1..n_dim)
        .map(|r| {
            let d: Vec<Complex64> = (0..n_dim).map(|s| i * phases[r] * u.get(s, r)).collect();
            push(&d)
        })
        .collect();
    Ok(TangentFrame { chart, point: coords.iter().map(|&s| psi[s] / pk).collect(), fixed_torus_vectors: fixed, shifted_torus_vectors: shifted })
}

/// Frame determinant in chart 0, or in the chart of the largest component when
/// chart 0 fails. Does not check that `alpha` is an intersection.
pub fn frame_determinant(u: &UnitaryMatrix, alpha: &PhasePoint) -> Result<f64> {
    match tangent_frame(u, alpha) {
        Ok(f) => Ok(f.determinant()),
        Err(Error::ChartFailure { .. }) => {
            let psi = u.apply(&alpha.phases());
            let k = (0..psi.len()).max_by(|&a, &b| psi[a].norm().total_cmp(&psi[b].norm())).unwrap_or(0);
            Ok(tangent_frame_in_chart(u, alpha, k)?.determinant())
        }
        Err(e) => Err(e),
    }
}

/// `(det, index)` at an intersection, using the default solver tolerances.
pub fn intersection_index(u: &UnitaryMatrix, alpha: &PhasePoint) -> Result<(f64, i8)> {
    let cfg = SolverConfig::default();
    intersection_index_with(u, alpha, cfg.residual_tol, cfg.jacobian_tol)
}

pub fn intersection_index_with(
    u: &UnitaryMatrix,
    alpha: &PhasePoint,
    residual_tol: f64,
    jacobian_tol: f64,
) -> Result<(f64, i8)> {
    let res = intersect::residual_norm(u, alpha);
    if !(res < residual_tol) {
        return Err(Error::NotAnIntersection(res));
    }
    let det = frame_determinant(u, alpha)?;
    Ok((det, index_of(det, jacobian_tol)))
}

pub(crate) fn index_of(det: f64, jacobian_tol: f64) -> i8 {
    if det.abs() > jacobian_tol {
        det.signum() as i8
    } else {
        0
    }
}

/// One point of an [`IndexReport`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexedPoint {
    pub point: IntersectionPoint,
    pub det: f64,
    pub index: i8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexReport {
    pub per_point: Vec<IndexedPoint>,
    pub total: i64,
}

impl IndexReport {
    pub fn from_set(set: &IntersectionSet) -> Self {
        let per_point: Vec<IndexedPoint> = set
            .points
            .iter()
            .map(|p| IndexedPoint { point: p.clone(), det: p.jac_det, index: p.index })
            .collect();
        let total = per_point.iter().map(|p| p.index as i64).sum();
        IndexReport { per_point, total }
    }
}

/// Finds the intersections of `u` and indexes them.
pub fn index_report(u: &UnitaryMatrix, cfg: &SolverConfig) -> Result<IndexReport> {
    let set = intersect::find_intersections(u, cfg)?;
    Ok(IndexReport::from_set(&set))
}

/// Nonzero squares mod `p`.
pub fn quadratic_residues(p: u64) -> Result<BTreeSet<u64>> {
    arith::require_odd_prime(p)?;
    Ok((1..p).map(|x| x * x % p).collect())
}

/// `Σ_{x=0}^{p-1} ω^{x²}` by direct summation.
pub fn gauss_sum(p: u64) -> Result<Complex64> {
    arith::require_odd_prime(p)?;
    Ok((0..p).map(|x| root_of_unity(x * x % p, p)).sum())
}

/// `√p` for `p ≡ 1 (mod 4)`, `i√p` for `p ≡ 3 (mod 4)`.
pub fn gauss_sum_closed_form(p: u64) -> Result<Complex64> {
    arith::require_odd_prime(p)?;
    let s = (p as f64).sqrt();
    Ok(if p % 4 == 1 { Complex64::new(s, 0.0) } else { Complex64::new(0.0, s) })
}

/// Shifted-torus angles at which the Fourier image of the standard torus passes
/// through the MUB vector `|z, a⟩`.
pub fn mub_alpha(p: u64, z: u64, a: u64) -> Result<PhasePoint> {
    let exps = matcore::mub_exponents(p, z, a)?;
    Ok(PhasePoint::new(exps[1..].iter().map(|&e| 2.0 * PI * e as f64 / p as f64).collect()))
}

/// One row of [`fourier_mub_index_table`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MubIndexRow {
    pub z: u64,
    pub a: u64,
    /// From the numeric frame of the Fourier matrix.
    pub det: f64,
    /// From the closed-form coordinates and derivatives of the Fourier image.
    pub analytic_det: f64,
    pub index: i8,
    pub residue: bool,
}

/// Frame determinant of the Fourier pair at `|z, a⟩`, written out directly:
/// `w_r = ω^{-z r²/2 + r a}` and `∂w_s/∂α_r = i e^{iα_r} (ω^{sr} - w_s) / Σ_s e^{iα_s}`.
pub fn analytic_mub_determinant(p: u64, z: u64, a: u64) -> Result<f64> {
    let exps = matcore::mub_exponents(p, z, a)?;
    let inv2 = arith::mod_inverse(2, p).expect("p odd");
    let e: Vec<Complex64> = exps.iter().map(|&k| root_of_unity(k, p)).collect();
    let total: Complex64 = e.iter().sum();
    let w = |r: u64| {
        let k = arith::modulo(-((z * r % p * r % p * inv2 % p) as i64) + (r * a % p) as i64, p);
        root_of_unity(k, p)
    };
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let n = (p - 1) as usize;
    let fixed: Vec<Vec<Complex64>> = (1..p)
        .map(|r| (1..p).map(|s| if s == r { i * w(r) } else { zero }).collect())
        .collect();
    let shifted: Vec<Vec<Complex64>> = (1..p)
        .map(|r| (1..p).map(|s| i * e[r as usize] * (root_of_unity(s * r, p) - w(s)) / total).collect())
        .collect();
    debug_assert_eq!(fixed.len(), n);
    Ok(orientation() * raw_determinant(&fixed, &shifted))
}

/// Index table of the Fourier pair at all `p (p-1)` circulant MUB points.
pub fn fourier_mub_index_table(p: u64) -> Result<Vec<MubIndexRow>> {
    let q = quadratic_residues(p)?;
    let f = matcore::fourier_matrix(p as usize)?;
    let labels: Vec<(u64, u64)> = (1..p).flat_map(|z| (0..p).map(move |a| (z, a))).collect();
    labels
        .into_par_iter()
        .map(|(z, a)| {
            let alpha = mub_alpha(p, z, a)?;
            let (det, index) = intersection_index(&f, &alpha)?;
            let analytic_det = analytic_mub_determinant(p, z, a)?;
            Ok(MubIndexRow { z, a, det, analytic_det, index, residue: q.contains(&z) })
        })
        .collect()
}
