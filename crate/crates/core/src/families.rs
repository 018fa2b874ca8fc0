//! Flat-vector standard forms and the interpolating family `U(σ)`.
//!
//! Every pair of Clifford tori intersects, so enphasing can move one
//! intersection onto the flat vector. The family `U(σ)` runs from the identity
//! (`σ = 0`) to a matrix equivalent to the Fourier matrix while one MUB basis of
//! intersection points stays put; for N = 3 its six intersections are known in
//! closed form and serve as an oracle for the solver.

use std::f64::consts::PI;

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::arith;
use crate::error::{Error, Result};
use crate::intersect::{self, PhasePoint, SolverConfig};
use crate::matcore::{cis, root_of_unity, CMatrix, UnitaryMatrix};

/// A flat-vector representative of an equivalence class of unitaries.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub matrix: UnitaryMatrix,
    /// The intersection moved onto the flat vector.
    pub anchor: PhasePoint,
    /// The `N - 1` eigenphases on the complement of the flat vector, in `[0, 2π)`.
    pub eigenphases: Vec<f64>,
}

impl StandardForm {
    /// Real parameters fixing the orthonormal complement of the flat vector.
    pub fn basis_parameters(&self) -> usize {
        let n = self.matrix.dim();
        (n - 1) * (n - 2)
    }

    /// Basis parameters plus eigenphases, `(N-1)²`.
    pub fn parameter_count(&self) -> usize {
        self.basis_parameters() + self.eigenphases.len()
    }

    /// `|⟨flat|U|flat⟩|`, equal to 1 for a standard form.
    pub fn flat_overlap(&self) -> f64 {
        let n = self.matrix.dim();
        let flat = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let image = self.matrix.apply(&flat);
        image.iter().zip(&flat).map(|(a, b)| b.conj() * a).sum::<Complex64>().norm()
    }
}

/// Enphases `u` so the flat vector is fixed: with `ψ = U e^{iα*}` at an
/// intersection `α*`, `diag(ψ̄) U diag(e^{iα*})` maps `(1, ..., 1)` to itself.
pub fn standard_form(u: &UnitaryMatrix, cfg: &SolverConfig) -> Result<StandardForm> {
    let set = intersect::find_intersections(u, cfg)?;
    let anchor = match set.points.first() {
        Some(p) => p.alpha.clone(),
        None => set.continuum_witnesses.first().cloned().ok_or(Error::Continuum)?,
    };
    standard_form_at(u, &anchor)
}

/// Standard form anchored at a known intersection.
pub fn standard_form_at(u: &UnitaryMatrix, anchor: &PhasePoint) -> Result<StandardForm> {
    let res = intersect::residual_norm(u, anchor);
    if !(res < 1e-10) {
        return Err(Error::NotAnIntersection(res));
    }
    let right = anchor.phases();
    let psi = u.apply(&right);
    let left: Vec<Complex64> = psi.iter().map(|z| z.conj() / z.norm()).collect();
    let matrix = u.enphase(&left, &right);
    let eigenphases = complement_eigenphases(&matrix)?;
    Ok(StandardForm { matrix, anchor: anchor.clone(), eigenphases })
}

fn complement_eigenphases(v: &UnitaryMatrix) -> Result<Vec<f64>> {
    let schur = Schur::try_new(v.matrix().clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::InvalidMatrix(v.unitarity_defect()))?;
    let mut phases: Vec<f64> = schur
        .eigenvalues()
        .ok_or_else(|| Error::InvalidMatrix(v.unitarity_defect()))?
        .iter()
        .map(|z| z.arg().rem_euclid(2.0 * PI))
        .collect();
    // the flat vector carries the eigenvalue closest to 1
    let k = (0..phases.len())
        .min_by(|&a, &b| gap(phases[a]).total_cmp(&gap(phases[b])))
        .expect("nonempty");
    phases.remove(k);
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

fn gap(phase: f64) -> f64 {
    phase.min(2.0 * PI - phase)
}

/// `U_{uv}(σ) = (1/N) Σ_s e^{iσ (s² mod N)} ω^{(u-v)s}` for odd prime `N`.
///
/// The square is reduced mod `N`, as in the explicit N = 3 form
/// `U = P_0 + e^{iσ}(P_1 + P_2)` with `P_k` the Fourier projectors.
pub fn interpolating_family(n: usize, sigma: f64) -> Result<UnitaryMatrix> {
    arith::require_odd_prime(n as u64)?;
    let p = n as u64;
    let weights: Vec<Complex64> = (0..p).map(|s| cis(sigma * (s * s % p) as f64)).collect();
    let m = CMatrix::from_fn(n, n, |u, v| {
        let d = arith::modulo(u as i64 - v as i64, p);
        weights.iter().enumerate().map(|(s, w)| w * root_of_unity(d * s as u64, p)).sum::<Complex64>() / n as f64
    });
    Ok(UnitaryMatrix::new_unchecked(m))
}

/// `e^{ia} = (1 + 2e^{iσ}) / (2 + e^{iσ})`.
pub fn family_phase(sigma: f64) -> Complex64 {
    let e = cis(sigma);
    (1.0 + 2.0 * e) / (2.0 + e)
}

/// Fourier-basis columns `(1, ω^k, ω^{2k}, ...)`, intersections of `U(σ)` for every σ.
pub fn family_fixed_points(n: usize) -> Result<Vec<PhasePoint>> {
    arith::require_odd_prime(n as u64)?;
    Ok((0..n)
        .map(|k| PhasePoint::new((1..n).map(|r| 2.0 * PI * ((k * r) % n) as f64 / n as f64).collect()))
        .collect())
}

/// The intersections of the N = 3 family at `σ`, as angle pairs of the columns
///
/// `(1,1,1), (1,ω,ω²), (1,ω²,ω), (1,-e^{ia},-e^{ia}), (1,-e^{-ia},1), (1,1,-e^{-ia})`,
///
/// with coinciding columns merged at toroidal distance `dedup_tol`.
pub fn family_intersections_analytic(sigma: f64, dedup_tol: f64) -> Result<Vec<PhasePoint>> {
    if sigma == 0.0 {
        return Err(Error::Continuum);
    }
    if !(sigma > 0.0 && sigma <= PI) {
        return Err(Error::InvalidParameter(format!("σ = {sigma} outside (0, π]")));
    }
    let e = family_phase(sigma);
    let w = root_of_unity(1, 3);
    let one = Complex64::new(1.0, 0.0);
    let columns = [
        (one, one),
        (w, w * w),
        (w * w, w),
        (-e, -e),
        (-e.conj(), one),
        (one, -e.conj()),
    ];
    let mut out: Vec<PhasePoint> = Vec::new();
    for (a, b) in columns {
        let p = PhasePoint::new(vec![a.arg(), b.arg()]);
        if out.iter().all(|q| q.distance(&p) >= dedup_tol) {
            out.push(p);
        }
    }
    Ok(out)
}
