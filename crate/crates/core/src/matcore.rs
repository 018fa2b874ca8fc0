//! Complex matrix and vector primitives.
//!
//! A pair of Clifford tori in CP^{N-1} is carried by an N×N unitary `U`: the
//! first torus is the computational one (all unimodular vectors), the second is
//! its image under `U`. This module holds the canonical matrices, Haar sampling,
//! dephased normal forms, the unistochastic projection `U ∘ U*`, and the
//! circulant mutually-unbiased vectors for odd prime dimensions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::arith::{self, mod_inverse, modulo};
use crate::birkhoff::BistochasticMatrix;
use crate::error::{Error, Result};
use crate::rng;

pub type CMatrix = DMatrix<Complex64>;

/// Default tolerance accepted by [`UnitaryMatrix::new`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Entries with modulus below this count as zero when dephasing.
pub const DEPHASE_ZERO: f64 = 1e-12;

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `e^{2πi k/n}`, with `k` reduced mod `n` first so large exponents stay exact.
#[inline]
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    cis(2.0 * PI * (k % n) as f64 / n as f64)
}

/// An N×N unitary matrix relating the computational Clifford torus to a second one.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: CMatrix,
}

impl UnitaryMatrix {
    /// Wraps `m`, rejecting it when `max |U†U - I|` exceeds [`UNITARY_TOL`].
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() < 2 {
            return Err(Error::InvalidDimension(m.nrows(), "unitary must be square with N >= 2"));
        }
        let defect = unitarity_defect(&m);
        if !(defect <= tol) {
            return Err(Error::InvalidMatrix(defect));
        }
        Ok(Self { m })
    }

    pub fn new_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMatrix::identity(n, n) }
    }

    /// Permutation matrix with a one at `(i, perm[i])` in every row `i`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidLabel(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let mut m = CMatrix::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            m[(i, p)] = Complex64::new(1.0, 0.0);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m }
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.m)
    }

    pub fn determinant(&self) -> Complex64 {
        self.m.clone().determinant()
    }

    /// `U v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "dimension mismatch");
        (0..n)
            .map(|i| (0..n).map(|k| self.m[(i, k)] * v[k]).sum())
            .collect()
    }

    /// `D U D'` for diagonal unitaries given by their diagonals.
    pub fn enphase(&self, left: &[Complex64], right: &[Complex64]) -> Self {
        let n = self.dim();
        Self {
            m: CMatrix::from_fn(n, n, |i, k| left[i] * self.m[(i, k)] * right[k]),
        }
    }

    /// Row `i` of the result is row `rows[i]` of `self`; likewise for columns.
    pub fn permute(&self, rows: &[usize], cols: &[usize]) -> Self {
        let n = self.dim();
        Self {
            m: CMatrix::from_fn(n, n, |i, k| self.m[(rows[i], cols[k])]),
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.m.iter().all(|z| z.im.abs() <= tol)
    }
}

/// `max |M†M - I|` entrywise.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            let target = if i == k { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, k)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// A vector in C^N; projective statements ignore its overall scale.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub entries: Vec<Complex64>,
}

impl StateVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.iter().all(|z| z.norm() == 0.0) {
            return Err(Error::InvalidLabel("zero state vector".into()));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let s = self.norm();
        Self { entries: self.entries.iter().map(|z| z / s).collect() }
    }

    /// Affine coordinates `(z_1/z_0, ..., z_{N-1}/z_0)`; `None` when `z_0` vanishes.
    pub fn affine(&self) -> Option<Vec<Complex64>> {
        let z0 = self.entries[0];
        if z0.norm() < 1e-14 {
            return None;
        }
        Some(self.entries[1..].iter().map(|z| z / z0).collect())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨a|b⟩| / (|a||b|)`; equals 1 exactly when the vectors are projectively equal.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm() / (self.norm() * other.norm())
    }
}

/// A point of CP^2-style action-angle coordinates: probabilities `p` and phases `ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordTorusPoint {
    pub probabilities: Vec<f64>,
    pub phases: Vec<f64>,
}

impl CliffordTorusPoint {
    pub fn new(probabilities: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        check_probability(&probabilities)?;
        if phases.len() + 1 != probabilities.len() {
            return Err(Error::InvalidDimension(phases.len(), "need N-1 phases for N probabilities"));
        }
        let phases = phases.into_iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
        Ok(Self { probabilities, phases })
    }

    /// `(√p_0, √p_1 e^{iν_1}, ...)`.
    pub fn state(&self) -> StateVector {
        let mut entries = vec![Complex64::new(self.probabilities[0].sqrt(), 0.0)];
        for (p, nu) in self.probabilities[1..].iter().zip(&self.phases) {
            entries.push(cis(*nu) * p.sqrt());
        }
        StateVector { entries }
    }
}

pub(crate) fn check_probability(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(x >= -1e-14)) {
        return Err(Error::InvalidProbability(format!("{p:?} has negative entries")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidProbability(format!("{p:?} sums to {s}")));
    }
    Ok(())
}

/// `F_{jk} = e^{2πi jk/N} / √N`.
pub fn fourier_matrix(n: usize) -> Result<UnitaryMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n, "Fourier matrix needs N >= 2"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let m = CMatrix::from_fn(n, n, |j, k| root_of_unity((j * k) as u64, n as u64) * scale);
    Ok(UnitaryMatrix::new_unchecked(m))
}

/// Haar-distributed unitary, deterministic in `seed`.
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    haar_random_unitary_with(n, &mut rng::stream(seed, 0))
}

/// Haar-distributed unitary drawn from `rng`.
///
/// A Ginibre matrix is QR-factored and the columns of `Q` are multiplied by the
/// phases of `diag(R)`, which makes the factorization unique and the result Haar.
pub fn haar_random_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n, "unitary needs N >= 2"));
    }
    let mut draws = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        draws.push(Complex64::new(re, im) * FRAC_1_SQRT_2);
    }
    let ginibre = CMatrix::from_row_slice(n, n, &draws);
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    Ok(UnitaryMatrix::new_unchecked(q))
}

/// Diagonals `(D, D')` such that `D U D'` has a real nonnegative first row and column.
pub fn dephasing_phases(u: &UnitaryMatrix) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = u.dim();
    for k in 0..n {
        if u.get(0, k).norm() < DEPHASE_ZERO {
            return Err(Error::DephasingDegenerate { row: 0, col: k });
        }
        if u.get(k, 0).norm() < DEPHASE_ZERO {
            return Err(Error::DephasingDegenerate { row: k, col: 0 });
        }
    }
    let right: Vec<Complex64> = (0..n).map(|k| unit_conj(u.get(0, k))).collect();
    let left: Vec<Complex64> = (0..n).map(|j| unit_conj(u.get(j, 0) * right[0])).collect();
    Ok((left, right))
}

fn unit_conj(z: Complex64) -> Complex64 {
    z.conj() / z.norm()
}

/// Dephased representative `D U D'`: first row and column real and nonnegative.
pub fn dephase(u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    let (left, right) = dephasing_phases(u)?;
    let mut out = u.enphase(&left, &right);
    // kill the rounding residue in the imaginary parts of the border
    let n = out.dim();
    for k in 0..n {
        out.m[(0, k)] = Complex64::new(out.m[(0, k)].norm(), 0.0);
        out.m[(k, 0)] = Complex64::new(out.m[(k, 0)].norm(), 0.0);
    }
    Ok(out)
}

/// Ordered dephased form: the smallest-modulus entry is moved to the corner and
/// the remaining rows and columns are sorted so that the first row and first
/// column are nondecreasing, then the result is dephased.
pub fn dephase_ordered(u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    let n = u.dim();
    let (mut r0, mut c0) = (0, 0);
    for i in 0..n {
        for k in 0..n {
            if u.get(i, k).norm() < u.get(r0, c0).norm() {
                (r0, c0) = (i, k);
            }
        }
    }
    let mut rows: Vec<usize> = std::iter::once(r0).chain((0..n).filter(|&i| i != r0)).collect();
    let mut cols: Vec<usize> = std::iter::once(c0).chain((0..n).filter(|&k| k != c0)).collect();
    rows[1..].sort_by(|&a, &b| u.get(a, c0).norm().total_cmp(&u.get(b, c0).norm()));
    cols[1..].sort_by(|&a, &b| u.get(r0, a).norm().total_cmp(&u.get(r0, b).norm()));
    dephase(&u.permute(&rows, &cols))
}

/// Entrywise squared moduli `U ∘ U*`.
pub fn unistochastic_projection(u: &UnitaryMatrix) -> BistochasticMatrix {
    let n = u.dim();
    BistochasticMatrix::new_unchecked(DMatrix::from_fn(n, n, |i, k| u.get(i, k).norm_sqr()))
}

/// Exponents `e_r` (of `ω = e^{2πi/p}`) of the circulant MUB vector `|z, a⟩`:
/// `e_r = (r² - 2ra) / (2z) mod p`.
pub fn mub_exponents(p: u64, z: u64, a: u64) -> Result<Vec<u64>> {
    arith::require_odd_prime(p)?;
    if z % p == 0 {
        return Err(Error::InvalidLabel(format!("basis label z = {z} must be nonzero mod {p}")));
    }
    let inv = mod_inverse((2 * z) as i64, p).expect("2z is invertible mod an odd prime");
    let (pi, ai) = (p as i64, (a % p) as i64);
    Ok((0..pi)
        .map(|r| modulo((r * r - 2 * r * ai).rem_euclid(pi) * inv as i64, p))
        .collect())
}

/// The MUB vector `|z, a⟩ = Σ_r ω^{(r²-2ra)/(2z)} |e_r⟩`, normalized so its first
/// component is 1 (all components unimodular).
pub fn mub_circulant_vector(p: u64, z: u64, a: u64) -> Result<StateVector> {
    let exps = mub_exponents(p, z, a)?;
    StateVector::new(exps.into_iter().map(|e| root_of_unity(e, p)).collect())
}

/// Metric induced on the torus of fixed `p` in CP^2, in the `(ν_1, ν_2)` frame.
pub fn induced_metric(p: &[f64; 3]) -> Result<[[f64; 2]; 2]> {
    check_probability(p)?;
    Ok([
        [p[1] * (1.0 - p[1]), -p[1] * p[2]],
        [-p[1] * p[2], p[2] * (1.0 - p[2])],
    ])
}

/// Area density `√det g` of the torus with probability vector `p`.
pub fn torus_area_density(p: &[f64; 3]) -> Result<f64> {
    let g = induced_metric(p)?;
    Ok((g[0][0] * g[1][1] - g[0][1] * g[1][0]).max(0.0).sqrt())
}
