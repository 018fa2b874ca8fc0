//! Birkhoff's polytope of 3×3 bistochastic matrices and its unistochastic subset.
//!
//! Permutation matrices are labelled so that
//!
//! ```text
//!     [ π0+π1  π2+π3  π4+π5 ]
//! B = [ π2+π4  π0+π5  π1+π3 ]
//!     [ π3+π5  π1+π4  π0+π2 ]
//! ```
//!
//! which makes `P0, P3, P4` the even permutations and `P1, P2, P5` the odd ones.
//! Distances use `D² = ½ Tr[(B1-B2)(B1-B2)ᵀ]`, under which the polytope has
//! outsphere radius 1 about the van der Waerden matrix `B★`.

mod section;

pub use section::{section_boundary_trace, CrossSectionSpec, SectionChart, SectionKind};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, UnitaryMatrix};
use crate::rng;

/// Row `i` of permutation `P_k` has its one in column `PERMUTATIONS[k][i]`.
pub const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

pub const EVEN: [usize; 3] = [0, 3, 4];
pub const ODD: [usize; 3] = [1, 2, 5];

/// Kernel of `π ↦ Σ π_i P_i`: even minus odd permutations.
pub const KERNEL: [f64; 6] = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0];

/// Slack below which a chain-links triangle counts as closed.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Tolerance on row and column sums accepted by [`BistochasticMatrix::new`].
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BistochasticMatrix {
    m: DMatrix<f64>,
}

impl BistochasticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotBistochastic("matrix is not square".into()));
        }
        if let Some(x) = m.iter().find(|&&x| !(x >= -1e-14)) {
            return Err(Error::NotBistochastic(format!("negative entry {x:e}")));
        }
        let b = Self { m };
        let defect = b.stochasticity_defect();
        if defect > STOCHASTIC_TOL {
            return Err(Error::NotBistochastic(format!("line sums off by {defect:e}")));
        }
        Ok(b)
    }

    pub fn new_unchecked(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(DMatrix::from_fn(3, 3, |i, k| rows[i][k]))
    }

    /// The polytope's centre, all entries `1/N`.
    pub fn van_der_waerden(n: usize) -> Self {
        Self { m: DMatrix::from_element(n, n, 1.0 / n as f64) }
    }

    /// `P_k` in the labelling above.
    pub fn permutation(k: usize) -> Self {
        let mut m = DMatrix::zeros(3, 3);
        for (i, &j) in PERMUTATIONS[k].iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[(row, col)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Largest deviation of a row or column sum from 1.
    pub fn stochasticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((self.m.row(i).sum() - 1.0).abs());
            worst = worst.max((self.m.column(i).sum() - 1.0).abs());
        }
        worst
    }

    /// `Σ w_k P_k` for weights in the standard labelling.
    pub fn from_weights(pi: &[f64; 6]) -> Self {
        let mut m = DMatrix::zeros(3, 3);
        for (k, perm) in PERMUTATIONS.iter().enumerate() {
            for (i, &j) in perm.iter().enumerate() {
                m[(i, j)] += pi[k];
            }
        }
        Self { m }
    }

    /// Affine combination `Σ c_k B_k` (coefficients need not be convex).
    pub fn combine(terms: &[(f64, &BistochasticMatrix)]) -> Self {
        let n = terms[0].1.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, b) in terms {
            m += &b.m * *c;
        }
        Self { m }
    }
}

/// Weights `π` over the six permutation matrices, in the standard labelling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermutationWeights {
    pub pi: [f64; 6],
}

impl PermutationWeights {
    pub fn reconstruct(&self) -> BistochasticMatrix {
        BistochasticMatrix::from_weights(&self.pi)
    }
}

fn require_dim3(b: &BistochasticMatrix) -> Result<()> {
    if b.dim() != 3 {
        return Err(Error::InvalidDimension(b.dim(), "Birkhoff geometry is implemented for N = 3"));
    }
    Ok(())
}

/// Decomposes `B` over the six permutations.
///
/// Every even permutation meets every odd one in exactly one position, so
/// `tr(P_kᵀ B) = 3π_k + (total weight of the opposite parity)`. Taking both
/// parities at weight ½ gives the solution orthogonal to the kernel; the
/// returned point is the nonnegative point of `π + tK` closest to it.
pub fn permutation_decomposition(b: &BistochasticMatrix) -> Result<PermutationWeights> {
    require_dim3(b)?;
    if b.stochasticity_defect() > STOCHASTIC_TOL {
        return Err(Error::NotBistochastic(format!(
            "line sums off by {:e}",
            b.stochasticity_defect()
        )));
    }
    let mut pi = [0.0; 6];
    for (k, perm) in PERMUTATIONS.iter().enumerate() {
        let trace: f64 = perm.iter().enumerate().map(|(i, &j)| b.get(i, j)).sum();
        pi[k] = (trace - 0.5) / 3.0;
    }
    let lo = EVEN.iter().map(|&k| -pi[k]).fold(f64::NEG_INFINITY, f64::max);
    let hi = ODD.iter().map(|&k| pi[k]).fold(f64::INFINITY, f64::min);
    if lo > hi + 1e-12 {
        return Err(Error::NotBistochastic(format!(
            "no nonnegative decomposition (gap {:e})",
            lo - hi
        )));
    }
    let t = if lo > hi { 0.5 * (lo + hi) } else { 0.0f64.clamp(lo, hi) };
    for k in 0..6 {
        pi[k] = (pi[k] + t * KERNEL[k]).max(0.0);
    }
    Ok(PermutationWeights { pi })
}

/// `D(B1, B2) = √(½ Tr[(B1-B2)(B1-B2)ᵀ])`.
pub fn bistochastic_distance(b1: &BistochasticMatrix, b2: &BistochasticMatrix) -> f64 {
    assert_eq!(b1.dim(), b2.dim(), "dimension mismatch");
    (0.5 * (&b1.m - &b2.m).norm_squared()).sqrt()
}

/// Chain-links evidence for (non-)unistochasticity of a 3×3 bistochastic matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnistochasticCertificate {
    pub member: bool,
    /// `L_k = √(B_0k B_1k)`.
    pub links: [f64; 3],
    /// Smallest slack `L_i + L_j - L_k` of the three triangle inequalities.
    pub margin: f64,
}

/// `B` is unistochastic iff the links `√(B_0k B_1k)` close into a triangle, which
/// is what orthogonality of the first two rows of a unitary requires. A
/// degenerate triangle means a real (orthogonal) solution exists.
pub fn is_unistochastic(b: &BistochasticMatrix) -> Result<UnistochasticCertificate> {
    require_dim3(b)?;
    let links = [0, 1, 2].map(|k| (b.get(0, k).max(0.0) * b.get(1, k).max(0.0)).sqrt());
    let margin = (0..3)
        .map(|k| links[(k + 1) % 3] + links[(k + 2) % 3] - links[k])
        .fold(f64::INFINITY, f64::min);
    Ok(UnistochasticCertificate { member: margin >= -MEMBERSHIP_TOL, links, margin })
}

/// Unit phases `e^{iθ_k}` with `θ_0 = 0` and `Σ L_k e^{iθ_k} = 0`.
fn closing_phases(l: [f64; 3]) -> [Complex64; 3] {
    let one = Complex64::new(1.0, 0.0);
    let eps = 1e-15;
    if l[0] > eps && l[1] > eps {
        let cos = ((l[2] * l[2] - l[0] * l[0] - l[1] * l[1]) / (2.0 * l[0] * l[1])).clamp(-1.0, 1.0);
        let e1 = Complex64::from_polar(1.0, cos.acos());
        let s = l[0] + e1 * l[1];
        let e2 = if s.norm() > 0.0 { -s / s.norm() } else { one };
        [one, e1, e2]
    } else {
        // one link vanishes, the other two cancel head-on
        [one, one, -one]
    }
}

/// A unitary whose unistochastic projection is `B`, in dephased form when `B`
/// has no zero entries in its first row and column.
///
/// Row 0 is `√B_0k`, row 1 is `√B_1k e^{iθ_k}` with the phases closing the
/// link triangle, row 2 is the conjugate cross product of the first two.
pub fn reconstruct_unitary(b: &BistochasticMatrix) -> Result<UnitaryMatrix> {
    let cert = is_unistochastic(b)?;
    if !cert.member {
        return Err(Error::NotUnistochastic(cert.margin));
    }
    let phases = closing_phases(cert.links);
    let r0: [Complex64; 3] = [0, 1, 2].map(|k| Complex64::new(b.get(0, k).max(0.0).sqrt(), 0.0));
    let r1: [Complex64; 3] = [0, 1, 2].map(|k| phases[k] * b.get(1, k).max(0.0).sqrt());
    let mut r2 = [
        (r0[1] * r1[2] - r0[2] * r1[1]).conj(),
        (r0[2] * r1[0] - r0[0] * r1[2]).conj(),
        (r0[0] * r1[1] - r0[1] * r1[0]).conj(),
    ];
    if r2[0].norm() > 1e-15 {
        let ph = r2[0].conj() / r2[0].norm();
        for x in r2.iter_mut() {
            *x *= ph;
        }
        r2[0] = Complex64::new(r2[0].norm(), 0.0);
    }
    let m = CMatrix::from_fn(3, 3, |i, k| match i {
        0 => r0[k],
        1 => r1[k],
        _ => r2[k],
    });
    UnitaryMatrix::new(m)
}

/// Uniform sample from the polytope by rejection in the top-left 2×2 block chart.
pub fn sample_birkhoff(seed: u64) -> BistochasticMatrix {
    sample_birkhoff_with(&mut rng::stream(seed, 0))
}

pub fn sample_birkhoff_with<R: Rng + ?Sized>(rng: &mut R) -> BistochasticMatrix {
    loop {
        let [a, b, c, d]: [f64; 4] = [rng.random(), rng.random(), rng.random(), rng.random()];
        if a + b <= 1.0 && c + d <= 1.0 && a + c <= 1.0 && b + d <= 1.0 && a + b + c + d >= 1.0 {
            let rows = [
                [a, b, 1.0 - a - b],
                [c, d, 1.0 - c - d],
                [1.0 - a - c, 1.0 - b - d, a + b + c + d - 1.0],
            ];
            return BistochasticMatrix::new_unchecked(DMatrix::from_fn(3, 3, |i, k| rows[i][k]));
        }
    }
}
