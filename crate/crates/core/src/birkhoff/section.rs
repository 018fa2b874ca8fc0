//! Two-dimensional cross sections of the N = 3 polytope.
//!
//! The affine sections (triangle, hexagon, parabolic) pass through `B★` and
//! use a frame that is orthonormal for `⟨X, Y⟩ = ½ Tr(X Yᵀ)`, so distances in
//! the `(u, v)` plane equal polytope distances. The facet section is the ruled
//! unistochastic surface inside a facet, charted bilinearly over the unit square.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{is_unistochastic, BistochasticMatrix, EVEN, MEMBERSHIP_TOL, ODD, PERMUTATIONS};
use crate::error::{Error, Result};

/// Entries above `-DOMAIN_TOL` count as nonnegative when testing the domain.
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SectionKind {
    /// The facet `B[row][col] = 0`.
    Facet { row: usize, col: usize },
    /// The even-permutation triangle `π1 = π2 = π5 = 0`.
    Triangle,
    /// `{B : B p = e}` for a fixed probability vector `p`.
    Hexagon { p: [f64; 3] },
    /// Span of `B★` and the edge from `P_even` to `P_odd`.
    Parabolic { even: usize, odd: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SectionChart {
    /// `B = centre + u e1 + v e2`, domain = nonnegative entries.
    Affine {
        centre: DMatrix<f64>,
        e1: DMatrix<f64>,
        e2: DMatrix<f64>,
    },
    /// `B = (1-u)(1-v) c00 + u(1-v) c10 + (1-u)v c01 + uv c11` over `[0,1]²`.
    Bilinear { corners: [DMatrix<f64>; 4] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossSectionSpec {
    pub kind: SectionKind,
    pub chart: SectionChart,
}

fn frobenius_half(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    0.5 * a.component_mul(b).sum()
}

fn orthonormal_frame(d1: DMatrix<f64>, d2: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let e1 = &d1 / frobenius_half(&d1, &d1).sqrt();
    let d2 = &d2 - &e1 * frobenius_half(&e1, &d2);
    let e2 = &d2 / frobenius_half(&d2, &d2).sqrt();
    (e1, e2)
}

fn perm(k: usize) -> DMatrix<f64> {
    BistochasticMatrix::permutation(k).entries().clone()
}

fn star() -> DMatrix<f64> {
    DMatrix::from_element(3, 3, 1.0 / 3.0)
}

impl CrossSectionSpec {
    pub fn triangle() -> Self {
        let (e1, e2) = orthonormal_frame(perm(0) - star(), perm(3) - star());
        Self {
            kind: SectionKind::Triangle,
            chart: SectionChart::Affine { centre: star(), e1, e2 },
        }
    }

    /// Hexagonal section `B p = e`. The flat `p` is rejected: it fixes nothing.
    pub fn hexagon(p: [f64; 3]) -> Result<Self> {
        crate::matcore::check_probability(&p)?;
        // every direction is x wᵀ with x ⊥ (1,1,1) and w = (1,1,1) × p
        let w = [p[1] - p[2], p[2] - p[0], p[0] - p[1]];
        if w.iter().map(|x| x * x).sum::<f64>() < 1e-20 {
            return Err(Error::InvalidProbability("hexagon section needs a non-flat p".into()));
        }
        let outer = |x: [f64; 3]| DMatrix::from_fn(3, 3, |i, k| x[i] * w[k]);
        let (e1, e2) = orthonormal_frame(outer([1.0, -1.0, 0.0]), outer([1.0, 1.0, -2.0]));
        Ok(Self {
            kind: SectionKind::Hexagon { p },
            chart: SectionChart::Affine { centre: star(), e1, e2 },
        })
    }

    /// Facet with entry `(row, col)` pinned to zero; `(u, v)` charts its ruled
    /// unistochastic surface, bounded by the four √2 edges.
    pub fn facet(row: usize, col: usize) -> Result<Self> {
        if row > 2 || col > 2 {
            return Err(Error::InvalidLabel(format!("facet ({row}, {col}) out of range")));
        }
        let inside = |ks: [usize; 3]| -> Vec<usize> {
            ks.into_iter().filter(|&k| PERMUTATIONS[k][row] != col).collect()
        };
        let (odd, even) = (inside(ODD), inside(EVEN));
        let corners = [perm(odd[0]), perm(even[0]), perm(even[1]), perm(odd[1])];
        Ok(Self {
            kind: SectionKind::Facet { row, col },
            chart: SectionChart::Bilinear { corners },
        })
    }

    /// Section through `B★` and the √2 edge `P_even`–`P_odd`.
    pub fn parabolic(even: usize, odd: usize) -> Result<Self> {
        if !EVEN.contains(&even) || !ODD.contains(&odd) {
            return Err(Error::InvalidLabel(format!(
                "edge ({even}, {odd}) must join an even and an odd permutation"
            )));
        }
        let (e1, e2) = orthonormal_frame(perm(even) - star(), perm(odd) - star());
        Ok(Self {
            kind: SectionKind::Parabolic { even, odd },
            chart: SectionChart::Affine { centre: star(), e1, e2 },
        })
    }

    pub fn from_kind(kind: SectionKind) -> Result<Self> {
        match kind {
            SectionKind::Facet { row, col } => Self::facet(row, col),
            SectionKind::Triangle => Ok(Self::triangle()),
            SectionKind::Hexagon { p } => Self::hexagon(p),
            SectionKind::Parabolic { even, odd } => Self::parabolic(even, odd),
        }
    }

    /// Chart coordinates of the section centre.
    pub fn centre(&self) -> (f64, f64) {
        match self.chart {
            SectionChart::Affine { .. } => (0.0, 0.0),
            SectionChart::Bilinear { .. } => (0.5, 0.5),
        }
    }

    /// Box `(u_min, u_max, v_min, v_max)` containing the domain.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match self.chart {
            // the outsphere has radius 1
            SectionChart::Affine { .. } => (-1.0, 1.0, -1.0, 1.0),
            SectionChart::Bilinear { .. } => (0.0, 1.0, 0.0, 1.0),
        }
    }

    fn raw_point(&self, u: f64, v: f64) -> DMatrix<f64> {
        match &self.chart {
            SectionChart::Affine { centre, e1, e2 } => centre + e1 * u + e2 * v,
            SectionChart::Bilinear { corners } => {
                &corners[0] * ((1.0 - u) * (1.0 - v))
                    + &corners[1] * (u * (1.0 - v))
                    + &corners[2] * ((1.0 - u) * v)
                    + &corners[3] * (u * v)
            }
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        match self.chart {
            SectionChart::Affine { .. } => self.raw_point(u, v).iter().all(|&x| x >= -DOMAIN_TOL),
            SectionChart::Bilinear { .. } => (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v),
        }
    }

    /// The bistochastic matrix at chart coordinates `(u, v)`.
    pub fn point(&self, u: f64, v: f64) -> Result<BistochasticMatrix> {
        if !self.contains(u, v) {
            return Err(Error::OutOfSection { u, v });
        }
        let m = self.raw_point(u, v).map(|x| x.max(0.0));
        Ok(BistochasticMatrix::new_unchecked(m))
    }

    /// Largest `t` with `centre + t (cos θ, sin θ)` inside the domain. The
    /// returned point has no negative entries, so it is exactly bistochastic.
    pub fn exit_distance(&self, theta: f64) -> f64 {
        let (u0, v0) = self.centre();
        let (c, s) = (theta.cos(), theta.sin());
        let inside = |u: f64, v: f64| match self.chart {
            SectionChart::Affine { .. } => self.raw_point(u, v).iter().all(|&x| x >= 0.0),
            SectionChart::Bilinear { .. } => self.contains(u, v),
        };
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(u0 + mid * c, v0 + mid * s) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn margin_at(spec: &CrossSectionSpec, u: f64, v: f64) -> f64 {
    let b = spec.point(u, v).expect("inside the section");
    is_unistochastic(&b).expect("3x3").margin
}

/// Points of the orthostochastic boundary inside a section, one per ray from
/// the centre (`resolution` rays), found by bisection on the chain-links margin.
///
/// Rays that stay unistochastic up to the edge of the section contribute no
/// point, so a section lying wholly inside the unistochastic set gives an empty
/// trace. On a facet the unistochastic set is the charted surface itself and its
/// boundary is the four √2 edges, which is returned instead.
pub fn section_boundary_trace(spec: &CrossSectionSpec, resolution: usize) -> Vec<(f64, f64)> {
    if let SectionChart::Bilinear { .. } = spec.chart {
        let per_edge = resolution.div_ceil(4).max(1);
        let mut out = Vec::with_capacity(4 * per_edge);
        for i in 0..per_edge {
            let t = i as f64 / per_edge as f64;
            out.extend([(t, 0.0), (1.0, t), (1.0 - t, 1.0), (0.0, 1.0 - t)]);
        }
        return out;
    }
    let (u0, v0) = spec.centre();
    (0..resolution)
        .filter_map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
            boundary_along(spec, theta).map(|t| (u0 + t * theta.cos(), v0 + t * theta.sin()))
        })
        .collect()
}

/// Distance from the centre to the orthostochastic boundary along `theta`, if
/// the ray leaves the unistochastic set before the section edge.
fn boundary_along(spec: &CrossSectionSpec, theta: f64) -> Option<f64> {
    let (u0, v0) = spec.centre();
    let (c, s) = (theta.cos(), theta.sin());
    let t_max = spec.exit_distance(theta);
    let at = |t: f64| margin_at(spec, u0 + t * c, v0 + t * s);
    if at(t_max) >= -MEMBERSHIP_TOL {
        return None;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if at(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

impl CrossSectionSpec {
    /// How far the ray from the centre at angle `theta` stays unistochastic:
    /// the orthostochastic boundary or the section edge, whichever comes first.
    pub fn unistochastic_reach(&self, theta: f64) -> f64 {
        boundary_along(self, theta).unwrap_or_else(|| self.exit_distance(theta))
    }
}
