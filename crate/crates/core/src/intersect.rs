//! Intersections of the computational Clifford torus with its image under `U`.
//!
//! A point `U (1, e^{iα_1}, ..., e^{iα_n})` of the shifted torus lies on the
//! computational torus when every component has unit modulus, i.e. when
//! `f_j = |(U e^{iα})_j|² - 1` vanishes for all `j`. Since `Σ_j f_j = 0` by
//! unitarity, `f_0` is dropped and the remaining `n = N-1` equations are solved
//! by damped Newton from many starting points on the torus.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::birkhoff::CrossSectionSpec;
use crate::birkhoff::{is_unistochastic, reconstruct_unitary};
use crate::error::{Error, Result};
use crate::matcore::{cis, UnitaryMatrix};
use crate::rng;
use crate::topology;

/// More distinct singular solutions than this means a continuum even when no
/// single curve was traced.
pub const CONTINUUM_MIN_POINTS: usize = 50;

/// Distinct solutions closer than this are taken to be copies of one
/// non-simple root, which Newton only approaches linearly.
pub const CLUSTER_RADIUS: f64 = 1e-4;

const MAX_NEWTON_STEPS: usize = 100;
const MAX_HALVINGS: usize = 30;
const MAX_POLISH_STEPS: usize = 10;
const MAX_WITNESSES: usize = 200;

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= TAU { 0.0 } else { y }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Angles `(α_1, ..., α_{N-1})` of a point on the shifted torus, each in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhasePoint {
    alpha: Vec<f64>,
}

impl PhasePoint {
    pub fn new(alpha: Vec<f64>) -> Self {
        PhasePoint { alpha: alpha.into_iter().map(wrap).collect() }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    /// `(1, e^{iα_1}, ..., e^{iα_n})`.
    pub fn phases(&self) -> Vec<Complex64> {
        homogeneous(&self.alpha)
    }

    /// Toroidal max-metric distance.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        torus_distance(&self.alpha, &other.alpha)
    }
}

fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| angle_gap(x, y)).fold(0.0, f64::max)
}

fn homogeneous(alpha: &[f64]) -> Vec<Complex64> {
    std::iter::once(Complex64::new(1.0, 0.0)).chain(alpha.iter().map(|&x| cis(x))).collect()
}

/// One solution of the unbiasedness equations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntersectionPoint {
    pub alpha: PhasePoint,
    /// Affine coordinates `z_s = ψ_s / ψ_0` of the intersection `ψ = U e^{iα}`.
    #[serde(serialize_with = "ser_complex_vec", deserialize_with = "de_complex_vec")]
    pub z: Vec<Complex64>,
    pub residual: f64,
    /// Frame determinant of the intersection index.
    pub jac_det: f64,
    /// `±1` for transversal points, `0` otherwise.
    pub index: i8,
}

fn ser_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
    pairs.serialize(s)
}

fn de_complex_vec<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Complex64>, D::Error> {
    let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    FiniteTransversal,
    FiniteDegenerate,
    Continuum,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntersectionSet {
    pub classification: Classification,
    /// Empty for a continuum.
    pub points: Vec<IntersectionPoint>,
    /// Sample of solutions on the continuum; empty otherwise.
    pub continuum_witnesses: Vec<PhasePoint>,
    /// Distinct solution count after each round of starts.
    pub round_counts: Vec<usize>,
    pub starts: usize,
}

impl IntersectionSet {
    pub fn count(&self) -> IntersectionCount {
        match self.classification {
            Classification::Continuum => IntersectionCount::Continuum,
            _ => IntersectionCount::Finite(self.points.len()),
        }
    }

    pub fn index_sum(&self) -> i64 {
        self.points.iter().map(|p| p.index as i64).sum()
    }
}

/// Number of intersection points, or a continuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntersectionCount {
    Finite(usize),
    Continuum,
}

impl IntersectionCount {
    pub fn finite(self) -> Option<usize> {
        match self {
            IntersectionCount::Finite(n) => Some(n),
            IntersectionCount::Continuum => None,
        }
    }
}

impl fmt::Display for IntersectionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntersectionCount::Finite(n) => write!(f, "{n}"),
            IntersectionCount::Continuum => f.write_str("continuum"),
        }
    }
}

impl Serialize for IntersectionCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IntersectionCount::Finite(n) => s.serialize_u64(*n as u64),
            IntersectionCount::Continuum => s.serialize_str("continuum"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Accepted points satisfy `max_j |f_j| < residual_tol`.
    pub residual_tol: f64,
    /// Toroidal distance below which two solutions are the same point.
    pub dedup_tol: f64,
    /// Frame determinants at or below this are non-transversal.
    pub jacobian_tol: f64,
    /// Newton starts per round; `None` picks a default from the dimension.
    pub starts_per_round: Option<usize>,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-12,
            dedup_tol: 1e-7,
            jacobian_tol: 1e-8,
            starts_per_round: None,
            max_rounds: 12,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts_per_round = Some(starts);
        self
    }

    /// Starts per round used for an `n_dim`-dimensional problem.
    pub fn starts_for(&self, n_dim: usize) -> usize {
        self.starts_per_round.unwrap_or(match n_dim {
            0..=2 => 16,
            3 => 100,
            4 => 400,
            5 => 4096,
            6 => 16384,
            _ => 49152,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let tols = [self.residual_tol, self.dedup_tol, self.jacobian_tol];
        if tols.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidConfig(format!("tolerances must be positive, got {tols:?}")));
        }
        if self.starts_per_round == Some(0) || self.max_rounds == 0 {
            return Err(Error::InvalidConfig("need at least one start and one round".into()));
        }
        Ok(())
    }
}

/// The unbiasedness residuals in a flat row-major copy of `U`.
struct System {
    n: usize,
    u: Vec<Complex64>,
}

impl System {
    fn new(u: &UnitaryMatrix) -> Self {
        let n = u.dim();
        let u = (0..n * n).map(|k| u.get(k / n, k % n)).collect();
        System { n, u }
    }

    fn image(&self, e: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|j| (0..self.n).map(|r| self.u[j * self.n + r] * e[r]).sum()).collect()
    }

    fn residual(&self, alpha: &[f64]) -> Vec<f64> {
        self.image(&homogeneous(alpha)).iter().map(|z| z.norm_sqr() - 1.0).collect()
    }

    /// Residual and Jacobian of the full system, `N` rows.
    fn linearize(&self, alpha: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let e = homogeneous(alpha);
        let z = self.image(&e);
        let f = z.iter().map(|z| z.norm_sqr() - 1.0).collect();
        let jac = DMatrix::from_fn(self.n, self.n - 1, |j, c| {
            let r = c + 1;
            -2.0 * (z[j].conj() * self.u[j * self.n + r] * e[r]).im
        });
        (f, jac)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `f_j = |(U (1, e^{iα_1}, ...))_j|² - 1` for all `j`.
pub fn residual(u: &UnitaryMatrix, alpha: &PhasePoint) -> Vec<f64> {
    System::new(u).residual(alpha.as_slice())
}

/// `max_j |f_j|`.
pub fn residual_norm(u: &UnitaryMatrix, alpha: &PhasePoint) -> f64 {
    max_abs(&residual(u, alpha))
}

/// `∂f_j/∂α_r = 2 Re(conj(z_j) i U_{jr} e^{iα_r})`, an `N × (N-1)` matrix.
pub fn residual_jacobian(u: &UnitaryMatrix, alpha: &PhasePoint) -> DMatrix<f64> {
    System::new(u).linearize(alpha.as_slice()).1
}

/// Newton step on the reduced system. LU first; a truncated SVD takes over when
/// the Jacobian is singular or the LU step is wild, as happens on a continuum.
fn newton_step(jac: &DMatrix<f64>, f: &[f64]) -> DVector<f64> {
    let n = jac.ncols();
    let j = jac.rows(1, n).into_owned();
    let b = DVector::from_iterator(n, f[1..].iter().map(|x| -x));
    if let Some(s) = j.clone().lu().solve(&b) {
        if s.iter().all(|x| x.is_finite()) && s.amax() < 4.0 {
            return s;
        }
    }
    let svd = j.svd(true, true);
    let cut = 1e-10 * svd.singular_values.max();
    svd.solve(&b, cut).unwrap_or_else(|_| DVector::zeros(n))
}

/// Damped Newton from `start`; returns the solution and its residual.
fn newton(sys: &System, start: &[f64], tol: f64) -> Option<(Vec<f64>, f64)> {
    let mut x = start.to_vec();
    let (mut f, mut jac) = sys.linearize(&x);
    let mut polish = 0;
    for _ in 0..MAX_NEWTON_STEPS {
        if max_abs(&f) < tol {
            polish += 1;
            if polish > MAX_POLISH_STEPS {
                break;
            }
        }
        let step = newton_step(&jac, &f);
        let current = norm2(&f);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let ft = sys.residual(&trial);
            if norm2(&ft) < current {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => {
                x = next;
                (f, jac) = sys.linearize(&x);
            }
            None => break,
        }
    }
    let r = max_abs(&f);
    (r < tol).then(|| (x.into_iter().map(wrap).collect(), r))
}

fn lattice_starts(n: usize, count: usize) -> Vec<Vec<f64>> {
    let k = ((count as f64).powf(1.0 / n as f64).floor() as usize).max(2);
    let total = k.pow(n as u32);
    // irrational offset keeps the lattice off symmetric points
    let shift = 0.5 + 0.1 * (2f64.sqrt() - 1.0);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let i = idx % k;
                    idx /= k;
                    TAU * (i as f64 + shift) / k as f64
                })
                .collect()
        })
        .collect()
}

fn random_starts(n: usize, count: usize, seed: u64, round: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, round);
    (0..count).map(|_| (0..n).map(|_| rng.random::<f64>() * TAU).collect()).collect()
}

struct Raw {
    alpha: Vec<f64>,
    residual: f64,
    det: f64,
    /// A nearby solution on a curve through this point, once probed.
    on_curve: Option<Option<Vec<f64>>>,
}

/// Step used to probe and walk a curve of solutions.
const CURVE_PROBE_STEP: f64 = 1e-3;
const CURVE_WALK_STEP: f64 = 0.05;

/// Minimal-norm Gauss-Newton correction back onto the solution set. Unlike
/// [`newton`] it does not slide along a curve of solutions.
fn project(sys: &System, start: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    for _ in 0..MAX_NEWTON_STEPS {
        let (f, jac) = sys.linearize(&x);
        if max_abs(&f) < tol {
            return Some(x);
        }
        let svd = jac.svd(true, true);
        let cut = 1e-10 * svd.singular_values.max();
        let b = DVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let step = svd.solve(&b, cut).ok()?;
        x.iter_mut().zip(step.iter()).for_each(|(a, s)| *a += s);
    }
    None
}

fn toroidal_difference(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI).collect()
}

/// A solution at distance about `h` from the singular solution `alpha`, if the
/// solution set extends away from it. Each right singular direction of the
/// Jacobian is tried both ways; around an isolated root every correction falls
/// back onto `alpha`.
fn curve_neighbour(sys: &System, alpha: &[f64], tol: f64) -> Option<Vec<f64>> {
    let (_, jac) = sys.linearize(alpha);
    let v_t = jac.svd(false, true).v_t.expect("requested");
    for k in (0..v_t.nrows()).rev() {
        for sign in [1.0, -1.0] {
            let trial: Vec<f64> =
                alpha.iter().zip(v_t.row(k).iter()).map(|(a, d)| a + sign * CURVE_PROBE_STEP * d).collect();
            if let Some(x) = project(sys, &trial, tol) {
                if torus_distance(&x, alpha) > 0.5 * CURVE_PROBE_STEP {
                    return Some(x);
                }
            }
        }
    }
    None
}

/// Samples of the solution curve through `alpha` and `first`, by secant
/// prediction and projection, walking both ways.
fn walk_curve(sys: &System, alpha: &[f64], first: &[f64], tol: f64, max_points: usize) -> Vec<PhasePoint> {
    let mut out = vec![PhasePoint::new(alpha.to_vec())];
    let unit = |v: Vec<f64>| {
        let n = norm2(&v);
        v.into_iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let initial = unit(toroidal_difference(first, alpha));
    for sign in [1.0, -1.0] {
        let mut here = alpha.to_vec();
        let mut dir: Vec<f64> = initial.iter().map(|d| sign * d).collect();
        for _ in 0..max_points / 2 {
            let trial: Vec<f64> = here.iter().zip(&dir).map(|(a, d)| a + CURVE_WALK_STEP * d).collect();
            let Some(next) = project(sys, &trial, tol) else { break };
            let step = toroidal_difference(&next, &here);
            if norm2(&step) < 0.25 * CURVE_WALK_STEP || torus_distance(&next, alpha) < 0.5 * CURVE_WALK_STEP {
                break;
            }
            dir = unit(step);
            out.push(PhasePoint::new(next.clone()));
            here = next;
        }
    }
    out
}

/// Groups raw solutions around representatives: a solution joins the first
/// group whose leading member is within [`CLUSTER_RADIUS`]. A multiple root
/// collapses to one group, while a curve of solutions keeps splitting into new
/// groups as it is sampled more densely.
fn clusters(raw: &[Raw]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, r) in raw.iter().enumerate() {
        match groups.iter_mut().find(|g| torus_distance(&raw[g[0]].alpha, &r.alpha) < CLUSTER_RADIUS) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Multistart Newton enumeration of all intersections, with classification.
///
/// Rounds of starts (a lattice first, then seeded uniform draws) continue until
/// the number of distinct points is unchanged over two further rounds and, for
/// transversal sets, the indices sum to zero.
pub fn find_intersections(u: &UnitaryMatrix, cfg: &SolverConfig) -> Result<IntersectionSet> {
    cfg.validate()?;
    let defect = u.unitarity_defect();
    if !(defect <= crate::matcore::UNITARY_TOL) {
        return Err(Error::InvalidMatrix(defect));
    }
    let sys = System::new(u);
    let n = u.dim() - 1;
    let per_round = cfg.starts_for(u.dim());
    let mut raw: Vec<Raw> = Vec::new();
    let mut history = Vec::new();
    let mut starts = 0;
    for round in 0..cfg.max_rounds {
        let batch =
            if round == 0 { lattice_starts(n, per_round) } else { random_starts(n, per_round, cfg.seed, round as u64) };
        starts += batch.len();
        let found: Vec<Option<(Vec<f64>, f64)>> =
            batch.par_iter().map(|s| newton(&sys, s, cfg.residual_tol)).collect();
        for (alpha, residual) in found.into_iter().flatten() {
            match raw.iter_mut().find(|r| torus_distance(&r.alpha, &alpha) < cfg.dedup_tol) {
                Some(r) if residual < r.residual => {
                    *r = Raw { alpha, residual, det: f64::NAN, on_curve: None };
                }
                Some(_) => {}
                None => raw.push(Raw { alpha, residual, det: f64::NAN, on_curve: None }),
            }
        }
        for r in raw.iter_mut().filter(|r| r.det.is_nan()) {
            r.det = topology::frame_determinant(u, &PhasePoint::new(r.alpha.clone()))?;
        }
        let groups = clusters(&raw);
        let singular: Vec<bool> =
            groups.iter().map(|g| g.len() > 1 || raw[g[0]].det.abs() <= cfg.jacobian_tol).collect();
        let n_singular = singular.iter().filter(|&&s| s).count();
        history.push(groups.len());

        let mut curve = None;
        for (g, _) in groups.iter().zip(&singular).filter(|(_, &s)| s) {
            let r = &mut raw[g[0]];
            let alpha = &r.alpha;
            if let Some(next) = r.on_curve.get_or_insert_with(|| curve_neighbour(&sys, alpha, cfg.residual_tol)) {
                curve = Some((g[0], next.clone()));
                break;
            }
        }
        if curve.is_some() || n_singular > CONTINUUM_MIN_POINTS {
            let witnesses = match curve {
                Some((i, next)) => walk_curve(&sys, &raw[i].alpha, &next, cfg.residual_tol, MAX_WITNESSES),
                None => groups
                    .iter()
                    .zip(&singular)
                    .filter(|(_, &s)| s)
                    .take(MAX_WITNESSES)
                    .map(|(g, _)| PhasePoint::new(raw[g[0]].alpha.clone()))
                    .collect(),
            };
            return Ok(IntersectionSet {
                classification: Classification::Continuum,
                points: Vec::new(),
                continuum_witnesses: witnesses,
                round_counts: history,
                starts,
            });
        }

        let mut points: Vec<IntersectionPoint> = groups
            .iter()
            .zip(&singular)
            .map(|(g, &sing)| {
                let best = g.iter().copied().min_by(|&a, &b| raw[a].residual.total_cmp(&raw[b].residual)).unwrap();
                let r = &raw[best];
                let alpha = PhasePoint::new(r.alpha.clone());
                let psi = sys.image(&alpha.phases());
                let index = if sing { 0 } else { topology::index_of(r.det, cfg.jacobian_tol) };
                IntersectionPoint {
                    z: psi[1..].iter().map(|x| x / psi[0]).collect(),
                    alpha,
                    residual: r.residual,
                    jac_det: r.det,
                    index,
                }
            })
            .collect();
        let mut degenerate = n_singular > 0;
        let mut balanced = degenerate || points.iter().map(|p| p.index as i64).sum::<i64>() == 0;
        let k = history.len();
        let stable = k >= 3 && history[k - 1] == history[k - 2] && history[k - 2] == history[k - 3];
        if stable && !balanced {
            // Newton only resolves a double root to ~sqrt(eps), so its determinant can sit just
            // above jacobian_tol; uncancelled indices on a stable set expose it.
            let loose = cfg.jacobian_tol.sqrt();
            for p in points.iter_mut().filter(|p| p.jac_det.abs() <= loose) {
                p.index = 0;
                degenerate = true;
            }
            balanced = degenerate;
        }
        if stable && balanced && !points.is_empty() {
            points.sort_by(|a, b| a.alpha.as_slice().partial_cmp(b.alpha.as_slice()).unwrap());
            return Ok(IntersectionSet {
                classification: if degenerate {
                    Classification::FiniteDegenerate
                } else {
                    Classification::FiniteTransversal
                },
                points,
                continuum_witnesses: Vec::new(),
                round_counts: history,
                starts,
            });
        }
    }
    Err(Error::NonConverged { rounds: cfg.max_rounds, history })
}

pub fn count_intersections(u: &UnitaryMatrix, cfg: &SolverConfig) -> Result<IntersectionCount> {
    Ok(find_intersections(u, cfg)?.count())
}

/// One grid cell of a section scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanCell {
    pub u: f64,
    pub v: f64,
    pub member: bool,
    /// Set for unistochastic cells whose solve succeeded.
    pub count: Option<IntersectionCount>,
    pub error: Option<String>,
}

/// Counts intersections at the centres of a `resolution × resolution` grid over
/// the section; cells outside the section are omitted.
pub fn scan_section(spec: &CrossSectionSpec, resolution: usize, cfg: &SolverConfig) -> Vec<ScanCell> {
    let (u0, u1, v0, v1) = spec.bounding_box();
    let cells: Vec<(f64, f64)> = (0..resolution)
        .flat_map(|j| {
            (0..resolution).map(move |i| {
                let u = u0 + (u1 - u0) * (i as f64 + 0.5) / resolution as f64;
                let v = v0 + (v1 - v0) * (j as f64 + 0.5) / resolution as f64;
                (u, v)
            })
        })
        .filter(|&(u, v)| spec.contains(u, v))
        .collect();
    cells.into_par_iter().map(|(u, v)| scan_cell(spec, u, v, cfg)).collect()
}

pub fn scan_cell(spec: &CrossSectionSpec, u: f64, v: f64, cfg: &SolverConfig) -> ScanCell {
    let attempt = || -> Result<(bool, Option<IntersectionCount>)> {
        let b = spec.point(u, v)?;
        if !is_unistochastic(&b)?.member {
            return Ok((false, None));
        }
        let w = reconstruct_unitary(&b)?;
        Ok((true, Some(count_intersections(&w, cfg)?)))
    };
    match attempt() {
        Ok((member, count)) => ScanCell { u, v, member, count, error: None },
        Err(e) => ScanCell { u, v, member: true, count: None, error: Some(e.to_string()) },
    }
}
