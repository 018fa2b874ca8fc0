//! Seeded Monte Carlo experiments and the Fourier-pair table.
//!
//! Every sample `i` draws from its own stream `rng::stream(seed, i)` and solves
//! with seed `rng::child_seed(seed, i)`, and results are reduced in sample
//! order, so reports do not depend on the thread count.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use clifford_tori::birkhoff::{bistochastic_distance, is_unistochastic, sample_birkhoff_with, BistochasticMatrix};
use clifford_tori::families::{family_fixed_points, family_intersections_analytic, interpolating_family};
use clifford_tori::intersect::{find_intersections, Classification, IntersectionCount, IntersectionSet, PhasePoint, SolverConfig};
use clifford_tori::matcore::{fourier_matrix, haar_random_unitary_with, unistochastic_projection};
use clifford_tori::{rng, Error};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::MatrixFile;

pub const SCHEMA_VERSION: u32 = 1;

/// `8π²/105`, the unistochastic share of the polytope's volume.
pub const VOLUME_RATIO: f64 = 8.0 * PI * PI / 105.0;

/// Mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    /// Sample mean and `s / √n`; summed in the given order.
    pub fn of(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Some(Estimate { mean, stderr: (var / n as f64).sqrt(), n })
    }

    /// Fraction `k / n` with binomial standard error.
    pub fn fraction(k: usize, n: usize) -> Self {
        let p = k as f64 / n.max(1) as f64;
        Estimate { mean: p, stderr: (p * (1.0 - p) / n.max(1) as f64).sqrt(), n }
    }

    /// Whether `target` lies within `tol` of the mean.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.mean - target).abs() <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub sample: u64,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Outcome label to frequency; failed samples appear under `"failed"`, so
    /// the frequencies sum to `samples`.
    pub histogram: BTreeMap<String, usize>,
    pub failures: Vec<Failure>,
    pub statistics: BTreeMap<String, Estimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bins: Vec<Bin>,
    /// Wall-clock seconds; left out by default so output is reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl ExperimentReport {
    fn new(experiment: &str, seed: u64, samples: usize, dim: Option<usize>) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            seed,
            samples,
            dim,
            histogram: BTreeMap::new(),
            failures: Vec::new(),
            statistics: BTreeMap::new(),
            bins: Vec::new(),
            runtime_seconds: None,
        }
    }

    pub fn frequency(&self, label: &str) -> usize {
        self.histogram.get(label).copied().unwrap_or(0)
    }

    /// Most frequent finite count.
    pub fn mode(&self) -> Option<usize> {
        self.histogram
            .iter()
            .filter_map(|(k, &v)| k.parse::<usize>().ok().map(|c| (v, c)))
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .map(|(_, c)| c)
    }

    /// Finite counts that occurred.
    pub fn support(&self) -> Vec<usize> {
        self.histogram.keys().filter_map(|k| k.parse().ok()).collect()
    }
}

/// The Fourier pair in dimension `n`.
#[derive(Clone, Debug, Serialize)]
pub struct Table1Row {
    pub schema_version: u32,
    pub dim: usize,
    /// Absent when the solver failed.
    pub count: Option<IntersectionCount>,
    pub classification: Option<Classification>,
    pub index_sum: Option<i64>,
    /// Distinct solutions after each round: the stabilization evidence.
    pub round_counts: Vec<usize>,
    pub starts_per_round: usize,
    pub error: Option<String>,
}

pub fn table1_experiment(n: usize, cfg: &SolverConfig) -> anyhow::Result<Table1Row> {
    anyhow::ensure!((2..=7).contains(&n), "table 1 covers 2 <= N <= 7, got {n}");
    let f = fourier_matrix(n)?;
    let base = Table1Row {
        schema_version: SCHEMA_VERSION,
        dim: n,
        count: None,
        classification: None,
        index_sum: None,
        round_counts: Vec::new(),
        starts_per_round: cfg.starts_for(n),
        error: None,
    };
    Ok(match find_intersections(&f, cfg) {
        Ok(set) => Table1Row {
            count: Some(set.count()),
            classification: Some(set.classification),
            index_sum: (set.classification != Classification::Continuum).then(|| set.index_sum()),
            round_counts: set.round_counts.clone(),
            ..base
        },
        Err(Error::NonConverged { history, .. }) => Table1Row {
            error: Some("count did not stabilize".into()),
            round_counts: history,
            ..base
        },
        Err(e) => Table1Row { error: Some(e.to_string()), ..base },
    })
}

struct Sample {
    outcome: Result<IntersectionCount, String>,
    distance: f64,
}

/// Counts intersections of `samples` Haar-random pairs in dimension `n`.
pub fn table2_experiment(n: usize, samples: usize, seed: u64, cfg: &SolverConfig) -> anyhow::Result<ExperimentReport> {
    anyhow::ensure!(n == 3 || n == 4, "table 2 covers N = 3 and N = 4, got {n}");
    cfg.validate()?;
    let star = BistochasticMatrix::van_der_waerden(n);
    let results: Vec<Sample> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = haar_random_unitary_with(n, &mut rng::stream(seed, i)).expect("n >= 2");
            let distance = bistochastic_distance(&unistochastic_projection(&u), &star);
            let local = cfg.clone().with_seed(rng::child_seed(seed, i));
            let outcome = find_intersections(&u, &local).map(|s| s.count()).map_err(|e| e.to_string());
            Sample { outcome, distance }
        })
        .collect();

    let mut report = ExperimentReport::new("table2", seed, samples, Some(n));
    let mut distances: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, s) in results.iter().enumerate() {
        let label = match &s.outcome {
            Ok(c) => c.to_string(),
            Err(e) => {
                report.failures.push(Failure { sample: i as u64, error: e.clone() });
                "failed".to_string()
            }
        };
        *report.histogram.entry(label.clone()).or_default() += 1;
        distances.entry(label).or_default().push(s.distance);
    }
    for (label, &k) in &report.histogram {
        report.statistics.insert(format!("fraction_{label}"), Estimate::fraction(k, samples));
    }
    for (label, ds) in &distances {
        if let Some(e) = Estimate::of(ds) {
            report.statistics.insert(format!("distance_{label}"), e);
        }
    }
    Ok(report)
}

/// Runs an experiment and records its wall-clock time.
pub fn timed<F: FnOnce() -> anyhow::Result<ExperimentReport>>(f: F) -> anyhow::Result<ExperimentReport> {
    let start = Instant::now();
    let mut r = f()?;
    r.runtime_seconds = Some(start.elapsed().as_secs_f64());
    Ok(r)
}

const MARGIN_BINS: usize = 40;

/// Rejection-samples Birkhoff's polytope and reports the unistochastic share,
/// with a histogram of chain-links margins.
pub fn volume_experiment(samples: usize, seed: u64) -> anyhow::Result<ExperimentReport> {
    anyhow::ensure!(samples >= 1000, "need at least 1000 samples, got {samples}");
    let margins: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let b = sample_birkhoff_with(&mut rng::stream(seed, i));
            is_unistochastic(&b).expect("3x3").margin
        })
        .collect();
    let mut report = ExperimentReport::new("volume", seed, samples, Some(3));
    let members = margins.iter().filter(|&&m| m >= -clifford_tori::birkhoff::MEMBERSHIP_TOL).count();
    report.histogram.insert("member".into(), members);
    report.histogram.insert("non_member".into(), samples - members);
    report.statistics.insert("unistochastic_fraction".into(), Estimate::fraction(members, samples));

    let (lo, hi) = margins.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &m| (a.min(m), b.max(m)));
    let width = (hi - lo) / MARGIN_BINS as f64;
    let mut counts = vec![0usize; MARGIN_BINS];
    for &m in &margins {
        let k = (((m - lo) / width) as usize).min(MARGIN_BINS - 1);
        counts[k] += 1;
    }
    report.bins = counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| Bin { lo: lo + k as f64 * width, hi: lo + (k + 1) as f64 * width, count })
        .collect();
    Ok(report)
}

/// Solver output for `U(σ)` next to the closed-form intersections.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub schema_version: u32,
    pub dim: usize,
    pub sigma: f64,
    pub matrix: MatrixFile,
    pub numeric: Option<IntersectionSet>,
    pub error: Option<String>,
    /// Six-column set for N = 3, the fixed Fourier basis otherwise.
    pub analytic: Vec<PhasePoint>,
    /// Every analytic point was found, and for N = 3 nothing else was.
    pub matched: bool,
    /// Largest distance from an analytic point to its nearest numeric one.
    pub max_distance: Option<f64>,
}

/// Agreement radius between numeric and closed-form points.
pub const MATCH_TOL: f64 = 1e-8;

pub fn family_report(n: usize, sigma: f64, cfg: &SolverConfig) -> anyhow::Result<FamilyReport> {
    let u = interpolating_family(n, sigma)?;
    let analytic = if n == 3 { family_intersections_analytic(sigma, cfg.dedup_tol)? } else { family_fixed_points(n)? };
    let (numeric, error) = match find_intersections(&u, cfg) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let points: Vec<&PhasePoint> = numeric.iter().flat_map(|s| s.points.iter().map(|p| &p.alpha)).collect();
    let nearest = |a: &PhasePoint| points.iter().map(|p| p.distance(a)).fold(f64::INFINITY, f64::min);
    let max_distance = numeric.as_ref().map(|_| analytic.iter().map(nearest).fold(0.0, f64::max));
    let same_size = n != 3 || points.len() == analytic.len();
    let matched = max_distance.is_some_and(|d| d < MATCH_TOL) && same_size;
    Ok(FamilyReport {
        schema_version: SCHEMA_VERSION,
        dim: n,
        sigma,
        matrix: MatrixFile::from_unitary(&u),
        numeric,
        error,
        analytic,
        matched,
        max_distance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub count: Option<IntersectionCount>,
    pub analytic_count: usize,
    pub matched: bool,
}

/// `σ_k = kπ / steps` for `k = 1..=steps`, N = 3.
pub fn family_sweep(steps: usize, cfg: &SolverConfig) -> anyhow::Result<Vec<SweepRow>> {
    anyhow::ensure!(steps > 0, "need at least one step");
    (1..=steps)
        .into_par_iter()
        .map(|k| {
            let sigma = PI * k as f64 / steps as f64;
            let r = family_report(3, sigma, cfg)?;
            Ok(SweepRow {
                sigma,
                count: r.numeric.as_ref().map(|s| s.count()),
                analytic_count: r.analytic.len(),
                matched: r.matched,
            })
        })
        .collect()
}
