//! Data behind the cross-section pictures, the Fourier index picture and the
//! trajectories of intersection points along paths out of `B★`.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use clifford_tori::birkhoff::{is_unistochastic, reconstruct_unitary, section_boundary_trace, CrossSectionSpec};
use clifford_tori::intersect::{find_intersections, scan_cell, scan_section, ScanCell, SolverConfig};
use clifford_tori::matcore::fourier_matrix;
use clifford_tori::topology::mub_alpha;
use rayon::prelude::*;

use crate::io::{num, Table};

pub const FIGURES: [&str; 7] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

/// Regular hexagon: its unistochastic part is a disk.
pub const REGULAR_HEXAGON: [f64; 3] = [1.0, 0.0, 0.0];
/// Hexagon degenerated to a triangle lying wholly inside the unistochastic set.
pub const TRIANGULAR_HEXAGON: [f64; 3] = [2.0 / 3.0, 0.0, 1.0 / 3.0];

/// A straight path from `B★` in the section through `B★` and the edge
/// `P_0`–`P_1`, where `P_0` sits at `(1, 0)` and `P_1` at `(0, 1)`.
#[derive(Clone, Copy, Debug)]
pub struct SectionPath {
    pub label: &'static str,
    pub theta: f64,
}

/// One path of each kind: `a` crosses the inner line where a pair of points
/// merges, `b` runs along the bisectrix towards a Schur matrix, `c` crosses the
/// inner line where three points merge, `d` runs to the middle of the edge.
pub const PARABOLIC_PATHS: [SectionPath; 4] = [
    SectionPath { label: "a", theta: 1.25 * PI },
    SectionPath { label: "b", theta: PI },
    SectionPath { label: "c", theta: 0.75 * PI },
    SectionPath { label: "d", theta: 0.25 * PI },
];

pub fn parabolic_section() -> CrossSectionSpec {
    CrossSectionSpec::parabolic(0, 1).expect("valid edge")
}

/// Points `(t, u, v)` along a path, from `B★` (`t = 0`) to the end of the
/// unistochastic set (`t = 1`).
pub fn path_points(spec: &CrossSectionSpec, path: SectionPath, steps: usize) -> Vec<(f64, f64, f64)> {
    let reach = spec.unistochastic_reach(path.theta);
    let (u0, v0) = spec.centre();
    (0..=steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            (t, u0 + t * reach * path.theta.cos(), v0 + t * reach * path.theta.sin())
        })
        .collect()
}

fn count_field(c: &ScanCell) -> String {
    c.count.map(|n| n.to_string()).unwrap_or_default()
}

fn scan_table(name: &str, spec: &CrossSectionSpec, resolution: usize, cfg: &SolverConfig) -> Table {
    let mut t = Table::new(name, &["u", "v", "member", "margin", "count", "error"]);
    for c in scan_section(spec, resolution, cfg) {
        let margin = is_unistochastic(&spec.point(c.u, c.v).expect("scan cells lie inside")).expect("3x3").margin;
        t.push([num(c.u), num(c.v), c.member.to_string(), num(margin), count_field(&c), c.error.clone().unwrap_or_default()]);
    }
    t
}

fn boundary_table(name: &str, spec: &CrossSectionSpec, resolution: usize, cfg: &SolverConfig) -> Table {
    let trace = section_boundary_trace(spec, resolution);
    let cells: Vec<ScanCell> = trace.par_iter().map(|&(u, v)| scan_cell(spec, u, v, cfg)).collect();
    let mut t = Table::new(name, &["u", "v", "count", "error"]);
    for c in cells {
        t.push([num(c.u), num(c.v), count_field(&c), c.error.clone().unwrap_or_default()]);
    }
    t
}

fn paths_table(spec: &CrossSectionSpec, steps: usize, cfg: &SolverConfig) -> Table {
    let mut t = Table::new("fig5_paths", &["path", "t", "u", "v", "count", "error"]);
    for path in PARABOLIC_PATHS {
        let pts = path_points(spec, path, steps);
        let cells: Vec<ScanCell> = pts.par_iter().map(|&(_, u, v)| scan_cell(spec, u, v, cfg)).collect();
        for ((tt, _, _), c) in pts.iter().zip(cells) {
            t.push([
                path.label.to_string(),
                num(*tt),
                num(c.u),
                num(c.v),
                count_field(&c),
                c.error.clone().unwrap_or_default(),
            ]);
        }
    }
    t
}

fn fourier_points(cfg: &SolverConfig) -> Result<Table> {
    let set = find_intersections(&fourier_matrix(3)?, cfg)?;
    let mut t = Table::new(
        "fig6_fourier_points",
        &["alpha1", "alpha2", "z1_re", "z1_im", "z2_re", "z2_im", "det", "index", "basis"],
    );
    for p in &set.points {
        // label each point by the circulant basis it belongs to
        let mut basis = String::new();
        for z in 1..3 {
            for a in 0..3 {
                if mub_alpha(3, z, a)?.distance(&p.alpha) < 1e-8 {
                    basis = z.to_string();
                }
            }
        }
        t.push([
            num(p.alpha.as_slice()[0]),
            num(p.alpha.as_slice()[1]),
            num(p.z[0].re),
            num(p.z[0].im),
            num(p.z[1].re),
            num(p.z[1].im),
            num(p.jac_det),
            p.index.to_string(),
            basis,
        ]);
    }
    Ok(t)
}

/// Intersection points in `(α₁, α₂)` along each path, for the dephased
/// representative of every matrix on the path.
fn trajectories(steps: usize, cfg: &SolverConfig) -> Table {
    let spec = parabolic_section();
    let mut t = Table::new(
        "fig7_trajectories",
        &["path", "t", "normal_form", "kind", "alpha1", "alpha2", "index", "error"],
    );
    for path in PARABOLIC_PATHS {
        let pts = path_points(&spec, path, steps);
        let sets: Vec<_> = pts
            .par_iter()
            .map(|&(_, u, v)| {
                let b = spec.point(u, v)?;
                let w = reconstruct_unitary(&b)?;
                find_intersections(&w, cfg)
            })
            .collect();
        for ((tt, _, _), set) in pts.iter().zip(sets) {
            let row = |kind: &str, a: &[f64], index: String, err: String| {
                [
                    path.label.to_string(),
                    num(*tt),
                    "dephased".to_string(),
                    kind.to_string(),
                    a.first().map(|&x| num(x)).unwrap_or_default(),
                    a.get(1).map(|&x| num(x)).unwrap_or_default(),
                    index,
                    err,
                ]
            };
            match set {
                Ok(s) => {
                    for p in &s.points {
                        t.push(row("point", p.alpha.as_slice(), p.index.to_string(), String::new()));
                    }
                    for w in &s.continuum_witnesses {
                        t.push(row("continuum", w.as_slice(), String::new(), String::new()));
                    }
                }
                Err(e) => t.push(row("failed", &[], String::new(), e.to_string())),
            }
        }
    }
    t
}

/// Tables for one figure. `resolution` is the grid size of section scans and
/// the number of rays, path steps and trajectory steps.
pub fn figure_data(id: &str, resolution: usize, cfg: &SolverConfig) -> Result<Vec<Table>> {
    if resolution == 0 {
        bail!("resolution must be positive");
    }
    Ok(match id {
        "fig1" => {
            let spec = CrossSectionSpec::facet(0, 0)?;
            vec![scan_table("fig1_facet_scan", &spec, resolution, cfg)]
        }
        "fig2" => {
            let spec = CrossSectionSpec::triangle();
            vec![
                scan_table("fig2_triangle_scan", &spec, resolution, cfg),
                boundary_table("fig2_triangle_boundary", &spec, resolution, cfg),
            ]
        }
        "fig3" => {
            let spec = CrossSectionSpec::hexagon(REGULAR_HEXAGON)?;
            vec![
                scan_table("fig3_hexagon_scan", &spec, resolution, cfg),
                boundary_table("fig3_hexagon_boundary", &spec, resolution, cfg),
            ]
        }
        "fig4" => {
            let spec = CrossSectionSpec::hexagon(TRIANGULAR_HEXAGON)?;
            vec![scan_table("fig4_triangle_scan", &spec, resolution, cfg)]
        }
        "fig5" => {
            let spec = parabolic_section();
            vec![
                scan_table("fig5_parabolic_scan", &spec, resolution, cfg),
                boundary_table("fig5_parabolic_boundary", &spec, resolution, cfg),
                paths_table(&spec, resolution, cfg),
            ]
        }
        "fig6" => vec![fourier_points(cfg)?],
        "fig7" => vec![trajectories(resolution, cfg)],
        other => return Err(clifford_tori::Error::UnknownFigure(other.to_string()).into()),
    })
}
