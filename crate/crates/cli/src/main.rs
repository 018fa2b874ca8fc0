use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use clifford_tori::birkhoff::{CrossSectionSpec, SectionKind};
use clifford_tori::intersect::{find_intersections, scan_section, SolverConfig};
use clifford_tori::topology::{fourier_mub_index_table, IndexReport};
use ctori::experiments::{self, ExperimentReport};
use ctori::figures::{self, FIGURES};
use ctori::io::{num, read_matrix, to_json, Sink, Table};

#[derive(Parser)]
#[command(name = "ctori", version, about = "Intersections of Clifford tori in complex projective space")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample count (default 10000, or 1000000 for `volume`).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_residual: f64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_dedup: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_jacobian: f64,
    /// Newton starts per round (default depends on the dimension).
    #[arg(long, global = true)]
    starts: Option<usize>,
    #[arg(long, global = true, default_value_t = 12)]
    max_rounds: usize,
    /// Write output files into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock time in reports (makes output differ run to run).
    #[arg(long, global = true)]
    timing: bool,
}

impl Global {
    fn solver(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            residual_tol: self.tol_residual,
            dedup_tol: self.tol_dedup,
            jacobian_tol: self.tol_jacobian,
            starts_per_round: self.starts,
            max_rounds: self.max_rounds,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Section {
    Triangle,
    Hexagon,
    Facet,
    Parabolic,
}

#[derive(Args)]
struct SectionArgs {
    #[arg(long, value_enum)]
    section: Section,
    /// Probability vector of a hexagonal section, e.g. `1,0,0`.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0, 0.0])]
    p: Vec<f64>,
    /// Zeroed entry `row,col` of a facet.
    #[arg(long, value_delimiter = ',', default_values_t = [0, 0])]
    entry: Vec<usize>,
    /// Even and odd permutation labels of a parabolic section's edge.
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1])]
    edge: Vec<usize>,
}

impl SectionArgs {
    fn spec(&self) -> Result<CrossSectionSpec> {
        anyhow::ensure!(self.p.len() == 3, "--p takes three probabilities");
        anyhow::ensure!(self.entry.len() == 2 && self.edge.len() == 2, "--entry and --edge take two labels");
        let kind = match self.section {
            Section::Triangle => SectionKind::Triangle,
            Section::Hexagon => SectionKind::Hexagon { p: [self.p[0], self.p[1], self.p[2]] },
            Section::Facet => SectionKind::Facet { row: self.entry[0], col: self.entry[1] },
            Section::Parabolic => SectionKind::Parabolic { even: self.edge[0], odd: self.edge[1] },
        };
        Ok(CrossSectionSpec::from_kind(kind)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find and classify the intersections for a matrix file.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        /// Accept matrices that fail the unitarity check.
        #[arg(long)]
        no_check: bool,
    },
    /// Count intersections over a grid on a cross section of Birkhoff's polytope.
    Scan {
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long, default_value_t = 41)]
        resolution: usize,
    },
    /// Intersection indices for a matrix file.
    Indices {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        no_check: bool,
    },
    /// Index table of the Fourier pair at the circulant MUB points.
    MubIndices {
        #[arg(long)]
        prime: u64,
    },
    /// One member of the interpolating family, solved and compared with the closed form.
    Family {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        sigma: f64,
    },
    /// The N = 3 family over a σ grid in (0, π].
    FamilySweep {
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Intersection counts for the Fourier pair.
    Table1 {
        /// Dimensions to run (default 2,3,4,5).
        #[arg(long, value_delimiter = ',')]
        dim: Vec<usize>,
    },
    /// Histogram of intersection counts for Haar-random pairs.
    Table2 {
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Unistochastic share of Birkhoff's polytope by rejection sampling.
    Volume,
    /// CSV data underlying a figure.
    FigureData {
        /// fig1 .. fig7, or `all`.
        #[arg(long)]
        figure: String,
        #[arg(long, default_value_t = 41)]
        resolution: usize,
    },
}

fn emit_report(sink: &Sink, name: &str, report: ExperimentReport) -> Result<()> {
    sink.emit(name, &to_json(&report)?)
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring threads")?;
    }
    let cfg = g.solver()?;
    let sink = Sink::new(g.out.clone())?;
    let with_timing = |f: &dyn Fn() -> Result<ExperimentReport>| -> Result<ExperimentReport> {
        if g.timing {
            experiments::timed(f)
        } else {
            f()
        }
    };
    match &cli.command {
        Command::Solve { matrix, no_check } => {
            let u = read_matrix(matrix, !no_check)?;
            let set = find_intersections(&u, &cfg)?;
            sink.emit("solve.json", &to_json(&set)?)
        }
        Command::Scan { section, resolution } => {
            let spec = section.spec()?;
            let mut t = Table::new("scan", &["u", "v", "member", "count", "error"]);
            for c in scan_section(&spec, *resolution, &cfg) {
                t.push([
                    num(c.u),
                    num(c.v),
                    c.member.to_string(),
                    c.count.map(|n| n.to_string()).unwrap_or_default(),
                    c.error.unwrap_or_default(),
                ]);
            }
            sink.emit_table(&t)
        }
        Command::Indices { matrix, no_check } => {
            let u = read_matrix(matrix, !no_check)?;
            let set = find_intersections(&u, &cfg)?;
            sink.emit("indices.json", &to_json(&IndexReport::from_set(&set))?)
        }
        Command::MubIndices { prime } => {
            let mut t = Table::new(&format!("mub_indices_{prime}"), &["z", "a", "det", "analytic_det", "index", "residue"]);
            for r in fourier_mub_index_table(*prime)? {
                t.push([
                    r.z.to_string(),
                    r.a.to_string(),
                    num(r.det),
                    num(r.analytic_det),
                    r.index.to_string(),
                    r.residue.to_string(),
                ]);
            }
            sink.emit_table(&t)
        }
        Command::Family { dim, sigma } => {
            let r = experiments::family_report(*dim, *sigma, &cfg)?;
            sink.emit("family.json", &to_json(&r)?)
        }
        Command::FamilySweep { steps } => {
            let mut t = Table::new("family_sweep", &["sigma", "count", "match"]);
            for r in experiments::family_sweep(*steps, &cfg)? {
                t.push([num(r.sigma), r.count.map(|n| n.to_string()).unwrap_or_default(), r.matched.to_string()]);
            }
            sink.emit_table(&t)
        }
        Command::Table1 { dim } => {
            let dims = if dim.is_empty() { vec![2, 3, 4, 5] } else { dim.clone() };
            let rows = dims.iter().map(|&n| experiments::table1_experiment(n, &cfg)).collect::<Result<Vec<_>>>()?;
            sink.emit("table1.json", &to_json(&rows)?)
        }
        Command::Table2 { dim } => {
            let samples = g.samples.unwrap_or(10_000);
            let r = with_timing(&|| experiments::table2_experiment(*dim, samples, g.seed, &cfg))?;
            emit_report(&sink, &format!("table2_n{dim}.json"), r)
        }
        Command::Volume => {
            let samples = g.samples.unwrap_or(1_000_000);
            let r = with_timing(&|| experiments::volume_experiment(samples, g.seed))?;
            emit_report(&sink, "volume.json", r)
        }
        Command::FigureData { figure, resolution } => {
            let ids: Vec<&str> = if figure == "all" { FIGURES.to_vec() } else { vec![figure.as_str()] };
            for id in ids {
                for t in figures::figure_data(id, *resolution, &cfg)? {
                    if matches!(sink, Sink::Stdout) {
                        println!("# {}", t.name);
                    }
                    sink.emit_table(&t)?;
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
