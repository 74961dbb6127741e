use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use critical_ising::generators::{self, EmbeddedGraph};
use critical_ising::io::{self, ExportTarget, Format};
use critical_ising::oracles::EnumCaps;
use critical_ising::pipeline::{verify_main_theorem, verify_tree_maps, VerifyOptions};
use critical_ising::{Error, Tolerances};

/// Exact checks of the critical Ising model on finite isoradial graphs.
///
/// Enumeration caps come from CRITICAL_ISING_ENUM_CAP (search states) and
/// CRITICAL_ISING_SPIN_CAP_LOG2 (spin configurations, as a power of two).
#[derive(Parser)]
#[command(name = "critical-ising", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as JSON.
    Generate {
        /// cycle, grid, rhombic or wheel.
        name: String,
        /// Integer parameters: cycle N | grid W H | rhombic W H P Q (angle P/Q pi).
        #[arg(allow_negative_numbers = true)]
        params: Vec<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every identity of the chain and write the report.
    Verify {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tol: TolArgs,
        /// Boundary lozenge vertex of the extended double used as root s.
        #[arg(long)]
        root_s: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        /// Also run the tree-level checks (bijections, classes, cycles).
        #[arg(long)]
        tree_maps: bool,
    },
    /// Serialize one graph of the construction.
    Export {
        /// primal, dual, quad, quadri_tiling, extended_double, G0 or G.
        what: String,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        root_s: Option<usize>,
        #[arg(long, default_value = "dot")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Graph JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator spec such as cycle:4, grid:3,3 or rhombic:2,3,1,3.
    #[arg(long)]
    generator: Option<String>,
}

#[derive(Args)]
struct TolArgs {
    /// Relative tolerance of numerical identities.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Tolerance of geometric checks (circumradius, angle closure).
    #[arg(long, default_value_t = 1e-9)]
    geom_tolerance: f64,
    /// Smallest pivot accepted by the determinant.
    #[arg(long, default_value_t = 1e-13)]
    pivot_tolerance: f64,
}

impl TolArgs {
    fn tolerances(&self) -> anyhow::Result<Tolerances> {
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("geom-tolerance", self.geom_tolerance),
            ("pivot-tolerance", self.pivot_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("--{name} must be positive, got {v}");
            }
        }
        Ok(Tolerances {
            geom: self.geom_tolerance,
            num: self.tolerance,
            pivot: self.pivot_tolerance,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

fn parse_generator(spec: &str) -> critical_ising::Result<EmbeddedGraph> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params = rest
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::BadParams(format!("bad generator parameter {s:?}")))
        })
        .collect::<critical_ising::Result<Vec<_>>>()?;
    generators::by_name(name, &params)
}

fn load(source: &Source) -> anyhow::Result<EmbeddedGraph> {
    if let Some(path) = &source.input {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(io::read_graph(&text).with_context(|| format!("loading {}", path.display()))?)
    } else {
        let spec = source.generator.as_deref().expect("clap enforces one source");
        Ok(parse_generator(spec)?)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", text.trim_end()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate { name, params, out } => {
            let g = generators::by_name(&name, &params)?;
            io::isoradial_of(&g, &Tolerances::default())?;
            emit(out.as_ref(), &io::graph_json(&g)?)?;
            Ok(true)
        }
        Command::Verify {
            source,
            tol,
            root_s,
            out,
            format,
            tree_maps,
        } => {
            let g = load(&source)?;
            let tolerances = tol.tolerances()?;
            let iso = io::isoradial_of(&g, &tolerances)?;
            let opts = VerifyOptions {
                tolerances,
                root_s,
                caps: EnumCaps::from_env(),
            };
            let start = Instant::now();
            let mut report = verify_main_theorem(&g.name, &iso, &opts)?;
            if tree_maps {
                report.checks.extend(verify_tree_maps(&iso, &opts)?);
                report.pass = report.checks.iter().all(|c| c.pass);
            }
            log::info!("{}: {} checks in {:?}", g.name, report.checks.len(), start.elapsed());
            let text = match format {
                ReportFormat::Json => serde_json::to_string_pretty(&report)?,
                ReportFormat::Text => {
                    let mut s = format!(
                        "{} (root s = {}, tolerance {:e})\n",
                        report.graph, report.root_s, report.tolerance
                    );
                    for c in &report.checks {
                        s.push_str(&format!(
                            "{:5} {:45} rel_err {:.3e}\n",
                            if c.pass { "ok" } else { "FAIL" },
                            c.name,
                            c.rel_err
                        ));
                    }
                    s
                }
            };
            emit(out.as_ref(), &text)?;
            if !report.pass {
                let failures: Vec<_> = report
                    .failures()
                    .into_iter()
                    .map(|c| serde_json::json!({"name": c.name, "rel_err": c.rel_err}))
                    .collect();
                eprintln!("{}", serde_json::json!({ "failures": failures }));
            }
            Ok(report.pass)
        }
        Command::Export {
            what,
            source,
            tol,
            root_s,
            format,
            out,
        } => {
            let target: ExportTarget = what.parse()?;
            let format: Format = format.parse()?;
            let g = load(&source)?;
            let text = io::export(&g, target, format, root_s, &tol.tolerances()?)?;
            emit(out.as_ref(), &text)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let kind = e
                .downcast_ref::<Error>()
                .map(|e| format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("").to_string())
                .unwrap_or_else(|| "Error".to_string());
            eprintln!("{}", serde_json::json!({ "error": kind, "message": format!("{e:#}") }));
            ExitCode::from(2)
        }
    }
}
