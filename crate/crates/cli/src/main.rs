use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use nlc_core::energy::ModelParams;
use nlc_core::io::{load_config, read_field_vtk, run, RunMode, THREADS_ENV};
use nlc_core::landscape::classify::classify_faces_detailed;
use nlc_core::landscape::{LandscapeGraph, Pathway};
use nlc_core::Face;

#[derive(Parser)]
#[command(
    name = "nlc",
    version,
    about = "Landau-de Gennes solution landscapes in a cuboid"
)]
struct Cli {
    /// Override the output directory from the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a relax, saddle, landscape, pathway or sweep config.
    Run { config: PathBuf },
    /// Run the phase-diagram sweep of a config, resuming finished cells.
    Sweep { config: PathBuf },
    /// Print the face labels of a field.
    Classify {
        field: PathBuf,
        /// Also print the per-face measurements.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Check a run's graph.json, print it, and write graph.dot next to it.
    Graph { dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Command::Run { config } => run_config(&config, cli.output, None),
        Command::Sweep { config } => run_config(&config, cli.output, Some(RunMode::Sweep)),
        Command::Classify { field, verbose } => classify(&field, verbose),
        Command::Graph { dir } => graph(&dir),
    }
}

fn run_config(path: &Path, output: Option<PathBuf>, mode: Option<RunMode>) -> anyhow::Result<()> {
    let mut cfg = load_config(path)?;
    if let Some(o) = output {
        cfg.output = o;
    }
    if let Some(m) = mode {
        cfg.mode = m;
    }
    log::info!(
        "{:?} run into {} ({} = {})",
        cfg.mode,
        cfg.output.display(),
        THREADS_ENV,
        nlc_core::io::thread_count()
    );
    let report = run(&cfg)?;
    for s in &report.states {
        println!(
            "{:<14} {:<18} E = {:<14.8} index {:<4} {}",
            s.seed,
            format!("{:?}", s.status),
            s.energy,
            s.index.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
            s.label
        );
    }
    if report.landscape_nodes > 0 {
        println!(
            "landscape: {} nodes, {} edges",
            report.landscape_nodes, report.landscape_edges
        );
    }
    for p in &report.pathways {
        println!(
            "pathway minima {:?} saddles {:?} barrier {:.6}",
            p.minima, p.saddles, p.barrier
        );
    }
    if report.sweep_cells > 0 {
        println!("sweep: {} cells", report.sweep_cells);
    }
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    println!("summary: {}", report.output.join("summary.json").display());
    Ok(())
}

fn classify(path: &Path, verbose: bool) -> anyhow::Result<()> {
    let f = read_field_vtk(path)?;
    let g = f.grid();
    let s_plus = ModelParams::mbba(1.0).s_plus();
    let (label, reports) = classify_faces_detailed(&f, s_plus);
    println!("{}", label.name());
    println!(
        "canonical {}",
        label.canonical(g.nx == g.ny && g.ny == g.nz)
    );
    if verbose {
        for (face, r) in Face::ALL.iter().zip(&reports) {
            println!(
                "{:<5?} {:<7} centre {:.3} diagonals {:.3} {:.3} bands {:.3} {:.3} rotation {:+.3} {:+.3} max beta2 {:.3}",
                face, r.tag.as_str(), r.centre_order, r.diag_main, r.diag_anti, r.band_a, r.band_b, r.rotation_a, r.rotation_b, r.max_beta2
            );
        }
    }
    Ok(())
}

fn graph(dir: &Path) -> anyhow::Result<()> {
    let path = dir.join("graph.json");
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let g: LandscapeGraph =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Err(e) = g.validate() {
        bail!("{}: {e}", path.display());
    }
    println!("{} nodes, {} edges", g.nodes.len(), g.edges.len());
    for n in &g.nodes {
        let kids: Vec<usize> = g
            .edges
            .iter()
            .filter(|e| e.parent == n.id)
            .map(|e| e.child)
            .collect();
        println!(
            "{:>4}  index {}  E = {:<14.8} {:<28} -> {:?}",
            n.id, n.index, n.energy, n.label, kids
        );
    }
    let pw = dir.join("pathways.json");
    if pw.exists() {
        let paths: Vec<Pathway> = serde_json::from_str(&std::fs::read_to_string(&pw)?)?;
        for p in paths {
            println!(
                "pathway minima {:?} saddles {:?} barrier {:.6}",
                p.minima, p.saddles, p.barrier
            );
        }
    }
    std::fs::write(dir.join("graph.dot"), g.to_dot())?;
    Ok(())
}
