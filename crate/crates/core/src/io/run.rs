//! Batch runs driven by a [`RunConfig`].

use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::energy::ModelParams;
use crate::error::Result;
use crate::grid::Field;
use crate::io::config::{RunConfig, RunMode};
use crate::io::sweep::sweep_phase_diagram;
use crate::io::vtk::export_field_vtk;
use crate::io::{atomic_write, export_landscape_json, export_traces_csv, write_json};
use crate::landscape::search::{
    build_pathway_graph, downward_search, record_children, relax_to_minimum, transition_pathway,
};
use crate::landscape::{classify_faces, LandscapeGraph, Pathway};
use crate::saddle::{run_hisd_observed, HisdOutcome, RunStatus, SolverConfig, TraceRecord};

/// Result of one solver run, as written to `summary.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateSummary {
    pub seed: String,
    pub status: RunStatus,
    pub energy: f64,
    #[serde(rename = "E_LdG")]
    pub e_ldg: f64,
    #[serde(rename = "E_bc")]
    pub e_bc: f64,
    pub grad_norm: f64,
    pub steps: usize,
    pub newton_steps: usize,
    pub index: Option<usize>,
    pub eigenvalues: Vec<f64>,
    pub label: String,
    pub canonical: String,
    /// Largest nodal Frobenius norm of Q.
    pub max_q_norm: f64,
    pub field_file: Option<String>,
    pub trace_file: Option<String>,
}

impl StateSummary {
    pub fn from_outcome(seed: &str, out: &HisdOutcome, p: &ModelParams, cube: bool) -> Self {
        let label = classify_faces(&out.state.q, p.s_plus());
        StateSummary {
            seed: seed.to_string(),
            status: out.status,
            energy: out.state.energy.total,
            e_ldg: out.state.energy.ldg,
            e_bc: out.state.energy.bc,
            grad_norm: out.state.grad_norm,
            steps: out.state.step_count,
            newton_steps: out.newton_steps,
            index: out.index(),
            eigenvalues: out
                .morse
                .as_ref()
                .map(|m| m.eigenvalues())
                .unwrap_or_default(),
            label: label.name(),
            canonical: label.canonical(cube),
            max_q_norm: out.state.q.max_norm(),
            field_file: None,
            trace_file: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub output: PathBuf,
    pub states: Vec<StateSummary>,
    pub landscape_nodes: usize,
    pub landscape_edges: usize,
    pub pathways: Vec<Pathway>,
    pub sweep_cells: usize,
    /// Seeds or searches that errored; the rest of the run continued.
    pub failures: Vec<String>,
}

/// Executes a run and writes its outputs under `cfg.output`.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let resolved = cfg.resolved()?;
    let out = cfg.output.clone();
    std::fs::create_dir_all(&out)?;
    let text = toml::to_string_pretty(&resolved)
        .map_err(|e| crate::error::Error::Config(e.to_string()))?;
    atomic_write(&out.join("resolved_config.toml"), text.as_bytes())?;
    let mut report = RunReport {
        output: out.clone(),
        ..Default::default()
    };
    match cfg.mode {
        RunMode::Relax | RunMode::Saddle => run_seeds(&resolved, &mut report)?,
        RunMode::Landscape => run_landscape(&resolved, &mut report)?,
        RunMode::Pathway => run_pathway(&resolved, &mut report)?,
        RunMode::Sweep => {
            let cells = sweep_phase_diagram(&resolved)?;
            report.sweep_cells = cells.len();
        }
    }
    write_json(&report, &out.join("summary.json"))?;
    Ok(report)
}

fn seed_fields(cfg: &RunConfig, p: &ModelParams) -> Result<Vec<(String, Field)>> {
    let grid = cfg.build_grid()?;
    let mut all = Vec::new();
    for spec in cfg.seed_specs() {
        all.extend(spec.build(&grid, p, cfg.seed)?);
    }
    Ok(all)
}

fn is_cube(f: &Field) -> bool {
    let g = f.grid();
    g.nx == g.ny && g.ny == g.nz
}

/// Runs saddle dynamics from one seed, writing checkpoints every
/// `cfg.checkpoint_interval` steps.
fn solve_with_checkpoints(
    name: &str,
    q0: &Field,
    solver: &SolverConfig,
    p: &ModelParams,
    cfg: &RunConfig,
    dir: &Path,
) -> Result<(HisdOutcome, Vec<TraceRecord>)> {
    let mut trace = Vec::new();
    let mut ck_err = None;
    let every = cfg.checkpoint_interval;
    let out = run_hisd_observed(q0, None, solver, p, &mut |s, r| {
        trace.push(r.clone());
        if every > 0 && s.step_count > 0 && s.step_count % every == 0 && ck_err.is_none() {
            let path = dir
                .join("checkpoints")
                .join(format!("{name}_step{:06}.vtk", s.step_count));
            if let Err(e) = export_field_vtk(&s.q, &path) {
                ck_err = Some(e);
            }
        }
    })?;
    if let Some(e) = ck_err {
        return Err(e);
    }
    Ok((out, trace))
}

fn run_seeds(cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    let p = cfg.model.params()?;
    let mut solver = cfg.solver.clone();
    if cfg.mode == RunMode::Relax {
        solver.k = 0;
    }
    let dir = &cfg.output;
    for (name, q0) in seed_fields(cfg, &p)? {
        info!("{name}: index-{} search", solver.k);
        let (out, trace) = match solve_with_checkpoints(&name, &q0, &solver, &p, cfg, dir) {
            Ok(r) => r,
            Err(e) => {
                warn!("{name}: {e}");
                report.failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        let mut s = StateSummary::from_outcome(&name, &out, &p, is_cube(&q0));
        let field_file = format!("{name}.vtk");
        let trace_file = format!("{name}_trace.csv");
        export_field_vtk(&out.state.q, &dir.join(&field_file))?;
        export_traces_csv(&trace, &dir.join(&trace_file))?;
        s.field_file = Some(field_file);
        s.trace_file = Some(trace_file);
        info!(
            "{name}: {:?} E = {:.6} index {:?} {}",
            s.status, s.energy, s.index, s.label
        );
        report.states.push(s);
    }
    Ok(())
}

/// Writes each stored node field as `nodes/<checksum>.vtk`.
fn export_node_fields(graph: &mut LandscapeGraph, dir: &Path) -> Result<()> {
    for id in 0..graph.nodes.len() {
        let Some(f) = graph.field(id) else { continue };
        let file = format!("nodes/{:016x}.vtk", graph.nodes[id].checksum);
        export_field_vtk(f, &dir.join(&file))?;
        graph.nodes[id].field_file = Some(file);
    }
    Ok(())
}

fn run_landscape(cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    let p = cfg.model.params()?;
    let solver = cfg.solver.clone();
    let ls = &cfg.landscape;
    let mut graph: Option<LandscapeGraph> = None;
    for (name, q0) in seed_fields(cfg, &p)? {
        let g = graph.get_or_insert_with(|| LandscapeGraph::new(is_cube(&q0)));
        let (root, _) = solve_with_checkpoints(
            &name,
            &q0,
            &SolverConfig {
                certify: true,
                ..solver.clone()
            },
            &p,
            cfg,
            &cfg.output,
        )?;
        report
            .states
            .push(StateSummary::from_outcome(&name, &root, &p, g.cube));
        if !root.converged() {
            report
                .failures
                .push(format!("{name}: parent search {:?}", root.status));
            continue;
        }
        let k = root.index().unwrap_or(0);
        g.insert(&root.state.q, root.state.energy.total, k, &p);
        let mut queue = VecDeque::from([(root, 0usize)]);
        while let Some((s, depth)) = queue.pop_front() {
            if depth >= ls.depth || s.index().unwrap_or(0) == 0 {
                continue;
            }
            let children = match downward_search(&s, &p, &solver, ls.perturbation) {
                Ok(c) => c,
                Err(e) => {
                    report.failures.push(format!(
                        "downward search at E = {:.6}: {e}",
                        s.state.energy.total
                    ));
                    continue;
                }
            };
            let before = g.nodes.len();
            record_children(g, &s, &children, &p)?;
            let after = g.nodes.len();
            for ch in children {
                let new = g
                    .find(
                        ch.outcome.state.energy.total,
                        ch.outcome.index().unwrap_or(0),
                        &ch.label.name(),
                        Some(&ch.outcome.state.q),
                    )
                    .map(|id| id >= before && id < after)
                    .unwrap_or(false);
                if new && ch.outcome.index().unwrap_or(0) > 0 {
                    queue.push_back((ch.outcome, depth + 1));
                }
            }
        }
    }
    let mut graph = graph.unwrap_or_default().sorted();
    export_node_fields(&mut graph, &cfg.output)?;
    report.landscape_nodes = graph.nodes.len();
    report.landscape_edges = graph.edges.len();
    export_landscape_json(&graph, &cfg.output.join("graph.json"))?;
    Ok(())
}

fn run_pathway(cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    let p = cfg.model.params()?;
    let pw = cfg.pathway.clone().expect("validated");
    let mut minima = Vec::new();
    for (name, q0) in seed_fields(cfg, &p)? {
        match relax_to_minimum(&q0, &p, &cfg.solver, cfg.landscape.relax_retries) {
            Ok(out) => {
                report
                    .states
                    .push(StateSummary::from_outcome(&name, &out, &p, is_cube(&q0)));
                if out.status == RunStatus::Converged && out.index() == Some(0) {
                    minima.push(out.state.q);
                }
            }
            Err(e) => report.failures.push(format!("{name}: {e}")),
        }
    }
    let graph = build_pathway_graph(&minima, &p, &cfg.solver, pw.directions)?;
    let mut graph = graph.sorted();
    export_node_fields(&mut graph, &cfg.output)?;
    report.landscape_nodes = graph.nodes.len();
    report.landscape_edges = graph.edges.len();
    export_landscape_json(&graph, &cfg.output.join("graph.json"))?;
    match transition_pathway(&pw.from, &pw.to, &graph, pw.max_saddles) {
        Ok(paths) => report.pathways = paths,
        Err(e) => report.failures.push(e.to_string()),
    }
    write_json(&report.pathways, &cfg.output.join("pathways.json"))?;
    Ok(())
}
