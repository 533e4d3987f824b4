//! Phase diagram sweeps over `(lambda^2, h)`.
//!
//! Each cell is written atomically to `cells/cell_<i>_<j>.json` as soon as it
//! finishes; a rerun with the same output directory skips finished cells.

use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::ModelParams;
use crate::error::{Error, Result};
use crate::grid::{build_grid, Field};
use crate::io::config::RunConfig;
use crate::io::vtk::export_field_vtk;
use crate::io::{thread_count, write_json};
use crate::landscape::classify_faces;
use crate::landscape::search::{relax_to_minimum, SAME_FIELD_TOL};
use crate::saddle::{morse_index, run_hisd, RunStatus, SolverConfig};

/// A distinct stable state found in a cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub label: String,
    pub canonical: String,
    pub energy: f64,
    /// Largest nodal Frobenius norm of Q.
    pub max_q_norm: f64,
    /// Seeds that relaxed to this state.
    pub seeds: Vec<String>,
    pub field_file: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagramCell {
    pub i: usize,
    pub j: usize,
    pub lambda2: f64,
    /// Snapped height of the grid actually used.
    pub h: f64,
    pub stable_label: Option<String>,
    pub stable_energy: Option<f64>,
    /// Canonical labels of the other minima, by energy.
    pub metastable_labels: Vec<String>,
    /// All distinct minima, lowest energy first.
    pub states: Vec<CellState>,
    pub failures: Vec<String>,
}

fn cell_path(dir: &Path, i: usize, j: usize) -> PathBuf {
    dir.join("cells").join(format!("cell_{i:03}_{j:03}.json"))
}

fn load_cell(path: &Path, lambda2: f64) -> Option<PhaseDiagramCell> {
    let text = std::fs::read_to_string(path).ok()?;
    let cell: PhaseDiagramCell = serde_json::from_str(&text).ok()?;
    (cell.lambda2 == lambda2).then_some(cell)
}

/// Sweeps every `(lambda2, h)` pair of `cfg.sweep` on a pool of
/// [`thread_count`] workers and writes `phase_diagram.json`.
pub fn sweep_phase_diagram(cfg: &RunConfig) -> Result<Vec<PhaseDiagramCell>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing [sweep] table".into()))?;
    let out = cfg.output.clone();
    std::fs::create_dir_all(out.join("cells"))?;
    let jobs: Vec<(usize, usize, f64, f64)> = sweep
        .lambda2
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| sweep.h.iter().enumerate().map(move |(j, &h)| (i, j, l, h)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let cells: Vec<Result<PhaseDiagramCell>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, j, lambda2, h)| {
                let path = cell_path(&out, i, j);
                if let Some(c) = load_cell(&path, lambda2) {
                    info!("cell ({i}, {j}) already done");
                    return Ok(c);
                }
                let cell = solve_cell(cfg, i, j, lambda2, h, &out)?;
                write_json(&cell, &path)?;
                info!(
                    "cell ({i}, {j}) lambda2 = {lambda2}, h = {}: {}",
                    cell.h,
                    cell.stable_label.as_deref().unwrap_or("none")
                );
                Ok(cell)
            })
            .collect()
    });
    let cells: Vec<PhaseDiagramCell> = cells.into_iter().collect::<Result<_>>()?;
    write_json(&cells, &out.join("phase_diagram.json"))?;
    Ok(cells)
}

/// Relaxes every seed at one `(lambda2, h)` and keeps the distinct certified minima.
pub fn solve_cell(
    cfg: &RunConfig,
    i: usize,
    j: usize,
    lambda2: f64,
    h: f64,
    out: &Path,
) -> Result<PhaseDiagramCell> {
    let grid = build_grid(cfg.grid.nx, cfg.grid.ny.unwrap_or(cfg.grid.nx), h)?;
    let cube = grid.nx == grid.ny && grid.ny == grid.nz;
    let mut model = cfg.model.clone();
    model.lambda2 = lambda2;
    model.omega = None;
    let p = model.params()?;
    let solver = SolverConfig {
        k: 0,
        certify: false,
        ..cfg.solver.clone()
    };
    let mut failures = Vec::new();
    let mut seeds = Vec::new();
    for spec in cfg.seed_specs() {
        seeds.extend(spec.build(&grid, &p, cfg.seed)?);
    }
    // Cheap uncertified relaxations first, then certify each distinct result once.
    let mut found: Vec<(Field, f64, String, Vec<String>)> = Vec::new();
    for (name, q0) in &seeds {
        match run_hisd(q0, None, &solver, &p, &mut |_| {}) {
            Ok(o) if o.status == RunStatus::Converged => {
                merge(&mut found, o.state.q, o.state.energy.total, name, &p);
            }
            Ok(o) => failures.push(format!("{name}: {:?}", o.status)),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let mut minima: Vec<(Field, f64, String, Vec<String>)> = Vec::new();
    for (q, e, _, names) in found {
        let report = morse_index(&q, &p, solver.max_index, &solver)?;
        if report.index == 0 {
            for n in &names {
                merge(&mut minima, q.clone(), e, n, &p);
            }
            continue;
        }
        match relax_to_minimum(&q, &p, &cfg.solver, cfg.landscape.relax_retries) {
            Ok(o) if o.status == RunStatus::Converged && o.index() == Some(0) => {
                for n in &names {
                    merge(&mut minima, o.state.q.clone(), o.state.energy.total, n, &p);
                }
            }
            Ok(o) => failures.push(format!(
                "{}: escape from index {} ended {:?}",
                names.join(","),
                report.index,
                o.status
            )),
            Err(e) => failures.push(format!("{}: {e}", names.join(","))),
        }
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut states = Vec::new();
    for (n, (q, e, label, names)) in minima.iter().enumerate() {
        let file = format!("cells/cell_{i:03}_{j:03}_min{n}.vtk");
        if let Err(err) = export_field_vtk(q, &out.join(&file)) {
            warn!("{file}: {err}");
        }
        states.push(CellState {
            label: label.clone(),
            canonical: classify_faces(q, p.s_plus()).canonical(cube),
            energy: *e,
            max_q_norm: q.max_norm(),
            seeds: names.clone(),
            field_file: Some(file),
        });
    }
    let mut metastable: Vec<String> = Vec::new();
    for s in states.iter().skip(1) {
        if !metastable.contains(&s.canonical)
            && Some(&s.canonical) != states.first().map(|f| &f.canonical)
        {
            metastable.push(s.canonical.clone());
        }
    }
    Ok(PhaseDiagramCell {
        i,
        j,
        lambda2,
        h: grid.h,
        stable_label: states.first().map(|s| s.canonical.clone()),
        stable_energy: states.first().map(|s| s.energy),
        metastable_labels: metastable,
        states,
        failures,
    })
}

/// Adds a state unless one with the same label, energy and field is present.
fn merge(
    list: &mut Vec<(Field, f64, String, Vec<String>)>,
    q: Field,
    e: f64,
    seed: &str,
    p: &ModelParams,
) {
    let label = classify_faces(&q, p.s_plus()).name();
    let tol = SAME_FIELD_TOL * q.norm();
    for entry in list.iter_mut() {
        if entry.2 == label
            && (entry.1 - e).abs() <= 1e-6 * e.abs().max(1.0)
            && entry.0.plus(-1.0, &q).norm() <= tol
        {
            if !entry.3.iter().any(|s| s == seed) {
                entry.3.push(seed.to_string());
            }
            return;
        }
    }
    list.push((q, e, label, vec![seed.to_string()]));
}
