//! Configuration, batch runs, sweeps and exporters.

pub mod config;
pub mod run;
pub mod sweep;
pub mod vtk;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::landscape::LandscapeGraph;
use crate::saddle::TraceRecord;

pub use config::{load_config, parse_config, ModelSection, RunConfig, RunMode, SeedSpec};
pub use run::{run, RunReport, StateSummary};
pub use sweep::{sweep_phase_diagram, PhaseDiagramCell};
pub use vtk::{export_field_vtk, field_to_vtk, parse_field_vtk, read_field_vtk};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "NLC_THREADS";

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    atomic_write(path, s.as_bytes())
}

/// CSV with columns `step,energy,E_LdG,E_bc,grad_norm,dt`.
pub fn traces_to_csv(trace: &[TraceRecord]) -> String {
    let mut s = String::from("step,energy,E_LdG,E_bc,grad_norm,dt\n");
    for r in trace {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.step, r.energy, r.e_ldg, r.e_bc, r.grad_norm, r.dt
        ));
    }
    s
}

pub fn export_traces_csv(trace: &[TraceRecord], path: &Path) -> Result<()> {
    atomic_write(path, traces_to_csv(trace).as_bytes())
}

/// Writes the graph with nodes sorted by energy.
pub fn export_landscape_json(graph: &LandscapeGraph, path: &Path) -> Result<()> {
    write_json(&graph.sorted(), path)
}

/// Worker threads from [`THREADS_ENV`], defaulting to the available parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}
