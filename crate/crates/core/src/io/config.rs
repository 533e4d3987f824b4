//! TOML run configuration.
//!
//! ```toml
//! mode = "relax"          # relax | saddle | landscape | sweep | pathway
//! output = "out/wors"
//! seed = 7
//!
//! [grid]
//! nx = 17
//! h = 1.0
//!
//! [model]
//! lambda2 = 5.0
//!
//! [[seeds]]
//! kind = "wors"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::energy::{ModelParams, DEFAULT_DIMER_L, DEFAULT_W};
use crate::error::{Error, Result};
use crate::grid::{build_grid, Field, GridGeometry};
use crate::io::vtk::read_field_vtk;
use crate::landscape::classify::FaceTag;
use crate::landscape::{
    enumerate_topological_seeds, planar_profile_seed, random_seed, skeleton_to_field, uniform_seed,
    wors_seed,
};
use crate::saddle::SolverConfig;
use crate::tensor::{normalize3, BulkParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Relax,
    Saddle,
    Landscape,
    Sweep,
    Pathway,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub lambda2: f64,
    /// Physical anchoring coefficient; ignored when `omega` is given.
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Defaults to `-B^2 / 3C`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_dimer_l")]
    pub dimer_l: f64,
}

fn default_w() -> f64 {
    DEFAULT_W
}
fn default_b() -> f64 {
    BulkParams::MBBA_B
}
fn default_c() -> f64 {
    BulkParams::MBBA_C
}
fn default_l() -> f64 {
    BulkParams::MBBA_L
}
fn default_dimer_l() -> f64 {
    DEFAULT_DIMER_L
}

impl ModelSection {
    pub fn new(lambda2: f64) -> Self {
        ModelSection {
            lambda2,
            w: DEFAULT_W,
            omega: None,
            b: default_b(),
            c: default_c(),
            a: None,
            l: default_l(),
            dimer_l: DEFAULT_DIMER_L,
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let a = self.a.unwrap_or(-self.b * self.b / (3.0 * self.c));
        let bulk = BulkParams::new(a, self.b, self.c, self.l)?;
        let mut p = ModelParams::with_anchoring(bulk, self.lambda2, self.w);
        if let Some(o) = self.omega {
            p = p.with_omega(o);
        }
        p.dimer_l = self.dimer_l;
        p.validate()?;
        Ok(p)
    }
}

/// Initial condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedSpec {
    Wors,
    Uniform {
        director: [f64; 3],
    },
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// One of the 27 topological skeletons, by position in the enumeration.
    Skeleton {
        index: usize,
    },
    /// All 27 topological skeletons.
    Skeletons,
    /// z-invariant seed with a `D` or `R` profile on the top and bottom faces.
    Planar {
        profile: String,
    },
    /// The six planar profiles.
    BdComposite,
    File {
        path: PathBuf,
    },
}

impl SeedSpec {
    /// The union used by sweeps: WORS, the 27 skeletons and the planar profiles.
    pub fn default_sweep_set() -> Vec<SeedSpec> {
        vec![SeedSpec::Wors, SeedSpec::Skeletons, SeedSpec::BdComposite]
    }

    /// Named fields for this spec (one or more).
    pub fn build(
        &self,
        grid: &Arc<GridGeometry>,
        p: &ModelParams,
        run_seed: u64,
    ) -> Result<Vec<(String, Field)>> {
        let s = p.s_plus();
        Ok(match self {
            SeedSpec::Wors => vec![("wors".into(), wors_seed(grid, &p.bulk))],
            SeedSpec::Uniform { director } => {
                let n = normalize3(director);
                if !n.iter().all(|v| v.is_finite()) {
                    return Err(Error::Config(
                        "uniform seed needs a nonzero director".into(),
                    ));
                }
                vec![("uniform".into(), uniform_seed(grid, n, s))]
            }
            SeedSpec::Random { seed } => {
                let seed = seed.unwrap_or(run_seed);
                vec![(format!("random{seed}"), random_seed(grid, s, seed))]
            }
            SeedSpec::Skeleton { index } => {
                let all = enumerate_topological_seeds();
                let sk = all.get(*index).ok_or_else(|| {
                    Error::Config(format!(
                        "skeleton index {index} out of range 0..{}",
                        all.len()
                    ))
                })?;
                vec![(
                    format!("skeleton{index:02}"),
                    skeleton_to_field(sk, grid, s)?,
                )]
            }
            SeedSpec::Skeletons => enumerate_topological_seeds()
                .iter()
                .enumerate()
                .map(|(i, sk)| Ok((format!("skeleton{i:02}"), skeleton_to_field(sk, grid, s)?)))
                .collect::<Result<_>>()?,
            SeedSpec::Planar { profile } => {
                let tag = FaceTag::parse(profile)
                    .ok_or_else(|| Error::Config(format!("unknown profile {profile:?}")))?;
                vec![(
                    format!("planar_{profile}"),
                    planar_profile_seed(grid, tag, s)?,
                )]
            }
            SeedSpec::BdComposite => [
                FaceTag::D1,
                FaceTag::D2,
                FaceTag::Rn,
                FaceTag::Rs,
                FaceTag::Re,
                FaceTag::Rw,
            ]
            .iter()
            .map(|t| Ok((format!("planar_{t}"), planar_profile_seed(grid, *t, s)?)))
            .collect::<Result<_>>()?,
            SeedSpec::File { path } => {
                let f = read_field_vtk(path)?;
                if f.grid().as_ref() != grid.as_ref() {
                    return Err(Error::GeometryMismatch);
                }
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "file".into());
                vec![(stem, f)]
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambda2: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeSection {
    /// Levels of downward search below the parent.
    pub depth: usize,
    pub perturbation: f64,
    /// Escape attempts when a descent stops on a saddle.
    pub relax_retries: usize,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        LandscapeSection {
            depth: 8,
            perturbation: 0.2,
            relax_retries: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathwaySection {
    pub from: String,
    pub to: String,
    /// Upward searches per minimum class, along this many lowest eigenvectors.
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_max_saddles")]
    pub max_saddles: usize,
}

fn default_directions() -> usize {
    3
}
fn default_max_saddles() -> usize {
    6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: RunMode,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Key for every random choice in the run.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Write a field snapshot every this many steps (0 disables).
    #[serde(default)]
    pub checkpoint_interval: usize,
    pub grid: GridSection,
    pub model: ModelSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub seeds: Vec<SeedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub landscape: LandscapeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pathway: Option<PathwaySection>,
}

fn default_output() -> PathBuf {
    PathBuf::from("nlc-out")
}
fn default_seed() -> u64 {
    7
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.model.params()?;
        self.build_grid()?;
        match self.mode {
            RunMode::Sweep => {
                let s = self.sweep.as_ref().ok_or_else(|| {
                    Error::Config("mode = \"sweep\" needs a [sweep] table".into())
                })?;
                if s.lambda2.is_empty() || s.h.is_empty() {
                    return Err(Error::Config(
                        "sweep.lambda2 and sweep.h must be nonempty".into(),
                    ));
                }
                for &h in &s.h {
                    build_grid(self.grid.nx, self.grid.ny.unwrap_or(self.grid.nx), h)?;
                }
            }
            RunMode::Pathway if self.pathway.is_none() => {
                return Err(Error::Config(
                    "mode = \"pathway\" needs a [pathway] table".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<GridGeometry>> {
        build_grid(
            self.grid.nx,
            self.grid.ny.unwrap_or(self.grid.nx),
            self.grid.h,
        )
    }

    /// Seeds from the config, or the mode's default set.
    pub fn seed_specs(&self) -> Vec<SeedSpec> {
        if !self.seeds.is_empty() {
            return self.seeds.clone();
        }
        match self.mode {
            RunMode::Sweep => SeedSpec::default_sweep_set(),
            RunMode::Pathway => vec![SeedSpec::Skeletons],
            _ => vec![SeedSpec::Wors],
        }
    }

    /// The config with derived values (omega, ny, seeds) filled in.
    pub fn resolved(&self) -> Result<RunConfig> {
        let mut c = self.clone();
        let p = self.model.params()?;
        c.model.omega = Some(p.omega);
        c.model.a = Some(p.bulk.a);
        c.grid.ny = Some(self.grid.ny.unwrap_or(self.grid.nx));
        c.seeds = self.seed_specs();
        Ok(c)
    }
}

pub fn parse_config(text: &str, path: &Path) -> Result<RunConfig> {
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mode = \"relax\"\n[grid]\nnx = 9\nh = 1.0\n[model]\nlambda2 = 5.0\n";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config(MINIMAL, Path::new("x.toml")).unwrap();
        assert_eq!(c.mode, RunMode::Relax);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.seed_specs(), vec![SeedSpec::Wors]);
        let r = c.resolved().unwrap();
        assert!(
            (r.model.omega.unwrap() - crate::energy::anchoring_omega(5.0, 0.01, 3500.0, 4e-11))
                .abs()
                < 1e-12
        );
        let text = toml::to_string(&r).unwrap();
        assert_eq!(parse_config(&text, Path::new("r.toml")).unwrap(), r);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("{MINIMAL}[solver]\nmax_stepz = 3\n");
        let err = parse_config(&text, Path::new("bad.toml"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("max_stepz"), "{err}");
        let text = MINIMAL.replace("h = 1.0", "h = 1.0\nhh = 2");
        let err = parse_config(&text, Path::new("bad.toml"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("hh"), "{err}");
    }

    #[test]
    fn sweep_needs_lists() {
        let text = MINIMAL.replace("\"relax\"", "\"sweep\"") + "[sweep]\nlambda2 = []\nh = [1.0]\n";
        assert!(parse_config(&text, Path::new("s.toml")).is_err());
        let text = MINIMAL.replace("\"relax\"", "\"sweep\"");
        assert!(parse_config(&text, Path::new("s.toml")).is_err());
    }

    #[test]
    fn seed_specs_parse() {
        let text = format!(
            "{MINIMAL}[[seeds]]\nkind = \"skeleton\"\nindex = 18\n[[seeds]]\nkind = \"random\"\n[[seeds]]\nkind = \"planar\"\nprofile = \"R_n\"\n"
        );
        let c = parse_config(&text, Path::new("x.toml")).unwrap();
        let g = c.build_grid().unwrap();
        let p = c.model.params().unwrap();
        let names: Vec<String> = c
            .seed_specs()
            .iter()
            .flat_map(|s| s.build(&g, &p, c.seed).unwrap())
            .map(|(n, _)| n)
            .collect();
        assert_eq!(names, vec!["skeleton18", "random7", "planar_R_n"]);
        assert_eq!(SeedSpec::Skeletons.build(&g, &p, 0).unwrap().len(), 27);
        assert!(SeedSpec::Skeleton { index: 27 }.build(&g, &p, 0).is_err());
    }
}
