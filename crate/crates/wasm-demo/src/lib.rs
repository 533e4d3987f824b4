//! Browser bindings: seed a small cuboid, relax it step by step and read back
//! face profiles and labels for drawing.

use wasm_bindgen::prelude::*;

use nlc_core::energy::ModelParams;
use nlc_core::grid::{build_grid, Face, Field};
use nlc_core::landscape::classify::face_data;
use nlc_core::landscape::{
    classify_faces, enumerate_topological_seeds, planar_profile_seed, random_seed,
    skeleton_to_field, wors_seed, FaceTag,
};
use nlc_core::saddle::{sd_step, SaddleState, SolverConfig};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Non-dimensional anchoring strength at `W = 0.01` with MBBA constants.
#[wasm_bindgen]
pub fn anchoring_omega(lambda2: f64) -> f64 {
    ModelParams::mbba(lambda2).omega
}

/// Seed by name: `wors`, `random`, `skeleton<N>` or a face tag such as `D1` or `R_n`.
pub fn seed_field(name: &str, nx: usize, h: f64, p: &ModelParams) -> Result<Field, String> {
    let g = build_grid(nx, nx, h).map_err(|e| e.to_string())?;
    let s = p.s_plus();
    if name == "wors" {
        return Ok(wors_seed(&g, &p.bulk));
    }
    if name == "random" {
        return Ok(random_seed(&g, s, 1));
    }
    if let Some(i) = name
        .strip_prefix("skeleton")
        .and_then(|t| t.parse::<usize>().ok())
    {
        let all = enumerate_topological_seeds();
        let sk = all
            .get(i)
            .ok_or_else(|| format!("skeleton index {i} out of range 0..{}", all.len()))?;
        return skeleton_to_field(sk, &g, s).map_err(|e| e.to_string());
    }
    let tag = FaceTag::parse(name).ok_or_else(|| format!("unknown seed {name:?}"))?;
    planar_profile_seed(&g, tag, s).map_err(|e| e.to_string())
}

/// Gradient flow on a small grid, advanced a few steps per animation frame.
#[wasm_bindgen]
pub struct Relaxation {
    p: ModelParams,
    cfg: SolverConfig,
    state: SaddleState,
}

#[wasm_bindgen]
impl Relaxation {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: &str, nx: usize, h: f64, lambda2: f64) -> Result<Relaxation, JsValue> {
        let p = ModelParams::mbba(lambda2);
        let cfg = SolverConfig {
            k: 0,
            ..Default::default()
        };
        let q = seed_field(seed, nx, h, &p).map_err(js_err)?;
        let state = SaddleState::new(q, Vec::new(), &p, &cfg).map_err(js_err)?;
        Ok(Relaxation { p, cfg, state })
    }

    /// Advances up to `n` steps; returns false once converged or stalled.
    pub fn step(&mut self, n: usize) -> Result<bool, JsValue> {
        for _ in 0..n {
            if self.converged() {
                return Ok(false);
            }
            let next = sd_step(&self.state, &self.p, &self.cfg).map_err(js_err)?;
            if next.step_count == self.state.step_count {
                return Ok(false);
            }
            self.state = next;
        }
        Ok(!self.converged())
    }

    pub fn converged(&self) -> bool {
        self.state.grad_norm < self.cfg.final_tol
    }

    pub fn energy(&self) -> f64 {
        self.state.energy.total
    }

    pub fn grad_norm(&self) -> f64 {
        self.state.grad_norm
    }

    pub fn steps(&self) -> usize {
        self.state.step_count
    }

    /// Grid nodes along the face axes: `[na, nb]`.
    pub fn face_dims(&self, face: usize) -> Result<Vec<usize>, JsValue> {
        let d = face_data(&self.state.q, face_by_index(face)?, self.p.s_plus());
        Ok(vec![d.na, d.nb])
    }

    /// Interleaved `[angle, order]` per face node, row `b` major.
    pub fn face_profile(&self, face: usize) -> Result<Vec<f64>, JsValue> {
        let d = face_data(&self.state.q, face_by_index(face)?, self.p.s_plus());
        Ok(d.angle
            .iter()
            .zip(&d.order)
            .flat_map(|(a, o)| [*a, *o])
            .collect())
    }

    /// Face labels of the current field, e.g. `D1-D1-D2`.
    pub fn label(&self) -> String {
        classify_faces(&self.state.q, self.p.s_plus()).name()
    }
}

fn face_by_index(i: usize) -> Result<Face, JsValue> {
    Face::ALL
        .get(i)
        .copied()
        .ok_or_else(|| JsValue::from_str("face index must be 0..6"))
}
