//! Index-k saddle dynamics: semi-implicit stepping with Barzilai-Borwein step sizes,
//! LOBPCG direction tracking, an inexact-Newton tail and Morse-index certification.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::energy::{
    energy_raw, gradient_raw, hess_vec_exact_raw, hess_vec_raw, surface_gradient_linear, tensor_at,
    Energy, ModelParams,
};
use crate::error::{Error, Result};
use crate::grid::{field_dot, laplacian_into, Face, Field, GridGeometry};
use crate::linsolve::{
    lobpcg_single_step_precond, minres, orthonormalize, smallest_eigs_precond, EigOptions,
    EigenPair, LinearMap,
};
use crate::precond::{Preconditioner, ShiftedLaplacianInverse};
use crate::tensor::QTensor;

/// How the anchoring term enters the implicit operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// Only the per-component diagonal of the surface term is implicit; five scalar solves.
    Decoupled,
    /// The full linear surface operator is implicit; one coupled solve.
    Coupled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessMode {
    Dimer,
    Analytic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Target saddle index.
    pub k: usize,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Gradient norm below which the Newton tail takes over.
    pub switch_tol: f64,
    pub final_tol: f64,
    /// Cap of the forcing term `eta = min(eta_max, sqrt(|g|))`.
    pub eta_max: f64,
    pub max_steps: usize,
    pub newton: bool,
    pub splitting: Splitting,
    pub hess: HessMode,
    pub minres_tol: f64,
    pub minres_maxit: usize,
    pub newton_maxit: usize,
    /// Halve `dt` until the energy decreases (index-0 runs only).
    pub backtrack: bool,
    pub eig_tol: f64,
    pub eig_maxit: usize,
    /// Run [`morse_index`] on the converged state.
    pub certify: bool,
    /// Largest index [`morse_index`] resolves.
    pub max_index: usize,
    /// Precondition eigenvector iterations with `(sigma - Lap)^{-1}`.
    pub precondition: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 0,
            dt_init: 1e-3,
            dt_min: 1e-6,
            dt_max: 1.0,
            switch_tol: 1e-3,
            final_tol: 1e-6,
            eta_max: 0.5,
            max_steps: 20_000,
            newton: true,
            splitting: Splitting::Coupled,
            hess: HessMode::Analytic,
            minres_tol: 1e-8,
            minres_maxit: 1000,
            newton_maxit: 3000,
            backtrack: true,
            eig_tol: 1e-6,
            eig_maxit: 3000,
            certify: true,
            max_index: 8,
            precondition: true,
            seed: 7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.dt_min && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max;
        if !ok {
            return Err(Error::Config(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} {} {}",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        if !(self.final_tol > 0.0 && self.final_tol < self.switch_tol) {
            return Err(Error::Config("need 0 < final_tol < switch_tol".into()));
        }
        if !(self.eta_max > 0.0 && self.eta_max < 1.0) {
            return Err(Error::Config("eta_max must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// One record per accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub energy: f64,
    pub e_ldg: f64,
    pub e_bc: f64,
    pub grad_norm: f64,
    pub dt: f64,
    pub newton: bool,
    pub rayleigh: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SaddleState {
    pub q: Field,
    /// Orthonormal unstable directions `v_1..v_k`.
    pub directions: Vec<Field>,
    pub rayleigh: Vec<f64>,
    pub grad: Field,
    pub grad_norm: f64,
    pub energy: Energy,
    pub step_count: usize,
    pub dt: f64,
    search: Vec<Vec<f64>>,
    last_step: Option<Field>,
    last_force: Option<Field>,
}

impl SaddleState {
    /// Evaluates energy and gradient at `q`; directions are taken as given.
    pub fn new(
        q: Field,
        directions: Vec<Field>,
        p: &ModelParams,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let energy = energy_raw(q.grid(), q.data(), p)?;
        let mut grad = Field::zeros(q.grid());
        gradient_raw(q.grid(), q.data(), p, grad.data_mut())?;
        let grad_norm = grad.norm();
        let k = directions.len();
        Ok(SaddleState {
            q,
            directions,
            rayleigh: vec![0.0; k],
            grad,
            grad_norm,
            energy,
            step_count: 0,
            dt: cfg.dt_init,
            search: Vec::new(),
            last_step: None,
            last_force: None,
        })
    }

    pub fn trace_record(&self, newton: bool) -> TraceRecord {
        TraceRecord {
            step: self.step_count,
            energy: self.energy.total,
            e_ldg: self.energy.ldg,
            e_bc: self.energy.bc,
            grad_norm: self.grad_norm,
            dt: self.dt,
            newton,
            rayleigh: self.rayleigh.clone(),
        }
    }

    /// `-(I - 2 sum v v^T) g`.
    pub fn force(&self) -> Field {
        reflected_force(&self.grad, &self.directions)
    }
}

fn reflected_force(g: &Field, dirs: &[Field]) -> Field {
    let mut f = g.scaled(-1.0);
    for v in dirs {
        let c = field_dot(g.grid(), v.data(), g.data());
        f.axpy(2.0 * c, v);
    }
    f
}

/// BB2 step `|<dq,dg>| / <dg,dg>` clamped to `[dt_min, dt_max]`.
pub fn bb_stepsize(dq: &Field, dg: &Field, cfg: &SolverConfig) -> f64 {
    let gg = field_dot(dg.grid(), dg.data(), dg.data());
    if !(gg >= 1e-20) {
        return cfg.dt_init;
    }
    let qg = field_dot(dq.grid(), dq.data(), dg.data()).abs();
    let dt = qg / gg;
    if !dt.is_finite() {
        return cfg.dt_init;
    }
    dt.clamp(cfg.dt_min, cfg.dt_max)
}

/// Hessian of the discrete energy at a fixed field, as a linear map.
pub struct HessianMap<'a> {
    pub grid: &'a GridGeometry,
    pub q: &'a [f64],
    pub p: &'a ModelParams,
    pub mode: HessMode,
}

impl LinearMap for HessianMap<'_> {
    fn len(&self) -> usize {
        self.q.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        match self.mode {
            HessMode::Dimer => hess_vec_raw(self.grid, self.q, x, self.p, y),
            HessMode::Analytic => {
                hess_vec_exact_raw(self.grid, self.q, x, self.p, y);
                Ok(())
            }
        }
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        field_dot(self.grid, a, b)
    }
}

/// Per-face, per-component diagonal of the linear surface operator.
fn surface_diagonal() -> [[f64; 5]; 6] {
    let mut out = [[0.0; 5]; 6];
    for face in Face::ALL {
        for i in 0..5 {
            let mut e = [0.0; 5];
            e[i] = 1.0;
            out[face as usize][i] = surface_gradient_linear(&QTensor(e), face).0[i];
        }
    }
    out
}

/// Scalar implicit block `a(x) u - Lap u` for one component.
struct ScalarBlock<'a> {
    grid: &'a GridGeometry,
    diag: Vec<f64>,
}

impl LinearMap for ScalarBlock<'_> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.grid.laplacian_scalar(x, y);
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = d * xi - *yi;
        }
        Ok(())
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.grid.scalar_dot(a, b)
    }
}

/// Coupled implicit operator `a(x) u - Lap u + (2 omega/dx) sum_faces L_face u`.
struct CoupledBlock<'a> {
    grid: &'a GridGeometry,
    diag: Vec<f64>,
    surf: f64,
}

impl LinearMap for CoupledBlock<'_> {
    fn len(&self) -> usize {
        5 * self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        laplacian_into(self.grid, x, y);
        for idx in 0..self.grid.len() {
            let d = self.diag[idx];
            for c in 0..5 {
                let j = 5 * idx + c;
                y[j] = d * x[j] - y[j];
            }
            if self.surf != 0.0 && self.grid.is_boundary(idx) {
                let v = tensor_at(x, idx);
                for face in self.grid.faces(idx) {
                    let l = surface_gradient_linear(&v, face);
                    for c in 0..5 {
                        y[5 * idx + c] += self.surf * l.0[c];
                    }
                }
            }
        }
        Ok(())
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        field_dot(self.grid, a, b)
    }
}

/// Solves `(I/dt + K) delta = rhs` with the semi-implicit operator `K` linearised at `q`.
fn implicit_solve(
    q: &Field,
    rhs: &Field,
    dt: f64,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Field> {
    let grid = q.grid();
    let bulk_lin = p.bulk.a / (2.0 * p.bulk.c);
    let diag: Vec<f64> = (0..grid.len())
        .map(|i| 1.0 / dt + p.lambda2 * (bulk_lin + 0.5 * q.tensor(i).norm_sq()))
        .collect();
    let surf = 2.0 * p.omega / grid.dx;
    match cfg.splitting {
        Splitting::Coupled => {
            let op = CoupledBlock { grid, diag, surf };
            let out = minres(&op, rhs.data(), cfg.minres_tol, cfg.minres_maxit)?;
            check_solve(&out.relres, cfg)?;
            Field::from_data(grid, out.x)
        }
        Splitting::Decoupled => {
            let sd = surface_diagonal();
            let mut delta = Field::zeros(grid);
            for c in 0..5 {
                let mut d = diag.clone();
                if surf != 0.0 {
                    for (idx, di) in d.iter_mut().enumerate() {
                        for face in grid.faces(idx) {
                            *di += surf * sd[face as usize][c];
                        }
                    }
                }
                // coupling parts of the surface term stay in the explicit right-hand side
                let b = rhs.component(c);
                let op = ScalarBlock { grid, diag: d };
                let out = minres(&op, &b, cfg.minres_tol, cfg.minres_maxit)?;
                check_solve(&out.relres, cfg)?;
                delta.set_component(c, &out.x);
            }
            Ok(delta)
        }
    }
}

fn check_solve(relres: &f64, cfg: &SolverConfig) -> Result<()> {
    if !relres.is_finite() {
        return Err(Error::LinearSolveFailed("non-finite residual".into()));
    }
    if *relres > cfg.minres_tol.max(1e-4) * 1e2 {
        return Err(Error::LinearSolveFailed(format!(
            "relative residual {relres:.3e}"
        )));
    }
    Ok(())
}

/// Shifted-Laplacian preconditioner with `sigma = 1 + lambda2 |A| / 2C`.
fn eig_preconditioner(
    grid: &GridGeometry,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Option<ShiftedLaplacianInverse> {
    cfg.precondition.then(|| {
        ShiftedLaplacianInverse::new(grid, 1.0 + p.lambda2 * (p.bulk.a / (2.0 * p.bulk.c)).abs())
    })
}

fn to_vecs(fields: &[Field]) -> Vec<Vec<f64>> {
    fields.iter().map(|f| f.data().to_vec()).collect()
}

/// Advances the tracked directions by one LOBPCG step on the Hessian at `state.q`.
fn update_directions(state: &mut SaddleState, p: &ModelParams, cfg: &SolverConfig) -> Result<()> {
    if state.directions.is_empty() {
        return Ok(());
    }
    let grid = state.q.grid().clone();
    let op = HessianMap {
        grid: &grid,
        q: state.q.data(),
        p,
        mode: cfg.hess,
    };
    let x = to_vecs(&state.directions);
    let pc = eig_preconditioner(&grid, p, cfg);
    let (pairs, search) = lobpcg_single_step_precond(
        &op,
        &x,
        &state.search,
        pc.as_ref().map(|t| t as &dyn Preconditioner),
    )?;
    state.rayleigh = pairs.iter().map(|e| e.value).collect();
    state.directions = pairs
        .into_iter()
        .map(|e| Field::from_data(&grid, e.vector))
        .collect::<Result<_>>()?;
    state.search = search;
    Ok(())
}

/// One semi-implicit saddle-dynamics step.
///
/// For index-0 runs with `backtrack`, `dt` is halved until the energy decreases;
/// if no decrease is found above `dt_min` the state is returned unchanged with
/// `step_count` untouched.
pub fn sd_step(s: &SaddleState, p: &ModelParams, cfg: &SolverConfig) -> Result<SaddleState> {
    let force = s.force();
    let mut dt = s.dt;
    let grid = s.q.grid().clone();
    let descent = s.directions.is_empty() && cfg.backtrack;
    loop {
        let delta = implicit_solve(&s.q, &force, dt, p, cfg)?;
        let q_new = s.q.plus(1.0, &delta);
        let energy = match energy_raw(&grid, q_new.data(), p) {
            Ok(e) => e,
            Err(Error::NonFinite(_)) if descent && dt > cfg.dt_min => {
                dt *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        if descent && energy.total > s.energy.total {
            if dt <= cfg.dt_min {
                return Ok(s.clone());
            }
            dt = (0.5 * dt).max(cfg.dt_min);
            continue;
        }
        let mut grad = Field::zeros(&grid);
        gradient_raw(&grid, q_new.data(), p, grad.data_mut())?;
        let mut next = SaddleState {
            q: q_new,
            directions: s.directions.clone(),
            rayleigh: s.rayleigh.clone(),
            grad_norm: grad.norm(),
            grad,
            energy,
            step_count: s.step_count + 1,
            dt,
            search: s.search.clone(),
            last_step: None,
            last_force: None,
        };
        update_directions(&mut next, p, cfg)?;
        let new_force = next.force();
        let dg = new_force.plus(-1.0, &force);
        next.dt = bb_stepsize(&delta, &dg, cfg);
        next.last_step = Some(delta);
        next.last_force = Some(new_force);
        return Ok(next);
    }
}

/// Inexact Newton step on `grad E = 0`; `None` when no damped step reduces the gradient norm.
pub fn newton_step(
    s: &SaddleState,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Option<SaddleState>> {
    let grid = s.q.grid().clone();
    let op = HessianMap {
        grid: &grid,
        q: s.q.data(),
        p,
        mode: cfg.hess,
    };
    let eta = cfg.eta_max.min(s.grad_norm.sqrt());
    let rhs: Vec<f64> = s.grad.data().iter().map(|v| -v).collect();
    let sol = minres(&op, &rhs, eta, cfg.newton_maxit)?;
    let delta = Field::from_data(&grid, sol.x)?;
    let mut alpha = 1.0;
    for _ in 0..=5 {
        let q_new = s.q.plus(alpha, &delta);
        if q_new.is_finite() {
            let mut grad = Field::zeros(&grid);
            if gradient_raw(&grid, q_new.data(), p, grad.data_mut()).is_ok() {
                let gn = grad.norm();
                if gn < s.grad_norm {
                    let energy = energy_raw(&grid, q_new.data(), p)?;
                    let mut next = SaddleState {
                        q: q_new,
                        directions: s.directions.clone(),
                        rayleigh: s.rayleigh.clone(),
                        grad,
                        grad_norm: gn,
                        energy,
                        step_count: s.step_count + 1,
                        dt: s.dt,
                        search: s.search.clone(),
                        last_step: None,
                        last_force: None,
                    };
                    update_directions(&mut next, p, cfg)?;
                    return Ok(Some(next));
                }
            }
        }
        alpha *= 0.5;
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    /// Converged to a critical point whose certified index differs from the target.
    NotTargetIndex,
    MaxStepsExceeded,
    /// Index-0 descent could not decrease the energy any further above `final_tol`.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct HisdOutcome {
    pub state: SaddleState,
    pub status: RunStatus,
    pub morse: Option<MorseReport>,
    pub newton_steps: usize,
}

impl HisdOutcome {
    pub fn converged(&self) -> bool {
        matches!(
            self.status,
            RunStatus::Converged | RunStatus::NotTargetIndex
        )
    }

    pub fn index(&self) -> Option<usize> {
        self.morse.as_ref().map(|m| m.index)
    }
}

/// Runs saddle dynamics toward an index-`cfg.k` critical point.
///
/// Without initial directions the `k` smallest Hessian eigenvectors at `q0` are used.
pub fn run_hisd(
    q0: &Field,
    v0: Option<&[Field]>,
    cfg: &SolverConfig,
    p: &ModelParams,
    sink: &mut dyn FnMut(&TraceRecord),
) -> Result<HisdOutcome> {
    run_hisd_observed(q0, v0, cfg, p, &mut |_, r| sink(r))
}

/// [`run_hisd`] with an observer that also sees the state after every step.
pub fn run_hisd_observed(
    q0: &Field,
    v0: Option<&[Field]>,
    cfg: &SolverConfig,
    p: &ModelParams,
    observer: &mut dyn FnMut(&SaddleState, &TraceRecord),
) -> Result<HisdOutcome> {
    let mut sink = |s: &SaddleState, newton: bool| observer(s, &s.trace_record(newton));
    cfg.validate()?;
    p.validate()?;
    if !q0.is_finite() {
        return Err(Error::NonFinite("initial field"));
    }
    let grid = q0.grid().clone();
    let directions = match v0 {
        Some(v) if v.len() >= cfg.k => v[..cfg.k].to_vec(),
        _ if cfg.k == 0 => Vec::new(),
        _ => initial_directions(q0, cfg.k, p, cfg)?,
    };
    let mut directions = directions;
    if !directions.is_empty() {
        let mut vs = to_vecs(&directions);
        let op = HessianMap {
            grid: &grid,
            q: q0.data(),
            p,
            mode: cfg.hess,
        };
        orthonormalize(&op, &mut vs);
        if vs.len() < cfg.k {
            return Err(Error::LinearSolveFailed(
                "initial directions are linearly dependent".into(),
            ));
        }
        directions = vs
            .into_iter()
            .map(|v| Field::from_data(&grid, v))
            .collect::<Result<_>>()?;
    }
    let mut state = SaddleState::new(q0.clone(), directions, p, cfg)?;
    if !state.directions.is_empty() {
        let op = HessianMap {
            grid: &grid,
            q: state.q.data(),
            p,
            mode: cfg.hess,
        };
        state.rayleigh = state
            .directions
            .iter()
            .map(|v| {
                let mut y = vec![0.0; v.data().len()];
                op.apply(v.data(), &mut y).map(|_| op.dot(v.data(), &y))
            })
            .collect::<Result<_>>()?;
    }
    sink(&state, false);
    let mut newton_steps = 0;
    let mut newton_blocked_until = 0.0_f64;
    let mut status = RunStatus::MaxStepsExceeded;
    while state.step_count < cfg.max_steps {
        if state.grad_norm < cfg.final_tol {
            status = RunStatus::Converged;
            break;
        }
        let use_newton = cfg.newton
            && state.grad_norm < cfg.switch_tol
            && (newton_blocked_until == 0.0 || state.grad_norm < newton_blocked_until);
        if use_newton {
            if let Some(next) = newton_step(&state, p, cfg)? {
                state = next;
                newton_steps += 1;
                sink(&state, true);
                continue;
            }
            debug!(
                "newton stalled at |g| = {:.3e}; back to saddle dynamics",
                state.grad_norm
            );
            newton_blocked_until = 0.5 * state.grad_norm;
        }
        let next = sd_step(&state, p, cfg)?;
        if next.step_count == state.step_count {
            status = RunStatus::Stalled;
            break;
        }
        state = next;
        sink(&state, false);
    }
    if state.grad_norm < cfg.final_tol {
        status = RunStatus::Converged;
    }
    let mut morse = None;
    if cfg.certify && status == RunStatus::Converged {
        let report = morse_index(&state.q, p, cfg.max_index.max(cfg.k), cfg)?;
        if report.index != cfg.k {
            status = RunStatus::NotTargetIndex;
        }
        morse = Some(report);
    }
    Ok(HisdOutcome {
        state,
        status,
        morse,
        newton_steps,
    })
}

/// Convenience wrapper without a trace sink.
pub fn relax(q0: &Field, cfg: &SolverConfig, p: &ModelParams) -> Result<HisdOutcome> {
    let mut c = cfg.clone();
    c.k = 0;
    run_hisd(q0, None, &c, p, &mut |_| {})
}

fn eig_options(cfg: &SolverConfig) -> EigOptions {
    EigOptions {
        tol: cfg.eig_tol,
        maxit: cfg.eig_maxit,
        guard: 2,
        seed: cfg.seed,
    }
}

/// The `k` smallest Hessian eigenvectors at `q`.
pub fn initial_directions(
    q: &Field,
    k: usize,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Vec<Field>> {
    let grid = q.grid().clone();
    let op = HessianMap {
        grid: &grid,
        q: q.data(),
        p,
        mode: cfg.hess,
    };
    let pc = eig_preconditioner(&grid, p, cfg);
    let out = smallest_eigs_precond(
        &op,
        k,
        &[],
        &eig_options(cfg),
        pc.as_ref().map(|t| t as &dyn Preconditioner),
    )?;
    out.pairs
        .into_iter()
        .map(|e| Field::from_data(&grid, e.vector))
        .collect()
}

#[derive(Clone, Debug)]
pub struct MorseReport {
    pub index: usize,
    /// Eigenvalues with `|lambda| <= margin`, excluded from the index.
    pub zero_modes: usize,
    pub margin: f64,
    pub pairs: Vec<EigenPair>,
    /// A computed eigenvalue sits inside the zero band, or `max_k` was reached.
    pub ambiguous: bool,
    pub converged: bool,
}

impl MorseReport {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|e| e.value).collect()
    }
}

/// Largest Hessian eigenvalue estimate by power iteration.
fn spectral_radius(op: &HessianMap<'_>, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; x.len()];
    let mut lam = 0.0;
    for _ in 0..40 {
        let n = op.norm(&x);
        x.iter_mut().for_each(|v| *v /= n);
        op.apply(&x, &mut y)?;
        lam = op.norm(&y);
        std::mem::swap(&mut x, &mut y);
    }
    Ok(lam)
}

/// Number of negative Hessian eigenvalues at `q`, growing the block until an
/// eigenvalue above the zero band is found (or `max_k + 1` values are known).
pub fn morse_index(
    q: &Field,
    p: &ModelParams,
    max_k: usize,
    cfg: &SolverConfig,
) -> Result<MorseReport> {
    let grid = q.grid().clone();
    let op = HessianMap {
        grid: &grid,
        q: q.data(),
        p,
        mode: cfg.hess,
    };
    let margin = 1e-8 * spectral_radius(&op, cfg.seed)?;
    let pc = eig_preconditioner(&grid, p, cfg);
    let mut m = 2.min(max_k + 1).max(1);
    let mut init: Vec<Vec<f64>> = Vec::new();
    loop {
        let out = smallest_eigs_precond(
            &op,
            m,
            &init,
            &eig_options(cfg),
            pc.as_ref().map(|t| t as &dyn Preconditioner),
        )?;
        let top = out.pairs.last().map(|e| e.value).unwrap_or(f64::INFINITY);
        if top > margin || m > max_k {
            let index = out.pairs.iter().filter(|e| e.value < -margin).count();
            let zero_modes = out.pairs.iter().filter(|e| e.value.abs() <= margin).count();
            let ambiguous = zero_modes > 0 || top <= margin;
            return Ok(MorseReport {
                index,
                zero_modes,
                margin,
                pairs: out.pairs,
                ambiguous,
                converged: out.converged,
            });
        }
        init = out.pairs.into_iter().map(|e| e.vector).collect();
        m = (m + 2).min(max_k + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::gradient;
    use crate::grid::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_field(g: &Arc<GridGeometry>, rng: &mut impl Rng, scale: f64) -> Field {
        let data = (0..5 * g.len())
            .map(|_| rng.gen_range(-scale..scale))
            .collect();
        Field::from_data(g, data).unwrap()
    }

    #[test]
    fn bb_on_quadratic() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dq = random_field(&g, &mut rng, 1.0);
        let cfg = SolverConfig::default();
        let dt = bb_stepsize(&dq, &dq.scaled(4.0), &cfg);
        assert!((dt - 0.25).abs() < 1e-14);
        assert_eq!(bb_stepsize(&dq, &Field::zeros(&g), &cfg), cfg.dt_init);
        for _ in 0..50 {
            let a = random_field(&g, &mut rng, 1.0);
            let scale = rng.gen_range(1e-6..1e6);
            let b = random_field(&g, &mut rng, scale);
            let dt = bb_stepsize(&a, &b, &cfg);
            assert!(dt >= cfg.dt_min && dt <= cfg.dt_max);
        }
    }

    #[test]
    fn surface_diagonals() {
        let d = surface_diagonal();
        let top = d[Face::ZMax as usize];
        let expect = [2.0 / 3.0, 2.0 / 3.0, 0.0, 1.0, 1.0];
        for c in 0..5 {
            assert!((top[c] - expect[c]).abs() < 1e-15);
        }
        let x = d[Face::XMin as usize];
        assert!((x[0] - 4.0 / 3.0).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn heat_flow_energy_decreases() {
        let g = build_grid(7, 7, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ModelParams::mbba(0.0).with_omega(0.0);
        let cfg = SolverConfig {
            backtrack: false,
            ..Default::default()
        };
        for splitting in [Splitting::Decoupled, Splitting::Coupled] {
            let cfg = SolverConfig {
                splitting,
                ..cfg.clone()
            };
            let mut s =
                SaddleState::new(random_field(&g, &mut rng, 1.0), vec![], &p, &cfg).unwrap();
            for _ in 0..20 {
                let next = sd_step(&s, &p, &cfg).unwrap();
                assert!(next.energy.total < s.energy.total);
                s = next;
            }
        }
    }

    #[test]
    fn splittings_agree_without_anchoring() {
        let g = build_grid(7, 7, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = ModelParams::mbba(10.0).with_omega(0.0);
        let q = random_field(&g, &mut rng, 0.5);
        let rhs = random_field(&g, &mut rng, 1.0);
        let mut cfg = SolverConfig {
            minres_tol: 1e-12,
            ..Default::default()
        };
        let a = implicit_solve(&q, &rhs, 0.01, &p, &cfg).unwrap();
        cfg.splitting = Splitting::Decoupled;
        let b = implicit_solve(&q, &rhs, 0.01, &p, &cfg).unwrap();
        assert!(a.plus(-1.0, &b).max_abs() < 1e-9);
    }

    #[test]
    fn newton_exact_on_quadratic() {
        let g = build_grid(7, 7, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // no bulk term: elastic plus anchoring energy is an exact quadratic
        let p = ModelParams::mbba(0.0).with_omega(2.0);
        let cfg = SolverConfig {
            eta_max: 1e-12,
            hess: HessMode::Analytic,
            ..Default::default()
        };
        let q = random_field(&g, &mut rng, 0.1);
        let s = SaddleState::new(q, vec![], &p, &cfg).unwrap();
        let next = newton_step(&s, &p, &cfg).unwrap().unwrap();
        assert!(next.grad_norm < 1e-10, "{}", next.grad_norm);
    }

    #[test]
    fn relax_converges_monotonically() {
        let g = build_grid(7, 7, 1.0).unwrap();
        let p = ModelParams::mbba(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q0 = random_field(&g, &mut rng, 0.3);
        let mut energies = Vec::new();
        let cfg = SolverConfig {
            newton: false,
            ..Default::default()
        };
        let out = run_hisd(&q0, None, &cfg, &p, &mut |r| energies.push(r.energy)).unwrap();
        assert_eq!(
            out.status,
            RunStatus::Converged,
            "{:?}",
            out.state.grad_norm
        );
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert_eq!(out.index(), Some(0));
        assert!(gradient(&out.state.q, &p).unwrap().norm() < cfg.final_tol);
    }

    #[test]
    fn already_critical_returns_immediately() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let p = ModelParams::mbba(5.0).with_omega(0.0);
        let q = Field::uniform(
            &g,
            crate::tensor::uniaxial(&[0.0, 0.0, 1.0], p.s_plus()).unwrap(),
        );
        let out = relax(&q, &SolverConfig::default(), &p).unwrap();
        assert_eq!(out.state.step_count, 0);
        assert_eq!(out.status, RunStatus::Converged);
    }
}
