//! Discrete Landau-de Gennes energy with surface anchoring, its gradient and Hessian actions.
//!
//! The elastic term is a trapezoid-weighted sum over grid links,
//! `1/2 sum_links w_link |Q_a - Q_b|^2 dx`, whose exact gradient in the weighted
//! inner product is the reflected-ghost Neumann Laplacian. The surface term uses the
//! trapezoid face weights of [`GridGeometry::face_weight`], so its gradient at a
//! boundary node is `(2 omega / dx) * sum_faces g(Q, nu)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{laplacian_into, Face, Field, GridGeometry};
use crate::tensor::{bulk_gradient, bulk_potential, BulkParams, QTensor};

/// Default physical anchoring coefficient (J m^-2).
pub const DEFAULT_W: f64 = 0.01;
pub const DEFAULT_DIMER_L: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub bulk: BulkParams,
    pub lambda2: f64,
    pub omega: f64,
    pub w: f64,
    pub dimer_l: f64,
}

/// `sqrt(lambda2) W / sqrt(2 C L)`, treating `lambda` as the dimensionless edge parameter.
pub fn anchoring_omega(lambda2: f64, w: f64, c: f64, l: f64) -> f64 {
    lambda2.max(0.0).sqrt() * w / (2.0 * c * l).sqrt()
}

impl ModelParams {
    /// MBBA parameters with `omega` derived from `W = 0.01`.
    pub fn mbba(lambda2: f64) -> Self {
        Self::with_anchoring(BulkParams::mbba(), lambda2, DEFAULT_W)
    }

    pub fn with_anchoring(bulk: BulkParams, lambda2: f64, w: f64) -> Self {
        let omega = anchoring_omega(lambda2, w, bulk.c, bulk.l);
        ModelParams {
            bulk,
            lambda2,
            omega,
            w,
            dimer_l: DEFAULT_DIMER_L,
        }
    }

    /// Overrides `omega` directly (the stored `w` is left as is).
    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda2 must be >= 0, got {}",
                self.lambda2
            )));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "omega must be >= 0, got {}",
                self.omega
            )));
        }
        if !(self.dimer_l > 0.0) {
            return Err(Error::InvalidParams("dimer_l must be positive".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn s_plus(&self) -> f64 {
        self.bulk.s_plus
    }
}

/// Energy split into its parts. `total = elastic + bulk + omega * bc`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub elastic: f64,
    pub bulk: f64,
    /// Landau-de Gennes part, `elastic + bulk`.
    pub ldg: f64,
    pub bc: f64,
    pub total: f64,
}

/// `|Q nu + (s/3) nu|^2`.
#[inline]
pub fn surface_density(q: &QTensor, face: Face, s: f64) -> f64 {
    let col = column(q, face.axis());
    let sg = face.sign();
    let mut acc = 0.0;
    for (i, c) in col.iter().enumerate() {
        let extra = if i == face.axis() { s / 3.0 } else { 0.0 };
        let v = sg * (c + extra);
        acc += v * v;
    }
    acc
}

/// Traceless gradient of [`surface_density`] with respect to `Q`:
/// `nu nu^T Q + Q nu nu^T + (2s/3) nu nu^T - ((2/3) nu^T Q nu + 2s/9) I`.
#[inline]
pub fn surface_gradient(q: &QTensor, face: Face, s: f64) -> QTensor {
    let m = q.to_matrix();
    let a = face.axis();
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        g[a][i] += m[a][i];
        g[i][a] += m[i][a];
    }
    g[a][a] += 2.0 * s / 3.0;
    let shift = 2.0 / 3.0 * m[a][a] + 2.0 * s / 9.0;
    for (i, row) in g.iter_mut().enumerate() {
        row[i] -= shift;
    }
    QTensor::from_matrix(&g)
}

/// Linear part of [`surface_gradient`] (the response to a perturbation `v`).
#[inline]
pub fn surface_gradient_linear(v: &QTensor, face: Face) -> QTensor {
    surface_gradient(v, face, 0.0)
}

#[inline]
fn column(q: &QTensor, axis: usize) -> [f64; 3] {
    let [q1, q2, q3, q4, q5] = q.0;
    match axis {
        0 => [q1, q3, q4],
        1 => [q3, q2, q5],
        _ => [q4, q5, -q1 - q2],
    }
}

fn check_finite(data: &[f64], what: &'static str) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Energy of raw node-major data on `grid`.
pub fn energy_raw(grid: &GridGeometry, data: &[f64], p: &ModelParams) -> Result<Energy> {
    check_finite(data, "energy")?;
    let dx = grid.dx;
    let dx3 = dx.powi(3);
    let strides = [1, grid.nx, grid.nx * grid.ny];
    let dims = [grid.nx, grid.ny, grid.nz];
    let s = p.bulk.s_plus;
    let mut elastic = 0.0;
    let mut bulk = 0.0;
    let mut bc = 0.0;
    for idx in 0..grid.len() {
        let q = tensor_at(data, idx);
        let w = grid.node_weight(idx);
        bulk += w * bulk_potential(&q, &p.bulk, p.lambda2);
        let ijk = grid.ijk(idx);
        let c = [ijk.0, ijk.1, ijk.2];
        for axis in 0..3 {
            if c[axis] + 1 >= dims[axis] {
                continue;
            }
            let own = if c[axis] == 0 { 0.5 } else { 1.0 };
            let wl = w / own;
            let d = q - tensor_at(data, idx + strides[axis]);
            elastic += wl * d.norm_sq();
        }
        if grid.is_boundary(idx) {
            for face in grid.faces(idx) {
                bc += grid.face_weight(idx, face) * surface_density(&q, face, s);
            }
        }
    }
    let elastic = 0.5 * elastic * dx;
    let bulk = bulk * dx3;
    let ldg = elastic + bulk;
    let total = ldg + p.omega * bc;
    if !total.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    Ok(Energy {
        elastic,
        bulk,
        ldg,
        bc,
        total,
    })
}

pub fn energy(f: &Field, p: &ModelParams) -> Result<Energy> {
    energy_raw(f.grid(), f.data(), p)
}

#[inline]
pub(crate) fn tensor_at(data: &[f64], idx: usize) -> QTensor {
    let s = &data[5 * idx..5 * idx + 5];
    QTensor([s[0], s[1], s[2], s[3], s[4]])
}

#[inline]
fn add_at(out: &mut [f64], idx: usize, q: &QTensor) {
    for c in 0..5 {
        out[5 * idx + c] += q.0[c];
    }
}

/// Gradient of [`energy_raw`] in the weighted inner product, written into `out`.
pub fn gradient_raw(
    grid: &GridGeometry,
    data: &[f64],
    p: &ModelParams,
    out: &mut [f64],
) -> Result<()> {
    check_finite(data, "gradient")?;
    laplacian_into(grid, data, out);
    for v in out.iter_mut() {
        *v = -*v;
    }
    let s = p.bulk.s_plus;
    let surf = 2.0 * p.omega / grid.dx;
    for idx in 0..grid.len() {
        let q = tensor_at(data, idx);
        let mut g = bulk_gradient(&q, &p.bulk, p.lambda2);
        if p.omega != 0.0 && grid.is_boundary(idx) {
            for face in grid.faces(idx) {
                g += surf * surface_gradient(&q, face, s);
            }
        }
        add_at(out, idx, &g);
    }
    check_finite(out, "gradient")
}

pub fn gradient(f: &Field, p: &ModelParams) -> Result<Field> {
    let mut out = Field::zeros(f.grid());
    gradient_raw(f.grid(), f.data(), p, out.data_mut())?;
    Ok(out)
}

/// Dimer half-length used by [`hess_vec`].
pub fn dimer_length(f: &[f64], v: &[f64], dimer_l: f64) -> f64 {
    let fm = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let vm = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    dimer_l * fm.max(1.0) / vm.max(1.0)
}

/// Central-difference Hessian action `(grad(f + l v) - grad(f - l v)) / 2l`.
pub fn hess_vec_raw(
    grid: &GridGeometry,
    f: &[f64],
    v: &[f64],
    p: &ModelParams,
    out: &mut [f64],
) -> Result<()> {
    if v.iter().all(|x| *x == 0.0) {
        out.fill(0.0);
        return Ok(());
    }
    let l = dimer_length(f, v, p.dimer_l);
    let plus: Vec<f64> = f.iter().zip(v).map(|(a, b)| a + l * b).collect();
    let minus: Vec<f64> = f.iter().zip(v).map(|(a, b)| a - l * b).collect();
    let mut gm = vec![0.0; f.len()];
    gradient_raw(grid, &plus, p, out)?;
    gradient_raw(grid, &minus, p, &mut gm)?;
    let inv = 0.5 / l;
    for (o, m) in out.iter_mut().zip(&gm) {
        *o = (*o - m) * inv;
    }
    Ok(())
}

pub fn hess_vec(f: &Field, v: &Field, p: &ModelParams) -> Result<Field> {
    f.check_same_grid(v)?;
    let mut out = Field::zeros(f.grid());
    hess_vec_raw(f.grid(), f.data(), v.data(), p, out.data_mut())?;
    Ok(out)
}

/// Second derivative of the bulk potential at `q` applied to `v`.
pub fn bulk_hessian(q: &QTensor, v: &QTensor, p: &BulkParams, lambda2: f64) -> QTensor {
    let t2 = q.norm_sq();
    let qv = q.dot(v);
    let mq = q.to_matrix();
    let mv = v.to_matrix();
    let mut sym = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                sym[i][j] += mq[i][k] * mv[k][j] + mv[i][k] * mq[k][j];
            }
        }
    }
    let sym = QTensor::from_matrix(&sym);
    let lin = p.a / (2.0 * p.c) + 0.5 * t2;
    let cub = p.b / (2.0 * p.c);
    let mut out = [0.0; 5];
    for (i, o) in out.iter_mut().enumerate() {
        *o = lambda2 * (lin * v.0[i] - cub * sym.0[i] + qv * q.0[i]);
    }
    QTensor(out)
}

/// Analytic Hessian action.
pub fn hess_vec_exact_raw(
    grid: &GridGeometry,
    f: &[f64],
    v: &[f64],
    p: &ModelParams,
    out: &mut [f64],
) {
    laplacian_into(grid, v, out);
    for x in out.iter_mut() {
        *x = -*x;
    }
    let surf = 2.0 * p.omega / grid.dx;
    for idx in 0..grid.len() {
        let q = tensor_at(f, idx);
        let dv = tensor_at(v, idx);
        let mut h = bulk_hessian(&q, &dv, &p.bulk, p.lambda2);
        if p.omega != 0.0 && grid.is_boundary(idx) {
            for face in grid.faces(idx) {
                h += surf * surface_gradient_linear(&dv, face);
            }
        }
        add_at(out, idx, &h);
    }
}

pub fn hess_vec_exact(f: &Field, v: &Field, p: &ModelParams) -> Result<Field> {
    f.check_same_grid(v)?;
    let mut out = Field::zeros(f.grid());
    hess_vec_exact_raw(f.grid(), f.data(), v.data(), p, out.data_mut());
    Ok(out)
}

/// Weighted L2 norm of the energy gradient.
pub fn grad_norm(f: &Field, p: &ModelParams) -> Result<f64> {
    Ok(gradient(f, p)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::tensor::uniaxial;
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
    fn omega_values() {
        let b = BulkParams::mbba();
        let w = anchoring_omega(50.0, 0.01, b.c, b.l);
        let oracle = 50f64.sqrt() * 0.01 / (2.0 * 0.35e4 * 4e-11f64).sqrt();
        assert!((w - oracle).abs() < 1e-9);
        assert!((w - 133.6).abs() < 0.05);
        assert_eq!(anchoring_omega(0.0, 0.01, b.c, b.l), 0.0);
        assert_eq!(anchoring_omega(50.0, 0.0, b.c, b.l), 0.0);
    }

    #[test]
    fn uniform_z_director_energy() {
        let g = build_grid(9, 9, 1.0).unwrap();
        let p = ModelParams::mbba(10.0);
        let s = p.s_plus();
        let f = Field::uniform(&g, uniaxial(&[0.0, 0.0, 1.0], s).unwrap());
        let e = energy(&f, &p).unwrap();
        assert!(e.ldg.abs() < 1e-10);
        // only the top and bottom faces (area 4 each) contribute s^2
        assert!((e.bc - 8.0 * s * s).abs() < 1e-10);
        assert!((e.total - p.omega * 8.0 * s * s).abs() < 1e-8);
    }

    #[test]
    fn planar_degenerate_anchoring_is_free() {
        for face in Face::ALL {
            let s = 1.7;
            let mut n = [0.0; 3];
            n[(face.axis() + 1) % 3] = 0.6;
            n[(face.axis() + 2) % 3] = 0.8;
            let q = uniaxial(&n, s).unwrap();
            assert!(surface_density(&q, face, s) < 1e-28);
        }
    }

    #[test]
    fn elastic_term_is_quadratic() {
        let g = build_grid(7, 7, 0.75).unwrap();
        let p = ModelParams::mbba(0.0);
        let f = Field::from_fn(&g, |x| QTensor::new(x[0], 0.3 * x[0], 0.0, -x[0], 0.0));
        let e1 = energy(&f, &p).unwrap();
        let e2 = energy(&f.scaled(2.0), &p).unwrap();
        assert_eq!(e1.bulk, 0.0);
        assert!((e2.ldg - 4.0 * e1.ldg).abs() < 1e-12 * e2.ldg);
        assert!(e1.ldg > 0.0);
    }

    #[test]
    fn elastic_matches_summation_by_parts() {
        let g = build_grid(7, 7, 0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_field(&g, &mut rng, 1.0);
        let p = ModelParams::mbba(0.0).with_omega(0.0);
        let e = energy(&f, &p).unwrap();
        let by_parts = -0.5 * f.laplacian().inner_product(&f).unwrap();
        assert!((e.elastic - by_parts).abs() < 1e-10 * e.elastic);
    }

    #[test]
    fn zero_field_gradient_lives_on_boundary() {
        let g = build_grid(7, 7, 1.0).unwrap();
        let p = ModelParams::mbba(10.0);
        let s = p.s_plus();
        let grad = gradient(&Field::zeros(&g), &p).unwrap();
        for idx in 0..g.len() {
            let t = grad.tensor(idx);
            let mut expect = QTensor::ZERO;
            for face in g.faces(idx) {
                // (2s/3) nu nu^T - (2s/9) I
                let mut m = [[0.0; 3]; 3];
                m[face.axis()][face.axis()] = 2.0 * s / 3.0;
                for (i, row) in m.iter_mut().enumerate() {
                    row[i] -= 2.0 * s / 9.0;
                }
                expect += (2.0 * p.omega / g.dx) * QTensor::from_matrix(&m);
            }
            assert!((t - expect).max_abs() < 1e-9);
        }
    }

    #[test]
    fn natural_boundary_gradient() {
        let g = build_grid(7, 7, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = ModelParams::mbba(10.0).with_omega(0.0);
        let f = random_field(&g, &mut rng, 1.0);
        let grad = gradient(&f, &p).unwrap();
        let lap = f.laplacian();
        for idx in 0..g.len() {
            let expect = bulk_gradient(&f.tensor(idx), &p.bulk, p.lambda2) - lap.tensor(idx);
            assert!((grad.tensor(idx) - expect).max_abs() < 1e-12);
        }
    }

    fn fd_check(omega: f64, lambda2: f64, seed: u64, trials: usize) {
        let g = build_grid(7, 7, 0.75).unwrap();
        let p = ModelParams::mbba(lambda2).with_omega(omega);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = 1e-6;
        for _ in 0..trials {
            let f = random_field(&g, &mut rng, 1.0);
            let v = random_field(&g, &mut rng, 1.0);
            let dir = gradient(&f, &p).unwrap().inner_product(&v).unwrap();
            let ep = energy(&f.plus(eps, &v), &p).unwrap().total;
            let em = energy(&f.plus(-eps, &v), &p).unwrap().total;
            let fd = (ep - em) / (2.0 * eps);
            let rel = (dir - fd).abs() / fd.abs().max(dir.abs()).max(1e-12);
            assert!(rel < 1e-5, "omega {omega} lambda2 {lambda2}: {dir} vs {fd}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for (i, omega) in [0.0, 1.0, 133.0].into_iter().enumerate() {
            for (j, lambda2) in [0.0, 10.0, 50.0].into_iter().enumerate() {
                fd_check(omega, lambda2, (3 * i + j) as u64, 4);
            }
        }
    }

    #[test]
    fn outputs_are_traceless_by_construction() {
        // five-component storage carries no trace degree of freedom; check the
        // matrix reconstruction is traceless and the tensor form round-trips
        let g = build_grid(5, 5, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = ModelParams::mbba(50.0);
        let f = random_field(&g, &mut rng, 1.0);
        let v = random_field(&g, &mut rng, 1.0);
        for out in [gradient(&f, &p).unwrap(), hess_vec(&f, &v, &p).unwrap()] {
            for idx in 0..g.len() {
                let m = out.tensor(idx).to_matrix();
                assert_eq!(m[0][0] + m[1][1] + m[2][2], 0.0);
            }
        }
    }

    #[test]
    fn hess_vec_zero_direction() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_field(&g, &mut rng, 1.0);
        let h = hess_vec(&f, &Field::zeros(&g), &ModelParams::mbba(10.0)).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn hess_vec_exact_on_quadratic_energy() {
        let g = build_grid(7, 7, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut bulk = BulkParams::mbba();
        bulk.b = 0.0;
        let mut p = ModelParams::with_anchoring(bulk, 0.0, 0.0).with_omega(5.0);
        let f = random_field(&g, &mut rng, 1.0);
        let v = random_field(&g, &mut rng, 1.0);
        p.dimer_l = 1e-3;
        let h1 = hess_vec(&f, &v, &p).unwrap();
        p.dimer_l = 1e-5;
        let h2 = hess_vec(&f, &v, &p).unwrap();
        assert!(h1.plus(-1.0, &h2).max_abs() < 1e-10 * h1.max_abs().max(1.0));
    }

    #[test]
    fn hess_vec_symmetric_and_matches_analytic() {
        let g = build_grid(7, 7, 0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = ModelParams::mbba(50.0);
        for _ in 0..5 {
            let f = random_field(&g, &mut rng, 1.0);
            let u = random_field(&g, &mut rng, 1.0);
            let w = random_field(&g, &mut rng, 1.0);
            let a = hess_vec(&f, &u, &p).unwrap().inner_product(&w).unwrap();
            let b = hess_vec(&f, &w, &p).unwrap().inner_product(&u).unwrap();
            assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} vs {b}");
            let exact = hess_vec_exact(&f, &u, &p).unwrap();
            let dimer = hess_vec(&f, &u, &p).unwrap();
            assert!(exact.plus(-1.0, &dimer).max_abs() < 1e-5 * exact.max_abs());
        }
    }

    #[test]
    fn nonfinite_rejected() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let mut f = Field::zeros(&g);
        f.data_mut()[7] = f64::NAN;
        let p = ModelParams::mbba(1.0);
        assert!(matches!(energy(&f, &p), Err(Error::NonFinite(_))));
        assert!(matches!(gradient(&f, &p), Err(Error::NonFinite(_))));
    }
}
