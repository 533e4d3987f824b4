//! Uniform finite-difference grid on `[-1,1]^2 x [-h,h]` and the fields living on it.
//!
//! Node weights follow the trapezoid rule in every axis (1/2 per boundary axis),
//! which makes the reflected-ghost Neumann Laplacian self-adjoint with respect to
//! [`Field::inner_product`]. Surface weights are the trapezoid rule on each face.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{QTensor, Vec3};

/// One of the six cuboid faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::ZMin,
        Face::ZMax,
    ];

    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }

    /// Axis index normal to the face (0 = x, 1 = y, 2 = z).
    pub fn axis(self) -> usize {
        self as usize / 2
    }

    pub fn sign(self) -> f64 {
        if self as usize % 2 == 0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn normal(self) -> Vec3 {
        let mut n = [0.0; 3];
        n[self.axis()] = self.sign();
        n
    }
}

/// Boundary classification of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Face(Face),
    Edge(Face, Face),
    Corner(Face, Face, Face),
}

/// Immutable grid description shared by all fields on it.
#[derive(Clone, Debug)]
pub struct GridGeometry {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Realised half height, `(nz - 1) dx / 2`.
    pub h: f64,
    pub dx: f64,
    face_mask: Vec<u8>,
    node_weight: Vec<f64>,
}

impl PartialEq for GridGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.nz == other.nz && self.dx == other.dx
    }
}

/// Builds the grid for `nx` (= `ny`) nodes across the square section and half height `h`.
///
/// `h` is snapped to the nearest multiple of `dx / 2`; the realised value is stored.
pub fn build_grid(nx: usize, ny: usize, h: f64) -> Result<Arc<GridGeometry>> {
    GridGeometry::new(nx, ny, h).map(Arc::new)
}

impl GridGeometry {
    pub fn new(nx: usize, ny: usize, h: f64) -> Result<Self> {
        for (axis, n) in [('x', nx), ('y', ny)] {
            if n < 5 {
                return Err(Error::TooCoarse { axis, nodes: n });
            }
        }
        if nx != ny {
            return Err(Error::InvalidGrid(format!(
                "square section needs nx == ny (got {nx} x {ny})"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("h must be positive, got {h}")));
        }
        let dx = 2.0 / (nx - 1) as f64;
        let nz = (2.0 * h / dx).round() as usize + 1;
        if nz < 5 {
            return Err(Error::TooCoarse {
                axis: 'z',
                nodes: nz,
            });
        }
        let h = (nz - 1) as f64 * dx / 2.0;
        let n = nx * ny * nz;
        let mut face_mask = vec![0u8; n];
        let mut node_weight = vec![0.0; n];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let idx = i + nx * (j + ny * k);
                    let mut mask = 0u8;
                    let mut w = 1.0;
                    for (c, len, lo, hi) in [
                        (i, nx, Face::XMin, Face::XMax),
                        (j, ny, Face::YMin, Face::YMax),
                        (k, nz, Face::ZMin, Face::ZMax),
                    ] {
                        if c == 0 {
                            mask |= lo.bit();
                            w *= 0.5;
                        } else if c == len - 1 {
                            mask |= hi.bit();
                            w *= 0.5;
                        }
                    }
                    face_mask[idx] = mask;
                    node_weight[idx] = w;
                }
            }
        }
        Ok(GridGeometry {
            nx,
            ny,
            nz,
            h,
            dx,
            face_mask,
            node_weight,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.nx;
        let j = (idx / self.nx) % self.ny;
        let k = idx / (self.nx * self.ny);
        (i, j, k)
    }

    pub fn coords(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.ijk(idx);
        [
            -1.0 + i as f64 * self.dx,
            -1.0 + j as f64 * self.dx,
            -self.h + k as f64 * self.dx,
        ]
    }

    /// Volume of the cuboid, `8 h`.
    pub fn volume(&self) -> f64 {
        8.0 * self.h
    }

    /// Trapezoid volume weight of a node, in units of `dx^3`.
    #[inline]
    pub fn node_weight(&self, idx: usize) -> f64 {
        self.node_weight[idx]
    }

    #[inline]
    pub fn face_mask(&self, idx: usize) -> u8 {
        self.face_mask[idx]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.face_mask[idx] != 0
    }

    /// Faces the node lies on.
    pub fn faces(&self, idx: usize) -> impl Iterator<Item = Face> + '_ {
        let mask = self.face_mask[idx];
        Face::ALL.into_iter().filter(move |f| mask & f.bit() != 0)
    }

    pub fn node_class(&self, idx: usize) -> NodeClass {
        let f: Vec<Face> = self.faces(idx).collect();
        match f.as_slice() {
            [] => NodeClass::Interior,
            [a] => NodeClass::Face(*a),
            [a, b] => NodeClass::Edge(*a, *b),
            [a, b, c] => NodeClass::Corner(*a, *b, *c),
            _ => unreachable!("a node touches at most three faces"),
        }
    }

    /// Outward unit normals of the faces adjacent to a node.
    pub fn normals(&self, idx: usize) -> Vec<Vec3> {
        self.faces(idx).map(Face::normal).collect()
    }

    /// Trapezoid surface weight of node `idx` on `face` (zero if not on it).
    pub fn face_weight(&self, idx: usize, face: Face) -> f64 {
        if self.face_mask[idx] & face.bit() == 0 {
            return 0.0;
        }
        // node weight carries a 1/2 for the face's own axis
        2.0 * self.node_weight[idx] * self.dx * self.dx
    }

    /// Total surface weight of a node, summed over its adjacent faces.
    pub fn surface_weight(&self, idx: usize) -> f64 {
        self.faces(idx).map(|f| self.face_weight(idx, f)).sum()
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.face_mask[i] != 0)
    }

    /// Nodes of one face, as `(idx, a, b)` where `(a, b)` index the in-face axes.
    ///
    /// In-face axes are (x, y) for z-faces, (x, z) for y-faces and (y, z) for x-faces.
    pub fn face_nodes(&self, face: Face) -> (usize, usize, Vec<usize>) {
        let (na, nb) = self.face_dims(face);
        let mut out = Vec::with_capacity(na * nb);
        for b in 0..nb {
            for a in 0..na {
                out.push(self.face_node(face, a, b));
            }
        }
        (na, nb, out)
    }

    pub fn face_dims(&self, face: Face) -> (usize, usize) {
        match face.axis() {
            0 => (self.ny, self.nz),
            1 => (self.nx, self.nz),
            _ => (self.nx, self.ny),
        }
    }

    pub fn face_node(&self, face: Face, a: usize, b: usize) -> usize {
        let fixed = |n: usize| if face.sign() < 0.0 { 0 } else { n - 1 };
        match face.axis() {
            0 => self.index(fixed(self.nx), a, b),
            1 => self.index(a, fixed(self.ny), b),
            _ => self.index(a, b, fixed(self.nz)),
        }
    }

    /// Weighted sum of per-node values over the boundary (values at interior nodes are ignored).
    pub fn surface_integral(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        self.boundary_nodes()
            .map(|i| self.surface_weight(i) * values[i])
            .sum()
    }

    /// Surface integral of a per-(node, face) integrand.
    pub fn surface_integral_with(&self, mut f: impl FnMut(usize, Face) -> f64) -> f64 {
        let mut acc = 0.0;
        for idx in 0..self.len() {
            let mask = self.face_mask[idx];
            if mask == 0 {
                continue;
            }
            for face in Face::ALL {
                if mask & face.bit() != 0 {
                    acc += self.face_weight(idx, face) * f(idx, face);
                }
            }
        }
        acc
    }

    /// Reflected-ghost neighbour offsets for the Neumann stencil.
    #[inline]
    fn neighbours(&self, idx: usize) -> [(usize, usize); 3] {
        let (i, j, k) = self.ijk(idx);
        let sx = 1;
        let sy = self.nx;
        let sz = self.nx * self.ny;
        let pair = |c: usize, n: usize, stride: usize| {
            let lo = if c == 0 { idx + stride } else { idx - stride };
            let hi = if c == n - 1 {
                idx - stride
            } else {
                idx + stride
            };
            (lo, hi)
        };
        [
            pair(i, self.nx, sx),
            pair(j, self.ny, sy),
            pair(k, self.nz, sz),
        ]
    }

    /// Neumann Laplacian of a scalar field (`values.len() == len()`).
    pub fn laplacian_scalar(&self, values: &[f64], out: &mut [f64]) {
        let inv = 1.0 / (self.dx * self.dx);
        for idx in 0..self.len() {
            let c = values[idx];
            let mut acc = 0.0;
            for (lo, hi) in self.neighbours(idx) {
                acc += values[lo] + values[hi] - 2.0 * c;
            }
            out[idx] = acc * inv;
        }
    }

    /// Weighted scalar inner product `sum w_i a_i b_i dx^3`.
    pub fn scalar_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.len() {
            acc += self.node_weight[i] * a[i] * b[i];
        }
        acc * self.dx.powi(3)
    }
}

/// A Q-tensor per grid node, stored node-major as `[q1..q5]` blocks.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<GridGeometry>,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<GridGeometry>) -> Self {
        Field {
            grid: grid.clone(),
            data: vec![0.0; 5 * grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<GridGeometry>, mut f: impl FnMut(Vec3) -> QTensor) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let q = f(grid.coords(idx));
            out.set(idx, q);
        }
        out
    }

    pub fn uniform(grid: &Arc<GridGeometry>, q: QTensor) -> Self {
        Self::from_fn(grid, |_| q)
    }

    pub fn from_data(grid: &Arc<GridGeometry>, data: Vec<f64>) -> Result<Self> {
        if data.len() != 5 * grid.len() {
            return Err(Error::GeometryMismatch);
        }
        Ok(Field {
            grid: grid.clone(),
            data,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Arc<GridGeometry> {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn tensor(&self, idx: usize) -> QTensor {
        let s = &self.data[5 * idx..5 * idx + 5];
        QTensor([s[0], s[1], s[2], s[3], s[4]])
    }

    #[inline]
    pub fn set(&mut self, idx: usize, q: QTensor) {
        self.data[5 * idx..5 * idx + 5].copy_from_slice(&q.0);
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch)
        }
    }

    /// Discrete L2 pairing `sum_nodes w tr(f g) dx^3`.
    pub fn inner_product(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(field_dot(&self.grid, &self.data, &other.data))
    }

    pub fn norm(&self) -> f64 {
        field_dot(&self.grid, &self.data, &self.data)
            .max(0.0)
            .sqrt()
    }

    /// Largest nodal Frobenius norm `max |Q|`.
    pub fn max_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| self.tensor(i).norm())
            .fold(0.0, f64::max)
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn axpy(&mut self, alpha: f64, x: &Field) {
        for (a, b) in self.data.iter_mut().zip(&x.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.data {
            *a *= alpha;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    /// `self + alpha x`.
    pub fn plus(&self, alpha: f64, x: &Field) -> Field {
        let mut out = self.clone();
        out.axpy(alpha, x);
        out
    }

    /// Neumann (reflected ghost) Laplacian, componentwise.
    pub fn laplacian(&self) -> Field {
        let mut out = Field::zeros(&self.grid);
        laplacian_into(&self.grid, &self.data, &mut out.data);
        out
    }

    /// Scalar field holding one component.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(5).copied().collect()
    }

    pub fn set_component(&mut self, c: usize, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            self.data[5 * i + c] = *v;
        }
    }
}

/// Field inner product on raw node-major data.
pub fn field_dot(grid: &GridGeometry, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for idx in 0..grid.len() {
        let x = &a[5 * idx..5 * idx + 5];
        let y = &b[5 * idx..5 * idx + 5];
        let d = 2.0 * (x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3] + x[4] * y[4])
            + x[0] * y[1]
            + x[1] * y[0];
        acc += grid.node_weight(idx) * d;
    }
    acc * grid.dx.powi(3)
}

/// Componentwise Neumann Laplacian on raw node-major data.
pub fn laplacian_into(grid: &GridGeometry, data: &[f64], out: &mut [f64]) {
    let inv = 1.0 / (grid.dx * grid.dx);
    for idx in 0..grid.len() {
        let nb = grid.neighbours(idx);
        for c in 0..5 {
            let centre = data[5 * idx + c];
            let mut acc = 0.0;
            for (lo, hi) in nb {
                acc += data[5 * lo + c] + data[5 * hi + c] - 2.0 * centre;
            }
            out[5 * idx + c] = acc * inv;
        }
    }
}
