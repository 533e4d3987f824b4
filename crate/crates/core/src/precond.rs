//! Exact inverse of `sigma - Lap` for the reflected-ghost Neumann Laplacian.
//!
//! The 1-D stencil is self-adjoint under trapezoid weights, so each axis is
//! diagonalised once and the 3-D inverse is applied axis by axis.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::grid::GridGeometry;

/// A symmetric positive definite approximate inverse.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], out: &mut [f64]);
}

struct AxisBasis {
    n: usize,
    /// Eigenvectors of `-D` as columns, row-major `n x n`.
    fwd: Vec<f64>,
    /// Inverse of `fwd`, row-major.
    inv: Vec<f64>,
    mu: Vec<f64>,
}

impl AxisBasis {
    fn new(n: usize, dx: f64) -> Self {
        let inv2 = 1.0 / (dx * dx);
        let mut d = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = 2.0 * inv2;
            let lo = if i == 0 { 1 } else { i - 1 };
            let hi = if i == n - 1 { n - 2 } else { i + 1 };
            d[(i, lo)] -= inv2;
            d[(i, hi)] -= inv2;
        }
        let w: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 } else { 1.0 })
            .collect();
        let s = DMatrix::from_fn(n, n, |i, j| w[i].sqrt() * d[(i, j)] / w[j].sqrt());
        let s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        let mut fwd = vec![0.0; n * n];
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let u = eig.eigenvectors[(i, k)];
                fwd[i * n + k] = u / w[i].sqrt();
                inv[k * n + i] = u * w[i].sqrt();
            }
        }
        let mu = eig.eigenvalues.iter().map(|m| m.max(0.0)).collect();
        AxisBasis { n, fwd, inv, mu }
    }
}

/// `(sigma - Lap)^{-1}` applied componentwise to node-major 5-component data.
pub struct ShiftedLaplacianInverse {
    nx: usize,
    ny: usize,
    nz: usize,
    axes: [AxisBasis; 3],
    sigma: f64,
}

impl ShiftedLaplacianInverse {
    pub fn new(grid: &GridGeometry, sigma: f64) -> Self {
        assert!(sigma > 0.0, "shift must be positive");
        let axes = [
            AxisBasis::new(grid.nx, grid.dx),
            AxisBasis::new(grid.ny, grid.dx),
            AxisBasis::new(grid.nz, grid.dx),
        ];
        ShiftedLaplacianInverse {
            nx: grid.nx,
            ny: grid.ny,
            nz: grid.nz,
            axes,
            sigma,
        }
    }

    /// Applies a row-major `n x n` matrix along one axis of a scalar field.
    fn along(&self, axis: usize, m: &[f64], data: &mut [f64], tmp: &mut Vec<f64>) {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let n = self.axes[axis].n;
        let stride = [1, nx, nx * ny][axis];
        let (c1, c2) = match axis {
            0 => (ny, nz),
            1 => (nx, nz),
            _ => (nx, ny),
        };
        tmp.resize(n, 0.0);
        for b in 0..c2 {
            for a in 0..c1 {
                let base = match axis {
                    0 => nx * (a + ny * b),
                    1 => a + nx * ny * b,
                    _ => a + nx * b,
                };
                for (i, t) in tmp.iter_mut().enumerate() {
                    let row = &m[i * n..(i + 1) * n];
                    let mut acc = 0.0;
                    for (k, r) in row.iter().enumerate() {
                        acc += r * data[base + k * stride];
                    }
                    *t = acc;
                }
                for (i, t) in tmp.iter().enumerate() {
                    data[base + i * stride] = *t;
                }
            }
        }
    }

    pub fn apply_scalar(&self, data: &mut [f64]) {
        let mut tmp = Vec::new();
        for axis in 0..3 {
            self.along(axis, &self.axes[axis].inv, data, &mut tmp);
        }
        let (mx, my, mz) = (&self.axes[0].mu, &self.axes[1].mu, &self.axes[2].mu);
        for k in 0..self.nz {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    data[i + self.nx * (j + self.ny * k)] /= self.sigma + mx[i] + my[j] + mz[k];
                }
            }
        }
        for axis in 0..3 {
            self.along(axis, &self.axes[axis].fwd, data, &mut tmp);
        }
    }
}

impl Preconditioner for ShiftedLaplacianInverse {
    fn apply(&self, r: &[f64], out: &mut [f64]) {
        let n = self.nx * self.ny * self.nz;
        let mut scalar = vec![0.0; n];
        for c in 0..5 {
            for i in 0..n {
                scalar[i] = r[5 * i + c];
            }
            self.apply_scalar(&mut scalar);
            for i in 0..n {
                out[5 * i + c] = scalar[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverts_shifted_laplacian() {
        let g = build_grid(7, 7, 0.75).unwrap();
        let sigma = 2.5;
        let pc = ShiftedLaplacianInverse::new(&g, sigma);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut lap = vec![0.0; g.len()];
        g.laplacian_scalar(&x, &mut lap);
        let mut b: Vec<f64> = x.iter().zip(&lap).map(|(a, l)| sigma * a - l).collect();
        pc.apply_scalar(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn self_adjoint_in_weighted_product() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let pc = ShiftedLaplacianInverse::new(&g, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut ta, mut tb) = (a.clone(), b.clone());
        pc.apply_scalar(&mut ta);
        pc.apply_scalar(&mut tb);
        let l = g.scalar_dot(&ta, &b);
        let r = g.scalar_dot(&a, &tb);
        assert!((l - r).abs() < 1e-12);
        assert!(g.scalar_dot(&ta, &a) > 0.0);
    }
}
