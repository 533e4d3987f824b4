//! Initial fields: the WORS ansatz and simple uniform/random fields.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Field, GridGeometry};
use crate::tensor::{uniaxial_unchecked, BulkParams, QTensor, Vec3};

/// WORS ansatz `Q = P - (B/3C)(2 zz - xx - yy)` with in-plane part
/// `P = p (xx - yy)`, `p = (B/3C)(y^2 - x^2)`.
///
/// `P` vanishes on both square diagonals and is tangent on the lateral faces.
pub fn wors_seed(g: &Arc<GridGeometry>, p: &BulkParams) -> Field {
    let b3c = p.b / (3.0 * p.c);
    Field::from_fn(g, |x| {
        let pp = b3c * (x[1] * x[1] - x[0] * x[0]);
        QTensor::new(pp + b3c, -pp + b3c, 0.0, 0.0, 0.0)
    })
}

/// Uniform uniaxial field with director `n` and order `s`.
pub fn uniform_seed(g: &Arc<GridGeometry>, n: Vec3, s: f64) -> Field {
    let n = crate::tensor::normalize3(&n);
    Field::uniform(g, uniaxial_unchecked(&n, s))
}

/// Uniaxial field with an independent random director per node.
pub fn random_seed(g: &Arc<GridGeometry>, s: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::from_fn(g, |_| {
        let n: Vec3 = loop {
            let v = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            if r2 > 1e-4 && r2 <= 1.0 {
                break crate::tensor::normalize3(&v);
            }
        };
        uniaxial_unchecked(&n, s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn wors_seed_cross() {
        let g = build_grid(9, 9, 1.0).unwrap();
        let p = BulkParams::mbba();
        let f = wors_seed(&g, &p);
        for idx in 0..g.len() {
            let x = g.coords(idx);
            let q = f.tensor(idx);
            if (x[0].abs() - x[1].abs()).abs() < 1e-12 {
                assert!((q.0[0] - q.0[1]).abs() < 1e-12 && q.0[2] == 0.0);
            }
            assert_eq!((q.0[2], q.0[3], q.0[4]), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn wors_seed_four_fold() {
        let g = build_grid(9, 9, 1.0).unwrap();
        let f = wors_seed(&g, &BulkParams::mbba());
        // (x, y) -> (-y, x) swaps Q11 and Q22 and flips Q12
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let a = f.tensor(g.index(i, j, k));
                    let b = f.tensor(g.index(g.ny - 1 - j, i, k));
                    assert!((a.0[0] - b.0[1]).abs() < 1e-12 && (a.0[1] - b.0[0]).abs() < 1e-12);
                    assert!((a.0[2] + b.0[2]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn wors_seed_tangent_on_lateral_faces() {
        let g = build_grid(9, 9, 1.0).unwrap();
        let p = BulkParams::mbba();
        let f = wors_seed(&g, &p);
        // at x = 1, y = 0: director along y
        let q = f.tensor(g.index(g.nx - 1, g.ny / 2, 0));
        assert!(q.0[1] > q.0[0]);
        let q = f.tensor(g.index(g.nx / 2, g.ny - 1, 0));
        assert!(q.0[0] > q.0[1]);
    }
}
