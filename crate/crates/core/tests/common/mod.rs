//! Dense oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use nlc_core::linsolve::LinearMap;

/// Gram matrix of the weighted field pairing, assembled from the pairing itself.
pub fn gram<A: LinearMap>(op: &A) -> DMatrix<f64> {
    let n = op.len();
    let mut g = DMatrix::zeros(n, n);
    let mut ei = vec![0.0; n];
    let mut ej = vec![0.0; n];
    for i in 0..n {
        ei[i] = 1.0;
        // pairing is block-diagonal per node
        let node = i / 5;
        for j in 5 * node..5 * node + 5 {
            ej[j] = 1.0;
            g[(i, j)] = op.dot(&ei, &ej);
            ej[j] = 0.0;
        }
        ei[i] = 0.0;
    }
    g
}

pub fn dense<A: LinearMap>(op: &A) -> DMatrix<f64> {
    let n = op.len();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut y).unwrap();
        for i in 0..n {
            a[(i, j)] = y[i];
        }
        e[j] = 0.0;
    }
    a
}

/// Eigenvalues of an operator self-adjoint in the pairing `G`, via `L^-1 (G A) L^-T`.
pub fn generalized_spectrum(a: &DMatrix<f64>, g: &DMatrix<f64>) -> Vec<f64> {
    let ga = g * a;
    let ga = (&ga + ga.transpose()) * 0.5;
    let l = g
        .clone()
        .cholesky()
        .expect("pairing is positive definite")
        .l();
    let linv = l.clone().try_inverse().unwrap();
    let s = &linv * ga * linv.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
