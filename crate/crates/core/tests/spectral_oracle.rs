mod common;

use common::{dense, generalized_spectrum, gram};
use nlc_core::energy::{hess_vec_exact_raw, ModelParams};
use nlc_core::grid::build_grid;
use nlc_core::linsolve::{minres, smallest_eigs, EigOptions, FieldMap, LinearMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn hessian_smallest_eigenvalues_match_dense_solve() {
    let grid = build_grid(5, 5, 1.0).unwrap();
    let p = ModelParams::mbba(10.0).with_omega(3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f: Vec<f64> = (0..5 * grid.len())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let op = FieldMap::new(&grid, |x: &[f64], y: &mut [f64]| {
        hess_vec_exact_raw(&grid, &f, x, &p, y);
        Ok(())
    });
    let spectrum = generalized_spectrum(&dense(&op), &gram(&op));
    let out = smallest_eigs(
        &op,
        4,
        &[],
        &EigOptions {
            tol: 1e-10,
            maxit: 5000,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(out.converged, "residuals {:?}", out.residuals);
    for i in 0..4 {
        let scale = spectrum[i].abs().max(1.0);
        assert!(
            (out.pairs[i].value - spectrum[i]).abs() < 1e-6 * scale,
            "{i}: {} vs {}",
            out.pairs[i].value,
            spectrum[i]
        );
    }
    // restarting from a different random block gives the same values
    let again = smallest_eigs(
        &op,
        4,
        &[],
        &EigOptions {
            tol: 1e-10,
            maxit: 5000,
            seed: 99,
            ..Default::default()
        },
    )
    .unwrap();
    for i in 0..4 {
        assert!(
            (again.pairs[i].value - out.pairs[i].value).abs()
                < 1e-6 * out.pairs[i].value.abs().max(1.0)
        );
    }
}

#[test]
fn minres_on_indefinite_hessian() {
    let grid = build_grid(5, 5, 1.0).unwrap();
    let p = ModelParams::mbba(30.0).with_omega(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f: Vec<f64> = (0..5 * grid.len())
        .map(|_| rng.gen_range(-0.3..0.3))
        .collect();
    let op = FieldMap::new(&grid, |x: &[f64], y: &mut [f64]| {
        hess_vec_exact_raw(&grid, &f, x, &p, y);
        Ok(())
    });
    let spectrum = generalized_spectrum(&dense(&op), &gram(&op));
    assert!(
        spectrum[0] < 0.0 && *spectrum.last().unwrap() > 0.0,
        "operator should be indefinite"
    );
    let b: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let out = minres(&op, &b, 1e-8, 5000).unwrap();
    assert!(out.converged, "relres {}", out.relres);
    assert!(out.relres < 1e-7);
    for w in out.history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
}
