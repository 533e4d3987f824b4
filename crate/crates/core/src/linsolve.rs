//! Matrix-free symmetric solvers: MINRES and block LOBPCG.
//!
//! Operators act on flat vectors and carry their own inner product, so the same
//! code serves the weighted field pairing and plain Euclidean test matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{field_dot, GridGeometry};
use crate::precond::Preconditioner;

/// A linear operator, self-adjoint with respect to [`LinearMap::dot`].
pub trait LinearMap {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
    fn dot(&self, a: &[f64], b: &[f64]) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }
}

/// Closure-backed operator on fields of a grid, using the weighted field pairing.
pub struct FieldMap<'g, F> {
    pub grid: &'g GridGeometry,
    pub f: F,
}

impl<'g, F> FieldMap<'g, F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(grid: &'g GridGeometry, f: F) -> Self {
        FieldMap { grid, f }
    }
}

impl<F> LinearMap for FieldMap<'_, F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    fn len(&self) -> usize {
        5 * self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (self.f)(x, y)
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        field_dot(self.grid, a, b)
    }
}

/// Dense symmetric matrix with the Euclidean inner product.
#[derive(Clone, Debug)]
pub struct DenseMap(pub DMatrix<f64>);

impl LinearMap for DenseMap {
    fn len(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.len();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.0[(i, j)] * xj;
            }
            *yi = acc;
        }
        Ok(())
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

#[derive(Clone, Debug)]
pub struct MinresOutcome {
    pub x: Vec<f64>,
    /// True relative residual `|Ax - b| / |b|`, recomputed at exit.
    pub relres: f64,
    pub iters: usize,
    pub converged: bool,
    /// Lanczos terminated early without reaching `tol`.
    pub breakdown: bool,
    /// Recurrence estimates of `|r_k| / |b|`, one per iteration.
    pub history: Vec<f64>,
}

/// Minimum-residual Krylov solve of `A x = b` for self-adjoint, possibly indefinite `A`.
pub fn minres<A: LinearMap + ?Sized>(
    a: &A,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<MinresOutcome> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::LinearSolveFailed(format!(
            "rhs length {} != operator size {n}",
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("minres rhs"));
    }
    let mut x = vec![0.0; n];
    let beta1 = a.norm(b);
    if beta1 == 0.0 {
        return Ok(MinresOutcome {
            x,
            relres: 0.0,
            iters: 0,
            converged: true,
            breakdown: false,
            history: vec![],
        });
    }
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut v = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let (mut beta, mut oldb) = (beta1, 0.0);
    let (mut dbar, mut epsln) = (0.0, 0.0);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0_f64, 0.0_f64);
    let mut history = Vec::new();
    let mut converged = false;
    let mut breakdown = false;
    let mut iters = 0;
    let tiny = f64::EPSILON * beta1;

    for itn in 1..=maxit {
        iters = itn;
        v.copy_from_slice(&r2);
        scale(1.0 / beta, &mut v);
        a.apply(&v, &mut y)?;
        if itn >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = a.dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = a.norm(&r2);
        if !(alfa.is_finite() && beta.is_finite()) {
            return Err(Error::NonFinite("minres"));
        }

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);

        let rel = phibar.abs() / beta1;
        history.push(rel);
        if rel <= tol {
            converged = true;
            break;
        }
        if beta <= tiny {
            breakdown = true;
            break;
        }
    }

    let mut ax = vec![0.0; n];
    a.apply(&x, &mut ax)?;
    for (r, bi) in ax.iter_mut().zip(b) {
        *r = bi - *r;
    }
    let relres = a.norm(&ax) / beta1;
    if breakdown && relres <= tol.max(1e-12) {
        breakdown = false;
        converged = true;
    }
    Ok(MinresOutcome {
        x,
        relres,
        iters,
        converged,
        breakdown,
        history,
    })
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Modified Gram-Schmidt (two passes) of `v` against `basis`, returning the
/// normalised remainder or `None` if it is numerically dependent.
fn orthonormalize_against<A: LinearMap + ?Sized>(
    a: &A,
    basis: &[Vec<f64>],
    v: &mut [f64],
) -> Option<f64> {
    let n0 = a.norm(v);
    if n0 == 0.0 || !n0.is_finite() {
        return None;
    }
    for _ in 0..2 {
        for b in basis {
            let c = a.dot(b, v);
            axpy(-c, b, v);
        }
    }
    let n1 = a.norm(v);
    if n1 <= 1e-10 * n0 {
        return None;
    }
    scale(1.0 / n1, v);
    Some(n1)
}

/// Orthonormalises a block in place, dropping dependent vectors; returns kept indices.
pub fn orthonormalize<A: LinearMap + ?Sized>(a: &A, block: &mut Vec<Vec<f64>>) -> Vec<usize> {
    let mut kept = Vec::new();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for (i, v) in block.drain(..).enumerate() {
        let mut v = v;
        if orthonormalize_against(a, &out, &mut v).is_some() {
            out.push(v);
            kept.push(i);
        }
    }
    *block = out;
    kept
}

struct Block {
    x: Vec<Vec<f64>>,
    hx: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
    hp: Vec<Vec<f64>>,
    theta: Vec<f64>,
    resid: Vec<f64>,
}

fn apply_all<A: LinearMap + ?Sized>(a: &A, vs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    vs.iter()
        .map(|v| {
            let mut y = vec![0.0; v.len()];
            a.apply(v, &mut y)?;
            Ok(y)
        })
        .collect()
}

fn combine(
    basis: &[&Vec<f64>],
    coef: &DMatrix<f64>,
    col: usize,
    rows: std::ops::Range<usize>,
) -> Vec<f64> {
    let n = basis[0].len();
    let mut out = vec![0.0; n];
    for r in rows {
        let c = coef[(r, col)];
        if c != 0.0 {
            axpy(c, basis[r], &mut out);
        }
    }
    out
}

/// One Rayleigh-Ritz update over `span{X, R, P}` with `HX` and `HP` supplied.
fn rayleigh_ritz<A: LinearMap + ?Sized>(
    a: &A,
    x: &[Vec<f64>],
    hx: &[Vec<f64>],
    p: &[Vec<f64>],
    hp: &[Vec<f64>],
    precond: Option<&dyn Preconditioner>,
) -> Result<Block> {
    let k = x.len();
    // residual block R = HX - X Theta, with Theta the full projected matrix
    let mut r: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut ri = hx[i].clone();
        for xj in x {
            let c = a.dot(xj, &hx[i]);
            axpy(-c, xj, &mut ri);
        }
        if let Some(t) = precond {
            let mut z = vec![0.0; ri.len()];
            t.apply(&ri, &mut z);
            ri = z;
        }
        r.push(ri);
    }
    let mut rest: Vec<Vec<f64>> = x.to_vec();
    let mut extra = Vec::new();
    for mut ri in r {
        if orthonormalize_against(a, &rest, &mut ri).is_some() {
            rest.push(ri.clone());
            extra.push(ri);
        }
    }
    let mut hextra = apply_all(a, &extra)?;
    // previous directions: keep their images consistent through the same Gram-Schmidt
    for (pi, hpi) in p.iter().zip(hp) {
        let mut v = pi.clone();
        let mut hv = hpi.clone();
        let n0 = a.norm(&v);
        if n0 == 0.0 {
            continue;
        }
        let mut ok = true;
        for _ in 0..2 {
            for (bi, b) in rest.iter().enumerate() {
                let c = a.dot(b, &v);
                axpy(-c, b, &mut v);
                let hb = if bi < k { &hx[bi] } else { &hextra[bi - k] };
                axpy(-c, hb, &mut hv);
            }
        }
        let n1 = a.norm(&v);
        if n1 <= 1e-8 * n0 {
            ok = false;
        }
        if ok {
            scale(1.0 / n1, &mut v);
            if n1 < 0.1 * n0 {
                // heavy cancellation would amplify any error in the carried image
                a.apply(&v, &mut hv)?;
            } else {
                scale(1.0 / n1, &mut hv);
            }
            rest.push(v.clone());
            extra.push(v);
            hextra.push(hv);
        }
    }
    let basis: Vec<&Vec<f64>> = x.iter().chain(extra.iter()).collect();
    let hbasis: Vec<&Vec<f64>> = hx.iter().chain(hextra.iter()).collect();
    let m = basis.len();
    let mut g = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = 0.5 * (a.dot(basis[i], hbasis[j]) + a.dot(basis[j], hbasis[i]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("rayleigh-ritz"));
    }
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut coef = DMatrix::<f64>::zeros(m, k);
    let mut theta = Vec::with_capacity(k);
    for (c, &o) in order.iter().take(k).enumerate() {
        coef.set_column(c, &eig.eigenvectors.column(o));
        theta.push(eig.eigenvalues[o]);
    }
    let mut nx = Vec::with_capacity(k);
    let mut nhx = Vec::with_capacity(k);
    let mut np = Vec::with_capacity(k);
    let mut nhp = Vec::with_capacity(k);
    let mut resid = Vec::with_capacity(k);
    for c in 0..k {
        let xi = combine(&basis, &coef, c, 0..m);
        let hxi = combine(&hbasis, &coef, c, 0..m);
        if m > k {
            np.push(combine(&basis, &coef, c, k..m));
            nhp.push(combine(&hbasis, &coef, c, k..m));
        }
        let mut res = hxi.clone();
        axpy(-theta[c], &xi, &mut res);
        resid.push(a.norm(&res));
        nx.push(xi);
        nhx.push(hxi);
    }
    Ok(Block {
        x: nx,
        hx: nhx,
        p: np,
        hp: nhp,
        theta,
        resid,
    })
}

/// One LOBPCG step: Rayleigh-Ritz over the current vectors, their residuals and
/// the previous search directions.
///
/// Returns the updated pairs (ascending) and the new search directions.
pub fn lobpcg_single_step<A: LinearMap + ?Sized>(
    a: &A,
    current: &[Vec<f64>],
    previous: &[Vec<f64>],
) -> Result<(Vec<EigenPair>, Vec<Vec<f64>>)> {
    lobpcg_single_step_precond(a, current, previous, None)
}

/// [`lobpcg_single_step`] with the residual block passed through `precond`.
pub fn lobpcg_single_step_precond<A: LinearMap + ?Sized>(
    a: &A,
    current: &[Vec<f64>],
    previous: &[Vec<f64>],
    precond: Option<&dyn Preconditioner>,
) -> Result<(Vec<EigenPair>, Vec<Vec<f64>>)> {
    let hx = apply_all(a, current)?;
    let hp = apply_all(a, previous)?;
    let b = rayleigh_ritz(a, current, &hx, previous, &hp, precond)?;
    let pairs =
        b.x.into_iter()
            .zip(b.theta)
            .map(|(vector, value)| EigenPair { value, vector })
            .collect();
    Ok((pairs, b.p))
}

#[derive(Clone, Debug)]
pub struct EigOptions {
    /// Residual tolerance relative to `max(1, |theta|)`.
    pub tol: f64,
    pub maxit: usize,
    /// Extra block vectors beyond the requested count.
    pub guard: usize,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            tol: 1e-8,
            maxit: 2000,
            guard: 1,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigOutcome {
    pub pairs: Vec<EigenPair>,
    pub residuals: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
}

/// The `m` smallest eigenpairs by iterated LOBPCG, ascending.
///
/// `init` vectors (if any) seed the block; the rest are random.
pub fn smallest_eigs<A: LinearMap + ?Sized>(
    a: &A,
    m: usize,
    init: &[Vec<f64>],
    opts: &EigOptions,
) -> Result<EigOutcome> {
    smallest_eigs_precond(a, m, init, opts, None)
}

/// [`smallest_eigs`] with a preconditioned residual block.
pub fn smallest_eigs_precond<A: LinearMap + ?Sized>(
    a: &A,
    m: usize,
    init: &[Vec<f64>],
    opts: &EigOptions,
    precond: Option<&dyn Preconditioner>,
) -> Result<EigOutcome> {
    let n = a.len();
    if m == 0 {
        return Ok(EigOutcome {
            pairs: vec![],
            residuals: vec![],
            iters: 0,
            converged: true,
        });
    }
    let k = (m + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = init.iter().take(k).cloned().collect();
    let mut attempts = 0;
    while x.len() < k {
        x.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        orthonormalize(a, &mut x);
        attempts += 1;
        if attempts > 10 * k {
            return Err(Error::LinearSolveFailed(
                "could not build an independent start block".into(),
            ));
        }
    }
    orthonormalize(a, &mut x);
    let mut hx = apply_all(a, &x)?;
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut hp: Vec<Vec<f64>> = Vec::new();
    let mut theta = vec![0.0; k];
    let mut resid = vec![f64::INFINITY; k];
    let mut iters = 0;
    let mut converged = false;
    for it in 0..opts.maxit {
        iters = it + 1;
        let b = rayleigh_ritz(a, &x, &hx, &p, &hp, precond)?;
        x = b.x;
        hx = b.hx;
        p = b.p;
        hp = b.hp;
        theta = b.theta;
        resid = b.resid;
        // images are carried by linear combination; refresh to bound drift
        if it % 25 == 24 {
            orthonormalize(a, &mut x);
            if x.len() < k {
                return Err(Error::LinearSolveFailed("LOBPCG block lost rank".into()));
            }
            hx = apply_all(a, &x)?;
            hp = apply_all(a, &p)?;
        }
        if (0..m).all(|i| resid[i] <= opts.tol * theta[i].abs().max(1.0)) {
            converged = true;
            break;
        }
    }
    let pairs = x
        .into_iter()
        .zip(theta.iter().copied())
        .take(m)
        .map(|(vector, value)| EigenPair { value, vector })
        .collect();
    resid.truncate(m);
    Ok(EigOutcome {
        pairs,
        residuals: resid,
        iters,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn random_sym(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&m + m.transpose()) * 0.5
    }

    #[test]
    fn identity_one_iteration() {
        let a = DenseMap(DMatrix::identity(10, 10));
        let b: Vec<f64> = (0..10).map(|i| i as f64 - 3.0).collect();
        let out = minres(&a, &b, 1e-12, 10).unwrap();
        assert_eq!(out.iters, 1);
        for (x, y) in out.x.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn indefinite_dense_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 40;
        let a = random_sym(n, &mut rng);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = DenseMap(a.clone());
        let out = minres(&op, &b, 1e-10, 500).unwrap();
        assert!(out.converged);
        assert!(out.relres < 1e-9);
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let lu = a.lu().solve(&DMatrix::from_column_slice(n, 1, &b)).unwrap();
        for i in 0..n {
            assert!((lu[i] - out.x[i]).abs() < 1e-6 * lu.amax());
        }
    }

    #[test]
    fn zero_rhs() {
        let op = DenseMap(DMatrix::identity(3, 3));
        let out = minres(&op, &[0.0; 3], 1e-10, 5).unwrap();
        assert!(out.converged && out.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lobpcg_fixed_point() {
        let d: Vec<f64> = (0..12).map(|i| i as f64 + 1.0).collect();
        let op = DenseMap(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)));
        let x: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let mut v = vec![0.0; 12];
                v[i] = 1.0;
                v
            })
            .collect();
        let (pairs, _) = lobpcg_single_step(&op, &x, &[]).unwrap();
        for (i, pr) in pairs.iter().enumerate() {
            assert!((pr.value - (i as f64 + 1.0)).abs() < 1e-14);
            assert!((pr.vector[i].abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn lobpcg_diagonal_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let d: Vec<f64> = (0..n).map(|i| -3.0 + 0.25 * i as f64).collect();
        let op = DenseMap(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            d.clone(),
        )));
        let k = 4;
        let mut x: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        orthonormalize(&op, &mut x);
        let mut p = vec![];
        let mut pairs = vec![];
        for _ in 0..100 {
            let (pr, np) = lobpcg_single_step(&op, &x, &p).unwrap();
            x = pr.iter().map(|e| e.vector.clone()).collect();
            p = np;
            pairs = pr;
        }
        for i in 0..k {
            assert!(
                (pairs[i].value - d[i]).abs() < 1e-8,
                "{} vs {}",
                pairs[i].value,
                d[i]
            );
        }
    }

    #[test]
    fn lobpcg_sum_monotone_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let n = 30;
            let op = DenseMap(random_sym(n, &mut rng));
            let k = 3;
            let mut x: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            orthonormalize(&op, &mut x);
            let hx = apply_all(&op, &x).unwrap();
            let mut prev: f64 = (0..k).map(|i| op.dot(&x[i], &hx[i])).sum();
            let mut p = vec![];
            for _ in 0..15 {
                let (pr, np) = lobpcg_single_step(&op, &x, &p).unwrap();
                x = pr.iter().map(|e| e.vector.clone()).collect();
                p = np;
                let s: f64 = pr.iter().map(|e| e.value).sum();
                assert!(s <= prev + 1e-10);
                prev = s;
                for i in 0..k {
                    for j in 0..k {
                        let d = op.dot(&x[i], &x[j]);
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((d - e).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn neumann_laplacian_kernel() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let op = FieldMap::new(&g, |x: &[f64], y: &mut [f64]| {
            crate::grid::laplacian_into(&g, x, y);
            y.iter_mut().for_each(|v| *v = -*v);
            Ok(())
        });
        let out = smallest_eigs(
            &op,
            1,
            &[],
            &EigOptions {
                tol: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.pairs[0].value.abs() < 1e-8);
        // constant in every component up to the 5-d kernel: check nodal variation vanishes
        let v = &out.pairs[0].vector;
        for c in 0..5 {
            let vals: Vec<f64> = v.iter().skip(c).step_by(5).copied().collect();
            let spread = vals.iter().cloned().fold(f64::MIN, f64::max)
                - vals.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread < 1e-6);
        }
    }

    #[test]
    fn positive_map_positive_value() {
        let d: Vec<f64> = (0..20).map(|i| 0.5 + i as f64).collect();
        let op = DenseMap(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)));
        let out = smallest_eigs(&op, 1, &[], &EigOptions::default()).unwrap();
        assert!(out.pairs[0].value > 0.0);
        assert!((out.pairs[0].value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn heat_operator_solve() {
        let g = build_grid(9, 9, 1.0).unwrap();
        let dt = 0.1;
        let op = FieldMap::new(&g, |x: &[f64], y: &mut [f64]| {
            crate::grid::laplacian_into(&g, x, y);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = xi - dt * *yi;
            }
            Ok(())
        });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let out = minres(&op, &b, 1e-10, 200).unwrap();
        assert!(out.converged, "relres {}", out.relres);
        let mut ax = vec![0.0; b.len()];
        op.apply(&out.x, &mut ax).unwrap();
        let err: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(op.norm(&err) <= 1e-9 * op.norm(&b));
    }
}
