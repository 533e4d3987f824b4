//! Pointwise Q-tensor algebra.
//!
//! A Q-tensor is a symmetric traceless 3x3 matrix stored through its five
//! independent entries
//!
//! ```text
//!     | q1  q3  q4        |
//! Q = | q3  q2  q5        |
//!     | q4  q5  -q1 - q2  |
//! ```
//!
//! Space is rescaled by the cross-section size while Q keeps its physical
//! magnitude (order `s_+`), so the bulk density carries a `lambda^2` prefactor.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Gap below which the leading eigenvalue is considered degenerate.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

/// Symmetric traceless tensor in five-component form `[q1, q2, q3, q4, q5]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QTensor(pub [f64; 5]);

impl QTensor {
    pub const ZERO: QTensor = QTensor([0.0; 5]);

    pub fn new(q1: f64, q2: f64, q3: f64, q4: f64, q5: f64) -> Self {
        QTensor([q1, q2, q3, q4, q5])
    }

    /// Projects an arbitrary 3x3 matrix onto the symmetric traceless tensors.
    pub fn from_matrix(m: &Mat3) -> Self {
        let tr3 = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        QTensor([
            m[0][0] - tr3,
            m[1][1] - tr3,
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[1][2] + m[2][1]),
        ])
    }

    pub fn to_matrix(&self) -> Mat3 {
        let [q1, q2, q3, q4, q5] = self.0;
        [[q1, q3, q4], [q3, q2, q5], [q4, q5, -q1 - q2]]
    }

    /// `tr(A B)` for two symmetric traceless tensors.
    #[inline]
    pub fn dot(&self, other: &QTensor) -> f64 {
        let [a1, a2, a3, a4, a5] = self.0;
        let [b1, b2, b3, b4, b5] = other.0;
        2.0 * a1 * b1 + 2.0 * a2 * b2 + a1 * b2 + a2 * b1 + 2.0 * (a3 * b3 + a4 * b4 + a5 * b5)
    }

    /// `tr Q^2`.
    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// `tr Q^3 = 3 det Q` for traceless Q.
    #[inline]
    pub fn trace_cube(&self) -> f64 {
        let [q1, q2, q3, q4, q5] = self.0;
        let q6 = -q1 - q2;
        let det = q1 * (q2 * q6 - q5 * q5) - q3 * (q3 * q6 - q5 * q4) + q4 * (q3 * q5 - q2 * q4);
        3.0 * det
    }

    /// Traceless part of `Q^2`, i.e. `Q^2 - tr(Q^2)/3 I`.
    pub fn square_traceless(&self) -> QTensor {
        let m = self.to_matrix();
        let mut sq = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = m[i][0] * m[0][j] + m[i][1] * m[1][j] + m[i][2] * m[2][j];
                sq[i][j] = v;
                sq[j][i] = v;
            }
        }
        QTensor::from_matrix(&sq)
    }

    /// `Q v`.
    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let m = self.to_matrix();
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm `|Q| = sqrt(tr Q^2)`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Conjugation `R Q R^T` by an orthogonal matrix.
    pub fn rotate(&self, r: &Mat3) -> QTensor {
        let m = self.to_matrix();
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        acc += r[i][a] * m[a][b] * r[j][b];
                    }
                }
                out[i][j] = acc;
            }
        }
        QTensor::from_matrix(&out)
    }
}

impl Add for QTensor {
    type Output = QTensor;
    fn add(self, rhs: QTensor) -> QTensor {
        let mut out = self;
        out += rhs;
        out
    }
}

impl AddAssign for QTensor {
    fn add_assign(&mut self, rhs: QTensor) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for QTensor {
    type Output = QTensor;
    fn sub(self, rhs: QTensor) -> QTensor {
        let mut out = self;
        out -= rhs;
        out
    }
}

impl SubAssign for QTensor {
    fn sub_assign(&mut self, rhs: QTensor) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Mul<QTensor> for f64 {
    type Output = QTensor;
    fn mul(self, rhs: QTensor) -> QTensor {
        QTensor(rhs.0.map(|v| self * v))
    }
}

impl Neg for QTensor {
    type Output = QTensor;
    fn neg(self) -> QTensor {
        QTensor(self.0.map(|v| -v))
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Copy, Debug)]
pub struct Spectrum {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

/// Spectral decomposition of a Q-tensor.
///
/// Uses the trigonometric solution of the characteristic cubic and
/// cross-product eigenvectors when the spectrum is well separated, and
/// cyclic Jacobi rotations otherwise.
pub fn spectral(q: &QTensor) -> Spectrum {
    let m = q.to_matrix();
    let t2 = q.norm_sq();
    if t2 == 0.0 {
        return Spectrum {
            values: [0.0; 3],
            vectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
    }
    let p = (t2 / 6.0).sqrt();
    // det(Q/p)/2, clamped against round-off
    let r = (q.trace_cube() / 3.0 / (p * p * p) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l3 = 2.0 * p * phi.cos();
    let l1 = 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let l2 = -l1 - l3;
    let scale = l3.abs().max(l1.abs());
    let gap = (l2 - l1).min(l3 - l2);
    if gap < 1e-4 * scale {
        return jacobi_eigen(&m);
    }
    let e1 = null_vector(&m, l1);
    let e3 = null_vector(&m, l3);
    // re-orthogonalise e3 against e1 before completing the frame
    let d = dot3(&e1, &e3);
    let e3 = normalize3(&[e3[0] - d * e1[0], e3[1] - d * e1[1], e3[2] - d * e1[2]]);
    let e2 = cross(&e3, &e1);
    Spectrum {
        values: [l1, l2, l3],
        vectors: [e1, e2, e3],
    }
}

fn null_vector(m: &Mat3, lambda: f64) -> Vec3 {
    let rows = [
        [m[0][0] - lambda, m[0][1], m[0][2]],
        [m[1][0], m[1][1] - lambda, m[1][2]],
        [m[2][0], m[2][1], m[2][2] - lambda],
    ];
    let candidates = [
        cross(&rows[0], &rows[1]),
        cross(&rows[0], &rows[2]),
        cross(&rows[1], &rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| dot3(a, a).total_cmp(&dot3(b, b)))
        .copied()
        .unwrap_or([1.0, 0.0, 0.0]);
    normalize3(&best)
}

/// Cyclic Jacobi eigen-solver for a symmetric 3x3 matrix.
pub fn jacobi_eigen(m: &Mat3) -> Spectrum {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..50 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off.sqrt() <= 1e-17 * norm.max(f64::MIN_POSITIVE) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = idx.map(|i| a[i][i]);
    let vectors = idx.map(|i| [v[0][i], v[1][i], v[2][i]]);
    Spectrum { values, vectors }
}

/// Leading eigenvector (the nematic director), with the first nonzero
/// component made positive.
pub fn director(q: &QTensor) -> Result<Vec3> {
    director_with_tol(q, DEFAULT_DEGENERACY_TOL)
}

pub fn director_with_tol(q: &QTensor, tol: f64) -> Result<Vec3> {
    let spec = spectral(q);
    let gap = spec.values[2] - spec.values[1];
    if gap <= tol {
        return Err(Error::DegenerateDirector { gap, tol });
    }
    Ok(fix_sign(normalize3(&spec.vectors[2])))
}

/// Flips `n` so that its first component with magnitude above round-off is positive.
pub fn fix_sign(n: Vec3) -> Vec3 {
    for c in n {
        if c.abs() > 1e-12 {
            return if c < 0.0 { n.map(|x| -x) } else { n };
        }
    }
    n
}

/// Biaxiality parameter `1 - 6 (tr Q^3)^2 / (tr Q^2)^3`, zero at isotropic points.
pub fn biaxiality(q: &QTensor) -> f64 {
    let t2 = q.norm_sq();
    if t2 < 1e-14 {
        return 0.0;
    }
    let t3 = q.trace_cube();
    (1.0 - 6.0 * t3 * t3 / (t2 * t2 * t2)).clamp(0.0, 1.0)
}

/// Order parameter of the uniaxial bulk minimisers.
pub fn s_plus(a: f64, b: f64, c: f64) -> Result<f64> {
    let disc = b * b - 24.0 * a * c;
    if disc < 0.0 {
        return Err(Error::NoNematicMinimum { discriminant: disc });
    }
    Ok((b + disc.sqrt()) / (4.0 * c))
}

/// `s (n n^T - I/3)`.
pub fn uniaxial(n: &Vec3, s: f64) -> Result<QTensor> {
    let norm = dot3(n, n).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit { norm });
    }
    Ok(uniaxial_unchecked(n, s))
}

pub(crate) fn uniaxial_unchecked(n: &Vec3, s: f64) -> QTensor {
    QTensor([
        s * (n[0] * n[0] - 1.0 / 3.0),
        s * (n[1] * n[1] - 1.0 / 3.0),
        s * n[0] * n[1],
        s * n[0] * n[2],
        s * n[1] * n[2],
    ])
}

/// Bulk material constants. `s_plus` and `f_shift` are derived on construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub l: f64,
    pub s_plus: f64,
    pub f_shift: f64,
}

impl BulkParams {
    pub const MBBA_B: f64 = 0.64e4;
    pub const MBBA_C: f64 = 0.35e4;
    pub const MBBA_L: f64 = 4e-11;

    pub fn new(a: f64, b: f64, c: f64, l: f64) -> Result<Self> {
        if !(b > 0.0 && c > 0.0 && l > 0.0) {
            return Err(Error::InvalidParams(format!(
                "B, C, L must be positive (B={b}, C={c}, L={l})"
            )));
        }
        let s = s_plus(a, b, c)?;
        let f_shift = a / 3.0 * s * s - 2.0 * b / 27.0 * s.powi(3) + c / 9.0 * s.powi(4);
        Ok(BulkParams {
            a,
            b,
            c,
            l,
            s_plus: s,
            f_shift,
        })
    }

    /// MBBA constants at the special temperature `A = -B^2 / 3C`.
    pub fn mbba() -> Self {
        let (b, c) = (Self::MBBA_B, Self::MBBA_C);
        Self::new(-b * b / (3.0 * c), b, c, Self::MBBA_L).expect("MBBA constants are admissible")
    }
}

impl Default for BulkParams {
    fn default() -> Self {
        Self::mbba()
    }
}

/// Dimensionless bulk energy density at one point.
#[inline]
pub fn bulk_potential(q: &QTensor, p: &BulkParams, lambda2: f64) -> f64 {
    let t2 = q.norm_sq();
    let t3 = q.trace_cube();
    lambda2
        * (p.a / (4.0 * p.c) * t2 - p.b / (6.0 * p.c) * t3 + 0.125 * t2 * t2
            - p.f_shift / (2.0 * p.c))
}

/// Gradient of [`bulk_potential`] in tensor form (traceless).
#[inline]
pub fn bulk_gradient(q: &QTensor, p: &BulkParams, lambda2: f64) -> QTensor {
    let t2 = q.norm_sq();
    let sq = q.square_traceless();
    let lin = p.a / (2.0 * p.c) + 0.5 * t2;
    let cub = p.b / (2.0 * p.c);
    let mut out = [0.0; 5];
    for (i, o) in out.iter_mut().enumerate() {
        *o = lambda2 * (lin * q.0[i] - cub * sq.0[i]);
    }
    QTensor(out)
}

#[inline]
pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn normalize3(v: &Vec3) -> Vec3 {
    let n = dot3(v, v).sqrt();
    if n == 0.0 {
        return [0.0; 3];
    }
    v.map(|x| x / n)
}
