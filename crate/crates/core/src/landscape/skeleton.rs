//! Topological skeletons: edge orientations of the cuboid with a fixed
//! source and sink, and their extension to full Q fields.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Face, Field, GridGeometry};
use crate::landscape::classify::FaceTag;
use crate::tensor::{normalize3, uniaxial, Vec3};

/// An edge of the cuboid: parallel to `axis`, at the signed corners `pos`
/// of the other two axes (`pos[axis] == 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub axis: u8,
    pub pos: [i8; 3],
}

/// All twelve edges in a fixed order.
pub fn edges() -> [Edge; 12] {
    let mut out = [Edge {
        axis: 0,
        pos: [0; 3],
    }; 12];
    let mut n = 0;
    for axis in 0..3u8 {
        let (p, q) = other_axes(axis);
        for sq in [-1i8, 1] {
            for sp in [-1i8, 1] {
                let mut pos = [0; 3];
                pos[p] = sp;
                pos[q] = sq;
                out[n] = Edge { axis, pos };
                n += 1;
            }
        }
    }
    out
}

fn other_axes(axis: u8) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn edge_index(axis: u8, pos: [i8; 3]) -> usize {
    edges()
        .iter()
        .position(|e| e.axis == axis && e.pos == pos)
        .expect("valid edge")
}

/// Director orientation on every edge plus source and sink vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologicalSkeleton {
    /// `+1` or `-1` along the edge axis, in `edges()` order.
    pub signs: [i8; 12],
    pub source: [i8; 3],
    pub sink: [i8; 3],
}

/// In-plane axes used to walk a face boundary.
fn walk_axes(face: Face) -> (usize, usize) {
    match face.axis() {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl TopologicalSkeleton {
    pub fn sign(&self, axis: u8, pos: [i8; 3]) -> i8 {
        self.signs[edge_index(axis, pos)]
    }

    /// The four boundary edges of a face, in counter-clockwise walk order
    /// (bottom, right, top, left) in the face's `(p, q)` axes, with their
    /// field direction as an in-plane angle.
    fn face_edges(&self, face: Face) -> [f64; 4] {
        let (p, q) = walk_axes(face);
        let mut fixed = [0i8; 3];
        fixed[face.axis()] = if face.sign() > 0.0 { 1 } else { -1 };
        let edge_angle = |along: usize, at: usize, s_at: i8| {
            let mut pos = fixed;
            pos[at] = s_at;
            let s = self.sign(along as u8, pos);
            match (along == p, s > 0) {
                (true, true) => 0.0,
                (true, false) => PI,
                (false, true) => FRAC_PI_2,
                (false, false) => -FRAC_PI_2,
            }
        };
        [
            edge_angle(p, q, -1),
            edge_angle(q, p, 1),
            edge_angle(p, q, 1),
            edge_angle(q, p, -1),
        ]
    }

    /// Lifted edge angles and the total winding around a face.
    fn lifted(&self, face: Face) -> ([f64; 4], f64) {
        let raw = self.face_edges(face);
        let mut out = [raw[0]; 4];
        let mut total = 0.0;
        for i in 1..5 {
            let prev = out[i - 1];
            let next = raw[i % 4];
            let mut d = next - prev;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            total += d;
            if i < 4 {
                out[i] = prev + d;
            }
        }
        (out, total)
    }

    /// Winding of the edge directions around a face, in multiples of 2 pi.
    pub fn winding(&self, face: Face) -> i32 {
        (self.lifted(face).1 / (2.0 * PI)).round() as i32
    }

    /// Checks the sign encoding, zero winding on every face and
    /// that the source and sink are a pure outflow / inflow vertex.
    pub fn validate(&self) -> Result<()> {
        if self.signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::SkeletonInconsistent("edge signs must be +-1".into()));
        }
        for face in Face::ALL {
            if self.winding(face) != 0 {
                return Err(Error::SkeletonInconsistent(format!(
                    "nonzero winding on {face:?}"
                )));
            }
        }
        for (v, outward) in [(self.source, true), (self.sink, false)] {
            for (n, e) in edges().iter().enumerate() {
                let (p, q) = other_axes(e.axis);
                if e.pos[p] == v[p] && e.pos[q] == v[q] {
                    let away = self.signs[n] == -v[e.axis as usize];
                    if away != outward {
                        return Err(Error::SkeletonInconsistent(format!(
                            "vertex {v:?} is not a pure source/sink"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The 27 compatible skeletons with source at `(-1,-1,-h)`, vertical edges
/// along `+z` and sink on the top face at one of `(-1,-1)`, `(-1,1)`, `(1,1)`.
pub fn enumerate_topological_seeds() -> Vec<TopologicalSkeleton> {
    let source = [-1i8, -1, -1];
    let mut out = Vec::new();
    for sink_xy in [[-1i8, -1], [-1, 1], [1, 1]] {
        let sink = [sink_xy[0], sink_xy[1], 1];
        for bottom in [[1i8, 1], [-1, 1], [1, -1], [-1, -1]] {
            for top in [[1i8, 1], [-1, 1], [1, -1], [-1, -1]] {
                let mut signs = [0i8; 12];
                for (n, e) in edges().iter().enumerate() {
                    signs[n] = match e.axis {
                        2 => 1,
                        0 if e.pos[2] < 0 => {
                            if e.pos[1] == source[1] {
                                1
                            } else {
                                bottom[0]
                            }
                        }
                        1 if e.pos[2] < 0 => {
                            if e.pos[0] == source[0] {
                                1
                            } else {
                                bottom[1]
                            }
                        }
                        0 => {
                            if e.pos[1] == sink[1] {
                                sink[0]
                            } else {
                                top[0]
                            }
                        }
                        _ => {
                            if e.pos[0] == sink[0] {
                                sink[1]
                            } else {
                                top[1]
                            }
                        }
                    };
                }
                let sk = TopologicalSkeleton {
                    signs,
                    source,
                    sink,
                };
                if sk.validate().is_ok() {
                    out.push(sk);
                }
            }
        }
    }
    out
}

/// Harmonic extension of boundary angles on an `na x nb` node grid.
fn harmonic(na: usize, nb: usize, vals: &mut [f64]) {
    let omega = 2.0 / (1.0 + (PI / na.max(nb) as f64).sin());
    for _ in 0..20 * (na + nb) * 10 {
        let mut change: f64 = 0.0;
        for j in 1..nb - 1 {
            for i in 1..na - 1 {
                let k = i + na * j;
                let avg = 0.25 * (vals[k - 1] + vals[k + 1] + vals[k - na] + vals[k + na]);
                let d = omega * (avg - vals[k]);
                vals[k] += d;
                change = change.max(d.abs());
            }
        }
        if change < 1e-12 {
            break;
        }
    }
}

/// Extends a skeleton to a uniaxial field of order `s`.
///
/// Each face carries a harmonic in-plane angle matching the edges; interior
/// nodes blend the face directors with inverse-square-distance weights.
pub fn skeleton_to_field(
    sk: &TopologicalSkeleton,
    grid: &std::sync::Arc<GridGeometry>,
    s: f64,
) -> Result<Field> {
    sk.validate()?;
    let dims = [grid.nx, grid.ny, grid.nz];
    // per-face director fields on the face's (p, q) node grid
    let mut face_dirs: Vec<Vec<Vec3>> = Vec::with_capacity(6);
    for face in Face::ALL {
        let (p, q) = walk_axes(face);
        let (na, nb) = (dims[p], dims[q]);
        let (lift, _) = sk.lifted(face);
        let mut theta = vec![0.0; na * nb];
        for i in 0..na {
            theta[i] = lift[0];
            theta[i + na * (nb - 1)] = lift[2];
        }
        for j in 0..nb {
            theta[na - 1 + na * j] = lift[1];
            theta[na * j] = lift[3];
        }
        theta[0] = 0.5 * (lift[3] + unwrap_near(lift[0], lift[3]));
        theta[na - 1] = 0.5 * (lift[0] + lift[1]);
        theta[na * nb - 1] = 0.5 * (lift[1] + lift[2]);
        theta[na * (nb - 1)] = 0.5 * (lift[2] + lift[3]);
        harmonic(na, nb, &mut theta);
        let dirs = theta
            .iter()
            .map(|t| {
                let mut v = [0.0; 3];
                v[p] = t.cos();
                v[q] = t.sin();
                v
            })
            .collect();
        face_dirs.push(dirs);
    }
    let mut out = Field::zeros(grid);
    for idx in 0..grid.len() {
        let (i, j, k) = grid.ijk(idx);
        let ijk = [i, j, k];
        let x = grid.coords(idx);
        let on: Vec<Face> = grid.faces(idx).collect();
        let mut n = [0.0; 3];
        let lookup = |face: Face| {
            let (p, q) = walk_axes(face);
            face_dirs[face as usize][ijk[p] + dims[p] * ijk[q]]
        };
        if on.is_empty() {
            let half = [1.0, 1.0, grid.h];
            for face in Face::ALL {
                let a = face.axis();
                let d = if face.sign() > 0.0 {
                    half[a] - x[a]
                } else {
                    x[a] + half[a]
                };
                // project onto the face
                let mut pi = ijk;
                pi[a] = if face.sign() > 0.0 { dims[a] - 1 } else { 0 };
                let (p, q) = walk_axes(face);
                let v = face_dirs[face as usize][pi[p] + dims[p] * pi[q]];
                let w = 1.0 / (d * d);
                for c in 0..3 {
                    n[c] += w * v[c];
                }
            }
        } else {
            for &face in &on {
                let v = lookup(face);
                for c in 0..3 {
                    n[c] += v[c];
                }
            }
        }
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let dir = if norm > 1e-8 {
            normalize3(&n)
        } else {
            [0.0, 0.0, 1.0]
        };
        out.set(idx, uniaxial(&dir, s)?);
    }
    Ok(out)
}

/// Boundary edge angles (bottom, right, top, left) of a 2-D profile on the
/// top face, lifted so that consecutive values differ by `+-pi/2`.
fn planar_edges(tag: FaceTag) -> Option<[f64; 4]> {
    Some(match tag {
        FaceTag::D1 => [0.0, FRAC_PI_2, 0.0, FRAC_PI_2],
        FaceTag::D2 => [0.0, -FRAC_PI_2, 0.0, -FRAC_PI_2],
        // bending toward -x: the x-edges are antiparallel
        FaceTag::Rw => [0.0, FRAC_PI_2, PI, FRAC_PI_2],
        FaceTag::Re => [0.0, -FRAC_PI_2, -PI, -FRAC_PI_2],
        FaceTag::Rn => [0.0, FRAC_PI_2, 0.0, -FRAC_PI_2],
        FaceTag::Rs => [0.0, -FRAC_PI_2, 0.0, FRAC_PI_2],
        _ => return None,
    })
}

/// A z-invariant uniaxial seed whose top and bottom faces carry the 2-D
/// `D` or `R` profile `tag`; the lateral faces see a planar director.
pub fn planar_profile_seed(
    grid: &std::sync::Arc<GridGeometry>,
    tag: FaceTag,
    s: f64,
) -> Result<Field> {
    let lift = planar_edges(tag)
        .ok_or_else(|| Error::SkeletonInconsistent(format!("{tag} is not a D or R profile")))?;
    let (na, nb) = (grid.nx, grid.ny);
    let mut theta = vec![0.0; na * nb];
    for i in 0..na {
        theta[i] = lift[0];
        theta[i + na * (nb - 1)] = lift[2];
    }
    for j in 0..nb {
        theta[na - 1 + na * j] = lift[1];
        theta[na * j] = lift[3];
    }
    theta[0] = 0.5 * (lift[3] + unwrap_near(lift[0], lift[3]));
    theta[na - 1] = 0.5 * (lift[0] + lift[1]);
    theta[na * nb - 1] = 0.5 * (lift[1] + lift[2]);
    theta[na * (nb - 1)] = 0.5 * (lift[2] + lift[3]);
    harmonic(na, nb, &mut theta);
    let mut out = Field::zeros(grid);
    for idx in 0..grid.len() {
        let (i, j, _) = grid.ijk(idx);
        let t = theta[i + na * j];
        out.set(idx, uniaxial(&[t.cos(), t.sin(), 0.0], s)?);
    }
    Ok(out)
}

fn unwrap_near(a: f64, target: f64) -> f64 {
    let mut a = a;
    while a - target > PI {
        a -= 2.0 * PI;
    }
    while target - a > PI {
        a += 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn twenty_seven_skeletons() {
        let all = enumerate_topological_seeds();
        assert_eq!(all.len(), 27);
        for sk in &all {
            for face in Face::ALL {
                assert_eq!(sk.winding(face), 0);
            }
        }
    }

    #[test]
    fn reversed_bottom_pair_is_rejected() {
        let mut sk = enumerate_topological_seeds()[0].clone();
        let n = edge_index(0, [0, 1, -1]);
        let m = edge_index(1, [1, 0, -1]);
        sk.signs[n] = -1;
        sk.signs[m] = -1;
        assert!(sk.validate().is_err());
    }

    #[test]
    fn planar_seeds_classify_on_top() {
        use crate::landscape::classify::classify_faces;
        let g = build_grid(13, 13, 0.5).unwrap();
        for tag in [
            FaceTag::D1,
            FaceTag::D2,
            FaceTag::Rn,
            FaceTag::Rs,
            FaceTag::Re,
            FaceTag::Rw,
        ] {
            let f = planar_profile_seed(&g, tag, 1.0).unwrap();
            let l = classify_faces(&f, 1.0);
            assert_eq!(l.tag(Face::ZMax), tag);
            assert_eq!(l.tag(Face::ZMin), tag);
        }
        assert!(planar_profile_seed(&g, FaceTag::Wors, 1.0).is_err());
    }

    #[test]
    fn field_matches_edges() {
        let g = build_grid(9, 9, 1.0).unwrap();
        let sk = &enumerate_topological_seeds()[0];
        let f = skeleton_to_field(sk, &g, 1.0).unwrap();
        for (n, e) in edges().iter().enumerate() {
            let mut ijk = [0usize; 3];
            let dims = [g.nx, g.ny, g.nz];
            for a in 0..3 {
                ijk[a] = if a == e.axis as usize {
                    dims[a] / 2
                } else if e.pos[a] > 0 {
                    dims[a] - 1
                } else {
                    0
                };
            }
            let d = crate::tensor::director(&f.tensor(g.index(ijk[0], ijk[1], ijk[2]))).unwrap();
            assert!(d[e.axis as usize].abs() > 0.999, "edge {n}");
        }
    }
}
