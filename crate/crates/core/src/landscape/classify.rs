//! Face-profile classification and state labels.
//!
//! Each face is read in a fixed in-plane frame `(a, b)`:
//! top/bottom `(x, y)`, front/back `(x, z)`, left/right `(-y, z)`.
//! Profiles are stored geometrically (3-D axes and directions) so that
//! they transform under the cuboid symmetry group; tags such as `D1` or
//! `R_n` are derived from a profile and the face frame.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{Face, Field, GridGeometry};
use crate::tensor::biaxiality;

/// In-plane order below this fraction of `s_+ / 2` marks a defect.
pub const DEFECT_THRESHOLD: f64 = 0.45;
/// Biaxiality level reported as a high-biaxiality region.
pub const BETA2_RIDGE: f64 = 0.8;

/// Signed unit axis `sign * e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Axis {
    pub axis: u8,
    pub sign: i8,
}

impl Axis {
    pub const fn new(axis: u8, sign: i8) -> Self {
        Axis { axis, sign }
    }

    pub fn vector(self) -> [i8; 3] {
        let mut v = [0; 3];
        v[self.axis as usize] = self.sign;
        v
    }
}

/// In-plane frame of a face.
pub fn face_frame(face: Face) -> (Axis, Axis) {
    match face {
        Face::ZMin | Face::ZMax => (Axis::new(0, 1), Axis::new(1, 1)),
        Face::YMin | Face::YMax => (Axis::new(0, 1), Axis::new(2, 1)),
        Face::XMin | Face::XMax => (Axis::new(1, -1), Axis::new(2, 1)),
    }
}

/// Geometric description of a 2-D face profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceProfile {
    Wors,
    /// Defect lines near the two edges normal to `axis`.
    Bd {
        axis: u8,
    },
    /// Director along a face diagonal (sign-free, first nonzero entry positive).
    D {
        dir: [i8; 3],
    },
    /// Director rotating by pi, bending toward `toward`.
    R {
        toward: Axis,
    },
    Unknown,
}

/// Face tag in the face's own frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceTag {
    Wors,
    Bd1,
    Bd2,
    D1,
    D2,
    Rn,
    Rs,
    Re,
    Rw,
    Unknown,
}

impl FaceTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FaceTag::Wors => "WORS",
            FaceTag::Bd1 => "BD1",
            FaceTag::Bd2 => "BD2",
            FaceTag::D1 => "D1",
            FaceTag::D2 => "D2",
            FaceTag::Rn => "R_n",
            FaceTag::Rs => "R_s",
            FaceTag::Re => "R_e",
            FaceTag::Rw => "R_w",
            FaceTag::Unknown => "UNKNOWN",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "WORS" => FaceTag::Wors,
            "BD1" => FaceTag::Bd1,
            "BD2" => FaceTag::Bd2,
            "D1" => FaceTag::D1,
            "D2" => FaceTag::D2,
            "R_n" | "Rn" => FaceTag::Rn,
            "R_s" | "Rs" => FaceTag::Rs,
            "R_e" | "Re" => FaceTag::Re,
            "R_w" | "Rw" => FaceTag::Rw,
            "UNKNOWN" => FaceTag::Unknown,
            _ => return None,
        })
    }

    pub fn is_d(self) -> bool {
        matches!(self, FaceTag::D1 | FaceTag::D2)
    }

    pub fn is_r(self) -> bool {
        matches!(self, FaceTag::Rn | FaceTag::Rs | FaceTag::Re | FaceTag::Rw)
    }
}

impl fmt::Display for FaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn dot(a: [i8; 3], b: [i8; 3]) -> i8 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize_dir(mut d: [i8; 3]) -> [i8; 3] {
    if let Some(first) = d.iter().find(|v| **v != 0) {
        if *first < 0 {
            d.iter_mut().for_each(|v| *v = -*v);
        }
    }
    d
}

impl FaceProfile {
    pub fn tag(&self, face: Face) -> FaceTag {
        let (a, b) = face_frame(face);
        match *self {
            FaceProfile::Wors => FaceTag::Wors,
            FaceProfile::Bd { axis } => {
                if axis == a.axis {
                    FaceTag::Bd1
                } else {
                    FaceTag::Bd2
                }
            }
            FaceProfile::D { dir } => {
                if dot(dir, a.vector()) * dot(dir, b.vector()) > 0 {
                    FaceTag::D1
                } else {
                    FaceTag::D2
                }
            }
            FaceProfile::R { toward } => {
                let t = toward.vector();
                match (dot(t, a.vector()), dot(t, b.vector())) {
                    (1, _) => FaceTag::Re,
                    (-1, _) => FaceTag::Rw,
                    (_, 1) => FaceTag::Rn,
                    _ => FaceTag::Rs,
                }
            }
            FaceProfile::Unknown => FaceTag::Unknown,
        }
    }

    pub fn from_tag(tag: FaceTag, face: Face) -> Self {
        let (a, b) = face_frame(face);
        let (va, vb) = (a.vector(), b.vector());
        match tag {
            FaceTag::Wors => FaceProfile::Wors,
            FaceTag::Bd1 => FaceProfile::Bd { axis: a.axis },
            FaceTag::Bd2 => FaceProfile::Bd { axis: b.axis },
            FaceTag::D1 => FaceProfile::D {
                dir: normalize_dir([va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]]),
            },
            FaceTag::D2 => FaceProfile::D {
                dir: normalize_dir([va[0] - vb[0], va[1] - vb[1], va[2] - vb[2]]),
            },
            FaceTag::Re => FaceProfile::R { toward: a },
            FaceTag::Rw => FaceProfile::R {
                toward: Axis::new(a.axis, -a.sign),
            },
            FaceTag::Rn => FaceProfile::R { toward: b },
            FaceTag::Rs => FaceProfile::R {
                toward: Axis::new(b.axis, -b.sign),
            },
            FaceTag::Unknown => FaceProfile::Unknown,
        }
    }

    fn transform(&self, g: &SignedPerm) -> Self {
        match *self {
            FaceProfile::Bd { axis } => FaceProfile::Bd {
                axis: g.perm[axis as usize],
            },
            FaceProfile::D { dir } => FaceProfile::D {
                dir: normalize_dir(g.apply_i8(dir)),
            },
            FaceProfile::R { toward } => FaceProfile::R {
                toward: g.apply_axis(toward),
            },
            other => other,
        }
    }
}

/// Signed permutation `x -> g x` with `(g x)[perm[i]] = sign[i] * x[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedPerm {
    pub perm: [u8; 3],
    pub sign: [i8; 3],
}

impl SignedPerm {
    pub const IDENTITY: SignedPerm = SignedPerm {
        perm: [0, 1, 2],
        sign: [1, 1, 1],
    };

    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[self.perm[i] as usize] = self.sign[i] as f64 * x[i];
        }
        out
    }

    fn apply_i8(&self, x: [i8; 3]) -> [i8; 3] {
        let mut out = [0; 3];
        for i in 0..3 {
            out[self.perm[i] as usize] = self.sign[i] * x[i];
        }
        out
    }

    fn apply_axis(&self, a: Axis) -> Axis {
        Axis::new(
            self.perm[a.axis as usize],
            a.sign * self.sign[a.axis as usize],
        )
    }

    pub fn apply_face(&self, f: Face) -> Face {
        let a = self.apply_axis(Axis::new(f.axis() as u8, f.sign() as i8));
        face_from_axis(a)
    }

    /// Matrix with `m[perm[i]][i] = sign[i]`.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            m[self.perm[i] as usize][i] = self.sign[i] as f64;
        }
        m
    }
}

fn face_from_axis(a: Axis) -> Face {
    match (a.axis, a.sign > 0) {
        (0, false) => Face::XMin,
        (0, true) => Face::XMax,
        (1, false) => Face::YMin,
        (1, true) => Face::YMax,
        (2, false) => Face::ZMin,
        _ => Face::ZMax,
    }
}

/// Symmetries of the cuboid: order 48 when `cube`, else the 16 that keep the z axis.
pub fn symmetry_group(cube: bool) -> Vec<SignedPerm> {
    let perms: [[u8; 3]; 6] = [
        [0, 1, 2],
        [1, 0, 2],
        [0, 2, 1],
        [2, 1, 0],
        [1, 2, 0],
        [2, 0, 1],
    ];
    let mut out = Vec::new();
    for perm in perms {
        if !cube && perm[2] != 2 {
            continue;
        }
        for bits in 0..8u8 {
            let sign = [
                1 - 2 * (bits & 1) as i8,
                1 - 2 * ((bits >> 1) & 1) as i8,
                1 - 2 * ((bits >> 2) & 1) as i8,
            ];
            out.push(SignedPerm { perm, sign });
        }
    }
    out
}

/// Face-pair order used in names.
pub const PAIRS: [(Face, Face); 3] = [
    (Face::ZMax, Face::ZMin),
    (Face::YMin, Face::YMax),
    (Face::XMin, Face::XMax),
];

/// The six face profiles of a 3-D state, named `A-B-C` by face pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateLabel {
    /// Indexed by `Face as usize`.
    pub faces: [FaceProfile; 6],
}

impl StateLabel {
    pub fn tag(&self, face: Face) -> FaceTag {
        self.faces[face as usize].tag(face)
    }

    pub fn tags(&self) -> [FaceTag; 6] {
        Face::ALL.map(|f| self.tag(f))
    }

    /// `A-B-C` over (top, bottom), (front, back), (left, right); a pair with
    /// different tags is written `A1,A2`.
    pub fn name(&self) -> String {
        PAIRS
            .iter()
            .map(|&(f1, f2)| {
                let (t1, t2) = (self.tag(f1), self.tag(f2));
                if t1 == t2 {
                    t1.to_string()
                } else {
                    format!("{t1},{t2}")
                }
            })
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn parse(name: &str) -> Option<Self> {
        let parts: Vec<&str> = name.split('-').collect();
        if parts.len() != 3 {
            return None;
        }
        let mut faces = [FaceProfile::Unknown; 6];
        for (part, &(f1, f2)) in parts.iter().zip(PAIRS.iter()) {
            let tags: Vec<&str> = part.split(',').collect();
            let (t1, t2) = match tags.as_slice() {
                [t] => (FaceTag::parse(t)?, FaceTag::parse(t)?),
                [t1, t2] => (FaceTag::parse(t1)?, FaceTag::parse(t2)?),
                _ => return None,
            };
            faces[f1 as usize] = FaceProfile::from_tag(t1, f1);
            faces[f2 as usize] = FaceProfile::from_tag(t2, f2);
        }
        Some(StateLabel { faces })
    }

    pub fn transform(&self, g: &SignedPerm) -> Self {
        let mut faces = [FaceProfile::Unknown; 6];
        for f in Face::ALL {
            faces[g.apply_face(f) as usize] = self.faces[f as usize].transform(g);
        }
        StateLabel { faces }
    }

    /// Lexicographically smallest name over the symmetry orbit.
    pub fn canonical(&self, cube: bool) -> String {
        symmetry_group(cube)
            .iter()
            .map(|g| self.transform(g).name())
            .min()
            .expect("group is nonempty")
    }

    /// Whether `other` is a symmetry image of this label.
    pub fn equivalent(&self, other: &StateLabel, cube: bool) -> bool {
        self.canonical(cube) == other.canonical(cube)
    }

    pub fn has_unknown(&self) -> bool {
        self.tags().contains(&FaceTag::Unknown)
    }

    pub fn all_d(&self) -> bool {
        self.tags().iter().all(|t| t.is_d())
    }

    pub fn any_r(&self) -> bool {
        self.tags().iter().any(|t| t.is_r())
    }

    pub fn d_or_r_only(&self) -> bool {
        self.tags().iter().all(|t| t.is_d() || t.is_r())
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// In-plane data of one face in its frame.
#[derive(Clone, Debug)]
pub struct FaceData {
    pub face: Face,
    pub na: usize,
    pub nb: usize,
    /// In-plane order normalised by `s_+ / 2`, indexed `ia + na * ib`.
    pub order: Vec<f64>,
    /// In-plane director angle in `(-pi/2, pi/2]`.
    pub angle: Vec<f64>,
    pub beta2: Vec<f64>,
}

impl FaceData {
    fn at(&self, v: &[f64], ia: usize, ib: usize) -> f64 {
        v[ia + self.na * ib]
    }

    fn u(&self, ia: usize) -> f64 {
        -1.0 + 2.0 * ia as f64 / (self.na - 1) as f64
    }

    fn v(&self, ib: usize) -> f64 {
        -1.0 + 2.0 * ib as f64 / (self.nb - 1) as f64
    }
}

fn axis_len(g: &GridGeometry, axis: u8) -> usize {
    [g.nx, g.ny, g.nz][axis as usize]
}

/// Extracts in-plane order, director angle and biaxiality on a face.
pub fn face_data(f: &Field, face: Face, s_plus: f64) -> FaceData {
    let g = f.grid();
    let (a, b) = face_frame(face);
    let na = axis_len(g, a.axis);
    let nb = axis_len(g, b.axis);
    let fixed = if face.sign() < 0.0 {
        0
    } else {
        axis_len(g, face.axis() as u8) - 1
    };
    let mut order = Vec::with_capacity(na * nb);
    let mut angle = Vec::with_capacity(na * nb);
    let mut beta2 = Vec::with_capacity(na * nb);
    let sref = 0.5 * s_plus;
    for ib in 0..nb {
        for ia in 0..na {
            let mut ijk = [0usize; 3];
            ijk[face.axis()] = fixed;
            ijk[a.axis as usize] = if a.sign > 0 { ia } else { na - 1 - ia };
            ijk[b.axis as usize] = if b.sign > 0 { ib } else { nb - 1 - ib };
            let q = f.tensor(g.index(ijk[0], ijk[1], ijk[2]));
            let m = q.to_matrix();
            let (ax, bx) = (a.axis as usize, b.axis as usize);
            let qaa = m[ax][ax];
            let qbb = m[bx][bx];
            let qab = (a.sign * b.sign) as f64 * m[ax][bx];
            let half = 0.5 * (qaa - qbb);
            order.push((half * half + qab * qab).sqrt() / sref);
            angle.push(0.5 * qab.atan2(half));
            beta2.push(biaxiality(&q));
        }
    }
    FaceData {
        face,
        na,
        nb,
        order,
        angle,
        beta2,
    }
}

/// Summary statistics behind a face classification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaceReport {
    pub tag: FaceTag,
    pub diag_main: f64,
    pub diag_anti: f64,
    pub band_a: f64,
    pub band_b: f64,
    pub centre_order: f64,
    pub rotation_a: f64,
    pub rotation_b: f64,
    pub centre_angle: f64,
    pub max_beta2: f64,
    pub frac_beta2_ridge: f64,
}

fn nearest(n: usize, t: f64) -> usize {
    (((t + 1.0) * 0.5 * (n - 1) as f64).round() as usize).min(n - 1)
}

fn unwrap_rotation(angles: impl Iterator<Item = f64>) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for a in angles {
        if let Some(p) = prev {
            let mut d = a - p;
            while d > std::f64::consts::FRAC_PI_2 {
                d -= std::f64::consts::PI;
            }
            while d <= -std::f64::consts::FRAC_PI_2 {
                d += std::f64::consts::PI;
            }
            total += d;
        }
        prev = Some(a);
    }
    total
}

/// Mean over sample points of the minimum order within one node of a curve.
fn curve_order(d: &FaceData, pts: &[(f64, f64)]) -> f64 {
    let mut acc = 0.0;
    for &(u, v) in pts {
        let ia = nearest(d.na, u) as isize;
        let ib = nearest(d.nb, v) as isize;
        let mut m = f64::INFINITY;
        for da in -1..=1 {
            for db in -1..=1 {
                let (x, y) = (ia + da, ib + db);
                if x >= 0 && y >= 0 && (x as usize) < d.na && (y as usize) < d.nb {
                    m = m.min(d.at(&d.order, x as usize, y as usize));
                }
            }
        }
        acc += m;
    }
    acc / pts.len() as f64
}

fn samples(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -0.7 + 1.4 * i as f64 / (n - 1) as f64)
        .collect()
}

/// Largest over the two sides of the mean (over lines) of the minimum order in the edge band.
fn band_order(d: &FaceData, along_a: bool) -> f64 {
    let (n_line, n_across) = if along_a { (d.nb, d.na) } else { (d.na, d.nb) };
    let mut sides = [0.0_f64; 2];
    let mut count = 0;
    for l in 0..n_line {
        let t = if along_a { d.v(l) } else { d.u(l) };
        if t.abs() > 0.5 {
            continue;
        }
        count += 1;
        for (s, side) in sides.iter_mut().enumerate() {
            let mut m = f64::INFINITY;
            for c in 0..n_across {
                let w = if along_a { d.u(c) } else { d.v(c) };
                let inside = if s == 0 { w <= -0.5 } else { w >= 0.5 };
                if inside {
                    let val = if along_a {
                        d.at(&d.order, c, l)
                    } else {
                        d.at(&d.order, l, c)
                    };
                    m = m.min(val);
                }
            }
            *side += m;
        }
    }
    let c = count.max(1) as f64;
    (sides[0] / c).max(sides[1] / c)
}

/// Classifies one face.
pub fn classify_face(d: &FaceData) -> FaceReport {
    let ts = samples(9);
    let main: Vec<(f64, f64)> = ts.iter().map(|&t| (t, t)).collect();
    let anti: Vec<(f64, f64)> = ts.iter().map(|&t| (t, -t)).collect();
    let diag_main = curve_order(d, &main);
    let diag_anti = curve_order(d, &anti);
    // defect lines near a = +-1 run along b
    let band_a = band_order(d, true);
    let band_b = band_order(d, false);
    let (ca, cb) = (nearest(d.na, 0.0), nearest(d.nb, 0.0));
    let centre_order = curve_order(d, &[(0.0, 0.0)]);
    let rotation_a = unwrap_rotation((0..d.na).map(|i| d.at(&d.angle, i, cb)));
    let rotation_b = unwrap_rotation((0..d.nb).map(|j| d.at(&d.angle, ca, j)));
    let centre_angle = d.at(&d.angle, ca, cb);
    let max_beta2 = d.beta2.iter().cloned().fold(0.0, f64::max);
    let frac_beta2_ridge =
        d.beta2.iter().filter(|b| **b >= BETA2_RIDGE).count() as f64 / d.beta2.len() as f64;
    let low = DEFECT_THRESHOLD;
    let interior_min = {
        let mut m = f64::INFINITY;
        for ib in 0..d.nb {
            for ia in 0..d.na {
                if d.u(ia).abs() <= 0.5 && d.v(ib).abs() <= 0.5 {
                    m = m.min(d.at(&d.order, ia, ib));
                }
            }
        }
        m
    };
    let tag = if diag_main < low && diag_anti < low && centre_order < low {
        FaceTag::Wors
    } else if centre_order >= low && (band_a < low) != (band_b < low) {
        if band_a < low {
            FaceTag::Bd1
        } else {
            FaceTag::Bd2
        }
    } else if interior_min >= low && band_a >= low && band_b >= low {
        let half = std::f64::consts::FRAC_PI_2;
        if rotation_a.abs() > half && rotation_a.abs() > rotation_b.abs() {
            if rotation_a > 0.0 {
                FaceTag::Rn
            } else {
                FaceTag::Rs
            }
        } else if rotation_b.abs() > half {
            if rotation_b > 0.0 {
                FaceTag::Rw
            } else {
                FaceTag::Re
            }
        } else {
            let off = centre_angle.abs().min(half - centre_angle.abs());
            if off < 5f64.to_radians() {
                FaceTag::Unknown
            } else if centre_angle > 0.0 {
                FaceTag::D1
            } else {
                FaceTag::D2
            }
        }
    } else {
        FaceTag::Unknown
    };
    FaceReport {
        tag,
        diag_main,
        diag_anti,
        band_a,
        band_b,
        centre_order,
        rotation_a,
        rotation_b,
        centre_angle,
        max_beta2,
        frac_beta2_ridge,
    }
}

/// Classifies all six faces.
pub fn classify_faces(f: &Field, s_plus: f64) -> StateLabel {
    classify_faces_detailed(f, s_plus).0
}

pub fn classify_faces_detailed(f: &Field, s_plus: f64) -> (StateLabel, Vec<FaceReport>) {
    let mut faces = [FaceProfile::Unknown; 6];
    let mut reports = Vec::with_capacity(6);
    for face in Face::ALL {
        let d = face_data(f, face, s_plus);
        let r = classify_face(&d);
        faces[face as usize] = FaceProfile::from_tag(r.tag, face);
        reports.push(r);
    }
    (StateLabel { faces }, reports)
}

/// Applies a cuboid symmetry to a field: `Q'(g x) = g Q(x) g^T`.
///
/// Returns `None` if `g` does not map the grid onto itself.
pub fn transform_field(f: &Field, g: &SignedPerm) -> Option<Field> {
    let grid = f.grid();
    let dims = [grid.nx, grid.ny, grid.nz];
    for i in 0..3 {
        if dims[g.perm[i] as usize] != dims[i] {
            return None;
        }
    }
    let m = g.matrix();
    let mut out = Field::zeros(grid);
    for idx in 0..grid.len() {
        let (i, j, k) = grid.ijk(idx);
        let src = [i, j, k];
        let mut dst = [0usize; 3];
        for ax in 0..3 {
            let n = dims[ax];
            let c = if g.sign[ax] > 0 {
                src[ax]
            } else {
                n - 1 - src[ax]
            };
            dst[g.perm[ax] as usize] = c;
        }
        out.set(grid.index(dst[0], dst[1], dst[2]), f.tensor(idx).rotate(&m));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(symmetry_group(true).len(), 48);
        assert_eq!(symmetry_group(false).len(), 16);
    }

    #[test]
    fn names_round_trip() {
        for name in [
            "D1-D1-D2",
            "WORS-BD1-BD1",
            "D2,D1-R_w-D2",
            "R_n,R_s-D1-R_e,R_w",
            "D1-R_w-R_e",
        ] {
            let l = StateLabel::parse(name).unwrap();
            assert_eq!(l.name(), name);
        }
        assert!(StateLabel::parse("D1-D1").is_none());
        assert!(StateLabel::parse("D1-X-D2").is_none());
    }

    #[test]
    fn d_family_orbits() {
        let a = StateLabel::parse("D1-D1-D2").unwrap();
        for other in ["D2-D2-D2", "D2-D1-D1"] {
            assert!(
                a.equivalent(&StateLabel::parse(other).unwrap(), false),
                "{other}"
            );
        }
        assert!(!a.equivalent(&StateLabel::parse("D1-D1-D1").unwrap(), true));
    }

    #[test]
    fn reflection_swaps_bd_subscripts_only_under_axis_exchange() {
        let l = StateLabel::parse("WORS-BD1-BD1").unwrap();
        let swap = SignedPerm {
            perm: [1, 0, 2],
            sign: [1, 1, 1],
        };
        assert_eq!(l.transform(&swap).name(), "WORS-BD1-BD1");
        let tilt = SignedPerm {
            perm: [2, 1, 0],
            sign: [1, 1, 1],
        };
        assert_eq!(l.transform(&tilt).name(), "BD2-BD2-WORS");
    }

    #[test]
    fn transform_is_consistent_with_field_transform() {
        use crate::grid::build_grid;
        use crate::tensor::uniaxial;
        let grid = build_grid(9, 9, 1.0).unwrap();
        let f = Field::from_fn(&grid, |x| {
            let n = crate::tensor::normalize3(&[1.0 + 0.3 * x[2], 0.7, 0.2 * x[0]]);
            uniaxial(&n, 1.0).unwrap()
        });
        for g in symmetry_group(true) {
            let t = transform_field(&f, &g).unwrap();
            for idx in 0..grid.len() {
                let x = grid.coords(idx);
                let y = g.apply(x);
                let (i, j, k) = (
                    ((y[0] + 1.0) / grid.dx).round() as usize,
                    ((y[1] + 1.0) / grid.dx).round() as usize,
                    ((y[2] + grid.h) / grid.dx).round() as usize,
                );
                let expect = f.tensor(idx).rotate(&g.matrix());
                assert!((t.tensor(grid.index(i, j, k)) - expect).max_abs() < 1e-12);
            }
        }
    }
}
