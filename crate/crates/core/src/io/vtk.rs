//! Legacy ASCII VTK structured-points files.
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! write followed by [`read_field_vtk`] reproduces the field bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{build_grid, Field};
use crate::io::atomic_write;
use crate::tensor::{biaxiality, director};

/// Renders a field as a legacy VTK document.
pub fn field_to_vtk(f: &Field, title: &str) -> String {
    let g = f.grid();
    let n = g.len();
    let mut s = String::with_capacity(n * 160);
    let title: String = title.chars().filter(|c| *c != '\n').take(200).collect();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(&title);
    s.push('\n');
    s.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(s, "DIMENSIONS {} {} {}", g.nx, g.ny, g.nz);
    let _ = writeln!(s, "ORIGIN -1 -1 {}", -g.h);
    let _ = writeln!(s, "SPACING {} {} {}", g.dx, g.dx, g.dx);
    let _ = writeln!(s, "POINT_DATA {n}");
    s.push_str("SCALARS Q double 5\nLOOKUP_TABLE default\n");
    for idx in 0..n {
        let q = f.tensor(idx).0;
        let _ = writeln!(s, "{} {} {} {} {}", q[0], q[1], q[2], q[3], q[4]);
    }
    s.push_str("VECTORS director double\n");
    for idx in 0..n {
        let d = director(&f.tensor(idx)).unwrap_or([0.0; 3]);
        let _ = writeln!(s, "{} {} {}", d[0], d[1], d[2]);
    }
    s.push_str("SCALARS beta2 double 1\nLOOKUP_TABLE default\n");
    for idx in 0..n {
        let _ = writeln!(s, "{}", biaxiality(&f.tensor(idx)));
    }
    s
}

/// Writes a field atomically.
pub fn export_field_vtk(f: &Field, path: &Path) -> Result<()> {
    atomic_write(path, field_to_vtk(f, "nlc Q-tensor field").as_bytes())
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Parses the `Q` array of a file written by [`export_field_vtk`].
pub fn parse_field_vtk(text: &str, path: &Path) -> Result<Field> {
    let mut lines = text.lines().enumerate();
    let mut dims: Option<[usize; 3]> = None;
    let mut origin: Option<[f64; 3]> = None;
    let mut spacing: Option<f64> = None;
    let mut values: Vec<f64> = Vec::new();
    let num = |tok: &str, line: usize| -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|_| parse_err(path, format!("line {}: bad number {tok:?}", line + 1)))
    };
    while let Some((ln, line)) = lines.next() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first().copied() {
            Some("DIMENSIONS") if toks.len() == 4 => {
                let mut d = [0usize; 3];
                for (k, t) in toks[1..].iter().enumerate() {
                    d[k] = t
                        .parse()
                        .map_err(|_| parse_err(path, format!("line {}: bad dimension", ln + 1)))?;
                }
                dims = Some(d);
            }
            Some("ORIGIN") if toks.len() == 4 => {
                origin = Some([num(toks[1], ln)?, num(toks[2], ln)?, num(toks[3], ln)?]);
            }
            Some("SPACING") if toks.len() == 4 => {
                let (a, b, c) = (num(toks[1], ln)?, num(toks[2], ln)?, num(toks[3], ln)?);
                if a != b || b != c {
                    return Err(parse_err(path, "spacing must be uniform"));
                }
                spacing = Some(a);
            }
            Some("SCALARS") if toks.get(1) == Some(&"Q") => {
                let d = dims.ok_or_else(|| parse_err(path, "Q data before DIMENSIONS"))?;
                let n = d[0] * d[1] * d[2];
                lines.next(); // LOOKUP_TABLE
                values.reserve(5 * n);
                for _ in 0..n {
                    let (ln, line) = lines
                        .next()
                        .ok_or_else(|| parse_err(path, "truncated Q data"))?;
                    for t in line.split_whitespace() {
                        values.push(num(t, ln)?);
                    }
                }
                if values.len() != 5 * n {
                    return Err(parse_err(
                        path,
                        format!("expected {} Q values, found {}", 5 * n, values.len()),
                    ));
                }
                break;
            }
            _ => {}
        }
    }
    let d = dims.ok_or_else(|| parse_err(path, "missing DIMENSIONS"))?;
    let o = origin.ok_or_else(|| parse_err(path, "missing ORIGIN"))?;
    let dx = spacing.ok_or_else(|| parse_err(path, "missing SPACING"))?;
    if values.is_empty() {
        return Err(parse_err(path, "missing Q data"));
    }
    if o[0] != -1.0 || o[1] != -1.0 {
        return Err(parse_err(path, "origin must be (-1, -1, -h)"));
    }
    let grid = build_grid(d[0], d[1], -o[2])?;
    if grid.nz != d[2] || (grid.dx - dx).abs() > 1e-12 {
        return Err(parse_err(
            path,
            format!(
                "grid {}x{}x{} with spacing {dx} is not a cuboid grid",
                d[0], d[1], d[2]
            ),
        ));
    }
    Field::from_data(&grid, values)
}

pub fn read_field_vtk(path: &Path) -> Result<Field> {
    let text = std::fs::read_to_string(path)?;
    parse_field_vtk(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::uniaxial;

    #[test]
    fn uniform_uniaxial_has_zero_biaxiality() {
        let g = build_grid(5, 5, 1.0).unwrap();
        let f = Field::uniform(&g, uniaxial(&[0.0, 0.6, 0.8], 1.3).unwrap());
        let text = field_to_vtk(&f, "t");
        let tail = text
            .split("SCALARS beta2 double 1\nLOOKUP_TABLE default\n")
            .nth(1)
            .unwrap();
        assert!(tail
            .lines()
            .all(|l| l.parse::<f64>().unwrap().abs() < 1e-12));
        assert_eq!(tail.lines().count(), g.len());
    }
}
