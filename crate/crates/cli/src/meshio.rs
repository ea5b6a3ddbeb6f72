//! OFF, OBJ and nOFF readers and writers.
//!
//! nOFF is the `R^n` variant: a `nOFF` header line, the ambient dimension on
//! the next line, then `vertices faces [edges]`, vertex rows with `n`
//! coordinates and polygon rows `k i₁ … i_k`. Polygons are fan-triangulated.
//! Coordinates are written with 17 significant digits, which round-trips
//! every finite `f64` exactly. Periodic identifications are not stored.

use std::fmt::Write as _;
use std::path::Path;

use willmore_core::{build_mesh, ImmersedMesh, MAX_DIM};

#[derive(Debug, thiserror::Error)]
pub enum MeshFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} coordinates, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("invalid mesh: {0}")]
    Invalid(#[from] willmore_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Noff,
}

impl MeshFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Off => "off",
            MeshFormat::Obj => "obj",
            MeshFormat::Noff => "noff",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            "noff" => Some(MeshFormat::Noff),
            _ => None,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshFileError {
    MeshFileError::Parse { line, message: message.into() }
}

/// Reads a mesh file; `.obj` files are OBJ, anything else is sniffed from its header.
pub fn parse_mesh(path: &Path) -> Result<ImmersedMesh, MeshFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| MeshFileError::Io { path: path.display().to_string(), source })?;
    let is_obj = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj"));
    if is_obj {
        parse_obj(&text)
    } else {
        parse_off(&text)
    }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        (!tokens.is_empty()).then_some((k + 1, tokens))
    })
}

fn number<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T, MeshFileError> {
    token.parse().map_err(|_| parse_err(line, format!("cannot parse {what} `{token}`")))
}

fn fan(poly: &[usize], out: &mut Vec<[usize; 3]>) {
    for k in 1..poly.len() - 1 {
        out.push([poly[0], poly[k], poly[k + 1]]);
    }
}

/// OFF (ambient dimension 3) or nOFF.
pub fn parse_off(text: &str) -> Result<ImmersedMesh, MeshFileError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut rest: Vec<&str> = header[1..].to_vec();
    let dim = match header[0] {
        "OFF" => 3,
        "nOFF" => {
            if rest.is_empty() {
                rest = lines.next().ok_or_else(|| parse_err(line, "missing ambient dimension"))?.1;
            }
            let d: usize = number(rest[0], line + 1, "dimension")?;
            rest.remove(0);
            d
        }
        other => return Err(parse_err(line, format!("unknown header `{other}`, expected OFF or nOFF"))),
    };
    if !(3..=MAX_DIM).contains(&dim) {
        return Err(parse_err(line, format!("ambient dimension {dim} outside 3..={MAX_DIM}")));
    }
    let (count_line, counts) = if rest.is_empty() {
        lines.next().ok_or_else(|| parse_err(line, "missing vertex and face counts"))?
    } else {
        (line, rest)
    };
    if counts.len() < 2 {
        return Err(parse_err(count_line, "expected `vertices faces [edges]`"));
    }
    let nv: usize = number(counts[0], count_line, "vertex count")?;
    let nf: usize = number(counts[1], count_line, "face count")?;

    let mut points = Vec::with_capacity(nv);
    for k in 0..nv {
        let (l, row) = lines.next().ok_or_else(|| parse_err(count_line, format!("file ends after {k} of {nv} vertices")))?;
        if row.len() != dim {
            return Err(MeshFileError::DimensionMismatch { line: l, expected: dim, found: row.len() });
        }
        points.push(row.iter().map(|t| number(t, l, "coordinate")).collect::<Result<Vec<f64>, _>>()?);
    }
    let mut triangles = Vec::with_capacity(nf);
    for k in 0..nf {
        let (l, row) = lines.next().ok_or_else(|| parse_err(count_line, format!("file ends after {k} of {nf} faces")))?;
        let n: usize = number(row[0], l, "polygon size")?;
        if n < 3 || row.len() < n + 1 {
            return Err(parse_err(l, format!("face row needs at least 3 indices, got `{}`", row.join(" "))));
        }
        // anything after the indices is a colour
        let poly = row[1..=n].iter().map(|t| number::<usize>(t, l, "vertex index")).collect::<Result<Vec<_>, _>>()?;
        if let Some(bad) = poly.iter().find(|&&i| i >= nv) {
            return Err(parse_err(l, format!("vertex index {bad} out of range for {nv} vertices")));
        }
        fan(&poly, &mut triangles);
    }
    if let Some((l, _)) = lines.next() {
        return Err(parse_err(l, "unexpected data after the last face"));
    }
    Ok(build_mesh(&points, &triangles, dim)?)
}

/// Resolves an OBJ index (1-based, or negative relative to the end).
fn obj_index(token: &str, line: usize, nv: usize) -> Result<usize, MeshFileError> {
    let head = token.split('/').next().unwrap_or("");
    let i: i64 = number(head, line, "vertex index")?;
    let resolved = if i > 0 { i - 1 } else { nv as i64 + i };
    if i == 0 || resolved < 0 || resolved >= nv as i64 {
        return Err(parse_err(line, format!("vertex index {i} out of range for {nv} vertices")));
    }
    Ok(resolved as usize)
}

/// OBJ `v` and `f` statements; everything else is ignored.
pub fn parse_obj(text: &str) -> Result<ImmersedMesh, MeshFileError> {
    let mut points = Vec::new();
    let mut triangles = Vec::new();
    for (l, row) in content_lines(text) {
        match row[0] {
            "v" => {
                let coords = &row[1..];
                // an optional fourth entry is the homogeneous weight
                if coords.len() != 3 && coords.len() != 4 {
                    return Err(MeshFileError::DimensionMismatch { line: l, expected: 3, found: coords.len() });
                }
                points.push(coords[..3].iter().map(|t| number(t, l, "coordinate")).collect::<Result<Vec<f64>, _>>()?);
            }
            "f" => {
                if row.len() < 4 {
                    return Err(parse_err(l, "face needs at least 3 vertices"));
                }
                let poly = row[1..].iter().map(|t| obj_index(t, l, points.len())).collect::<Result<Vec<_>, _>>()?;
                fan(&poly, &mut triangles);
            }
            _ => {}
        }
    }
    if points.is_empty() {
        return Err(parse_err(1, "no vertices"));
    }
    Ok(build_mesh(&points, &triangles, 3)?)
}

/// 17 significant digits: exact for every finite double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn require_3d(mesh: &ImmersedMesh, format: MeshFormat) -> Result<(), MeshFileError> {
    if mesh.dim() != 3 {
        return Err(MeshFileError::Invalid(willmore_core::Error::InvalidParams(format!(
            "{} stores surfaces in R^3 only; this mesh lives in R^{}",
            format.extension(),
            mesh.dim()
        ))));
    }
    Ok(())
}

pub fn mesh_to_string(mesh: &ImmersedMesh, format: MeshFormat) -> Result<String, MeshFileError> {
    let mut s = String::new();
    let row = |s: &mut String, prefix: &str, p: &[f64]| {
        s.push_str(prefix);
        let cells: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    };
    match format {
        MeshFormat::Off | MeshFormat::Noff => {
            if format == MeshFormat::Off {
                require_3d(mesh, format)?;
                s.push_str("OFF\n");
            } else {
                let _ = writeln!(s, "nOFF\n{}", mesh.dim());
            }
            let _ = writeln!(s, "{} {} 0", mesh.vertex_count(), mesh.triangle_count());
            for i in 0..mesh.vertex_count() {
                row(&mut s, "", mesh.position(i));
            }
            for t in mesh.triangles() {
                let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
            }
        }
        MeshFormat::Obj => {
            require_3d(mesh, format)?;
            for i in 0..mesh.vertex_count() {
                row(&mut s, "v ", mesh.position(i));
            }
            for t in mesh.triangles() {
                let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            }
        }
    }
    Ok(s)
}

pub fn write_mesh(mesh: &ImmersedMesh, path: &Path, format: MeshFormat) -> Result<(), MeshFileError> {
    let text = mesh_to_string(mesh, format)?;
    std::fs::write(path, text).map_err(|source| MeshFileError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "OFF\n# a tetrahedron\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";

    #[test]
    fn tetrahedron() {
        let m = parse_off(TETRA).unwrap();
        assert_eq!((m.vertex_count(), m.triangle_count(), m.dim()), (4, 4, 3));
    }

    #[test]
    fn four_dimensional_grid() {
        let mut s = String::from("nOFF\n4\n9 8 0\n");
        for j in 0..3 {
            for i in 0..3 {
                s += &format!("{i} {j} 0 0\n");
            }
        }
        for j in 0..2 {
            for i in 0..2 {
                let v = j * 3 + i;
                s += &format!("3 {} {} {}\n3 {} {} {}\n", v, v + 1, v + 4, v, v + 4, v + 3);
            }
        }
        let m = parse_off(&s).unwrap();
        assert_eq!(m.dim(), 4);
        assert_eq!(m.triangle_count(), 8);
    }

    #[test]
    fn bad_index_names_the_line() {
        let s = TETRA.replace("3 1 2 3", "3 1 2 999");
        match parse_off(&s) {
            Err(MeshFileError::Parse { line, .. }) => assert_eq!(line, 11),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_vertex_row() {
        let s = "nOFF\n4\n3 1\n0 0 0 0\n1 0 0\n0 1 0 0\n3 0 1 2\n";
        assert!(matches!(parse_off(s), Err(MeshFileError::DimensionMismatch { line: 5, expected: 4, found: 3 })));
    }

    #[test]
    fn obj_quads_and_relative_indices() {
        let s = "o square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 -1//1\n";
        let m = parse_obj(s).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        assert!(matches!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"), Err(MeshFileError::Parse { line: 4, .. })));
    }
}
