//! ASCII STL and Wavefront OBJ mesh readers/writers.
//!
//! OBJ support covers `v x y z` and triangular `f i j k` lines (1-based,
//! `i/t/n` forms accepted, the first index is used). Other statements are
//! ignored. Polygons with more than three corners are rejected.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use super::mesh::TriangleMesh;
use crate::error::{Error, Result};

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::format(format!("line {line}: missing coordinate")))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::format(format!("line {line}: bad number `{tok}`")))?;
    if !v.is_finite() {
        return Err(Error::format(format!("line {line}: non-finite coordinate")));
    }
    Ok(v)
}

fn parse_point<'a>(mut toks: impl Iterator<Item = &'a str>, line: usize) -> Result<Point3<f64>> {
    let x = parse_f64(toks.next(), line)?;
    let y = parse_f64(toks.next(), line)?;
    let z = parse_f64(toks.next(), line)?;
    Ok(Point3::new(x, y, z))
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => vertices.push(parse_point(toks, line)?),
            Some("f") => {
                let idx: Vec<&str> = toks.collect();
                if idx.len() != 3 {
                    return Err(Error::format(format!(
                        "line {line}: face with {} corners (triangles only)",
                        idx.len()
                    )));
                }
                let mut face = [0usize; 3];
                for (slot, tok) in face.iter_mut().zip(&idx) {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: usize = first.parse().map_err(|_| {
                        Error::format(format!("line {line}: bad face index `{tok}`"))
                    })?;
                    if i == 0 {
                        return Err(Error::format(format!("line {line}: face indices are 1-based")));
                    }
                    *slot = i - 1;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

pub fn parse_stl_ascii(text: &str) -> Result<TriangleMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l.split_whitespace().next() == Some("solid") => {}
        _ => return Err(Error::format("ASCII STL must start with `solid`")),
    }
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut pending: Vec<usize> = Vec::with_capacity(3);
    let mut in_loop = false;
    let mut ended = false;
    for (line, l) in lines {
        if ended {
            return Err(Error::format(format!("line {line}: content after `endsolid`")));
        }
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("facet") => {
                if in_loop || !pending.is_empty() {
                    return Err(Error::format(format!("line {line}: nested facet")));
                }
            }
            Some("outer") => {
                if toks.next() != Some("loop") || in_loop {
                    return Err(Error::format(format!("line {line}: expected `outer loop`")));
                }
                in_loop = true;
            }
            Some("vertex") => {
                if !in_loop || pending.len() == 3 {
                    return Err(Error::format(format!("line {line}: unexpected vertex")));
                }
                pending.push(vertices.len());
                vertices.push(parse_point(toks, line)?);
            }
            Some("endloop") => {
                if !in_loop || pending.len() != 3 {
                    return Err(Error::format(format!(
                        "line {line}: facet loop needs exactly 3 vertices"
                    )));
                }
                in_loop = false;
            }
            Some("endfacet") => {
                if in_loop || pending.len() != 3 {
                    return Err(Error::format(format!("line {line}: incomplete facet")));
                }
                faces.push([pending[0], pending[1], pending[2]]);
                pending.clear();
            }
            Some("endsolid") => {
                if in_loop || !pending.is_empty() {
                    return Err(Error::format(format!("line {line}: incomplete facet")));
                }
                ended = true;
            }
            Some(other) => {
                return Err(Error::format(format!("line {line}: unexpected `{other}`")));
            }
            None => {}
        }
    }
    if !ended {
        return Err(Error::format("missing `endsolid`"));
    }
    TriangleMesh::new(vertices, faces)
}

/// Dispatches on the file extension (`.obj` or `.stl`, case-insensitive).
pub fn load_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("obj") => parse_obj(&text),
        Some("stl") => parse_stl_ascii(&text),
        _ => Err(Error::format(format!(
            "{}: unsupported mesh extension",
            path.display()
        ))),
    }
}

/// Shortest round-trip float formatting, so a reload is bit-exact.
pub fn to_obj_string(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn to_stl_string(mesh: &TriangleMesh, name: &str) -> String {
    let mut s = format!("solid {name}\n");
    for t in mesh.triangles() {
        let n = (t.v1 - t.v0).cross(&(t.v2 - t.v0));
        let n = n.try_normalize(0.0).unwrap_or(n);
        let _ = writeln!(s, "  facet normal {:?} {:?} {:?}", n.x, n.y, n.z);
        s.push_str("    outer loop\n");
        for v in t.vertices() {
            let _ = writeln!(s, "      vertex {:?} {:?} {:?}", v.x, v.y, v.z);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(s, "endsolid {name}");
    s
}
