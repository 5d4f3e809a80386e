//! ASCII OFF and OBJ readers plus an OFF writer.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/load cycle reproduces coordinates bit-exactly.

use super::TriMesh;
use crate::{DpinnError, Result};
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("off") => Ok(MeshFormat::Off),
            Some("obj") => Ok(MeshFormat::Obj),
            other => Err(DpinnError::InvalidArgument(format!(
                "unsupported mesh extension {other:?} (expected .off or .obj)"
            ))),
        }
    }
}

/// Load a triangle mesh from an ASCII OFF or OBJ file (format from extension).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let format = MeshFormat::from_path(path)?;
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    match format {
        MeshFormat::Off => load_off_str(&text, &name),
        MeshFormat::Obj => load_obj_str(&text, &name),
    }
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> DpinnError {
    DpinnError::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parse OFF text. Lines starting with `#` are comments; the counts line
/// follows the `OFF` header.
pub fn load_off_str(text: &str, path: &str) -> Result<TriMesh> {
    // (line number, content) with comments and blanks stripped
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 0, "empty file"))?;
    if header != "OFF" {
        return Err(parse_err(path, ln, format!("expected OFF header, got {header:?}")));
    }
    let (ln, counts) = lines
        .next()
        .ok_or_else(|| parse_err(path, ln, "missing counts line"))?;
    let mut it = counts.split_whitespace();
    let nv: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(path, ln, "bad vertex count"))?;
    let nf: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(path, ln, "bad face count"))?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unexpected end of vertex list"))?;
        vertices.push(parse_vertex(l, path, ln)?);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unexpected end of face list"))?;
        let mut it = l.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(path, ln, "bad face arity"))?;
        if n != 3 {
            return Err(DpinnError::NonTriangleFace { line: ln, found: n });
        }
        let mut tri = [0usize; 3];
        for slot in &mut tri {
            *slot = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(path, ln, "bad face index"))?;
        }
        triangles.push(tri);
    }
    finish(vertices, triangles)
}

/// Parse Wavefront OBJ text; only `v` and `f` records are used, `f` entries
/// may carry `/vt/vn` suffixes. Indices must be positive (1-based).
pub fn load_obj_str(text: &str, path: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let rest: Vec<&str> = it.collect();
                vertices.push(parse_vertex(&rest.join(" "), path, ln)?);
            }
            Some("f") => {
                let refs: Vec<&str> = it.collect();
                if refs.len() != 3 {
                    return Err(DpinnError::NonTriangleFace {
                        line: ln,
                        found: refs.len(),
                    });
                }
                let mut tri = [0usize; 3];
                for (slot, r) in tri.iter_mut().zip(&refs) {
                    let first = r.split('/').next().unwrap_or("");
                    let idx: i64 = first
                        .parse()
                        .map_err(|_| parse_err(path, ln, format!("bad face index {first:?}")))?;
                    if idx < 1 {
                        return Err(parse_err(path, ln, "face indices must be positive"));
                    }
                    *slot = (idx - 1) as usize;
                }
                triangles.push(tri);
            }
            _ => {} // vt, vn, usemtl, o, g, s ... ignored
        }
    }
    finish(vertices, triangles)
}

fn parse_vertex(line: &str, path: &str, ln: usize) -> Result<[f64; 3]> {
    let mut v = [0.0f64; 3];
    let mut it = line.split_whitespace();
    for slot in &mut v {
        *slot = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(path, ln, "bad vertex coordinate"))?;
    }
    Ok(v)
}

fn finish(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<TriMesh> {
    let planar = vertices.iter().all(|v| v[2] == 0.0);
    TriMesh::new(vertices, triangles, if planar { 2 } else { 3 })
}

/// Write a mesh as ASCII OFF.
pub fn write_off(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    off_string(mesh, &mut out);
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn off_string(mesh: &TriMesh, out: &mut String) {
    use std::fmt::Write;
    let _ = writeln!(out, "OFF");
    let _ = writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.triangle_count());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE_OFF: &str = "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";

    #[test]
    fn off_unit_square() {
        let m = load_off_str(SQUARE_OFF, "test").unwrap();
        assert_eq!(m.vertex_count(), 4);
        assert_eq!(m.triangle_count(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.dimension(), 2);
        // vertex order preserved
        assert_eq!(m.vertex(1), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn off_quad_face_rejected() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let err = load_off_str(text, "test").unwrap_err();
        assert!(matches!(err, DpinnError::NonTriangleFace { found: 4, .. }));
    }

    #[test]
    fn obj_roundtrip_of_square() {
        let text = "# comment\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1/1 3/2 4/3\n";
        let m = load_obj_str(text, "test").unwrap();
        assert_eq!(m.vertex_count(), 4);
        assert_eq!(m.triangle_count(), 2);
    }

    #[test]
    fn obj_quad_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let err = load_obj_str(text, "test").unwrap_err();
        assert!(matches!(err, DpinnError::NonTriangleFace { found: 4, .. }));
    }

    #[test]
    fn off_write_load_bit_exact() {
        let m = load_off_str(SQUARE_OFF, "test").unwrap();
        // Perturb into "ugly" floats to exercise round-trip formatting.
        let verts: Vec<[f64; 3]> = m
            .vertices()
            .iter()
            .map(|v| [v[0] + 1.0 / 3.0, v[1] * 0.1 + 0.7, v[2]])
            .collect();
        let m = TriMesh::new(verts, m.triangles().to_vec(), 2).unwrap();
        let mut text = String::new();
        off_string(&m, &mut text);
        let m2 = load_off_str(&text, "roundtrip").unwrap();
        for (a, b) in m.vertices().iter().zip(m2.vertices()) {
            assert_eq!(a, b, "round-trip must be bit-exact");
        }
    }
}
