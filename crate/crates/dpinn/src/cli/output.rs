//! Run artifacts: CSV tables, legacy-ASCII VTK files, and the run manifest.
//! Floats are written with shortest round-trip formatting, so identical runs
//! produce byte-identical files.

use crate::mesh::TriMesh;
use crate::pinn::LossRecord;
use crate::{NodalField, Result};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn write_loss_history(path: impl AsRef<Path>, history: &[LossRecord]) -> Result<()> {
    let mut out = String::from("iteration,data,pde,boundary,total\n");
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iteration, r.data, r.pde, r.boundary, r.total
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Vertex table with coordinates and one or more named fields.
pub fn write_field_csv(
    path: impl AsRef<Path>,
    mesh: &TriMesh,
    fields: &[(&str, &NodalField)],
) -> Result<()> {
    let mut out = String::from("vertex,x,y,z");
    for (name, _) in fields {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..mesh.vertex_count() {
        let v = mesh.vertex(i);
        out.push_str(&format!("{},{},{},{}", i, v[0], v[1], v[2]));
        for (_, f) in fields {
            out.push_str(&format!(",{}", f[i]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Legacy-ASCII VTK unstructured grid with per-vertex scalar fields.
pub fn write_vtk_fields(
    path: impl AsRef<Path>,
    mesh: &TriMesh,
    fields: &[(&str, &NodalField)],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("dpinn field export\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {} double\n", mesh.vertex_count()));
    for v in mesh.vertices() {
        out.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
    }
    let t = mesh.triangle_count();
    out.push_str(&format!("CELLS {} {}\n", t, 4 * t));
    for tri in mesh.triangles() {
        out.push_str(&format!("3 {} {} {}\n", tri[0], tri[1], tri[2]));
    }
    out.push_str(&format!("CELL_TYPES {t}\n"));
    for _ in 0..t {
        out.push_str("5\n");
    }
    out.push_str(&format!("POINT_DATA {}\n", mesh.vertex_count()));
    for (name, field) in fields {
        out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for v in field.iter() {
            out.push_str(&format!("{v}\n"));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Legacy-ASCII VTK polylines (one cell per path).
pub fn write_vtk_polylines(path: impl AsRef<Path>, paths: &[Vec<[f64; 3]>]) -> Result<()> {
    let total: usize = paths.iter().map(Vec::len).sum();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("dpinn path export\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET POLYDATA\n");
    out.push_str(&format!("POINTS {total} double\n"));
    for p in paths.iter().flatten() {
        out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    let list_len: usize = paths.iter().map(|p| p.len() + 1).sum();
    out.push_str(&format!("LINES {} {}\n", paths.len(), list_len));
    let mut offset = 0usize;
    for p in paths {
        out.push_str(&format!("{}", p.len()));
        for k in 0..p.len() {
            out.push_str(&format!(" {}", offset + k));
        }
        out.push('\n');
        offset += p.len();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Polyline CSV: path id, point index, coordinates.
pub fn write_paths_csv(path: impl AsRef<Path>, paths: &[Vec<[f64; 3]>]) -> Result<()> {
    let mut out = String::from("path,point,x,y,z\n");
    for (pi, p) in paths.iter().enumerate() {
        for (k, q) in p.iter().enumerate() {
            out.push_str(&format!("{},{},{},{},{}\n", pi, k, q[0], q[1], q[2]));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Eigenbasis export: one CSV row per vertex with N mode columns, plus the
/// eigenvalue list.
pub fn write_eigenbasis_csv(
    dir: impl AsRef<Path>,
    basis: &crate::spectral::EigenBasis,
) -> Result<()> {
    let dir = dir.as_ref();
    let mut out = String::from("mode,eigenvalue\n");
    for (k, lam) in basis.eigenvalues().iter().enumerate() {
        out.push_str(&format!("{k},{lam}\n"));
    }
    fs::write(dir.join("eigenvalues.csv"), out)?;

    let mut out = String::from("vertex");
    for k in 0..basis.n_modes() {
        out.push_str(&format!(",v{k}"));
    }
    out.push('\n');
    for i in 0..basis.n_vertices() {
        out.push_str(&format!("{i}"));
        for k in 0..basis.n_modes() {
            out.push_str(&format!(",{}", basis.eigenvector(k)[i]));
        }
        out.push('\n');
    }
    fs::write(dir.join("eigenbasis.csv"), out)?;
    Ok(())
}

/// Content hash of the effective config plus mesh geometry: enough to
/// reproduce the run exactly.
pub fn content_hash(config_json: &str, mesh: &TriMesh) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_json.as_bytes());
    for v in mesh.vertices() {
        for d in 0..3 {
            hasher.update(v[d].to_le_bytes());
        }
    }
    for t in mesh.triangles() {
        for &i in t {
            hasher.update((i as u64).to_le_bytes());
        }
    }
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write the run manifest: effective config echo, seed, and input hash.
pub fn write_manifest(
    dir: impl AsRef<Path>,
    config: &super::config::ExperimentConfig,
    mesh: &TriMesh,
) -> Result<()> {
    let config_json = serde_json::to_string_pretty(config)
        .map_err(|e| crate::DpinnError::Config(e.to_string()))?;
    let manifest = serde_json::json!({
        "tool": "dpinn",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": config.experiment.name(),
        "seed": config.seed,
        "content_hash": content_hash(&config_json, mesh),
        "config": serde_json::from_str::<serde_json::Value>(&config_json).unwrap(),
    });
    let mut f = fs::File::create(dir.as_ref().join("manifest.json"))?;
    f.write_all(serde_json::to_string_pretty(&manifest).unwrap().as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_square;

    #[test]
    fn artifacts_are_written_and_deterministic() {
        let dir = std::env::temp_dir().join("dpinn_output_test");
        fs::create_dir_all(&dir).unwrap();
        let (mesh, _) = generate_square(0.5).unwrap();
        let field: NodalField = (0..mesh.vertex_count()).map(|i| i as f64 / 3.0).collect();

        let csv = dir.join("f.csv");
        write_field_csv(&csv, &mesh, &[("u", &field)]).unwrap();
        let a = fs::read(&csv).unwrap();
        write_field_csv(&csv, &mesh, &[("u", &field)]).unwrap();
        let b = fs::read(&csv).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("vertex,x,y,z,u\n"));
        assert_eq!(text.lines().count(), 1 + mesh.vertex_count());

        let vtk = dir.join("f.vtk");
        write_vtk_fields(&vtk, &mesh, &[("u", &field)]).unwrap();
        let text = fs::read_to_string(&vtk).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("SCALARS u double 1"));
        assert!(text.contains("CELL_TYPES"));

        let poly = dir.join("p.vtk");
        write_vtk_polylines(&poly, &[vec![[0.0; 3], [1.0, 0.0, 0.0]]]).unwrap();
        let text = fs::read_to_string(&poly).unwrap();
        assert!(text.contains("LINES 1 3"));
    }

    #[test]
    fn content_hash_changes_with_inputs() {
        let (mesh, _) = generate_square(0.5).unwrap();
        let (mesh2, _) = generate_square(0.25).unwrap();
        let h1 = content_hash("{}", &mesh);
        let h2 = content_hash("{}", &mesh2);
        let h3 = content_hash("{\"a\":1}", &mesh);
        assert_ne!(h1, h2);
        assert_ne!(h1, h3);
        assert_eq!(h1, content_hash("{}", &mesh));
        assert_eq!(h1.len(), 64);
    }
}
