//! Linear finite-element operators on triangle meshes: the stiffness matrix
//! (discrete Laplace–Beltrami), consistent/lumped mass matrices, and
//! per-element gradient operators.

use crate::mesh::{cross, dot, norm, sub, TriMesh};
use crate::{DpinnError, NodalField, Result};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Symmetric sparse matrix in compressed-row form with the full pattern
/// stored (both triangles).
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Build from coordinate triplets, summing duplicates. Only one triangle
    /// needs to be supplied if `(i, j)` and `(j, i)` are both pushed by the
    /// caller; this constructor stores exactly what it is given.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for &(i, j, v) in triplets {
            *rows[i].entry(j).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn entry_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// A + s * B, requiring equal dimensions (patterns may differ).
    pub fn add_scaled(&self, other: &SparseSym, s: f64) -> SparseSym {
        assert_eq!(self.n, other.n);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, v));
            }
            let (cols, vals) = other.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, s * v));
            }
        }
        SparseSym::from_triplets(self.n, &triplets)
    }

    /// Check structural and numerical symmetry (relative 1e-14).
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let w = self.get(j, i);
                let scale = v.abs().max(w.abs()).max(1e-300);
                if (v - w).abs() > 1e-14 * scale.max(1.0) {
                    return false;
                }
            }
        }
        true
    }

    /// Dense copy (small matrices only; used by tests and the dense eigenpath).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Write in MatrixMarket coordinate format (symmetric, lower triangle).
    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "%%MatrixMarket matrix coordinate real symmetric")?;
        let lower: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .filter(move |(&j, _)| j <= i)
                    .map(move |(&j, &v)| (i, j, v))
                    .collect::<Vec<_>>()
            })
            .collect();
        writeln!(f, "{} {} {}", self.n, self.n, lower.len())?;
        for (i, j, v) in lower {
            writeln!(f, "{} {} {}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

/// Per-triangle gradient operator: a 3x3 matrix mapping the three nodal
/// values to the (constant) gradient vector of the linear interpolant,
/// expressed in ambient coordinates. For planar meshes the z-row is zero.
#[derive(Debug, Clone, Copy)]
pub struct ElementGradient {
    /// `b[d][c]`: spatial dimension d, local vertex c.
    pub b: [[f64; 3]; 3],
}

impl ElementGradient {
    pub fn apply(&self, values: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for d in 0..3 {
            g[d] = self.b[d][0] * values[0] + self.b[d][1] * values[1] + self.b[d][2] * values[2];
        }
        g
    }
}

/// Gradient operator of triangle `t`.
///
/// Each shape-function gradient is computed in the triangle plane as the
/// in-plane direction from the opposite edge toward the vertex, scaled by
/// one over the squared height, so affine fields are reproduced exactly and
/// the result is tangent to the surface by construction.
pub fn element_gradient(mesh: &TriMesh, t: usize) -> ElementGradient {
    let [i, j, k] = mesh.triangle(t);
    let p = [mesh.vertex(i), mesh.vertex(j), mesh.vertex(k)];
    let mut b = [[0.0; 3]; 3];
    for c in 0..3 {
        let (a0, a1, a2) = (p[c], p[(c + 1) % 3], p[(c + 2) % 3]);
        let e = sub(a2, a1); // opposite edge
        let w = sub(a0, a1);
        let ee = dot(e, e);
        let proj = dot(w, e) / ee;
        // Height vector from the opposite edge to vertex c.
        let h = [w[0] - proj * e[0], w[1] - proj * e[1], w[2] - proj * e[2]];
        let hh = dot(h, h);
        for d in 0..3 {
            b[d][c] = h[d] / hh;
        }
    }
    ElementGradient { b }
}

/// Assemble the stiffness matrix with cotangent weights.
///
/// Off-diagonal entry for the edge opposite corner `c` is `-cot(angle_c)/2`;
/// diagonals make every row sum to zero, so constants lie in the kernel and
/// natural (Neumann) boundary conditions hold.
pub fn assemble_stiffness(mesh: &TriMesh) -> SparseSym {
    let n = mesh.vertex_count();
    let mut triplets = Vec::with_capacity(12 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangle(t);
        let p = [
            mesh.vertex(tri[0]),
            mesh.vertex(tri[1]),
            mesh.vertex(tri[2]),
        ];
        for c in 0..3 {
            let (a, b_) = ((c + 1) % 3, (c + 2) % 3);
            let e1 = sub(p[a], p[c]);
            let e2 = sub(p[b_], p[c]);
            let cot = dot(e1, e2) / norm(cross(e1, e2));
            let w = -0.5 * cot;
            triplets.push((tri[a], tri[b_], w));
            triplets.push((tri[b_], tri[a], w));
            triplets.push((tri[a], tri[a], -w));
            triplets.push((tri[b_], tri[b_], -w));
        }
    }
    SparseSym::from_triplets(n, &triplets)
}

/// Assemble the mass matrix: consistent form `(area/12) [[2,1,1],[1,2,1],[1,1,2]]`
/// per element, or its row-sum (lumped) diagonal.
pub fn assemble_mass(mesh: &TriMesh, lumped: bool) -> SparseSym {
    let n = mesh.vertex_count();
    let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangle(t);
        let area = mesh.triangle_area(t);
        if lumped {
            for &v in &tri {
                triplets.push((v, v, area / 3.0));
            }
        } else {
            for a in 0..3 {
                for b in 0..3 {
                    let w = if a == b { area / 6.0 } else { area / 12.0 };
                    triplets.push((tri[a], tri[b], w));
                }
            }
        }
    }
    SparseSym::from_triplets(n, &triplets)
}

/// Discrete Laplacian of `field` at vertex `i`: the row-`i` dot product
/// `sum_j A_ij field_j`, touching only stored neighbors.
pub fn nodal_laplacian(a: &SparseSym, field: &NodalField, i: usize) -> Result<f64> {
    if field.len() != a.dim() {
        return Err(DpinnError::DimensionMismatch(format!(
            "field has {} entries, matrix dimension is {}",
            field.len(),
            a.dim()
        )));
    }
    if i >= a.dim() {
        return Err(DpinnError::InvalidArgument(format!(
            "vertex {i} out of range {}",
            a.dim()
        )));
    }
    let (cols, vals) = a.row(i);
    Ok(cols.iter().zip(vals).map(|(&j, &v)| v * field[j]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_square, TriMesh};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn right_triangle() -> TriMesh {
        TriMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
            2,
        )
        .unwrap()
    }

    #[test]
    fn stiffness_single_right_triangle() {
        // Hand integration of grad(N_i) . grad(N_j) over the element.
        let a = assemble_stiffness(&right_triangle());
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (a.get(i, j) - expect[i][j]).abs() < 1e-14,
                    "A[{i}][{j}] = {}",
                    a.get(i, j)
                );
            }
        }
    }

    #[test]
    fn mass_single_triangle() {
        let m = assemble_mass(&right_triangle(), false);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
                assert!((m.get(i, j) - expect).abs() < 1e-15);
            }
        }
        let lumped = assemble_mass(&right_triangle(), true);
        for i in 0..3 {
            assert!((lumped.get(i, i) - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn stiffness_kernel_and_mass_sum_on_square() {
        let (mesh, _) = generate_square(0.2).unwrap();
        let a = assemble_stiffness(&mesh);
        assert!(a.is_symmetric());
        let ones = vec![1.0; mesh.vertex_count()];
        let r = a.matvec(&ones);
        let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 1e-12, "A*1 = {max:.3e}");

        for lumped in [false, true] {
            let m = assemble_mass(&mesh, lumped);
            assert!((m.entry_sum() - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mass_consistent_vs_lumped_row_sums() {
        let (mesh, _) = generate_square(0.25).unwrap();
        let mc = assemble_mass(&mesh, false);
        let ml = assemble_mass(&mesh, true);
        let ones = vec![1.0; mesh.vertex_count()];
        let rc = mc.matvec(&ones);
        let rl = ml.matvec(&ones);
        for (a, b) in rc.iter().zip(&rl) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn element_gradient_affine_reproduction() {
        let mesh = right_triangle();
        let g = element_gradient(&mesh, 0);
        let grad = g.apply([0.0, 1.0, 0.0]); // values of field x
        assert!((grad[0] - 1.0).abs() < 1e-14 && grad[1].abs() < 1e-14);
        let grad = g.apply([5.0, 5.0, 5.0]);
        assert!(grad.iter().all(|v| v.abs() < 1e-13));

        // 3-D triangle in plane z=0, field u = 2x + 3y.
        let m3 = TriMesh::new(
            vec![[0.2, 0.1, 0.0], [1.3, 0.4, 0.0], [0.5, 1.7, 0.0]],
            vec![[0, 1, 2]],
            3,
        )
        .unwrap();
        let g = element_gradient(&m3, 0);
        let u = |p: [f64; 3]| 2.0 * p[0] + 3.0 * p[1];
        let vals = [u(m3.vertex(0)), u(m3.vertex(1)), u(m3.vertex(2))];
        let grad = g.apply(vals);
        assert!((grad[0] - 2.0).abs() < 1e-12);
        assert!((grad[1] - 3.0).abs() < 1e-12);
        assert!(grad[2].abs() < 1e-12);
    }

    #[test]
    fn element_gradient_kernel_contains_constants() {
        let mesh = crate::mesh::generate_sphere(1.0, 8, 10).unwrap();
        for t in 0..mesh.triangle_count() {
            let g = element_gradient(&mesh, t);
            let z = g.apply([1.0, 1.0, 1.0]);
            assert!(z.iter().all(|v| v.abs() < 1e-12));
            // Rows lie in the triangle plane.
            let (_, _, n) = mesh.triangle_geometry(t);
            for c in 0..3 {
                let col = [g.b[0][c], g.b[1][c], g.b[2][c]];
                let off = crate::mesh::dot(col, n);
                assert!(off.abs() < 1e-12 * (crate::mesh::norm(col) + 1.0));
            }
        }
    }

    #[test]
    fn galerkin_consistency_identity() {
        // v' A v equals the sum over elements of area * |B^e v_e|^2.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mesh in [
            generate_square(0.25).unwrap().0,
            crate::mesh::generate_sphere(1.0, 8, 10).unwrap(),
        ] {
            let a = assemble_stiffness(&mesh);
            for _ in 0..5 {
                let v: Vec<f64> = (0..mesh.vertex_count()).map(|_| rng.gen::<f64>() - 0.5).collect();
                let quad = a.quadratic_form(&v);
                let mut sum = 0.0;
                for t in 0..mesh.triangle_count() {
                    let [i, j, k] = mesh.triangle(t);
                    let g = element_gradient(&mesh, t).apply([v[i], v[j], v[k]]);
                    sum += mesh.triangle_area(t) * dot(g, g);
                }
                assert!(
                    (quad - sum).abs() <= 1e-10 * quad.abs().max(1.0),
                    "quad {quad} vs {sum}"
                );
            }
        }
    }

    #[test]
    fn nodal_laplacian_matches_row_product() {
        let (mesh, _) = generate_square(0.5).unwrap();
        let a = assemble_stiffness(&mesh);
        let n = mesh.vertex_count();
        let constant = vec![3.0; n];
        for i in 0..n {
            assert!(nodal_laplacian(&a, &constant, i).unwrap().abs() < 1e-12);
        }
        // Affine field is discretely harmonic at interior vertices.
        let affine: Vec<f64> = mesh.vertices().iter().map(|v| 2.0 * v[0] - 0.7 * v[1]).collect();
        let boundary = mesh.boundary_vertices();
        for i in 0..n {
            if boundary.binary_search(&i).is_err() {
                assert!(nodal_laplacian(&a, &affine, i).unwrap().abs() < 1e-10);
            }
        }
        assert!(nodal_laplacian(&a, &vec![0.0; n - 1], 0).is_err());
        assert!(nodal_laplacian(&a, &constant, n).is_err());
    }

    #[test]
    fn stiffness_positive_semidefinite_small() {
        let (mesh, _) = generate_square(0.5).unwrap();
        let a = assemble_stiffness(&mesh).to_dense();
        let eig = a.symmetric_eigen();
        let min = eig.eigenvalues.min();
        assert!(min > -1e-10, "min eigenvalue {min}");
    }

    #[test]
    fn matrix_market_export() {
        let a = assemble_stiffness(&right_triangle());
        let dir = std::env::temp_dir().join("dpinn_mm_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.mtx");
        a.write_matrix_market(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
        assert!(text.lines().count() >= 2 + 6); // header + dims + lower entries
    }
}
