//! Laplace–Beltrami eigenbasis: solve A v = lambda M v for the smallest
//! eigenpairs and serve eigenfunction encodings at vertices and surface
//! points. Also provides the closed-form Neumann eigenfunctions of the
//! square for operator sensitivity studies.

mod lanczos;

pub use lanczos::{canonical_sign, solve_generalized, EigenPairs, EigenSolveOpts};

use crate::fem::SparseSym;
use crate::mesh::TriMesh;
use crate::{DpinnError, NodalField, Result};

/// N smallest eigenpairs of the pencil (A, M), M-orthonormal, ascending.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    eigenvalues: Vec<f64>,
    /// `vectors[k][i]` = k-th eigenfunction at vertex i
    vectors: Vec<Vec<f64>>,
    n_vertices: usize,
}

/// Eigenfunction values at one point: the network input vector.
pub type Encoding = Vec<f64>;

impl EigenBasis {
    /// Solve for the `n_modes` smallest eigenpairs.
    pub fn solve(
        a: &SparseSym,
        m: &SparseSym,
        n_modes: usize,
        opts: &EigenSolveOpts,
    ) -> Result<Self> {
        let pairs = solve_generalized(a, m, n_modes, opts)?;
        Ok(Self {
            n_vertices: a.dim(),
            eigenvalues: pairs.eigenvalues,
            vectors: pairs.vectors,
        })
    }

    pub fn from_pairs(eigenvalues: Vec<f64>, vectors: Vec<Vec<f64>>) -> Self {
        let n_vertices = vectors.first().map(Vec::len).unwrap_or(0);
        Self {
            eigenvalues,
            vectors,
            n_vertices,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Nodal values of eigenfunction `k`.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k]
    }

    /// Basis restricted to the first `n` modes (same eigenvectors).
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n > self.n_modes() {
            return Err(DpinnError::InvalidArgument(format!(
                "cannot truncate {} modes to {n}",
                self.n_modes()
            )));
        }
        Ok(Self {
            eigenvalues: self.eigenvalues[..n].to_vec(),
            vectors: self.vectors[..n].to_vec(),
            n_vertices: self.n_vertices,
        })
    }

    /// Exact row extraction at vertex `i`: `[v_1(x_i), ..., v_N(x_i)]`.
    pub fn encode_vertex(&self, i: usize) -> Result<Encoding> {
        if i >= self.n_vertices {
            return Err(DpinnError::InvalidArgument(format!(
                "vertex {i} out of range {}",
                self.n_vertices
            )));
        }
        Ok(self.vectors.iter().map(|v| v[i]).collect())
    }

    /// Linear interpolation of vertex encodings inside triangle `t`.
    pub fn encode_point(
        &self,
        mesh: &TriMesh,
        t: usize,
        barycentric: [f64; 3],
    ) -> Result<Encoding> {
        let sum: f64 = barycentric.iter().sum();
        if barycentric.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(DpinnError::InvalidArgument(format!(
                "invalid barycentric weights {barycentric:?}"
            )));
        }
        let [i, j, k] = mesh.triangle(t);
        Ok(self
            .vectors
            .iter()
            .map(|v| barycentric[0] * v[i] + barycentric[1] * v[j] + barycentric[2] * v[k])
            .collect())
    }

    /// M-orthonormality defect `max |v_i' M v_j - delta_ij|`.
    pub fn orthonormality_defect(&self, m: &SparseSym) -> f64 {
        let mut worst = 0.0f64;
        let mv: Vec<Vec<f64>> = self.vectors.iter().map(|v| m.matvec(v)).collect();
        for i in 0..self.n_modes() {
            for j in i..self.n_modes() {
                let g: f64 = self.vectors[i].iter().zip(&mv[j]).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Relative eigen-residuals `||A v - lambda M v|| / ||A v||`.
    pub fn residuals(&self, a: &SparseSym, m: &SparseSym) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.vectors)
            .map(|(&lam, v)| {
                let av = a.matvec(v);
                let mv = m.matvec(v);
                let norm_av: f64 = av.iter().map(|x| x * x).sum::<f64>().sqrt();
                let r: f64 = av
                    .iter()
                    .zip(&mv)
                    .map(|(x, y)| (x - lam * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                r / norm_av.max(1e-300)
            })
            .collect()
    }
}

/// Closed-form Neumann eigenfunctions of the square [-1,1]^2:
/// `cos(pi l x / 2) cos(pi m y / 2)` for l, m = 1..sqrt(N), with eigenvalues
/// `(pi/2)^2 (l^2 + m^2)`, ordered by eigenvalue (then by (l, m)).
///
/// Note this family deliberately excludes the constant mode and the pure
/// one-dimensional modes (l or m = 0), unlike a numeric Neumann basis.
#[derive(Debug, Clone)]
pub struct AnalyticSquareBasis {
    modes: Vec<(usize, usize)>,
    eigenvalues: Vec<f64>,
}

impl AnalyticSquareBasis {
    pub fn new(n_modes: usize) -> Result<Self> {
        let side = (n_modes as f64).sqrt().round() as usize;
        if side * side != n_modes || side == 0 {
            return Err(DpinnError::InvalidArgument(format!(
                "eigenfunction count {n_modes} is not a positive perfect square"
            )));
        }
        let mut modes: Vec<(usize, usize)> = (1..=side)
            .flat_map(|l| (1..=side).map(move |m| (l, m)))
            .collect();
        modes.sort_by_key(|&(l, m)| (l * l + m * m, l, m));
        let q = std::f64::consts::FRAC_PI_2;
        let eigenvalues = modes
            .iter()
            .map(|&(l, m)| q * q * (l * l + m * m) as f64)
            .collect();
        Ok(Self { modes, eigenvalues })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    /// Evaluate all modes at a point of the square.
    pub fn encode(&self, x: f64, y: f64) -> Encoding {
        let q = std::f64::consts::FRAC_PI_2;
        self.modes
            .iter()
            .map(|&(l, m)| (q * l as f64 * x).cos() * (q * m as f64 * y).cos())
            .collect()
    }

    /// Nodal field of mode `k` on a mesh of the square.
    pub fn nodal_field(&self, mesh: &TriMesh, k: usize) -> NodalField {
        let (l, m) = self.modes[k];
        let q = std::f64::consts::FRAC_PI_2;
        mesh.vertices()
            .iter()
            .map(|v| (q * l as f64 * v[0]).cos() * (q * m as f64 * v[1]).cos())
            .collect()
    }
}


#[cfg(test)]
mod bench_tests {
    use super::*;
    use crate::fem::{assemble_mass, assemble_stiffness};
    use crate::mesh::{generate_coil, generate_square, CoilSpec};

    #[test]
    #[ignore]
    fn bench_sweep_eigensolves() {
        // h=0.02 square, N=400 (largest sweep cell)
        let t0 = std::time::Instant::now();
        let (mesh, _) = generate_square(0.02).unwrap();
        let a = assemble_stiffness(&mesh);
        let m = assemble_mass(&mesh, false);
        println!("square h=0.02: n={} assemble {:?}", mesh.vertex_count(), t0.elapsed());
        let t0 = std::time::Instant::now();
        let basis = EigenBasis::solve(&a, &m, 400, &EigenSolveOpts::default()).unwrap();
        println!("  eigensolve N=400: {:?} lam[399]={:.3}", t0.elapsed(), basis.eigenvalues()[399]);

        // hi-res coil, N=1000 (appendix study)
        let t0 = std::time::Instant::now();
        let spec = CoilSpec { n_axial: 168, n_circ: 16, ..CoilSpec::default() };
        let mesh = generate_coil(&spec).unwrap();
        let a = assemble_stiffness(&mesh);
        let m = assemble_mass(&mesh, false);
        println!("coil hi-res: n={} assemble {:?}", mesh.vertex_count(), t0.elapsed());
        let t0 = std::time::Instant::now();
        let basis = EigenBasis::solve(&a, &m, 1000, &EigenSolveOpts::default()).unwrap();
        println!("  eigensolve N=1000: {:?} lam[999]={:.5}", t0.elapsed(), basis.eigenvalues()[999]);

        // paper-scale coil, N=50 (criterion 4)
        let t0 = std::time::Instant::now();
        let mesh = generate_coil(&CoilSpec::default()).unwrap();
        let a = assemble_stiffness(&mesh);
        let m = assemble_mass(&mesh, false);
        let basis = EigenBasis::solve(&a, &m, 50, &EigenSolveOpts::default()).unwrap();
        println!("coil default N=50: {:?} lam[1]={:.6e} lam[49]={:.5e}", t0.elapsed(), basis.eigenvalues()[1], basis.eigenvalues()[49]);
    }
}

#[cfg(test)]
mod bench_dense {
    #[test]
    #[ignore]
    fn bench_symmetric_eigen() {
        for n in [1681usize, 2704] {
            let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let v = ((i * 31 + j * 17) % 101) as f64 / 101.0;
                    m[(i, j)] = v;
                }
            }
            let m = (&m + m.transpose()) * 0.5;
            let t0 = std::time::Instant::now();
            let e = m.symmetric_eigen();
            println!("n={n}: {:?} (lam0={:.3})", t0.elapsed(), e.eigenvalues[0]);
        }
    }
}
