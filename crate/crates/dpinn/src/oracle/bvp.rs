//! FEM forward solve of the steady heat problem with mixed boundary
//! conditions: u = 1 on the Dirichlet part, convective (Robin) flux
//! proportional to u on the tagged fin surfaces, natural zero-flux
//! elsewhere.

use crate::fem::{assemble_stiffness, SparseSym};
use crate::mesh::{BoundaryTag, TriMesh};
use crate::solver::EnvelopeChol;
use crate::{DpinnError, NodalField, Result};

/// Temperature field with the discrete-system residual of the solve.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub temperature: NodalField,
    pub robin_coeff: f64,
    /// relative residual of the reduced linear system
    pub residual: f64,
}

/// Boundary mass matrix over edges whose endpoints are both tagged `robin`:
/// per edge `(len/6) [[2,1],[1,2]]`, exact for linear elements.
pub fn robin_boundary_mass(mesh: &TriMesh, tags: &BoundaryTag) -> SparseSym {
    let mut triplets = Vec::new();
    for (a, b) in mesh.boundary_edges() {
        if tags.contains("robin", a) && tags.contains("robin", b) {
            let len = crate::mesh::norm(crate::mesh::sub(mesh.vertex(a), mesh.vertex(b)));
            triplets.push((a, a, len / 3.0));
            triplets.push((b, b, len / 3.0));
            triplets.push((a, b, len / 6.0));
            triplets.push((b, a, len / 6.0));
        }
    }
    SparseSym::from_triplets(mesh.vertex_count(), &triplets)
}

/// Solve `div grad u = 0` with u = 1 on `dirichlet`, flux = robin_coeff * u
/// on `robin` edges, natural elsewhere.
pub fn solve_heat_bvp(mesh: &TriMesh, tags: &BoundaryTag, robin_coeff: f64) -> Result<BvpSolution> {
    let n = mesh.vertex_count();
    let dirichlet = tags.part("dirichlet");
    if dirichlet.is_empty() {
        return Err(DpinnError::InvalidArgument(
            "heat BVP needs a nonempty Dirichlet part".into(),
        ));
    }
    let a = assemble_stiffness(mesh);
    let r = robin_boundary_mass(mesh, tags);
    let k = a.add_scaled(&r, robin_coeff);

    let mut is_fixed = vec![false; n];
    for &v in dirichlet {
        is_fixed[v] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();
    let renum: std::collections::HashMap<usize, usize> =
        free.iter().enumerate().map(|(k, &i)| (i, k)).collect();

    let mut trip = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for (&i, &fi) in renum.iter() {
        let (cols, vals) = k.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if is_fixed[j] {
                rhs[fi] -= v; // u = 1 on the Dirichlet part
            } else {
                trip.push((fi, renum[&j], v));
            }
        }
    }
    let reduced = SparseSym::from_triplets(free.len(), &trip);
    let chol = EnvelopeChol::factor(&reduced)?;
    let uf = chol.solve(&rhs);

    let mut temperature = vec![1.0; n];
    for (&i, &fi) in renum.iter() {
        temperature[i] = uf[fi];
    }

    // Residual of the reduced system, relative to the load.
    let ku = reduced.matvec(&uf);
    let mut r2 = 0.0;
    let mut b2 = 0.0;
    for (x, b) in ku.iter().zip(&rhs) {
        r2 += (x - b) * (x - b);
        b2 += b * b;
    }
    let residual = r2.sqrt() / b2.sqrt().max(1e-300);

    Ok(BvpSolution {
        temperature,
        robin_coeff,
        residual,
    })
}
