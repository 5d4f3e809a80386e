//! Ground-truth generators: fast-marching geodesic fields, the heat-sink
//! forward solve, the manufactured Poisson pair, and pair-distance datasets.

mod bvp;
mod fmm;
mod pairs;
mod poisson;

pub use bvp::{robin_boundary_mass, solve_heat_bvp, BvpSolution};
pub use fmm::{dijkstra_distance, geodesic_field, GeodesicField};
pub use pairs::{sample_pairs, total_pair_count, PairSample};
pub use poisson::{discrete_poisson_load, ManufacturedPoisson};


#[cfg(test)]
mod anchor_probe {
    use super::*;
    use crate::fem::element_gradient;
    use crate::mesh::{generate_coil, CoilSpec};

    #[test]
    #[ignore]
    fn coil_oracle_eikonal_residual_probe() {
        let mesh = generate_coil(&CoilSpec::default()).unwrap();
        for source in [0usize, 17, 333, 777, 1200, 1545] {
        let field = geodesic_field(&mesh, source).unwrap();
        let mut sum = 0.0;
        for t in 0..mesh.triangle_count() {
            let [i, j, k] = mesh.triangle(t);
            let g = element_gradient(&mesh, t).apply([
                field.distances[i],
                field.distances[j],
                field.distances[k],
            ]);
            let gn = crate::mesh::dot(g, g).sqrt();
            sum += (gn - 1.0) * (gn - 1.0);
        }
        let residual = sum / mesh.triangle_count() as f64;
        println!("source {source}: coil FMM eikonal residual = {residual:.4e}");
        }
        let field = geodesic_field(&mesh, 0).unwrap(); let _ = field;
        let d = dijkstra_distance(&mesh, 0);
        let mut sum_d = 0.0;
        for t in 0..mesh.triangle_count() {
            let [i, j, k] = mesh.triangle(t);
            let g = element_gradient(&mesh, t).apply([d[i], d[j], d[k]]);
            let gn = crate::mesh::dot(g, g).sqrt();
            sum_d += (gn - 1.0) * (gn - 1.0);
        }
        println!("coil dijkstra eikonal residual = {:.4e}", sum_d / mesh.triangle_count() as f64);
    }
}
