//! Uniform sampling of vertex pairs with oracle geodesic distances,
//! grouped by source so each distinct source runs one fast-marching sweep.

use super::fmm::geodesic_field;
use crate::mesh::TriMesh;
use crate::{DpinnError, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// One training pair: unordered vertices and their geodesic distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Unordered pairs including the diagonal: n (n + 1) / 2.
pub fn total_pair_count(n_vertices: usize) -> usize {
    n_vertices * (n_vertices + 1) / 2
}

/// Decode a flat index into an unordered pair (i <= j).
fn decode_pair(k: usize, n: usize) -> (usize, usize) {
    // Row i starts at offset i*n - i*(i-1)/2 and holds n - i entries.
    let mut lo = 0usize;
    let mut hi = n; // i in [lo, hi)
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let start = mid * n - mid * (mid - 1) / 2;
        if start <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let start = lo * n - lo * (lo - 1) / 2;
    (lo, lo + (k - start))
}

/// Sample `count` distinct unordered pairs uniformly and fill in oracle
/// geodesic distances (one fast-marching run per distinct source).
pub fn sample_pairs(mesh: &TriMesh, count: usize, seed: u64) -> Result<Vec<PairSample>> {
    let n = mesh.vertex_count();
    let total = total_pair_count(n);
    if count > total {
        return Err(DpinnError::InvalidArgument(format!(
            "requested {count} pairs but only {total} exist"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = rand::seq::index::sample(&mut rng, total, count);

    let mut pairs: Vec<(usize, usize)> = indices.iter().map(|k| decode_pair(k, n)).collect();
    pairs.sort_unstable();

    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while k < pairs.len() {
        let source = pairs[k].0;
        let field = geodesic_field(mesh, source)?;
        while k < pairs.len() && pairs[k].0 == source {
            let (i, j) = pairs[k];
            out.push(PairSample {
                i,
                j,
                distance: field.distances[j],
            });
            k += 1;
        }
    }
    Ok(out)
}
