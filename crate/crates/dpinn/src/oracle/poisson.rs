//! Manufactured Poisson benchmark on the square [-1,1]^2:
//! `u(x,y) = (x^2-1)(y^2-1) exp(-(x-y)^2 / l^2)` with `f = Lap u` derived
//! in closed form. The boundary factor makes u vanish on the boundary, so
//! the pair (u, f) is an exact solution of `Lap u = f`, `u = 0` on the edge.

use crate::fem::SparseSym;
use crate::mesh::TriMesh;
use crate::NodalField;

/// Closed-form solution/source pair.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedPoisson {
    /// Gaussian ridge width; the paper-style default is 0.5.
    pub l: f64,
}

impl ManufacturedPoisson {
    pub fn new(l: f64) -> Self {
        assert!(l > 0.0, "gaussian width must be positive");
        Self { l }
    }

    pub fn u(&self, x: f64, y: f64) -> f64 {
        (x * x - 1.0) * (y * y - 1.0) * (-((x - y) / self.l).powi(2)).exp()
    }

    /// f = Lap u, expanded analytically:
    /// with P = (x^2-1)(y^2-1) and E = exp(-(x-y)^2/l^2),
    /// Lap u = E [ P_xx + P_yy + 2(P_x E_x + P_y E_y)/E + P (E_xx + E_yy)/E ].
    pub fn f(&self, x: f64, y: f64) -> f64 {
        let l2 = self.l * self.l;
        let d = x - y;
        let e = (-d * d / l2).exp();
        let p = (x * x - 1.0) * (y * y - 1.0);
        let px = 2.0 * x * (y * y - 1.0);
        let py = 2.0 * y * (x * x - 1.0);
        let pxx_pyy = 2.0 * (y * y - 1.0) + 2.0 * (x * x - 1.0);
        // E_x/E = -2d/l^2, E_y/E = 2d/l^2, (E_xx+E_yy)/E = 8d^2/l^4 - 4/l^2
        let cross = -2.0 * d / l2 * (px - py);
        let second = p * (8.0 * d * d / (l2 * l2) - 4.0 / l2);
        e * (pxx_pyy + 2.0 * cross + second)
    }

    pub fn u_nodal(&self, mesh: &TriMesh) -> NodalField {
        mesh.vertices().iter().map(|v| self.u(v[0], v[1])).collect()
    }

    pub fn f_nodal(&self, mesh: &TriMesh) -> NodalField {
        mesh.vertices().iter().map(|v| self.f(v[0], v[1])).collect()
    }
}

/// Consistent discrete load for the stiffness-based residual:
/// row i of the exact solution satisfies `(A u)_i = -(M f)_i` away from the
/// boundary, so the residual `sum_j A_ij u_j - load_i` vanishes with
/// `load = -(M f)`.
pub fn discrete_poisson_load(mass: &SparseSym, f_nodal: &NodalField) -> NodalField {
    mass.matvec(f_nodal).iter().map(|v| -v).collect()
}
