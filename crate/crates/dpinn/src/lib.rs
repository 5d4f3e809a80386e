//! Physics-informed neural networks with Laplace–Beltrami positional encodings.
//!
//! The core idea: represent points on a triangle mesh by the values of the
//! lowest Laplace–Beltrami eigenfunctions at those points, feed the encodings
//! to a small dense network, and discretize the PDE residuals of the training
//! loss with linear finite elements on the same mesh. This keeps gradients
//! tangent to the surface and makes the network aware of intrinsic (geodesic)
//! rather than Euclidean proximity.
//!
//! Crate layout:
//! - [`mesh`]: triangle meshes, OFF/OBJ I/O, parametric generators
//! - [`fem`]: stiffness/mass assembly, element gradients, sparse symmetric storage
//! - [`solver`]: envelope Cholesky with reverse Cuthill–McKee reordering
//! - [`spectral`]: generalized eigensolver and eigenfunction encodings
//! - [`nn`]: dense MLP with exact reverse-mode gradients and ADAM
//! - [`pinn`]: loss terms, training loop, normalized errors
//! - [`deeponet`]: branch/trunk operator network for pairwise geodesic distance
//! - [`oracle`]: fast-marching geodesics, FEM forward solves, manufactured solutions
//! - [`gp`]: spectral Matérn Gaussian-process regression on meshes
//! - [`cli`]: experiment harness used by the `dpinn` binary

pub mod cli;
pub mod deeponet;
pub mod fem;
pub mod gp;
pub mod mesh;
pub mod nn;
pub mod oracle;
pub mod pinn;
pub mod solver;
pub mod spectral;

mod error;

pub use error::{DpinnError, Result};

/// One float64 value per mesh vertex: solutions, residuals, oracle outputs.
pub type NodalField = Vec<f64>;
