use thiserror::Error;

pub type Result<T> = std::result::Result<T, DpinnError>;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum DpinnError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("non-triangle face with {found} vertices at line {line}")]
    NonTriangleFace { line: usize, found: usize },

    #[error("mesh is not a single connected component ({components} components)")]
    Disconnected { components: usize },

    #[error("degenerate triangle {triangle} (area {area:.3e} below threshold)")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("non-manifold edge ({a}, {b}) shared by {count} triangles")]
    NonManifoldEdge { a: usize, b: usize, count: usize },

    #[error("triangle {triangle} references vertex {index} out of {count}")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        count: usize,
    },

    #[error("invalid geometry parameter: {0}")]
    InvalidGeometry(String),

    #[error("requested {requested} modes but the mesh has only {vertices} vertices")]
    TooManyModes { requested: usize, vertices: usize },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite loss at iteration {iteration}: data={data:.3e} pde={pde:.3e} boundary={boundary:.3e}")]
    NonFiniteLoss {
        iteration: usize,
        data: f64,
        pde: f64,
        boundary: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),
}
