use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Moduli or parameter outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// 3x3 matrix inversion failed.
    #[error("singular matrix: |det| = {det:.3e} below tolerance {tol:.3e}")]
    SingularMatrix { det: f64, tol: f64 },

    /// Geometry description is invalid; the message lists all violations.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// Mesh generation or mesh consistency failure.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// Iterative solver ran out of iterations.
    #[error(
        "solver did not converge: relative residual {residual:.3e} after {iterations} iterations \
         (last residuals: {history:?})"
    )]
    SolverDiverged {
        iterations: usize,
        residual: f64,
        /// Tail of the residual history (most recent last).
        history: Vec<f64>,
    },

    /// Constraint setup produced an unsolvable system.
    #[error("constraint setup error: {0}")]
    Constraint(String),

    /// Effective tensor does not have the structure an operation requires.
    #[error("classification error: {0}")]
    Classification(String),

    /// No admissible straight periodic line through the material.
    #[error("no clear straight line in direction {direction}: best clearance {best_clearance:.3e} < required {required:.3e}; supply a polyline path instead")]
    NoClearLine {
        direction: u8,
        best_clearance: f64,
        required: f64,
    },

    /// Configuration file failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
