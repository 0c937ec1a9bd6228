use thiserror::Error;

/// Unified error type for all fallible operations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{context}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        context: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not Hermitian: max |M - M^dag| = {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e} is below -{tol:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64, tol: f64 },

    #[error("trace must be 1, got {trace:.12} (|trace - 1| = {deviation:.3e} exceeds tolerance {tol:.3e})")]
    TraceNotOne {
        trace: f64,
        deviation: f64,
        tol: f64,
    },

    #[error("cannot parse {context} from {input:?}: {reason}")]
    Parse {
        context: &'static str,
        input: String,
        reason: String,
    },

    #[error("{context}: operands must commute, commutator trace norm {norm:.3e} exceeds tolerance {tol:.3e}")]
    NonCommuting {
        context: &'static str,
        norm: f64,
        tol: f64,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{context}: Hamiltonians differ (states must share one energy structure)")]
    HamiltonianMismatch { context: &'static str },

    #[error("factor list does not reproduce the declared Hamiltonian: {reason}")]
    BadFactorization { reason: String },

    #[error("index {index} out of range for {context} of length {len}")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        len: usize,
    },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    ConvergenceFailure {
        context: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("total dimension {required} exceeds the simulation cap {cap}")]
    DimensionCapExceeded { required: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
