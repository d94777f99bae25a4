use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have dimension at least 1")]
    Empty,

    #[error("matrix is not Hermitian: max |X_ij - conj(X_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary: ||U^dag U - 1||_F = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("operator is not traceless: |tr X| = {trace:e}")]
    NotTraceless { trace: f64 },

    #[error("vector is not normalized: ||psi|| = {norm}")]
    NotNormalized { norm: f64 },

    #[error(
        "Hamiltonian has local terms (||A|| = {local_c:e}, ||B|| = {local_s:e}, c = {scalar:e}); \
         call strip_locals first"
    )]
    LocalsPresent { local_c: f64, local_s: f64, scalar: f64 },

    #[error(
        "controller dimension {dim_c} < 3: the structure formula I = W(x)B + 1(x)L needs \
         dim(H_c) >= 3 and cannot be applied here"
    )]
    ControllerTooSmall { dim_c: usize },

    #[error("observable has {outcomes} distinct eigenvalues but the controller only has dimension {dim_c}")]
    TooManyOutcomes { outcomes: usize, dim_c: usize },

    #[error("total dimension {dim} exceeds the cap {cap}; use a smaller system")]
    DimensionCap { dim: usize, cap: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
