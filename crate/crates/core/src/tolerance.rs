/// Numerical thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// A Gram–Schmidt residual is a new direction only above `rank * ||X||`.
    pub rank: f64,
    /// Relative membership residual below which `X` counts as inside a span.
    pub membership: f64,
    /// Candidates from products of unit-norm basis elements below this norm are
    /// rounding noise and are dropped before Gram–Schmidt.
    pub zero: f64,
    /// Entrywise Hermiticity tolerance, relative to the largest entry.
    pub hermitian: f64,
    /// Frobenius tolerance for `U^dag U = 1`.
    pub unitary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-9,
            membership: 1e-8,
            zero: 1e-12,
            hermitian: 1e-12,
            unitary: 1e-10,
        }
    }
}

impl Tolerances {
    /// Same defaults with the rank and membership thresholds overridden.
    pub fn with_rank(rank: f64, membership: f64) -> Self {
        Self {
            rank,
            membership,
            ..Self::default()
        }
    }
}

/// Default cap on the joint Hilbert-space dimension for brute-force closures.
pub const DEFAULT_DIMENSION_CAP: usize = 81;
