//! Dense Hermitian and unitary operators.
//!
//! Everything downstream works with small dense complex matrices (side length
//! at most about 81), so the types here are thin newtypes over
//! [`nalgebra::DMatrix`] that carry a checked invariant.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const IM: C64 = C64::new(0.0, 1.0);

/// Largest entrywise violation of `X_ij = conj(X_ji)`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Empty);
    }
    Ok(m.nrows())
}

/// A self-adjoint operator on a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    /// Validates Hermiticity to the default tolerance (relative to the largest
    /// entry) and then symmetrizes exactly.
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().hermitian)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let deviation = hermitian_deviation(&m);
        if deviation > tol * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m^dag) / 2`, for matrices that are Hermitian up to rounding.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self((m + adj).scale(0.5))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Rank-one projector `|v><v| / <v|v>`.
    pub fn projector(v: &CVector) -> Self {
        let n2 = v.norm_squared();
        Self::symmetrized((v * v.adjoint()).unscale(n2))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Frobenius (Hilbert–Schmidt) norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    /// `i[X, Y] = i(XY - YX)`, Hermitian whenever `X` and `Y` are.
    pub fn commutator_i(&self, other: &Self) -> Self {
        let xy = &self.0 * &other.0;
        let yx = &other.0 * &self.0;
        Self::symmetrized((xy - yx) * IM)
    }

    /// Jordan product `(XY + YX) / 2`.
    pub fn jordan(&self, other: &Self) -> Self {
        let xy = &self.0 * &other.0;
        let yx = &other.0 * &self.0;
        Self::symmetrized((xy + yx).scale(0.5))
    }

    /// `U X U^dag`.
    pub fn conjugated(&self, u: &Unitary) -> Self {
        Self::symmetrized(&u.0 * &self.0 * u.0.adjoint())
    }

    /// `<psi|X|psi>`.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        psi.dotc(&(&self.0 * psi)).re
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        &self.0 * psi
    }

    /// Eigendecomposition with eigenvalues sorted ascending.
    pub fn spectral(&self) -> Spectral {
        let eig = SymmetricEigen::new(self.0.clone());
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Spectral { values, vectors }
    }
}

impl Add for &Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &rhs.0)
    }
}

impl Add for Hermitian {
    type Output = Hermitian;
    fn add(self, rhs: Hermitian) -> Hermitian {
        Hermitian(self.0 + rhs.0)
    }
}

impl Sub for &Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &rhs.0)
    }
}

impl Sub for Hermitian {
    type Output = Hermitian;
    fn sub(self, rhs: Hermitian) -> Hermitian {
        Hermitian(self.0 - rhs.0)
    }
}

impl Neg for &Hermitian {
    type Output = Hermitian;
    fn neg(self) -> Hermitian {
        Hermitian(-&self.0)
    }
}

impl Mul<f64> for &Hermitian {
    type Output = Hermitian;
    fn mul(self, rhs: f64) -> Hermitian {
        self.scale(rhs)
    }
}

impl Mul<f64> for Hermitian {
    type Output = Hermitian;
    fn mul(self, rhs: f64) -> Hermitian {
        Hermitian(self.0.scale(rhs))
    }
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectral {
    /// `exp(i H t)` assembled from the stored decomposition.
    pub fn exp_i(&self, t: f64) -> Unitary {
        let n = self.values.len();
        let phases = DVector::from_iterator(n, self.values.iter().map(|&l| (IM * l * t).exp()));
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        Unitary(scaled * self.vectors.adjoint())
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }
}

/// A unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().unitary)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        let n = check_square(&m)?;
        let deviation = unitarity_defect(&m);
        if deviation > tol * (n as f64).sqrt().max(1.0) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `||U^dag U - 1||_F`.
    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    /// `U^n` by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let mut acc = CMatrix::identity(self.dim(), self.dim());
        let mut base = self.0.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Self(acc)
    }

    /// `U (x) 1_{dim}`, the controller-side embedding used throughout.
    pub fn embed_left(&self, dim: usize) -> Self {
        Self(self.0.kronecker(&CMatrix::identity(dim, dim)))
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        &self.0 * psi
    }
}

impl Mul for &Unitary {
    type Output = Unitary;
    fn mul(self, rhs: &Unitary) -> Unitary {
        Unitary(&self.0 * &rhs.0)
    }
}

impl Mul for Unitary {
    type Output = Unitary;
    fn mul(self, rhs: Unitary) -> Unitary {
        Unitary(self.0 * rhs.0)
    }
}

fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - CMatrix::identity(n, n)).norm()
}

/// Hilbert–Schmidt inner product `tr(X^dag Y)`.
pub fn hs_inner(x: &Hermitian, y: &Hermitian) -> Result<C64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(x.0.iter().zip(y.0.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// `X - tr(X)/dim * 1`.
pub fn traceless_part(x: &Hermitian) -> Hermitian {
    let n = x.dim();
    let shift = x.0.trace() / n as f64;
    let mut m = x.0.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    Hermitian::symmetrized(m)
}

/// Kronecker product with the controller factor on the left.
pub fn tensor(x: &Hermitian, y: &Hermitian) -> Hermitian {
    Hermitian(x.0.kronecker(&y.0))
}

/// `exp(i H t)` via the spectral decomposition of `H`.
pub fn expm(h: &Hermitian, t: f64) -> Unitary {
    h.spectral().exp_i(t)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Operator-norm distance `||U - e^{i theta} V||` with the global phase
/// `theta = arg tr(V^dag U)`, the phase that minimizes the Frobenius distance.
pub fn phase_aligned_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let overlap: C64 = v.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    spectral_norm(&(u - v * phase))
}

/// Trace over the right-hand (system) factor of `C^{dim_c} (x) C^{dim_s}`.
pub fn partial_trace_system(m: &CMatrix, dim_c: usize, dim_s: usize) -> CMatrix {
    CMatrix::from_fn(dim_c, dim_c, |a, b| {
        (0..dim_s).map(|k| m[(a * dim_s + k, b * dim_s + k)]).sum()
    })
}

/// Trace over the left-hand (controller) factor.
pub fn partial_trace_controller(m: &CMatrix, dim_c: usize, dim_s: usize) -> CMatrix {
    CMatrix::from_fn(dim_s, dim_s, |a, b| {
        (0..dim_c).map(|k| m[(k * dim_s + a, k * dim_s + b)]).sum()
    })
}

/// Normalizes `v`, failing for the zero vector.
pub fn normalized(v: &CVector) -> Result<CVector> {
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
    }
    Ok(v.unscale(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::{sigma_x, sigma_y, sigma_z};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn hs_inner_pauli_and_identity() {
        assert!((hs_inner(&sigma_x(), &sigma_x()).unwrap() - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(hs_inner(&sigma_x(), &sigma_y()).unwrap().norm() < 1e-15);
        let i3 = Hermitian::identity(3);
        assert!((hs_inner(&i3, &i3).unwrap() - C64::new(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hs_inner_dimension_mismatch() {
        let err = hs_inner(&sigma_x(), &Hermitian::identity(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn traceless_part_examples() {
        assert!(traceless_part(&Hermitian::identity(2)).norm() < 1e-15);
        assert_eq!(traceless_part(&sigma_z()), sigma_z());
        let d = traceless_part(&Hermitian::diagonal(&[1.0, 2.0, 3.0]));
        assert!(close(d.matrix(), Hermitian::diagonal(&[-1.0, 0.0, 1.0]).matrix(), 1e-15));
    }

    #[test]
    fn tensor_examples() {
        let ix = tensor(&Hermitian::identity(2), &sigma_x());
        let mut expected = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            expected[(i, j)] = C64::new(1.0, 0.0);
        }
        assert_eq!(ix.matrix(), &expected);

        let zi = tensor(&sigma_z(), &Hermitian::identity(2));
        assert_eq!(zi, Hermitian::diagonal(&[1.0, 1.0, -1.0, -1.0]));

        let xx = tensor(&sigma_x(), &sigma_x());
        let anti = CMatrix::from_fn(4, 4, |i, j| {
            if i + j == 3 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert_eq!(xx.matrix(), &anti);
    }

    #[test]
    fn expm_examples() {
        let id = CMatrix::identity(3, 3);
        assert!(close(expm(&Hermitian::zeros(3), 1.7).matrix(), &id, 1e-14));
        let minus_one = -CMatrix::identity(2, 2);
        assert!(close(expm(&sigma_z(), PI).matrix(), &minus_one, 1e-14));
        let ix = sigma_x().matrix() * IM;
        assert!(close(expm(&sigma_x(), FRAC_PI_2).matrix(), &ix, 1e-14));
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            Hermitian::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(Hermitian::new(CMatrix::zeros(0, 0)), Err(Error::Empty)));
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::identity(2, 2).scale(1.1);
        assert!(matches!(Unitary::new(m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let u = expm(&(&sigma_x() + &sigma_z().scale(0.3)), 0.37);
        let mut acc = Unitary::identity(2);
        for _ in 0..13 {
            acc = &acc * &u;
        }
        assert!(close(acc.matrix(), u.pow(13).matrix(), 1e-13));
    }

    #[test]
    fn phase_alignment_ignores_global_phase() {
        let u = expm(&sigma_y(), 0.4);
        let v = CMatrix::from(u.matrix() * C64::from_polar(1.0, 1.1));
        assert!(phase_aligned_distance(u.matrix(), &v) < 1e-14);
    }

    #[test]
    fn partial_traces_of_product() {
        let a = Hermitian::diagonal(&[1.0, 2.0, -0.5]);
        let b = sigma_x() + Hermitian::identity(2);
        let ab = tensor(&a, &b);
        let ts = partial_trace_system(ab.matrix(), 3, 2);
        assert!(close(&ts, &a.matrix().scale(2.0), 1e-14));
        let tc = partial_trace_controller(ab.matrix(), 3, 2);
        assert!(close(&tc, &b.matrix().scale(2.5), 1e-14));
    }
}
