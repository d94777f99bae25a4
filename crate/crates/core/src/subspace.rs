//! Real subspaces of Hermitian matrices with a Hilbert–Schmidt-orthonormal basis.
//!
//! A Hermitian `d x d` matrix is stored alongside its real coordinate vector of
//! length `d^2` (diagonal entries, then `sqrt(2) Re` and `sqrt(2) Im` of the upper
//! triangle). In these coordinates the Hilbert–Schmidt inner product is the
//! Euclidean dot product, so projections are plain dot products.

use crate::error::{Error, Result};
use crate::operator::{CMatrix, Hermitian, C64};

const SQRT2: f64 = std::f64::consts::SQRT_2;

pub(crate) fn coords(x: &Hermitian) -> Vec<f64> {
    let m = x.matrix();
    let d = x.dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let z = m[(i, j)];
            out.push(SQRT2 * z.re);
            out.push(SQRT2 * z.im);
        }
    }
    out
}

pub(crate) fn from_coords(d: usize, v: &[f64]) -> Hermitian {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(v[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = C64::new(v[k], v[k + 1]) / SQRT2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    Hermitian::symmetrized(m)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of one Gram–Schmidt extension step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extension {
    pub accepted: bool,
    /// Frobenius norm of the component orthogonal to the span.
    pub residual_norm: f64,
}

/// Outcome of a membership test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub contained: bool,
    /// `||X - P X||_F / ||X||_F`, zero for `X = 0`.
    pub residual: f64,
}

/// A real span of Hermitian matrices, held as an orthonormal basis.
#[derive(Clone, Debug)]
pub struct OperatorSubspace {
    dim_matrix: usize,
    basis: Vec<Hermitian>,
    coords: Vec<Vec<f64>>,
}

impl OperatorSubspace {
    pub fn empty(dim_matrix: usize) -> Self {
        Self {
            dim_matrix,
            basis: Vec::new(),
            coords: Vec::new(),
        }
    }

    /// Orthonormalizes `spanning` in order, dropping dependent elements.
    pub fn spanned_by<'a, I>(dim_matrix: usize, spanning: I, rank_tol: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Hermitian>,
    {
        let mut space = Self::empty(dim_matrix);
        for x in spanning {
            space.extend(x, rank_tol)?;
        }
        Ok(space)
    }

    pub fn dim_matrix(&self) -> usize {
        self.dim_matrix
    }

    /// Dimension of the span.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Hermitian] {
        &self.basis
    }

    fn check_dim(&self, x: &Hermitian) -> Result<()> {
        if x.dim() != self.dim_matrix {
            return Err(Error::DimensionMismatch {
                expected: self.dim_matrix,
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// Component of `v` orthogonal to the span, with one reorthogonalization pass.
    fn reject(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for b in &self.coords {
                let c = dot(b, &r);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
        }
        r
    }

    /// Appends the normalized residual of `x` if it exceeds `rank_tol * ||x||`.
    pub fn extend(&mut self, x: &Hermitian, rank_tol: f64) -> Result<Extension> {
        self.check_dim(x)?;
        let v = coords(x);
        Ok(self.extend_coords(v, rank_tol))
    }

    pub(crate) fn extend_coords(&mut self, v: Vec<f64>, rank_tol: f64) -> Extension {
        self.extend_coords_scaled(v, rank_tol, 0.0)
    }

    /// Like `extend_coords` with the threshold `rank_tol * max(||v||, scale)`.
    /// Products of unit-norm basis elements pass `scale = 1`: their rounding
    /// error is set by the factors, not by the (possibly tiny) product.
    pub(crate) fn extend_coords_scaled(&mut self, v: Vec<f64>, rank_tol: f64, scale: f64) -> Extension {
        let input_norm = norm(&v);
        let mut r = self.reject(&v);
        let residual_norm = norm(&r);
        if input_norm == 0.0 || residual_norm <= rank_tol * input_norm.max(scale) {
            return Extension {
                accepted: false,
                residual_norm,
            };
        }
        for ri in r.iter_mut() {
            *ri /= residual_norm;
        }
        self.basis.push(from_coords(self.dim_matrix, &r));
        self.coords.push(r);
        Extension {
            accepted: true,
            residual_norm,
        }
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, x: &Hermitian) -> Result<Hermitian> {
        self.check_dim(x)?;
        let v = coords(x);
        let mut p = vec![0.0; v.len()];
        for b in &self.coords {
            let c = dot(b, &v);
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += c * bi;
            }
        }
        Ok(from_coords(self.dim_matrix, &p))
    }

    /// Relative distance of `x` from the span.
    pub fn residual(&self, x: &Hermitian) -> Result<f64> {
        self.check_dim(x)?;
        let v = coords(x);
        let n = norm(&v);
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok(norm(&self.reject(&v)) / n)
    }

    pub fn membership(&self, x: &Hermitian, tol: f64) -> Result<Membership> {
        let residual = self.residual(x)?;
        Ok(Membership {
            contained: residual <= tol,
            residual,
        })
    }

    /// Largest membership residual of `other`'s basis in `self`.
    pub fn max_residual_of(&self, other: &OperatorSubspace) -> Result<f64> {
        other
            .basis
            .iter()
            .try_fold(0.0f64, |acc, b| Ok(acc.max(self.residual(b)?)))
    }

    /// Equal dimension and mutual containment within `tol`.
    pub fn same_span(&self, other: &OperatorSubspace, tol: f64) -> Result<bool> {
        Ok(self.dim() == other.dim()
            && self.max_residual_of(other)? <= tol
            && other.max_residual_of(self)? <= tol)
    }

    /// Cosines of the principal angles between `self` and the span of `other`,
    /// largest first. `other` must be orthonormal.
    pub fn principal_cosines(&self, other: &OperatorSubspace) -> Result<Vec<f64>> {
        if other.dim_matrix != self.dim_matrix {
            return Err(Error::DimensionMismatch {
                expected: self.dim_matrix,
                found: other.dim_matrix,
            });
        }
        if self.is_empty() || other.is_empty() {
            return Ok(Vec::new());
        }
        let overlap = nalgebra::DMatrix::from_fn(self.dim(), other.dim(), |i, j| {
            dot(&self.coords[i], &other.coords[j])
        });
        let mut s: Vec<f64> = overlap.svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }

    /// Maximum deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.coords.iter().enumerate() {
            for (j, b) in self.coords.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - want).abs());
            }
        }
        worst
    }
}

/// Functional form of [`OperatorSubspace::extend`]: returns the extended
/// space together with the acceptance flag and residual norm.
pub fn orthonormal_extend(
    space: &OperatorSubspace,
    x: &Hermitian,
    rank_tol: f64,
) -> Result<(OperatorSubspace, bool, f64)> {
    let mut out = space.clone();
    let ext = out.extend(x, rank_tol)?;
    Ok((out, ext.accepted, ext.residual_norm))
}

/// Membership of `x` in `space`.
pub fn member(x: &Hermitian, space: &OperatorSubspace, tol: f64) -> Result<Membership> {
    space.membership(x, tol)
}
