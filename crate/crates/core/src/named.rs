//! Standard operators: Pauli and Gell-Mann matrices, generalized Gell-Mann
//! bases, and the shift and clock matrices.

use crate::operator::{CMatrix, Hermitian, C64};

fn from_entries(dim: usize, entries: &[(usize, usize, C64)]) -> Hermitian {
    let mut m = CMatrix::zeros(dim, dim);
    for &(i, j, z) in entries {
        m[(i, j)] = z;
    }
    Hermitian::symmetrized(m)
}

const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> Hermitian {
    from_entries(2, &[(0, 1, ONE), (1, 0, ONE)])
}

pub fn sigma_y() -> Hermitian {
    from_entries(2, &[(0, 1, -I), (1, 0, I)])
}

pub fn sigma_z() -> Hermitian {
    Hermitian::diagonal(&[1.0, -1.0])
}

/// The Gell-Mann matrix `lambda_k`, `k` in `1..=8`.
///
/// # Panics
/// For `k` outside `1..=8`.
pub fn gell_mann(k: usize) -> Hermitian {
    match k {
        1 => from_entries(3, &[(0, 1, ONE), (1, 0, ONE)]),
        2 => from_entries(3, &[(0, 1, -I), (1, 0, I)]),
        3 => Hermitian::diagonal(&[1.0, -1.0, 0.0]),
        4 => from_entries(3, &[(0, 2, ONE), (2, 0, ONE)]),
        5 => from_entries(3, &[(0, 2, -I), (2, 0, I)]),
        6 => from_entries(3, &[(1, 2, ONE), (2, 1, ONE)]),
        7 => from_entries(3, &[(1, 2, -I), (2, 1, I)]),
        8 => Hermitian::diagonal(&[1.0, 1.0, -2.0]).scale(1.0 / 3f64.sqrt()),
        _ => panic!("Gell-Mann index must be in 1..=8, got {k}"),
    }
}

/// All eight Gell-Mann matrices in order.
pub fn gell_mann_all() -> Vec<Hermitian> {
    (1..=8).map(gell_mann).collect()
}

/// Hilbert–Schmidt-orthonormal basis of the traceless Hermitian `dim x dim`
/// matrices (`dim^2 - 1` elements): symmetric and antisymmetric off-diagonal
/// pairs first, then the diagonal family.
pub fn traceless_basis(dim: usize) -> Vec<Hermitian> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(dim * dim - 1);
    for j in 0..dim {
        for k in (j + 1)..dim {
            out.push(from_entries(dim, &[(j, k, ONE * r), (k, j, ONE * r)]));
            out.push(from_entries(dim, &[(j, k, -I * r), (k, j, I * r)]));
        }
    }
    for l in 1..dim {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; dim];
        for d in diag.iter_mut().take(l) {
            *d = 1.0 / norm;
        }
        diag[l] = -(l as f64) / norm;
        out.push(Hermitian::diagonal(&diag));
    }
    out
}

/// `1/sqrt(dim)` followed by [`traceless_basis`]: an orthonormal basis of all
/// Hermitian `dim x dim` matrices.
pub fn hermitian_basis(dim: usize) -> Vec<Hermitian> {
    let mut out = vec![Hermitian::identity(dim).scale(1.0 / (dim as f64).sqrt())];
    out.extend(traceless_basis(dim));
    out
}

/// Cyclic shift `X|j> = |j+1 mod dim>`.
pub fn shift(dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| if i == (j + 1) % dim { ONE } else { C64::new(0.0, 0.0) })
}

/// Clock `Z = diag(1, w, ..., w^{dim-1})`, `w = exp(2 pi i / dim)`.
pub fn clock(dim: usize) -> CMatrix {
    let w = 2.0 * std::f64::consts::PI / dim as f64;
    CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::from_polar(1.0, w * i as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::hs_inner;

    #[test]
    fn traceless_basis_is_orthonormal_and_traceless() {
        for d in 2..=5 {
            let b = traceless_basis(d);
            assert_eq!(b.len(), d * d - 1);
            for (i, x) in b.iter().enumerate() {
                assert!(x.trace().abs() < 1e-14);
                for (j, y) in b.iter().enumerate() {
                    let g = hs_inner(x, y).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g.re - want).abs() < 1e-14 && g.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn gell_mann_normalization() {
        for a in 1..=8 {
            for b in 1..=8 {
                let g = hs_inner(&gell_mann(a), &gell_mann(b)).unwrap().re;
                let want = if a == b { 2.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-14, "({a},{b}) -> {g}");
            }
        }
    }

    #[test]
    fn shift_clock_commutation() {
        // Z X = w X Z
        for d in 2..=5 {
            let (x, z) = (shift(d), clock(d));
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
            assert!((&z * &x - (&x * &z) * w).norm() < 1e-13);
        }
    }
}
