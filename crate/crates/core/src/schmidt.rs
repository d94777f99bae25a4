//! Operator-Schmidt decomposition of bipartite Hamiltonians.
//!
//! `H` on `H_c (x) H_s` is expanded over Hilbert–Schmidt-orthonormal local bases
//! whose first element is the normalized identity. The coefficient matrix splits
//! into a scalar, two local blocks and a traceless-traceless block; the SVD of the
//! last gives the interaction terms `A_j (x) B_j`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::named::hermitian_basis;
use crate::operator::{tensor, CMatrix, Hermitian};

/// Relative cutoff for keeping a singular value of the interaction block.
pub const SINGULAR_CUTOFF: f64 = 1e-10;

/// One interaction term `A_j (x) B_j`; both factors are traceless and carry
/// `sqrt(singular_value)` each.
#[derive(Clone, Debug)]
pub struct SchmidtTerm {
    pub controller: Hermitian,
    pub system: Hermitian,
    pub singular_value: f64,
}

/// `H = sum_j A_j (x) B_j + A (x) 1 + 1 (x) B + c 1`.
#[derive(Clone, Debug)]
pub struct BipartiteHamiltonian {
    dim_c: usize,
    dim_s: usize,
    full: Hermitian,
    terms: Vec<SchmidtTerm>,
    local_c: Hermitian,
    local_s: Hermitian,
    scalar: f64,
}

impl BipartiteHamiltonian {
    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn full(&self) -> &Hermitian {
        &self.full
    }

    pub fn terms(&self) -> &[SchmidtTerm] {
        &self.terms
    }

    pub fn local_c(&self) -> &Hermitian {
        &self.local_c
    }

    pub fn local_s(&self) -> &Hermitian {
        &self.local_s
    }

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.singular_value).collect()
    }

    pub fn system_factors(&self) -> Vec<Hermitian> {
        self.terms.iter().map(|t| t.system.clone()).collect()
    }

    pub fn controller_factors(&self) -> Vec<Hermitian> {
        self.terms.iter().map(|t| t.controller.clone()).collect()
    }

    /// True when the local parts and scalar vanish relative to `||H||`.
    pub fn is_stripped(&self, tol: f64) -> bool {
        let scale = self.full.norm().max(1.0);
        self.local_c.norm() <= tol * scale
            && self.local_s.norm() <= tol * scale
            && self.scalar.abs() <= tol * scale
    }

    pub(crate) fn require_stripped(&self) -> Result<()> {
        if self.is_stripped(1e-10) {
            Ok(())
        } else {
            Err(Error::LocalsPresent {
                local_c: self.local_c.norm(),
                local_s: self.local_s.norm(),
                scalar: self.scalar,
            })
        }
    }

    /// Rebuilds the joint operator from the decomposition.
    pub fn reconstruct(&self) -> Hermitian {
        let ic = Hermitian::identity(self.dim_c);
        let is = Hermitian::identity(self.dim_s);
        let mut h = tensor(&self.local_c, &is)
            + tensor(&ic, &self.local_s)
            + Hermitian::identity(self.dim_c * self.dim_s).scale(self.scalar);
        for t in &self.terms {
            h = h + tensor(&t.controller, &t.system);
        }
        h
    }
}

/// Index map of the realignment `H_{(ik),(jl)} -> R_{(ij),(kl)}`.
fn realign(h: &CMatrix, dim_c: usize, dim_s: usize) -> CMatrix {
    CMatrix::from_fn(dim_c * dim_c, dim_s * dim_s, |r, c| {
        let (i, j) = (r / dim_c, r % dim_c);
        let (k, l) = (c / dim_s, c % dim_s);
        h[(i * dim_s + k, j * dim_s + l)]
    })
}

/// Rows are `conj(vec(E_a))` so that `rows * vec(X) = <E_a, X>`.
fn basis_rows(basis: &[Hermitian]) -> CMatrix {
    let d2 = basis.len();
    let d = basis[0].dim();
    CMatrix::from_fn(d2, d * d, |a, idx| basis[a].matrix()[(idx / d, idx % d)].conj())
}

fn combine(d: usize, basis: &[Hermitian], weights: impl Iterator<Item = f64>) -> Hermitian {
    let mut acc = Hermitian::zeros(d);
    for (b, w) in basis.iter().zip(weights) {
        acc = acc + b.scale(w);
    }
    acc
}

/// Sign convention: the first entry (row-major) of largest magnitude gets a
/// positive real part, or a positive imaginary part when it is imaginary.
fn gauge_sign(x: &Hermitian) -> f64 {
    let m = x.matrix();
    let max = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d = x.dim();
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            if z.norm() >= max * (1.0 - 1e-9) {
                let key = if z.re.abs() > 1e-12 * max { z.re } else { z.im };
                return if key < 0.0 { -1.0 } else { 1.0 };
            }
        }
    }
    1.0
}

/// Decomposes `full` on `C^{dim_c} (x) C^{dim_s}` into the canonical form.
pub fn schmidt_decompose(full: &Hermitian, dim_c: usize, dim_s: usize) -> Result<BipartiteHamiltonian> {
    if dim_c == 0 || dim_s == 0 || full.dim() != dim_c * dim_s {
        return Err(Error::DimensionMismatch {
            expected: dim_c * dim_s,
            found: full.dim(),
        });
    }
    let ec = hermitian_basis(dim_c);
    let fs = hermitian_basis(dim_s);
    let r = realign(full.matrix(), dim_c, dim_s);
    // M_ab = <E_a (x) F_b, H>, real for Hermitian bases and H.
    let coeff: CMatrix = basis_rows(&ec) * r * basis_rows(&fs).transpose();
    let m = DMatrix::from_fn(coeff.nrows(), coeff.ncols(), |i, j| coeff[(i, j)].re);

    let scalar = m[(0, 0)] / ((dim_c * dim_s) as f64).sqrt();
    let local_c = combine(dim_c, &ec[1..], (1..ec.len()).map(|a| m[(a, 0)] / (dim_s as f64).sqrt()));
    let local_s = combine(dim_s, &fs[1..], (1..fs.len()).map(|b| m[(0, b)] / (dim_c as f64).sqrt()));

    let mut terms = Vec::new();
    if dim_c > 1 && dim_s > 1 {
        let block = m.view((1, 1), (ec.len() - 1, fs.len() - 1)).into_owned();
        let svd = block.svd(true, true);
        let u = svd.u.expect("svd u");
        let vt = svd.v_t.expect("svd v_t");
        let cutoff = SINGULAR_CUTOFF * full.norm();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        for j in order {
            let sigma = svd.singular_values[j];
            if sigma <= cutoff {
                continue;
            }
            let root = sigma.sqrt();
            let a = combine(dim_c, &ec[1..], u.column(j).iter().map(|w| w * root));
            let b = combine(dim_s, &fs[1..], vt.row(j).iter().map(|w| w * root));
            let sign = gauge_sign(&a);
            terms.push(SchmidtTerm {
                controller: a.scale(sign),
                system: b.scale(sign),
                singular_value: sigma,
            });
        }
    }

    Ok(BipartiteHamiltonian {
        dim_c,
        dim_s,
        full: full.clone(),
        terms,
        local_c,
        local_s,
        scalar,
    })
}

/// Drops `A (x) 1`, `1 (x) B` and the scalar, keeping only the interaction terms.
pub fn strip_locals(h: &BipartiteHamiltonian) -> BipartiteHamiltonian {
    let mut full = Hermitian::zeros(h.dim_c * h.dim_s);
    for t in &h.terms {
        full = full + tensor(&t.controller, &t.system);
    }
    BipartiteHamiltonian {
        dim_c: h.dim_c,
        dim_s: h.dim_s,
        full,
        terms: h.terms.clone(),
        local_c: Hermitian::zeros(h.dim_c),
        local_s: Hermitian::zeros(h.dim_s),
        scalar: 0.0,
    }
}

/// Decomposes and strips in one step; the form every analysis expects.
pub fn interaction_part(full: &Hermitian, dim_c: usize, dim_s: usize) -> Result<BipartiteHamiltonian> {
    Ok(strip_locals(&schmidt_decompose(full, dim_c, dim_s)?))
}

/// Real-coefficient Gram matrix of a family under the Hilbert–Schmidt product.
pub(crate) fn gram(family: &[Hermitian]) -> DMatrix<f64> {
    let n = family.len();
    DMatrix::from_fn(n, n, |i, j| {
        family[i]
            .matrix()
            .iter()
            .zip(family[j].matrix().iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    })
}

/// Smallest over largest Gram eigenvalue; 0 for dependent families.
pub fn independence_ratio(family: &[Hermitian]) -> f64 {
    if family.is_empty() {
        return 1.0;
    }
    let eig = gram(family).symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::MIN, f64::max);
    let min = eig.iter().copied().fold(f64::MAX, f64::min);
    if max <= 0.0 {
        0.0
    } else {
        (min / max).max(0.0)
    }
}
