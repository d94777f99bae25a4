//! The interface algebra of a controller–system interaction.
//!
//! It is computed two ways: by brute-force Lie closure of the traceless
//! controller operators together with `H`, and structurally as
//! `W (x) B + 1 (x) L`, where `B` is the Hermitian part of the algebra generated
//! by the system factors and `L = span{ i[X, Y] : X, Y in B }`. The structural
//! form requires a controller of dimension at least 3.

use crate::closure::{commutator_span, lie_closure, star_closure};
use crate::error::{Error, Result};
use crate::named::traceless_basis;
use crate::operator::{tensor, Hermitian};
use crate::schmidt::BipartiteHamiltonian;
use crate::subspace::{Membership, OperatorSubspace};
use crate::tolerance::{Tolerances, DEFAULT_DIMENSION_CAP};

/// Outcome of comparing the brute-force and structural subspaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Agreement {
    pub agree: bool,
    pub brute_dim: usize,
    pub structural_dim: usize,
    /// Largest membership residual in either direction.
    pub max_residual: f64,
}

#[derive(Clone, Debug)]
pub struct InterfaceAnalysis {
    pub hamiltonian: BipartiteHamiltonian,
    pub structural: OperatorSubspace,
    /// `None` when the joint dimension exceeds the brute-force cap.
    pub brute: Option<OperatorSubspace>,
    pub algebra_b: OperatorSubspace,
    pub space_l: OperatorSubspace,
    pub agreement: Option<Agreement>,
}

impl InterfaceAnalysis {
    /// True when the structural answer was not checked by closure.
    pub fn asserted_only(&self) -> bool {
        self.brute.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InterfaceOptions {
    /// Largest `dim_c * dim_s` for which brute-force closure is attempted.
    pub cap: usize,
    pub brute_force: bool,
}

impl Default for InterfaceOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_DIMENSION_CAP,
            brute_force: true,
        }
    }
}

/// `(dim_c^2 - 1) dim(B) + dim(L)`.
pub fn structural_dimension(dim_c: usize, dim_b: usize, dim_l: usize) -> usize {
    (dim_c * dim_c - 1) * dim_b + dim_l
}

/// Traceless controller basis embedded as `W (x) 1`.
pub fn controller_generators(dim_c: usize, dim_s: usize) -> Vec<Hermitian> {
    let is = Hermitian::identity(dim_s);
    traceless_basis(dim_c).iter().map(|w| tensor(w, &is)).collect()
}

/// Lie closure of `W (x) 1` and `H`.
pub fn interface_bruteforce(
    h: &BipartiteHamiltonian,
    cap: usize,
    tol: &Tolerances,
) -> Result<OperatorSubspace> {
    h.require_stripped()?;
    let dim = h.dim_c() * h.dim_s();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let mut gens = controller_generators(h.dim_c(), h.dim_s());
    gens.push(h.full().clone());
    let report = lie_closure(&gens, tol)?;
    Ok(report.result)
}

/// `B`: Hermitian part of the unital algebra generated by the system factors.
/// Needs no assumption on the controller dimension.
pub fn system_algebra(h: &BipartiteHamiltonian, tol: &Tolerances) -> Result<OperatorSubspace> {
    let factors = h.system_factors();
    if factors.is_empty() {
        return star_closure(&[Hermitian::identity(h.dim_s())], tol);
    }
    star_closure(&factors, tol)
}

/// Orthonormal basis of `W (x) B + 1 (x) L`.
pub fn structural_subspace(
    dim_c: usize,
    algebra_b: &OperatorSubspace,
    space_l: &OperatorSubspace,
    tol: &Tolerances,
) -> Result<OperatorSubspace> {
    let dim_s = algebra_b.dim_matrix();
    let w = traceless_basis(dim_c);
    let ic = Hermitian::identity(dim_c);
    let mut out = OperatorSubspace::empty(dim_c * dim_s);
    for wi in &w {
        for b in algebra_b.basis() {
            out.extend(&tensor(wi, b), tol.rank)?;
        }
    }
    for l in space_l.basis() {
        out.extend(&tensor(&ic, l), tol.rank)?;
    }
    Ok(out)
}

fn require_theorem_hypotheses(h: &BipartiteHamiltonian) -> Result<()> {
    if h.dim_c() < 3 {
        return Err(Error::ControllerTooSmall { dim_c: h.dim_c() });
    }
    h.require_stripped()
}

/// Structural interface algebra, cross-checked by closure when within the cap.
pub fn interface_structural(
    h: &BipartiteHamiltonian,
    options: &InterfaceOptions,
    tol: &Tolerances,
) -> Result<InterfaceAnalysis> {
    require_theorem_hypotheses(h)?;
    let algebra_b = system_algebra(h, tol)?;
    let space_l = commutator_span(&algebra_b, &algebra_b, tol)?;
    let structural = structural_subspace(h.dim_c(), &algebra_b, &space_l, tol)?;

    let dim = h.dim_c() * h.dim_s();
    let brute = if options.brute_force && dim <= options.cap {
        Some(interface_bruteforce(h, options.cap, tol)?)
    } else {
        None
    };
    let agreement = match &brute {
        Some(b) => Some(compare(b, &structural, tol)?),
        None => None,
    };

    Ok(InterfaceAnalysis {
        hamiltonian: h.clone(),
        structural,
        brute,
        algebra_b,
        space_l,
        agreement,
    })
}

/// Dimension match and mutual membership within `tol.membership`.
pub fn compare(brute: &OperatorSubspace, structural: &OperatorSubspace, tol: &Tolerances) -> Result<Agreement> {
    let max_residual = brute
        .max_residual_of(structural)?
        .max(structural.max_residual_of(brute)?);
    Ok(Agreement {
        agree: brute.dim() == structural.dim() && max_residual <= tol.membership,
        brute_dim: brute.dim(),
        structural_dim: structural.dim(),
        max_residual,
    })
}

/// Universal control holds iff the system factors generate all of `L(H_s)`.
pub fn check_universal_control(h: &BipartiteHamiltonian, tol: &Tolerances) -> Result<bool> {
    require_theorem_hypotheses(h)?;
    let b = system_algebra(h, tol)?;
    Ok(b.dim() == h.dim_s() * h.dim_s())
}

/// Whether `exp(i A s)` is implementable, equivalently whether `A` is
/// CQND-measurable: membership of `A` in the unital algebra `B`.
pub fn check_implementable(
    observable: &Hermitian,
    h: &BipartiteHamiltonian,
    tol: &Tolerances,
) -> Result<Membership> {
    if observable.dim() != h.dim_s() {
        return Err(Error::DimensionMismatch {
            expected: h.dim_s(),
            found: observable.dim(),
        });
    }
    let b = system_algebra(h, tol)?;
    b.membership(observable, tol.membership)
}
