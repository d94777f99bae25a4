//! Nearest-neighbour chains: building `H = sum_j H_{j,j+1}` and checking that
//! the first sites control the whole chain.

use crate::closure::{lie_closure, star_closure};
use crate::error::{Error, Result};
use crate::named::traceless_basis;
use crate::operator::{tensor, Hermitian};
use crate::schmidt::independence_ratio;
use crate::tolerance::Tolerances;

const TRACE_TOL: f64 = 1e-12;
const INDEPENDENCE_TOL: f64 = 1e-9;

/// Site dimensions and per-bond couplings `H_{j,j+1} = sum_k A_k (x) B_k`.
#[derive(Clone, Debug)]
pub struct ChainSpec {
    site_dims: Vec<usize>,
    couplings: Vec<Vec<(Hermitian, Hermitian)>>,
}

impl ChainSpec {
    pub fn new(site_dims: Vec<usize>, couplings: Vec<Vec<(Hermitian, Hermitian)>>) -> Result<Self> {
        if site_dims.is_empty() || site_dims.contains(&0) {
            return Err(Error::InvalidArgument("site dimensions must be positive and non-empty".into()));
        }
        if couplings.len() + 1 != site_dims.len() {
            return Err(Error::InvalidArgument(format!(
                "{} sites need {} couplings, got {}",
                site_dims.len(),
                site_dims.len() - 1,
                couplings.len()
            )));
        }
        for (j, bond) in couplings.iter().enumerate() {
            for (a, b) in bond {
                if a.dim() != site_dims[j] {
                    return Err(Error::DimensionMismatch { expected: site_dims[j], found: a.dim() });
                }
                if b.dim() != site_dims[j + 1] {
                    return Err(Error::DimensionMismatch { expected: site_dims[j + 1], found: b.dim() });
                }
                if a.trace().abs() > TRACE_TOL * a.norm().max(1.0) {
                    return Err(Error::NotTraceless { trace: a.trace().abs() });
                }
            }
            let family: Vec<Hermitian> = bond.iter().map(|(a, _)| a.clone()).collect();
            if independence_ratio(&family) <= INDEPENDENCE_TOL {
                return Err(Error::InvalidArgument(format!(
                    "coupling {j}: controller-side operators are linearly dependent"
                )));
            }
        }
        Ok(Self { site_dims, couplings })
    }

    /// The same coupling on every bond of a uniform chain.
    pub fn uniform(sites: usize, dim: usize, coupling: Vec<(Hermitian, Hermitian)>) -> Result<Self> {
        Self::new(vec![dim; sites], vec![coupling; sites.saturating_sub(1)])
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn couplings(&self) -> &[Vec<(Hermitian, Hermitian)>] {
        &self.couplings
    }

    pub fn sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    fn prefix_dim(&self, m: usize) -> usize {
        self.site_dims[..m].iter().product()
    }
}

fn require_cap(spec: &ChainSpec, cap: usize) -> Result<usize> {
    let dim = spec.total_dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok(dim)
}

/// `sum_j 1 (x) H_{j,j+1} (x) 1`.
pub fn build_chain_hamiltonian(spec: &ChainSpec, cap: usize) -> Result<Hermitian> {
    let dim = require_cap(spec, cap)?;
    let mut h = Hermitian::zeros(dim);
    for (j, bond) in spec.couplings.iter().enumerate() {
        let left = Hermitian::identity(spec.prefix_dim(j));
        let right = Hermitian::identity(spec.site_dims[j + 2..].iter().product());
        for (a, b) in bond {
            h = h + tensor(&tensor(&left, &tensor(a, b)), &right);
        }
    }
    Ok(h)
}

#[derive(Clone, Debug)]
pub struct SiteCheck {
    pub site: usize,
    pub dim: usize,
    /// Site dimension at least 3.
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct CouplingCheck {
    pub bond: usize,
    /// Largest `|tr A_k|`.
    pub a_max_trace: f64,
    /// Smallest over largest Gram eigenvalue of the `A_k`.
    pub a_independence: f64,
    pub b_closure_dim: usize,
    pub b_full_dim: usize,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub sites: Vec<SiteCheck>,
    pub couplings: Vec<CouplingCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.sites.iter().all(|s| s.passed) && self.couplings.iter().all(|c| c.passed)
    }
}

/// Per-site dimension checks and per-bond checks on both coupling sides: the
/// `A_k` traceless and independent, the `B_k` generating the full site algebra.
pub fn verify_theorem2_hypotheses(spec: &ChainSpec, tol: &Tolerances) -> Result<HypothesisReport> {
    let sites = spec
        .site_dims
        .iter()
        .enumerate()
        .map(|(site, &dim)| SiteCheck { site, dim, passed: dim >= 3 })
        .collect();
    let mut couplings = Vec::new();
    for (bond, terms) in spec.couplings.iter().enumerate() {
        let a: Vec<Hermitian> = terms.iter().map(|(a, _)| a.clone()).collect();
        let b: Vec<Hermitian> = terms.iter().map(|(_, b)| b.clone()).collect();
        let a_max_trace = a.iter().map(|x| x.trace().abs()).fold(0.0, f64::max);
        let a_independence = independence_ratio(&a);
        let next = spec.site_dims[bond + 1];
        let b_closure_dim = if b.is_empty() { 1 } else { star_closure(&b, tol)?.dim() };
        couplings.push(CouplingCheck {
            bond,
            a_max_trace,
            a_independence,
            b_closure_dim,
            b_full_dim: next * next,
            passed: !terms.is_empty()
                && a_max_trace <= TRACE_TOL * 10.0
                && a_independence > INDEPENDENCE_TOL
                && b_closure_dim == next * next,
        });
    }
    Ok(HypothesisReport { sites, couplings })
}

#[derive(Clone, Debug)]
pub struct CutReport {
    pub m: usize,
    pub controllable: bool,
    pub closure_dim: usize,
    pub full_dim: usize,
    pub generations: usize,
}

/// Lie closure of the first `m` sites' traceless operators (embedded) together
/// with the chain Hamiltonian; controllable when it is all of `su(N)`.
pub fn check_cut(spec: &ChainSpec, m: usize, cap: usize, tol: &Tolerances) -> Result<CutReport> {
    if m == 0 || m > spec.sites() {
        return Err(Error::InvalidArgument(format!(
            "cut must lie in 1..={}, got {m}",
            spec.sites()
        )));
    }
    let dim = require_cap(spec, cap)?;
    let h = build_chain_hamiltonian(spec, cap)?;
    let rest = Hermitian::identity(dim / spec.prefix_dim(m));
    let mut gens: Vec<Hermitian> = traceless_basis(spec.prefix_dim(m))
        .iter()
        .map(|w| tensor(w, &rest))
        .collect();
    gens.push(h);
    let report = lie_closure(&gens, tol)?;
    let full_dim = dim * dim - 1;
    Ok(CutReport {
        m,
        controllable: report.result.dim() == full_dim,
        closure_dim: report.result.dim(),
        full_dim,
        generations: report.generations,
    })
}

/// `sum_k lambda_k (x) lambda_k` over a traceless basis of a `dim`-level site.
pub fn full_coupling(dim: usize) -> Vec<(Hermitian, Hermitian)> {
    traceless_basis(dim).into_iter().map(|l| (l.clone(), l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::{gell_mann, sigma_x, sigma_z};
    use crate::tolerance::DEFAULT_DIMENSION_CAP;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn commuting_coupling() -> Vec<(Hermitian, Hermitian)> {
        vec![(gell_mann(1), gell_mann(3)), (gell_mann(4), gell_mann(8))]
    }

    #[test]
    fn two_qutrit_hamiltonian() {
        let spec = ChainSpec::uniform(2, 3, full_coupling(3)).unwrap();
        let h = build_chain_hamiltonian(&spec, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(h.dim(), 9);
        assert!(h.trace().abs() < 1e-12);
    }

    #[test]
    fn single_site_is_zero() {
        let spec = ChainSpec::new(vec![3], vec![]).unwrap();
        let h = build_chain_hamiltonian(&spec, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(h.dim(), 3);
        assert!(h.norm() == 0.0);
    }

    #[test]
    fn three_sites_is_sum_of_embeddings() {
        let c = vec![(gell_mann(2), gell_mann(5))];
        let spec = ChainSpec::uniform(3, 3, c).unwrap();
        let h = build_chain_hamiltonian(&spec, DEFAULT_DIMENSION_CAP).unwrap();
        let i3 = Hermitian::identity(3);
        let bond = tensor(&gell_mann(2), &gell_mann(5));
        let expected = tensor(&bond, &i3) + tensor(&i3, &bond);
        assert_eq!(h.dim(), 27);
        assert!((h - expected).norm() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let spec = ChainSpec::uniform(5, 3, full_coupling(3)).unwrap();
        assert!(matches!(
            build_chain_hamiltonian(&spec, DEFAULT_DIMENSION_CAP),
            Err(Error::DimensionCap { dim: 243, .. })
        ));
        assert!(check_cut(&spec, 1, DEFAULT_DIMENSION_CAP, &tol()).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ChainSpec::new(vec![3, 3], vec![]).is_err());
        let traced = vec![(Hermitian::identity(3), gell_mann(1))];
        assert!(matches!(ChainSpec::uniform(2, 3, traced), Err(Error::NotTraceless { .. })));
        let dependent = vec![(gell_mann(1), gell_mann(1)), (gell_mann(1).scale(2.0), gell_mann(2))];
        assert!(ChainSpec::uniform(2, 3, dependent).is_err());
    }

    #[test]
    fn hypotheses_examples() {
        let spec = ChainSpec::uniform(2, 3, full_coupling(3)).unwrap();
        assert!(verify_theorem2_hypotheses(&spec, &tol()).unwrap().all_passed());

        let spec = ChainSpec::uniform(2, 3, commuting_coupling()).unwrap();
        let r = verify_theorem2_hypotheses(&spec, &tol()).unwrap();
        assert!(!r.all_passed());
        assert_eq!(r.couplings[0].b_closure_dim, 3);

        let spec = ChainSpec::uniform(2, 2, vec![(sigma_x(), sigma_x()), (sigma_z(), sigma_z())]).unwrap();
        let r = verify_theorem2_hypotheses(&spec, &tol()).unwrap();
        assert!(!r.sites[0].passed);
        assert!(!r.all_passed());
    }

    #[test]
    fn two_qutrit_cut() {
        let spec = ChainSpec::uniform(2, 3, full_coupling(3)).unwrap();
        let r = check_cut(&spec, 1, DEFAULT_DIMENSION_CAP, &tol()).unwrap();
        assert!(r.controllable);
        assert_eq!(r.closure_dim, 80);
        let r = check_cut(&spec, 2, DEFAULT_DIMENSION_CAP, &tol()).unwrap();
        assert!(r.controllable);
    }

    #[test]
    fn commuting_b_side_is_not_controllable() {
        let spec = ChainSpec::uniform(2, 3, commuting_coupling()).unwrap();
        let r = check_cut(&spec, 1, DEFAULT_DIMENSION_CAP, &tol()).unwrap();
        assert!(!r.controllable);
        assert!(r.closure_dim < 80);
    }

    #[test]
    fn cut_bounds() {
        let spec = ChainSpec::uniform(2, 3, full_coupling(3)).unwrap();
        assert!(check_cut(&spec, 0, DEFAULT_DIMENSION_CAP, &tol()).is_err());
        assert!(check_cut(&spec, 3, DEFAULT_DIMENSION_CAP, &tol()).is_err());
    }

    /// Random couplings satisfying the hypotheses are controllable at every cut,
    /// and the closure dimension grows with the cut.
    #[test]
    fn hypotheses_imply_controllability_on_qutrit_pairs() {
        let mut rng = crate::random::OperatorSampler::new(17);
        for _ in 0..5 {
            let coupling = vec![(rng.traceless(3), rng.hermitian(3)), (rng.traceless(3), rng.hermitian(3))];
            let spec = ChainSpec::uniform(2, 3, coupling).unwrap();
            let hyp = verify_theorem2_hypotheses(&spec, &tol()).unwrap();
            assert!(hyp.all_passed());
            let mut last = 0;
            for m in 1..=2 {
                let r = check_cut(&spec, m, DEFAULT_DIMENSION_CAP, &tol()).unwrap();
                assert!(r.controllable);
                assert!(r.closure_dim >= last && r.closure_dim <= r.full_dim);
                last = r.closure_dim;
            }
        }
    }
}
