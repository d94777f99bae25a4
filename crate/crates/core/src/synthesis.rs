//! Control procedures: free evolution under the fixed joint Hamiltonian,
//! interleaved with instantaneous controller unitaries; plus the product formulas
//! used to assemble effective evolutions from them.

use crate::error::{Error, Result};
use crate::named::{clock, shift};
use crate::operator::{phase_aligned_distance, spectral_norm, CMatrix, Hermitian, Spectral, Unitary};
use crate::schmidt::BipartiteHamiltonian;
use crate::tolerance::Tolerances;

/// Wait `wait`, then apply `unitary` on the controller.
#[derive(Clone, Debug)]
pub struct ControlStep {
    pub wait: f64,
    pub unitary: Unitary,
}

/// A finite sequence of waits and controller unitaries.
#[derive(Clone, Debug)]
pub struct ControlProcedure {
    dim_c: usize,
    dim_s: usize,
    steps: Vec<ControlStep>,
}

impl ControlProcedure {
    pub fn new(dim_c: usize, dim_s: usize, steps: Vec<ControlStep>) -> Result<Self> {
        let mut p = Self::empty(dim_c, dim_s);
        for s in steps {
            p.push(s.wait, s.unitary)?;
        }
        Ok(p)
    }

    pub fn empty(dim_c: usize, dim_s: usize) -> Self {
        Self {
            dim_c,
            dim_s,
            steps: Vec::new(),
        }
    }

    pub fn push(&mut self, wait: f64, unitary: Unitary) -> Result<()> {
        if !(wait >= 0.0 && wait.is_finite()) {
            return Err(Error::InvalidArgument(format!("wait times must be finite and >= 0, got {wait}")));
        }
        if unitary.dim() != self.dim_c {
            return Err(Error::DimensionMismatch {
                expected: self.dim_c,
                found: unitary.dim(),
            });
        }
        let defect = unitary.defect();
        if defect > Tolerances::default().unitary * (self.dim_c as f64).sqrt().max(1.0) {
            return Err(Error::NotUnitary { deviation: defect });
        }
        self.steps.push(ControlStep { wait, unitary });
        Ok(())
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ControlProcedure) -> Result<Self> {
        if (next.dim_c, next.dim_s) != (self.dim_c, self.dim_s) {
            return Err(Error::DimensionMismatch {
                expected: self.dim_c * self.dim_s,
                found: next.dim_c * next.dim_s,
            });
        }
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().cloned());
        Ok(Self {
            dim_c: self.dim_c,
            dim_s: self.dim_s,
            steps,
        })
    }

    pub fn steps(&self) -> &[ControlStep] {
        &self.steps
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    /// Implementation time: the sum of the waits.
    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|s| s.wait).sum()
    }
}

/// Joint unitary and implementation time of a procedure.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub unitary: Unitary,
    pub total_time: f64,
}

/// `u_p = (w_n (x) 1) e^{iH t_n} ... (w_1 (x) 1) e^{iH t_1}`.
pub fn evaluate_procedure(p: &ControlProcedure, h: &BipartiteHamiltonian) -> Result<Evaluation> {
    if (p.dim_c, p.dim_s) != (h.dim_c(), h.dim_s()) {
        return Err(Error::DimensionMismatch {
            expected: h.dim_c() * h.dim_s(),
            found: p.dim_c * p.dim_s,
        });
    }
    let spectral = h.full().spectral();
    Ok(evaluate_with(p, &spectral))
}

fn evaluate_with(p: &ControlProcedure, spectral: &Spectral) -> Evaluation {
    let n = p.dim_c * p.dim_s;
    let mut u = CMatrix::identity(n, n);
    for step in &p.steps {
        if step.wait > 0.0 {
            u = spectral.exp_i(step.wait).matrix() * u;
        }
        u = step.unitary.embed_left(p.dim_s).matrix() * u;
    }
    Evaluation {
        unitary: Unitary::from_matrix_unchecked(u),
        total_time: p.total_time(),
    }
}

/// A finite set of controller unitaries acting irreducibly, closed under
/// multiplication up to global phases.
#[derive(Clone, Debug)]
pub struct IrreducibleGroup {
    dim: usize,
    elements: Vec<Unitary>,
}

impl IrreducibleGroup {
    pub fn new(elements: Vec<Unitary>) -> Result<Self> {
        let dim = elements
            .first()
            .map(Unitary::dim)
            .ok_or_else(|| Error::InvalidArgument("group needs at least one element".into()))?;
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Unitary] {
        &self.elements
    }

    /// Index of the element equal to the identity up to phase.
    pub fn identity_index(&self) -> Option<usize> {
        let id = CMatrix::identity(self.dim, self.dim);
        self.elements
            .iter()
            .position(|e| phase_aligned_distance(e.matrix(), &id) < 1e-9)
    }

    /// Worst phase-aligned distance of a pairwise product to its nearest element.
    pub fn closure_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.elements {
            for b in &self.elements {
                let ab = a.matrix() * b.matrix();
                let nearest = self
                    .elements
                    .iter()
                    .map(|e| phase_aligned_distance(&ab, e.matrix()))
                    .fold(f64::MAX, f64::min);
                worst = worst.max(nearest);
            }
        }
        worst
    }

    /// `sum_s s X s^dag`.
    pub fn twirl(&self, x: &CMatrix) -> CMatrix {
        let mut acc = CMatrix::zeros(x.nrows(), x.ncols());
        for s in &self.elements {
            acc += s.matrix() * x * s.matrix().adjoint();
        }
        acc
    }

    /// `||sum_s s X s^dag - |S| tr(X)/d 1||_F`, zero for an irreducible set.
    pub fn schur_defect(&self, x: &CMatrix) -> f64 {
        let target = CMatrix::identity(self.dim, self.dim)
            * (x.trace() * (self.order() as f64 / self.dim as f64));
        (self.twirl(x) - target).norm()
    }
}

/// The `dim^2` Weyl–Heisenberg operators `X^a Z^b` with `X` the cyclic shift and
/// `Z` the clock matrix. The identity (`a = b = 0`) comes first.
pub fn weyl_group(dim: usize) -> Result<IrreducibleGroup> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "Weyl-Heisenberg group needs dimension >= 2, got {dim}"
        )));
    }
    let x = Unitary::from_matrix_unchecked(shift(dim));
    let z = Unitary::from_matrix_unchecked(clock(dim));
    let mut elements = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            elements.push(&x.pow(a as u64) * &z.pow(b as u64));
        }
    }
    IrreducibleGroup::new(elements)
}

/// `sum_s (s (x) 1) H (s^dag (x) 1)`.
pub fn group_average(h: &BipartiteHamiltonian, group: &IrreducibleGroup) -> Result<Hermitian> {
    if group.dim() != h.dim_c() {
        return Err(Error::DimensionMismatch {
            expected: h.dim_c(),
            found: group.dim(),
        });
    }
    let mut acc = Hermitian::zeros(h.dim_c() * h.dim_s());
    for s in group.elements() {
        acc = acc + h.full().conjugated(&s.embed_left(h.dim_s()));
    }
    Ok(acc)
}

/// Procedure approximating `exp(-i H eps)` by `prod_{s != 1} s e^{iH eps} s^dag`.
///
/// Consecutive conjugations telescope: after an opening `s_1^dag` each wait is
/// followed by `s_{k+1}^dag s_k`, and a final `s_last` closes the sequence.
pub fn inversion_sequence(
    h: &BipartiteHamiltonian,
    group: &IrreducibleGroup,
    eps: f64,
) -> Result<ControlProcedure> {
    h.require_stripped()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if group.dim() != h.dim_c() {
        return Err(Error::DimensionMismatch {
            expected: h.dim_c(),
            found: group.dim(),
        });
    }
    let skip = group
        .identity_index()
        .ok_or_else(|| Error::InvalidArgument("group has no identity element".into()))?;
    let conj: Vec<&Unitary> = group
        .elements()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != skip)
        .map(|(_, s)| s)
        .collect();

    let mut p = ControlProcedure::empty(h.dim_c(), h.dim_s());
    let Some(first) = conj.first() else {
        return Ok(p);
    };
    p.push(0.0, first.adjoint())?;
    for pair in conj.windows(2) {
        p.push(eps, &pair[1].adjoint() * pair[0])?;
    }
    p.push(eps, (*conj.last().expect("non-empty")).clone())?;
    Ok(p)
}

/// A product-formula evolution compared with its exact target.
#[derive(Clone, Debug)]
pub struct TrotterResult {
    pub unitary: Unitary,
    pub target: Unitary,
    /// Phase-aligned operator-norm distance between `unitary` and `target`.
    pub error: f64,
    /// `sum_{j<k} ||[c_j G_j, c_k G_k]|| / (2m)`.
    pub error_bound: f64,
}

/// `(prod_k e^{i c_k G_k / m})^m`, converging to `e^{i sum_k c_k G_k}`.
pub fn trotter_procedure(terms: &[(Hermitian, f64)], m: u64) -> Result<TrotterResult> {
    let (first, _) = terms
        .first()
        .ok_or_else(|| Error::InvalidArgument("trotter_procedure needs at least one term".into()))?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let dim = first.dim();
    if let Some((bad, _)) = terms.iter().find(|(g, _)| g.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let mut step = Unitary::identity(dim);
    let mut total = Hermitian::zeros(dim);
    for (g, c) in terms {
        step = &step * &crate::operator::expm(g, c / m as f64);
        total = total + g.scale(*c);
    }
    let unitary = step.pow(m);
    let target = crate::operator::expm(&total, 1.0);
    let error = phase_aligned_distance(unitary.matrix(), target.matrix());
    let mut bound = 0.0;
    for (j, (gj, cj)) in terms.iter().enumerate() {
        for (gk, ck) in &terms[j + 1..] {
            let c = gj.scale(*cj).commutator_i(&gk.scale(*ck));
            bound += spectral_norm(c.matrix());
        }
    }
    Ok(TrotterResult {
        unitary,
        target,
        error,
        error_bound: bound / (2.0 * m as f64),
    })
}

fn same_dim(a: &Hermitian, b: &Hermitian) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// One group-commutator factor `e^{iA/m} e^{iB/m} e^{-iA/m} e^{-iB/m}`.
pub fn commutator_step(a: &Hermitian, b: &Hermitian, m: u64) -> Result<Unitary> {
    same_dim(a, b)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let tau = 1.0 / m as f64;
    let (sa, sb) = (a.spectral(), b.spectral());
    Ok(&(&(&sa.exp_i(tau) * &sb.exp_i(tau)) * &sa.exp_i(-tau)) * &sb.exp_i(-tau))
}

/// `(e^{iA/m} e^{iB/m} e^{-iA/m} e^{-iB/m})^{m^2}`, converging to `e^{-[A,B]}`.
pub fn commutator_procedure(a: &Hermitian, b: &Hermitian, m: u64) -> Result<Unitary> {
    Ok(commutator_step(a, b, m)?.pow(m * m))
}

/// `e^{-[A,B]}`, computed as `exp(i C)` with the Hermitian `C = i[A,B]`.
pub fn commutator_target(a: &Hermitian, b: &Hermitian) -> Result<Unitary> {
    same_dim(a, b)?;
    Ok(crate::operator::expm(&a.commutator_i(b), 1.0))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
