//! Controller-based quantum non-demolition (CQND) measurements: pointer
//! constructions on the controller, their simulation, and composite schemes for
//! `A + B`, `i[A, B]` and `AB + BA` built from effective evolutions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::operator::{expm, tensor, CMatrix, CVector, Hermitian, Unitary, C64};
use crate::synthesis::commutator_step;

/// Relative tolerance for grouping eigenvalues into spectral projections.
pub const GROUPING_TOL: f64 = 1e-9;

/// How the joint evolution of a scheme is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    /// `exp(i G s)` of the effective Hamiltonian, exactly.
    Direct,
    /// Product-formula approximation with `m` steps.
    Sum { m: u64 },
    Commutator { m: u64 },
    Jordan { m: u64 },
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Sum { .. } => "sum",
            Self::Commutator { .. } => "commutator",
            Self::Jordan { .. } => "jordan",
        }
    }

    pub fn steps(&self) -> Option<u64> {
        match *self {
            Self::Direct => None,
            Self::Sum { m } | Self::Commutator { m } | Self::Jordan { m } => Some(m),
        }
    }
}

/// A pointer measurement on the system read out on the controller.
#[derive(Clone, Debug)]
pub struct MeasurementScheme {
    pub dim_c: usize,
    pub dim_s: usize,
    /// Target effective Hamiltonian on the joint space.
    pub effective_h: Hermitian,
    pub controller_init: CVector,
    pub evolution_time: f64,
    pub pointer_states: Vec<CVector>,
    /// Spectral projections of the measured observable, ascending eigenvalue.
    pub projections: Vec<Hermitian>,
    pub eigenvalues: Vec<f64>,
    /// The measured observable itself.
    pub observable: Hermitian,
    /// Approximate joint unitary replacing `exp(i G s)` for composite schemes.
    pub evolution: Option<Unitary>,
    pub kind: SchemeKind,
    /// False when no evolution time makes the pointer states exactly orthogonal.
    pub exact_pointers: bool,
    /// Assumptions made while building the scheme.
    pub provenance: Vec<String>,
}

/// Result of simulating a scheme on one system state.
#[derive(Clone, Debug)]
pub struct MeasurementResult {
    pub probabilities: Vec<f64>,
    /// `<psi|P_j|psi>` for comparison.
    pub born: Vec<f64>,
    /// Normalized conditional system states; `None` for zero-probability outcomes.
    pub post_states: Vec<Option<CVector>>,
    /// Gram matrix of the pointer states.
    pub pointer_overlaps: CMatrix,
    /// Probability weight not captured by any pointer state.
    pub unassigned: f64,
}

impl MeasurementResult {
    /// Total-variation distance to the Born distribution, counting unassigned
    /// weight as an extra outcome of exact probability zero.
    pub fn tv_distance(&self) -> f64 {
        tv_distance(&self.probabilities, &self.born) + 0.5 * self.unassigned.max(0.0)
    }
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Distinct eigenvalues (ascending) and their spectral projections.
pub fn spectral_projections(a: &Hermitian) -> (Vec<f64>, Vec<Hermitian>) {
    let sp = a.spectral();
    let scale = sp.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut values: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in sp.values.iter().enumerate() {
        match values.last() {
            Some(&last) if (v - last).abs() <= GROUPING_TOL * scale => groups.last_mut().expect("paired").push(k),
            _ => {
                values.push(v);
                groups.push(vec![k]);
            }
        }
    }
    let n = a.dim();
    let projections = groups
        .iter()
        .map(|g| {
            let mut p = CMatrix::zeros(n, n);
            for &k in g {
                let v = sp.eigenvector(k);
                p += &v * v.adjoint();
            }
            Hermitian::symmetrized(p)
        })
        .collect();
    // report each group by its mean eigenvalue
    let values = groups
        .iter()
        .map(|g| g.iter().map(|&k| sp.values[k]).sum::<f64>() / g.len() as f64)
        .collect();
    (values, projections)
}

/// `diag(1..n) - (n+1)/2`, the traceless pointer generator.
pub fn pointer_generator(n: usize) -> Hermitian {
    let c = (n as f64 + 1.0) / 2.0;
    Hermitian::diagonal(&(1..=n).map(|l| l as f64 - c).collect::<Vec<_>>())
}

/// `(1, ..., 1)/sqrt(n)`.
pub fn uniform_state(n: usize) -> CVector {
    CVector::from_element(n, C64::new(1.0 / (n as f64).sqrt(), 0.0))
}

fn pointer(k: &Hermitian, label: f64, s: f64, phi: &CVector) -> CVector {
    // k is diagonal
    CVector::from_fn(phi.len(), |l, _| phi[l] * C64::from_polar(1.0, label * k.matrix()[(l, l)].re * s))
}

fn check_outcomes(k: usize, dim_c: usize) -> Result<()> {
    if k > dim_c {
        return Err(Error::TooManyOutcomes { outcomes: k, dim_c });
    }
    Ok(())
}

/// Pointer measurement of `a` with `G = sum_j j D (x) P_j` run for `s = 2 pi / n`.
pub fn build_cqnd_scheme(a: &Hermitian, dim_c: usize) -> Result<MeasurementScheme> {
    if dim_c == 0 {
        return Err(Error::Empty);
    }
    let (eigenvalues, projections) = spectral_projections(a);
    check_outcomes(projections.len(), dim_c)?;
    let d = pointer_generator(dim_c);
    let s = 2.0 * PI / dim_c as f64;
    let mut effective_h = Hermitian::zeros(dim_c * a.dim());
    for (j, p) in projections.iter().enumerate() {
        effective_h = effective_h + tensor(&d, p).scale((j + 1) as f64);
    }
    let phi = uniform_state(dim_c);
    let pointer_states = (1..=projections.len()).map(|j| pointer(&d, j as f64, s, &phi)).collect();
    Ok(MeasurementScheme {
        dim_c,
        dim_s: a.dim(),
        effective_h,
        controller_init: phi,
        evolution_time: s,
        pointer_states,
        projections,
        eigenvalues,
        observable: a.clone(),
        evolution: None,
        kind: SchemeKind::Direct,
        exact_pointers: true,
        provenance: Vec::new(),
    })
}

/// Evolution time `s` making `exp(i lambda_j K s) phi` orthogonal, for `K` a
/// permutation of `D` and the given distinct eigenvalues.
///
/// Looks for a gap `g` such that all differences are integer multiples of `g`
/// with distinct residues mod `n`; then `s = 2 pi / (n g)`.
fn pointer_time(values: &[f64], n: usize) -> (f64, bool) {
    if values.len() < 2 {
        return (2.0 * PI / n as f64, true);
    }
    let base = values[0];
    let min_gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::MAX, f64::min);
    for r in 1..=n {
        let g = min_gap / r as f64;
        let mut residues = Vec::with_capacity(values.len());
        let mut ok = true;
        for v in values {
            let q = (v - base) / g;
            let k = q.round();
            if (q - k).abs() > 1e-7 * q.abs().max(1.0) {
                ok = false;
                break;
            }
            residues.push((k as i64).rem_euclid(n as i64));
        }
        if ok {
            residues.sort_unstable();
            residues.dedup();
            if residues.len() == values.len() {
                return (2.0 * PI / (n as f64 * g), true);
            }
        }
    }
    (2.0 * PI / (n as f64 * min_gap), false)
}

/// A scheme with effective Hamiltonian `K (x) c` and joint evolution `evolution`.
fn composite(
    k: Hermitian,
    c: Hermitian,
    s: f64,
    exact: bool,
    evolution: Unitary,
    kind: SchemeKind,
    provenance: Vec<String>,
) -> Result<MeasurementScheme> {
    let dim_c = k.dim();
    let (eigenvalues, projections) = spectral_projections(&c);
    check_outcomes(projections.len(), dim_c)?;
    let phi = uniform_state(dim_c);
    let pointer_states = eigenvalues.iter().map(|&l| pointer(&k, l, s, &phi)).collect();
    Ok(MeasurementScheme {
        dim_c,
        dim_s: c.dim(),
        effective_h: tensor(&k, &c),
        controller_init: phi,
        evolution_time: s,
        pointer_states,
        projections,
        eigenvalues,
        observable: c,
        evolution: Some(evolution),
        kind,
        exact_pointers: exact,
        provenance,
    })
}

const RETARGET_NOTE: &str =
    "controller-side retargeting of the coupling operators is applied at the effective-Hamiltonian level, not expanded into pulses";

fn check_pair(h_a: (&Hermitian, &Hermitian), h_b: (&Hermitian, &Hermitian)) -> Result<(usize, usize)> {
    let (dim_c, dim_s) = (h_a.0.dim(), h_a.1.dim());
    for (x, want) in [(h_b.0, dim_c), (h_b.1, dim_s)] {
        if x.dim() != want {
            return Err(Error::DimensionMismatch { expected: want, found: x.dim() });
        }
    }
    if dim_c < 2 {
        return Err(Error::InvalidArgument("controller dimension must be >= 2".into()));
    }
    Ok((dim_c, dim_s))
}

fn observable_time(c: &Hermitian, dim_c: usize) -> Result<(f64, bool)> {
    let (values, _) = spectral_projections(c);
    check_outcomes(values.len(), dim_c)?;
    Ok(pointer_time(&values, dim_c))
}

/// Measures `a + b` via symmetric splitting of `e^{i s D (x) (a + b)}` into
/// `m` steps `e^{i s D(x)a / 2m} e^{i s D(x)b / m} e^{i s D(x)a / 2m}`.
pub fn scheme_sum(
    h_a: (&Hermitian, &Hermitian),
    h_b: (&Hermitian, &Hermitian),
    m: u64,
) -> Result<MeasurementScheme> {
    let (dim_c, _) = check_pair(h_a, h_b)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let c = h_a.1 + h_b.1;
    let (s, exact) = observable_time(&c, dim_c)?;
    let d = pointer_generator(dim_c);
    let (xa, xb) = (tensor(&d, h_a.1), tensor(&d, h_b.1));
    let half = expm(&xa, s / (2.0 * m as f64));
    let step = &(&half * &expm(&xb, s / m as f64)) * &half;
    composite(
        d,
        c,
        s,
        exact,
        step.pow(m),
        SchemeKind::Sum { m },
        vec![RETARGET_NOTE.into(), "symmetric product-formula steps".into()],
    )
}

/// Diagonal traceless `G` such that `D G` is a permutation of `D`.
///
/// Odd `n`: `D` has a zero in the middle, so `G = 1` except `-(n-1)` there.
/// Even `n`: search the permutations for one with `sum_l pi(D)_l / D_l = 0`.
pub fn companion_generator(n: usize) -> Result<Hermitian> {
    let d: Vec<f64> = (1..=n).map(|l| l as f64 - (n as f64 + 1.0) / 2.0).collect();
    if n % 2 == 1 {
        let mut g = vec![1.0; n];
        g[n / 2] = -(n as f64 - 1.0);
        return Ok(Hermitian::diagonal(&g));
    }
    if n <= 10 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut found = None;
        heap_permutations(&mut perm, n, &mut |p| {
            let g: Vec<f64> = (0..n).map(|l| d[p[l]] / d[l]).collect();
            if g.iter().sum::<f64>().abs() < 1e-12 {
                found = Some(g);
                true
            } else {
                false
            }
        });
        if let Some(g) = found {
            return Ok(Hermitian::diagonal(&g));
        }
    }
    Err(Error::InvalidArgument(format!(
        "no diagonal traceless companion for the pointer generator at controller dimension {n}"
    )))
}

/// Heap's algorithm; stops once `visit` returns true.
fn heap_permutations(p: &mut [usize], k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if k <= 1 {
        return visit(p);
    }
    for i in 0..k - 1 {
        if heap_permutations(p, k - 1, visit) {
            return true;
        }
        if k.is_multiple_of(2) {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
    heap_permutations(p, k - 1, visit)
}

/// `C(tau/sqrt2) C(-tau/sqrt2)` with `C` the group commutator, which has the
/// same `tau^2` generator as `C(tau)` but no `tau^3` term.
fn balanced_commutator_step(x: &Hermitian, y: &Hermitian, tau: f64) -> Result<Unitary> {
    let t = tau / std::f64::consts::SQRT_2;
    Ok(&scaled_commutator_step(x, y, t)? * &scaled_commutator_step(x, y, -t)?)
}

fn scaled_commutator_step(x: &Hermitian, y: &Hermitian, tau: f64) -> Result<Unitary> {
    // commutator_step(a, b, 1) = e^{ia} e^{ib} e^{-ia} e^{-ib}
    commutator_step(&x.scale(tau), &y.scale(tau), 1)
}

/// Measures `i[a, b]` through the group commutator of `D (x) a` and `G (x) b`,
/// whose generator is `DG (x) i[a, b]`.
pub fn scheme_commutator(
    h_a: (&Hermitian, &Hermitian),
    h_b: (&Hermitian, &Hermitian),
    m: u64,
) -> Result<MeasurementScheme> {
    let (dim_c, _) = check_pair(h_a, h_b)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let c = h_a.1.commutator_i(h_b.1);
    let (s, exact) = observable_time(&c, dim_c)?;
    let d = pointer_generator(dim_c);
    let g = companion_generator(dim_c)?;
    let k = Hermitian::symmetrized(d.matrix() * g.matrix());
    let x = tensor(&d, h_a.1);
    let y = tensor(&g, h_b.1);
    let tau = s.sqrt() / m as f64;
    let step = balanced_commutator_step(&x, &y, tau)?;
    let evolution = step.pow(m * m);
    composite(
        k,
        c,
        s,
        exact,
        evolution,
        SchemeKind::Commutator { m },
        vec![RETARGET_NOTE.into(), "balanced group-commutator steps".into()],
    )
}

/// Real and imaginary nearest-neighbour hoppings `E', F'` with `i[E', F'] = D`.
pub fn hopping_pair(n: usize) -> (Hermitian, Hermitian) {
    let d: Vec<f64> = (1..=n).map(|l| l as f64 - (n as f64 + 1.0) / 2.0).collect();
    let mut e = CMatrix::zeros(n, n);
    let mut f = CMatrix::zeros(n, n);
    let mut partial = 0.0;
    for l in 0..n.saturating_sub(1) {
        partial += d[l];
        let h = (-0.5 * partial).max(0.0).sqrt();
        e[(l, l + 1)] = C64::new(h, 0.0);
        e[(l + 1, l)] = C64::new(h, 0.0);
        f[(l, l + 1)] = C64::new(0.0, -h);
        f[(l + 1, l)] = C64::new(0.0, h);
    }
    (Hermitian::symmetrized(e), Hermitian::symmetrized(f))
}

/// Measures `ab + ba` from the two cross commutators
/// `i[E'(x)a, F'(x)b] + i[E'(x)b, F'(x)a] = i[E', F'] (x) (ab + ba)`.
pub fn scheme_jordan(
    h_a: (&Hermitian, &Hermitian),
    h_b: (&Hermitian, &Hermitian),
    m: u64,
) -> Result<MeasurementScheme> {
    let (dim_c, _) = check_pair(h_a, h_b)?;
    if h_a.0.commutator_i(h_b.0).norm() <= 1e-12 * (1.0 + h_a.0.norm() * h_b.0.norm()) {
        return Err(Error::InvalidArgument(
            "the controller operators E and F must not commute".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let c = h_a.1.jordan(h_b.1).scale(2.0);
    let (s, exact) = observable_time(&c, dim_c)?;
    let (e, f) = hopping_pair(dim_c);
    let (a, b) = (h_a.1, h_b.1);
    let tau = s.sqrt() / m as f64;
    let step = &balanced_commutator_step(&tensor(&e, a), &tensor(&f, b), tau)?
        * &balanced_commutator_step(&tensor(&e, b), &tensor(&f, a), tau)?;
    let evolution = step.pow(m * m);
    composite(
        pointer_generator(dim_c),
        c,
        s,
        exact,
        evolution,
        SchemeKind::Jordan { m },
        vec![RETARGET_NOTE.into(), "balanced group-commutator steps".into()],
    )
}

impl MeasurementScheme {
    /// The joint unitary run by the scheme.
    pub fn joint_evolution(&self) -> Unitary {
        match &self.evolution {
            Some(u) => u.clone(),
            None => expm(&self.effective_h, self.evolution_time),
        }
    }

    /// Gram matrix of the pointer states.
    pub fn pointer_overlaps(&self) -> CMatrix {
        let k = self.pointer_states.len();
        CMatrix::from_fn(k, k, |i, j| self.pointer_states[i].dotc(&self.pointer_states[j]))
    }

    /// Largest off-diagonal pointer overlap modulus.
    pub fn pointer_defect(&self) -> f64 {
        let g = self.pointer_overlaps();
        let mut worst = 0.0f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                if i != j {
                    worst = worst.max(g[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// `||P_j P_k - delta_jk P_j||` and `||sum P_j - 1||`, worst case.
    pub fn projection_defect(&self) -> f64 {
        let n = self.dim_s;
        let mut worst = 0.0f64;
        let mut sum = CMatrix::zeros(n, n);
        for (j, p) in self.projections.iter().enumerate() {
            sum += p.matrix();
            for (k, q) in self.projections.iter().enumerate() {
                let prod = p.matrix() * q.matrix();
                let target = if j == k { p.matrix().clone() } else { CMatrix::zeros(n, n) };
                worst = worst.max((prod - target).norm());
            }
        }
        worst.max((sum - CMatrix::identity(n, n)).norm())
    }
}

fn joint_product(phi: &CVector, psi: &CVector) -> CVector {
    phi.kronecker(psi)
}

/// `(<chi| (x) 1) state` on the system.
fn contract_controller(chi: &CVector, state: &CVector, dim_s: usize) -> CVector {
    CVector::from_fn(dim_s, |s, _| {
        (0..chi.len()).map(|c| chi[c].conj() * state[c * dim_s + s]).sum()
    })
}

fn require_unit(psi: &CVector, dim: usize) -> Result<()> {
    if psi.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Runs the scheme on `phi (x) psi` and reads the controller in the pointer basis.
pub fn simulate_measurement(scheme: &MeasurementScheme, psi: &CVector) -> Result<MeasurementResult> {
    require_unit(psi, scheme.dim_s)?;
    let state = scheme.joint_evolution().apply(&joint_product(&scheme.controller_init, psi));
    let mut probabilities = Vec::new();
    let mut post_states = Vec::new();
    for chi in &scheme.pointer_states {
        let v = contract_controller(chi, &state, scheme.dim_s);
        let p = v.norm_squared();
        probabilities.push(p);
        post_states.push(if p > 1e-14 { Some(v.unscale(p.sqrt())) } else { None });
    }
    let born = scheme.projections.iter().map(|p| p.expectation(psi)).collect();
    let unassigned = 1.0 - probabilities.iter().sum::<f64>();
    Ok(MeasurementResult {
        probabilities,
        born,
        post_states,
        pointer_overlaps: scheme.pointer_overlaps(),
        unassigned,
    })
}

/// Largest `1 - ||(1 (x) |psi><psi|) e^{iGr} (phi (x) psi)||^2` over eigenvectors
/// `psi` of `a` and `n_times` evenly spaced `r` in `(0, s]`.
pub fn cqnd_check(scheme: &MeasurementScheme, a: &Hermitian, n_times: usize) -> Result<f64> {
    if a.dim() != scheme.dim_s {
        return Err(Error::DimensionMismatch { expected: scheme.dim_s, found: a.dim() });
    }
    let spec_g = scheme.effective_h.spectral();
    let spec_a = a.spectral();
    let mut worst = 0.0f64;
    for t in 1..=n_times.max(1) {
        let r = scheme.evolution_time * t as f64 / n_times.max(1) as f64;
        let u = spec_g.exp_i(r);
        for k in 0..a.dim() {
            let psi = spec_a.eigenvector(k);
            let state = u.apply(&joint_product(&scheme.controller_init, &psi));
            // project the system factor onto psi
            let mut kept = 0.0;
            for c in 0..scheme.dim_c {
                let amp: C64 = (0..scheme.dim_s)
                    .map(|s| psi[s].conj() * state[c * scheme.dim_s + s])
                    .sum();
                kept += amp.norm_sqr();
            }
            worst = worst.max(1.0 - kept);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::{gell_mann, sigma_x, sigma_y, sigma_z};
    use crate::random::OperatorSampler;

    fn ket(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn pointer_generator_is_traceless() {
        for n in 2..7 {
            assert!(pointer_generator(n).trace().abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_z_scheme() {
        let s = build_cqnd_scheme(&sigma_z(), 3).unwrap();
        assert_eq!(s.projections.len(), 2);
        assert!(s.pointer_defect() <= 1e-10);
        assert!(s.projection_defect() <= 1e-10);
        assert!((s.controller_init.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_has_one_outcome() {
        let s = build_cqnd_scheme(&Hermitian::identity(2), 3).unwrap();
        assert_eq!(s.pointer_states.len(), 1);
        let r = simulate_measurement(&s, &ket(&[0.6, 0.8])).unwrap();
        assert!((r.probabilities[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_is_grouped() {
        let s = build_cqnd_scheme(&Hermitian::diagonal(&[5.0, 5.0, -1.0]), 3).unwrap();
        assert_eq!(s.projections.len(), 2);
        assert!((s.projections[0].trace() - 1.0).abs() < 1e-12);
        assert!((s.projections[1].trace() - 2.0).abs() < 1e-12);
        assert_eq!(s.eigenvalues, vec![-1.0, 5.0]);
    }

    #[test]
    fn too_many_outcomes_rejected() {
        let a = Hermitian::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(build_cqnd_scheme(&a, 3), Err(Error::TooManyOutcomes { .. })));
        assert!(build_cqnd_scheme(&a, 4).is_ok());
    }

    #[test]
    fn born_rule_examples() {
        let s = build_cqnd_scheme(&sigma_z(), 3).unwrap();
        let r = simulate_measurement(&s, &ket(&[1.0, 0.0])).unwrap();
        assert!((r.probabilities[1] - 1.0).abs() < 1e-12);

        let h = 0.5f64.sqrt();
        let r = simulate_measurement(&s, &ket(&[h, h])).unwrap();
        assert!((r.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((r.probabilities[1] - 0.5).abs() < 1e-12);

        let th = PI / 6.0;
        let r = simulate_measurement(&s, &ket(&[th.cos(), th.sin()])).unwrap();
        // ascending eigenvalues: -1 (|1>) first
        assert!((r.probabilities[0] - 0.25).abs() < 1e-12);
        assert!((r.probabilities[1] - 0.75).abs() < 1e-12);

        assert!(matches!(
            simulate_measurement(&s, &ket(&[1.0, 1.0])),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn born_rule_and_repeatability_on_random_states() {
        let mut rng = OperatorSampler::new(21);
        for (dim_s, dim_c) in [(2usize, 3usize), (3, 3), (3, 4)] {
            let a = rng.hermitian(dim_s);
            let s = build_cqnd_scheme(&a, dim_c).unwrap();
            for _ in 0..50 {
                let psi = rng.state(dim_s);
                let r = simulate_measurement(&s, &psi).unwrap();
                for (p, q) in r.probabilities.iter().zip(&r.born) {
                    assert!((p - q).abs() <= 1e-9);
                }
                for (j, post) in r.post_states.iter().enumerate() {
                    if let Some(post) = post {
                        let again = simulate_measurement(&s, post).unwrap();
                        assert!(again.probabilities[j] >= 1.0 - 1e-9);
                        let expected = s.projections[j].apply(&psi);
                        let overlap = expected.dotc(post).norm() / expected.norm();
                        assert!((overlap - 1.0).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn cqnd_property_holds_for_built_schemes() {
        let s = build_cqnd_scheme(&sigma_z(), 3).unwrap();
        assert!(cqnd_check(&s, &sigma_z(), 20).unwrap() <= 1e-9);
        assert!(cqnd_check(&s, &sigma_z(), 1).unwrap() <= 1e-9);
        let a = Hermitian::diagonal(&[5.0, 5.0, -1.0]);
        let s = build_cqnd_scheme(&a, 4).unwrap();
        assert!(cqnd_check(&s, &a, 20).unwrap() <= 1e-9);
    }

    #[test]
    fn non_commuting_generator_disturbs() {
        let mut s = build_cqnd_scheme(&sigma_z(), 3).unwrap();
        s.effective_h = tensor(&pointer_generator(3), &sigma_x());
        assert!(cqnd_check(&s, &sigma_z(), 20).unwrap() > 0.1);
    }

    #[test]
    fn pointer_time_finds_common_gaps() {
        let (s, exact) = pointer_time(&[-2.0f64.sqrt(), 2.0f64.sqrt()], 3);
        assert!(exact);
        assert!((s - 2.0 * PI / (3.0 * 2.0 * 2.0f64.sqrt())).abs() < 1e-12);
        // gaps 1 and 2 need g = 1
        let (_, exact) = pointer_time(&[0.0, 1.0, 3.0], 4);
        assert!(exact);
        // incommensurate gaps
        let (_, exact) = pointer_time(&[0.0, 1.0, 1.0 + 2.0f64.sqrt()], 3);
        assert!(!exact);
    }

    #[test]
    fn companions_permute_d() {
        for n in [3usize, 4, 5, 7] {
            let g = companion_generator(n).unwrap();
            assert!(g.trace().abs() < 1e-12);
            let mut dg: Vec<f64> = (0..n).map(|l| (pointer_generator(n).matrix() * g.matrix())[(l, l)].re).collect();
            dg.sort_by(f64::total_cmp);
            let d: Vec<f64> = (0..n).map(|l| pointer_generator(n).matrix()[(l, l)].re).collect();
            for (x, y) in dg.iter().zip(&d) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert!(companion_generator(2).is_err());
    }

    #[test]
    fn hopping_pair_generates_d() {
        for n in 2..7 {
            let (e, f) = hopping_pair(n);
            assert!((e.commutator_i(&f) - pointer_generator(n)).norm() < 1e-12, "n={n}");
        }
    }

    fn born_tv(s: &MeasurementScheme, psi: &CVector) -> f64 {
        simulate_measurement(s, psi).unwrap().tv_distance()
    }

    #[test]
    fn sum_scheme_converges() {
        let e = gell_mann(3);
        let ms = [8u64, 16, 32, 64];
        let psi = ket(&[1.0, 0.0]);
        let tvs: Vec<f64> = ms
            .iter()
            .map(|&m| born_tv(&scheme_sum((&e, &sigma_z()), (&e, &sigma_x()), m).unwrap(), &psi))
            .collect();
        assert!(tvs.windows(2).all(|w| w[1] < w[0]), "{tvs:?}");
        assert!(tvs[3] <= 1e-3, "{tvs:?}");
        let s = scheme_sum((&e, &sigma_z()), (&e, &sigma_x()), 64).unwrap();
        let r = simulate_measurement(&s, &psi).unwrap();
        let c = (PI / 8.0).cos().powi(2);
        // ascending: the -sqrt2 eigenvector carries sin^2
        assert!((r.born[0] - (1.0 - c)).abs() < 1e-12);
        assert!((r.born[1] - c).abs() < 1e-12);
    }

    #[test]
    fn sum_scheme_degenerate_cases() {
        let e = gell_mann(3);
        let s = scheme_sum((&e, &sigma_z()), (&e, &Hermitian::zeros(2)), 3).unwrap();
        assert_eq!(s.projections.len(), 2);
        assert!(born_tv(&s, &ket(&[0.6, 0.8])) < 1e-12);
        let s = scheme_sum((&e, &sigma_z()), (&e, &Hermitian::diagonal(&[0.5, -1.0])), 1).unwrap();
        assert!(born_tv(&s, &ket(&[0.6, 0.8])) < 1e-12);
    }

    #[test]
    fn commutator_scheme_converges() {
        let e = gell_mann(3);
        let psi = ket(&[0.6, 0.8]);
        let ms = [8u64, 16, 32, 64];
        let tvs: Vec<f64> = ms
            .iter()
            .map(|&m| born_tv(&scheme_commutator((&e, &sigma_x()), (&e, &sigma_y()), m).unwrap(), &psi))
            .collect();
        assert!(tvs.windows(2).all(|w| w[1] < w[0]), "{tvs:?}");
        assert!(tvs[3] <= 1e-3, "{tvs:?}");
        let s = scheme_commutator((&e, &sigma_x()), (&e, &sigma_y()), 8).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] + 2.0).abs() < 1e-12 && (s.eigenvalues[1] - 2.0).abs() < 1e-12);
        assert!((s.observable.clone() - sigma_z().scale(-2.0)).norm() < 1e-12);
    }

    #[test]
    fn commutator_scheme_on_gell_mann() {
        let e = gell_mann(3);
        let s = scheme_commutator((&e, &gell_mann(1)), (&e, &gell_mann(2)), 32).unwrap();
        assert!((s.observable.clone() - gell_mann(3).scale(-2.0)).norm() < 1e-12);
        let psi = OperatorSampler::new(5).state(3);
        assert!(born_tv(&s, &psi) <= 1e-2);
    }

    #[test]
    fn commuting_pair_gives_single_outcome() {
        let e = gell_mann(3);
        let s = scheme_commutator((&e, &sigma_z()), (&e, &sigma_z()), 4).unwrap();
        assert_eq!(s.projections.len(), 1);
    }

    #[test]
    fn jordan_scheme_converges() {
        let (e, f) = (gell_mann(1), gell_mann(2));
        let psi = OperatorSampler::new(7).state(3);
        let ms = [8u64, 16, 32, 64];
        let tvs: Vec<f64> = ms
            .iter()
            .map(|&m| born_tv(&scheme_jordan((&e, &gell_mann(1)), (&f, &gell_mann(4)), m).unwrap(), &psi))
            .collect();
        assert!(tvs.windows(2).all(|w| w[1] < w[0]), "{tvs:?}");
        assert!(tvs[3] <= 1e-3, "{tvs:?}");
        let s = scheme_jordan((&e, &gell_mann(1)), (&f, &gell_mann(4)), 8).unwrap();
        assert!((s.observable.clone() - gell_mann(6)).norm() < 1e-12);
    }

    #[test]
    fn jordan_scheme_degenerate_and_invalid() {
        let (e, f) = (gell_mann(1), gell_mann(2));
        let s = scheme_jordan((&e, &sigma_x()), (&f, &sigma_y()), 4).unwrap();
        assert_eq!(s.projections.len(), 1);
        let s = scheme_jordan((&e, &sigma_x()), (&f, &sigma_x()), 4).unwrap();
        assert_eq!(s.projections.len(), 1);
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-12);
        let err = scheme_jordan((&e, &sigma_x()), (&e, &sigma_y()), 4).unwrap_err();
        assert!(err.to_string().contains("must not commute"));
    }

    #[test]
    fn equidistant_duality() {
        // G = D (x) A with equidistant spectra on both sides
        let n = 3;
        let d = pointer_generator(n);
        let a = Hermitian::diagonal(&[-1.0, 0.0, 1.0]);
        let g = tensor(&d, &a);
        let s = 2.0 * PI / n as f64;
        let psi = OperatorSampler::new(3).state(3);
        // D eigenvector: the controller stays put, the system picks up e^{iA lambda s}
        for l in 0..n {
            let mut chi = CVector::zeros(n);
            chi[l] = C64::new(1.0, 0.0);
            let lambda = d.matrix()[(l, l)].re;
            let out = expm(&g, s).apply(&chi.kronecker(&psi));
            let expected = chi.kronecker(&expm(&a, lambda * s).apply(&psi));
            assert!((out.dotc(&expected).norm() - 1.0).abs() <= 1e-9);
        }
        // uniform initialization: orthogonal pointers
        let phi = uniform_state(n);
        let pointers: Vec<CVector> = [-1.0, 0.0, 1.0].iter().map(|&l| pointer(&d, l, s, &phi)).collect();
        for i in 0..n {
            for j in 0..i {
                assert!(pointers[i].dotc(&pointers[j]).norm() <= 1e-9);
            }
        }
    }
}
