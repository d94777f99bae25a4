//! Closure engines: the real Lie algebra generated under `(X, Y) -> i[X, Y]`, and
//! the Hermitian part of the unital *-algebra generated under the Jordan product
//! together with `i[X, Y]`.
//!
//! Both engines share one FIFO sweep. Each newly accepted basis element is
//! combined with every element present when it is dequeued; the products go
//! through Gram–Schmidt and accepted residuals join the queue. A pair `(X, Y)` is
//! always visited once the later of the two is dequeued.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::operator::Hermitian;
use crate::subspace::{coords, OperatorSubspace};
use crate::tolerance::Tolerances;

/// Result of a closure computation.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub result: OperatorSubspace,
    /// Sweep rounds performed; round `k` processes the elements accepted in round `k - 1`.
    pub generations: usize,
    /// False only if the generation cap was hit with work still queued.
    pub saturated: bool,
}

fn common_dim(generators: &[Hermitian]) -> Result<usize> {
    let dim = generators
        .first()
        .map(Hermitian::dim)
        .ok_or_else(|| Error::InvalidArgument("closure needs at least one generator".into()))?;
    for g in generators {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
    }
    Ok(dim)
}

fn close<F>(
    dim: usize,
    seeds: &[Hermitian],
    full_dim: usize,
    tol: &Tolerances,
    products: F,
) -> ClosureReport
where
    F: Fn(&Hermitian, &Hermitian) -> Vec<Hermitian>,
{
    let mut space = OperatorSubspace::empty(dim);
    let mut queue = VecDeque::new();
    for s in seeds {
        if s.norm() <= tol.zero {
            continue;
        }
        if space.extend_coords(coords(s), tol.rank).accepted {
            queue.push_back(space.dim() - 1);
        }
    }

    let cap = dim * dim;
    let mut generations = 0;
    while !queue.is_empty() && space.dim() < full_dim {
        if generations == cap {
            return ClosureReport {
                result: space,
                generations,
                saturated: false,
            };
        }
        generations += 1;
        let round: Vec<usize> = queue.drain(..).collect();
        'round: for idx in round {
            let x = space.basis()[idx].clone();
            let visible = space.dim();
            for j in 0..visible {
                let y = space.basis()[j].clone();
                for candidate in products(&x, &y) {
                    if candidate.norm() <= tol.zero {
                        continue;
                    }
                    if space.extend_coords_scaled(coords(&candidate), tol.rank, 1.0).accepted {
                        queue.push_back(space.dim() - 1);
                        if space.dim() == full_dim {
                            break 'round;
                        }
                    }
                }
            }
        }
    }

    ClosureReport {
        result: space,
        generations,
        saturated: true,
    }
}

/// Smallest real span containing `generators` and closed under `i[., .]`.
///
/// Generators must be traceless; the search stops early once the span reaches
/// `dim^2 - 1`, the whole traceless Hermitian space.
pub fn lie_closure(generators: &[Hermitian], tol: &Tolerances) -> Result<ClosureReport> {
    let dim = common_dim(generators)?;
    for g in generators {
        let trace = g.trace();
        if trace.abs() > 1e-10 * g.norm().max(1.0) {
            return Err(Error::NotTraceless { trace: trace.abs() });
        }
    }
    Ok(close(dim, generators, dim * dim - 1, tol, |x, y| {
        vec![x.commutator_i(y)]
    }))
}

/// Hermitian part of the unital complex *-algebra generated by `generators`.
pub fn star_closure(generators: &[Hermitian], tol: &Tolerances) -> Result<OperatorSubspace> {
    Ok(star_closure_report(generators, tol)?.result)
}

/// [`star_closure`] with sweep diagnostics.
pub fn star_closure_report(generators: &[Hermitian], tol: &Tolerances) -> Result<ClosureReport> {
    let dim = common_dim(generators)?;
    let mut seeds = vec![Hermitian::identity(dim)];
    seeds.extend(generators.iter().cloned());
    Ok(close(dim, &seeds, dim * dim, tol, |x, y| {
        vec![x.jordan(y), x.commutator_i(y)]
    }))
}

/// Real span of `i[X, Y]` over basis pairs of the two spaces.
pub fn commutator_span(
    a: &OperatorSubspace,
    b: &OperatorSubspace,
    tol: &Tolerances,
) -> Result<OperatorSubspace> {
    if a.dim_matrix() != b.dim_matrix() {
        return Err(Error::DimensionMismatch {
            expected: a.dim_matrix(),
            found: b.dim_matrix(),
        });
    }
    let mut out = OperatorSubspace::empty(a.dim_matrix());
    for x in a.basis() {
        for y in b.basis() {
            let c = x.commutator_i(y);
            if c.norm() > tol.zero {
                out.extend_coords_scaled(coords(&c), tol.rank, 1.0);
            }
        }
    }
    Ok(out)
}

/// Largest membership residual of `i[X, Y]` over basis pairs; zero for a Lie algebra.
pub fn lie_defect(space: &OperatorSubspace) -> Result<f64> {
    pairwise_defect(space, |x, y| vec![x.commutator_i(y)])
}

/// Largest membership residual of `X^2` and `i[X, Y]` over the basis; zero for
/// the Hermitian part of a *-algebra.
pub fn star_defect(space: &OperatorSubspace) -> Result<f64> {
    let mut worst = pairwise_defect(space, |x, y| vec![x.commutator_i(y)])?;
    for x in space.basis() {
        let sq = x.jordan(x);
        worst = worst.max(space.residual(&sq)?);
    }
    Ok(worst)
}

fn pairwise_defect<F>(space: &OperatorSubspace, products: F) -> Result<f64>
where
    F: Fn(&Hermitian, &Hermitian) -> Vec<Hermitian>,
{
    let basis = space.basis();
    let mut worst = 0.0f64;
    for (i, x) in basis.iter().enumerate() {
        for y in &basis[..i] {
            for c in products(x, y) {
                if c.norm() > 1e-12 {
                    worst = worst.max(space.residual(&c)?);
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::{gell_mann, hermitian_basis, sigma_x, sigma_y, sigma_z, traceless_basis};
    use crate::operator::tensor;
    use crate::random::OperatorSampler;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn su2_from_two_paulis() {
        let r = lie_closure(&[sigma_x(), sigma_y()], &tol()).unwrap();
        assert_eq!(r.result.dim(), 3);
        assert!(r.saturated);
    }

    #[test]
    fn single_generator_is_abelian() {
        let r = lie_closure(&[sigma_z()], &tol()).unwrap();
        assert_eq!(r.result.dim(), 1);
        assert!(r.saturated);
    }

    #[test]
    fn xy_interface_algebra_has_ten_dimensions() {
        let i2 = Hermitian::identity(2);
        let h = tensor(&sigma_x(), &sigma_x()) + tensor(&sigma_y(), &sigma_y());
        let gens = vec![
            tensor(&sigma_x(), &i2),
            tensor(&sigma_y(), &i2),
            tensor(&sigma_z(), &i2),
            h,
        ];
        let r = lie_closure(&gens, &tol()).unwrap();
        assert_eq!(r.result.dim(), 10);
    }

    #[test]
    fn lie_closure_rejects_trace() {
        let err = lie_closure(&[Hermitian::identity(2)], &tol()).unwrap_err();
        assert!(matches!(err, Error::NotTraceless { .. }));
    }

    #[test]
    fn lie_closure_rejects_mixed_dimensions() {
        let err = lie_closure(&[sigma_x(), gell_mann(1)], &tol()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn star_closure_examples() {
        assert_eq!(star_closure(&[sigma_x()], &tol()).unwrap().dim(), 2);
        assert_eq!(star_closure(&[sigma_x(), sigma_z()], &tol()).unwrap().dim(), 4);
        assert_eq!(star_closure(&[Hermitian::identity(2)], &tol()).unwrap().dim(), 1);
    }

    /// Independent oracle: span of all words of length <= 2 in {1, sx, sz},
    /// split into Hermitian and anti-Hermitian parts.
    #[test]
    fn star_closure_matches_word_enumeration() {
        let gens = [Hermitian::identity(2), sigma_x(), sigma_z()];
        let mut words = Vec::new();
        for a in &gens {
            for b in &gens {
                let w = a.matrix() * b.matrix();
                let herm = (&w + w.adjoint()).scale(0.5);
                let anti = (&w - w.adjoint()) * crate::operator::C64::new(0.0, -0.5);
                words.push(Hermitian::new(herm).unwrap());
                words.push(Hermitian::new(anti).unwrap());
            }
        }
        let oracle = OperatorSubspace::spanned_by(2, words.iter(), 1e-9).unwrap();
        assert_eq!(oracle.dim(), 4);
        let closed = star_closure(&[sigma_x(), sigma_z()], &tol()).unwrap();
        assert!(closed.same_span(&oracle, 1e-8).unwrap());
    }

    #[test]
    fn commutator_span_examples() {
        let su2 = OperatorSubspace::spanned_by(2, traceless_basis(2).iter(), 1e-9).unwrap();
        assert_eq!(commutator_span(&su2, &su2, &tol()).unwrap().dim(), 3);

        let z = OperatorSubspace::spanned_by(2, [&sigma_z()], 1e-9).unwrap();
        assert_eq!(commutator_span(&z, &z, &tol()).unwrap().dim(), 0);

        let all = OperatorSubspace::spanned_by(2, hermitian_basis(2).iter(), 1e-9).unwrap();
        let c = commutator_span(&all, &all, &tol()).unwrap();
        assert_eq!(c.dim(), 3);
        assert!(c.same_span(&su2, 1e-8).unwrap());
    }

    #[test]
    fn generic_pairs_generate_full_su_d() {
        for d in 2..=4 {
            for seed in 0..10 {
                let mut rng = OperatorSampler::new(1000 * d as u64 + seed);
                let gens = [rng.traceless(d), rng.traceless(d)];
                let r = lie_closure(&gens, &tol()).unwrap();
                assert_eq!(r.result.dim(), d * d - 1, "d={d} seed={seed}");
                for g in &gens {
                    assert!(r.result.residual(g).unwrap() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn closures_are_saturated() {
        let mut rng = OperatorSampler::new(77);
        // non-generic: diagonal generators plus one structured element
        let gens = [gell_mann(3), gell_mann(8), gell_mann(1)];
        let r = lie_closure(&gens, &tol()).unwrap();
        assert!(r.saturated);
        assert!(lie_defect(&r.result).unwrap() <= 1e-8);

        let b = star_closure(&[rng.traceless(3)], &tol()).unwrap();
        assert_eq!(b.dim(), 3);
        assert!(star_defect(&b).unwrap() <= 1e-8);

        let b = star_closure(&[gell_mann(1), gell_mann(4)], &tol()).unwrap();
        assert!(star_defect(&b).unwrap() <= 1e-8);
    }

    #[test]
    fn monotone_in_generators() {
        let mut rng = OperatorSampler::new(3);
        for _ in 0..10 {
            // low-rank generators so that the closures are not already full
            let v = rng.state(3);
            let p = crate::operator::traceless_part(&Hermitian::projector(&v));
            let gens = vec![p, gell_mann(3)];
            let small = lie_closure(&gens, &tol()).unwrap().result.dim();
            let mut more = gens.clone();
            more.push(rng.traceless(3));
            let big = lie_closure(&more, &tol()).unwrap().result.dim();
            assert!(big >= small);
        }
    }
}
