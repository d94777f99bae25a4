use ifalg::closure::{lie_closure, lie_defect};
use ifalg::measurement::{build_cqnd_scheme, simulate_measurement};
use ifalg::operator::{expm, hs_inner, phase_aligned_distance, tensor, CMatrix};
use ifalg::random::OperatorSampler;
use ifalg::schmidt::{interaction_part, schmidt_decompose};
use ifalg::synthesis::{evaluate_procedure, ControlProcedure, ControlStep};
use ifalg::{OperatorSubspace, Tolerances};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expm_inverts(seed in any::<u64>(), d in 1usize..6, t in -3.0f64..3.0) {
        let h = OperatorSampler::new(seed).hermitian(d);
        let p = expm(&h, t) * expm(&h, -t);
        prop_assert!((p.matrix() - CMatrix::identity(d, d)).norm() < 1e-10);
        prop_assert!(expm(&h, t).defect() < 1e-10);
    }

    #[test]
    fn tensor_trace_factorizes(seed in any::<u64>(), a in 1usize..5, b in 1usize..5) {
        let mut rng = OperatorSampler::new(seed);
        let (x, y) = (rng.hermitian(a), rng.hermitian(b));
        let t = tensor(&x, &y).trace();
        prop_assert!((t - x.trace() * y.trace()).abs() <= 1e-10 * (1.0 + t.abs()));
    }

    #[test]
    fn hs_inner_is_symmetric_and_real(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = OperatorSampler::new(seed);
        let (x, y) = (rng.hermitian(d), rng.hermitian(d));
        let (a, b) = (hs_inner(&x, &y).unwrap(), hs_inner(&y, &x).unwrap());
        prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        prop_assert!(a.im.abs() < 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn extend_is_idempotent(seed in any::<u64>(), d in 2usize..5, k in 1usize..6) {
        let mut rng = OperatorSampler::new(seed);
        let mut space = OperatorSubspace::empty(d);
        for _ in 0..k {
            space.extend(&rng.hermitian(d), 1e-9).unwrap();
        }
        let x = rng.hermitian(d);
        space.extend(&x, 1e-9).unwrap();
        let before = space.dim();
        prop_assert!(!space.extend(&x, 1e-9).unwrap().accepted);
        prop_assert_eq!(space.dim(), before);
        prop_assert!(space.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn jordan_identity(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = OperatorSampler::new(seed);
        let (a, b) = (rng.hermitian(d), rng.hermitian(d));
        let lhs = a.matrix() * b.matrix() + b.matrix() * a.matrix();
        let s = a.matrix() + b.matrix();
        let rhs = &s * &s - a.matrix() * a.matrix() - b.matrix() * b.matrix();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + a.norm() * b.norm()));
    }

    #[test]
    fn schmidt_reconstructs(seed in any::<u64>(), dc in 1usize..5, ds in 1usize..4) {
        let h = OperatorSampler::new(seed).hermitian(dc * ds);
        let d = schmidt_decompose(&h, dc, ds).unwrap();
        prop_assert!((d.reconstruct() - h.clone()).norm() <= 1e-10 * (1.0 + h.norm()));
        let sv = d.singular_values();
        prop_assert!(sv.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn procedures_compose(seed in any::<u64>(), n in 1usize..4, k in 1usize..4) {
        let mut rng = OperatorSampler::new(seed);
        let h = interaction_part(&rng.interaction(3, 2, 2), 3, 2).unwrap();
        let mut mk = |len: usize| {
            let steps = (0..len)
                .map(|i| ControlStep { wait: 0.1 * (i + 1) as f64, unitary: rng.unitary(3) })
                .collect();
            ControlProcedure::new(3, 2, steps).unwrap()
        };
        let (r, p) = (mk(n), mk(k));
        let up = evaluate_procedure(&p, &h).unwrap();
        let ur = evaluate_procedure(&r, &h).unwrap();
        let both = evaluate_procedure(&r.then(&p).unwrap(), &h).unwrap();
        prop_assert!(phase_aligned_distance((&up.unitary * &ur.unitary).matrix(), both.unitary.matrix()) < 1e-10);
        prop_assert!((both.total_time - up.total_time - ur.total_time).abs() < 1e-12);
    }

    #[test]
    fn born_rule(seed in any::<u64>(), ds in 1usize..4, extra in 0usize..2) {
        let mut rng = OperatorSampler::new(seed);
        let a = rng.hermitian(ds);
        let s = build_cqnd_scheme(&a, ds.max(2) + extra).unwrap();
        let psi = rng.state(ds);
        let r = simulate_measurement(&s, &psi).unwrap();
        for (p, q) in r.probabilities.iter().zip(&r.born) {
            prop_assert!((p - q).abs() <= 1e-9);
        }
        prop_assert!(r.unassigned.abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lie_closure_is_closed_and_bounded(seed in any::<u64>(), d in 2usize..4, k in 1usize..3) {
        let mut rng = OperatorSampler::new(seed);
        let gens: Vec<_> = (0..k).map(|_| rng.traceless(d)).collect();
        let r = lie_closure(&gens, &Tolerances::default()).unwrap();
        prop_assert!(r.result.dim() < d * d);
        prop_assert!(lie_defect(&r.result).unwrap() <= 1e-8);
        for g in &gens {
            prop_assert!(r.result.residual(g).unwrap() <= 1e-10);
        }
    }
}
