//! Randomised invariants, one block per module.

use proptest::prelude::*;

use asymlim::admissibility::{check_admissible, trichotomy_of, Atom, AdmissibilityCase, Multiplicity, SpectrumSpec, Tail};
use asymlim::asymptotics::{asymptotic_limit_blocks, asymptotic_limit_dense, asymptotic_limit_orbit, stable_subspace};
use asymlim::constructions::{
    antidiag_index, g_transform, lemma_block_construction, lemma_diagonal_construction, mobius, BlockSpec, Eigenvalues,
    MobiusParam,
};
use asymlim::expr::{parse, BinOp, ExprAst};
use asymlim::linalg::{
    adjoint, hermitian_eigen, loewner_leq, multiply, operator_norm, psd_sqrt, vector_norm, ComplexMatrix,
};
use asymlim::operators::{
    orbit_compose, truncate, Block, BlockDiagonalOperator, DenseContraction, Index, IndexUniverse, OrbitShift, Window,
};
use asymlim::random::{
    random_contraction, random_contraction_with_unitary_part, random_hermitian, random_psd, random_unitary, Lcg64,
};
use asymlim::scalar::Cx;

type M = ComplexMatrix<f64>;

fn contraction(seed: u64, n: usize) -> DenseContraction<f64> {
    let mut rng = Lcg64::new(seed);
    let k = rng.int_range(0, n + 1);
    let m: M = if rng.uniform() < 0.25 { random_contraction(&mut rng, n) } else { random_contraction_with_unitary_part(&mut rng, n, k) };
    DenseContraction::new(m).unwrap()
}

/// `PROPTEST_CASES` overrides the per-block default.
fn config(cases: u32) -> ProptestConfig {
    let cases = std::env::var("PROPTEST_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(cases);
    ProptestConfig { cases, ..ProptestConfig::default() }
}

mod linalg {
    use super::*;

    proptest! {
        #![proptest_config(config(64))]

        #[test]
        fn adjoint_preserves_norm(seed in any::<u64>(), r in 1usize..10, c in 1usize..10) {
            let mut rng = Lcg64::new(seed);
            let a: M = asymlim::random::gaussian_matrix(&mut rng, r, c);
            let (n, na) = (operator_norm(&a), operator_norm(&adjoint(&a)));
            prop_assert!((n - na).abs() <= 1e-12 * n.max(1.0));
        }

        #[test]
        fn sqrt_reconstructs(seed in any::<u64>(), n in 1usize..=16, rank_frac in 0.0f64..=1.0) {
            let mut rng = Lcg64::new(seed);
            let rank = ((n as f64 * rank_frac).round() as usize).max(1);
            let a: M = random_psd(&mut rng, n, rank);
            let tol = 1e-12;
            let r = psd_sqrt(&a, tol).unwrap();
            let err = multiply(&r, &r).unwrap().sub(&a).unwrap().max_abs();
            prop_assert!(err <= 10.0 * tol * operator_norm(&a).max(1.0), "err {err}");
        }

        #[test]
        fn loewner_reflexive_and_transitive(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = Lcg64::new(seed);
            let a: M = random_hermitian(&mut rng, n);
            prop_assert!(loewner_leq(&a, &a, 1e-10).unwrap());
            // a ≤ a + p ≤ a + p + q for PSD p, q
            let p: M = random_psd(&mut rng, n, n);
            let q: M = random_psd(&mut rng, n, 1);
            let b = a.add(&p).unwrap();
            let c = b.add(&q).unwrap();
            prop_assert!(loewner_leq(&a, &b, 1e-10).unwrap());
            prop_assert!(loewner_leq(&b, &c, 1e-10).unwrap());
            prop_assert!(loewner_leq(&a, &c, 1e-10).unwrap());
        }

        #[test]
        fn eigen_reconstructs(seed in any::<u64>(), n in 1usize..10) {
            let mut rng = Lcg64::new(seed);
            let a: M = random_hermitian(&mut rng, n);
            let e = hermitian_eigen(&a, 1e-12).unwrap();
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            for j in 0..n {
                let v = e.vector(j);
                let av = a.mat_vec(&v);
                let resid: Vec<Cx<f64>> = av.iter().zip(&v).map(|(x, y)| x - y * e.values[j]).collect();
                prop_assert!(vector_norm(&resid) <= 1e-10 * operator_norm(&a).max(1.0));
            }
        }
    }
}

mod operators {
    use super::*;

    /// Shift on `ℤ` with `σ(k) = k + step` and weights from a seed;
    /// weights vanish at a seeded set of indices to exercise zeros.
    fn seeded_shift(seed: u64, step: i64) -> OrbitShift<f64> {
        OrbitShift::new(IndexUniverse::Integers, move |i| match i {
            Index::Single(k) => Some(Index::Single(k + step)),
            Index::Pair(..) => None,
        }, move |i| match i {
            Index::Single(k) => {
                let mut rng = Lcg64::new(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let u = rng.uniform();
                if u < 0.1 { 0.0 } else { u }
            }
            Index::Pair(..) => 0.0,
        })
    }

    /// Bijection of `ℤ` swapping `2k` and `2k+1`.
    fn seeded_swap(seed: u64) -> OrbitShift<f64> {
        OrbitShift::new(IndexUniverse::Integers, |i| match i {
            Index::Single(k) => Some(Index::Single(if k.rem_euclid(2) == 0 { k + 1 } else { k - 1 })),
            Index::Pair(..) => None,
        }, move |i| match i {
            Index::Single(k) => Lcg64::new(seed.wrapping_add(k as u64)).uniform(),
            Index::Pair(..) => 0.0,
        })
    }

    proptest! {
        #![proptest_config(config(48))]

        #[test]
        fn truncations_are_contractions(seed in any::<u64>(), step in 1i64..4, lo in -20i64..0, len in 1i64..40) {
            let t = seeded_shift(seed, step);
            let (d, _) = truncate(&t, &Window::interval(IndexUniverse::Integers, lo, lo + len)).unwrap();
            prop_assert!(operator_norm(d.matrix()) <= 1.0 + 1e-12);
        }

        #[test]
        fn compose_matches_dense_product(seed in any::<u64>(), half in 1i64..15) {
            // swaps are closed on windows [-2h, 2h-1]
            let (s, t) = (seeded_swap(seed), seeded_swap(seed.rotate_left(17)));
            let w = Window::interval(IndexUniverse::Integers, -2 * half, 2 * half - 1);
            let st = orbit_compose(&s, &t).unwrap();
            let (c, _) = truncate(&st, &w).unwrap();
            let (ds, _) = truncate(&s, &w).unwrap();
            let (dt, _) = truncate(&t, &w).unwrap();
            let prod = multiply(ds.matrix(), dt.matrix()).unwrap();
            prop_assert!(operator_norm(&c.matrix().sub(&prod).unwrap()) <= 1e-12);
        }
    }
}

mod asymptotics {
    use super::*;

    proptest! {
        #![proptest_config(config(48))]

        #[test]
        fn limit_is_positive_contraction_and_projection(seed in any::<u64>(), n in 1usize..=8) {
            let t = contraction(seed, n);
            let d = asymptotic_limit_dense(&t, 1e-10, 60).unwrap();
            let e = hermitian_eigen(&d.limit, 1e-12).unwrap();
            prop_assert!(e.values.iter().all(|v| (-1e-8..=1.0 + 1e-8).contains(v)));
            let defect = operator_norm(&multiply(&d.limit, &d.limit).unwrap().sub(&d.limit).unwrap());
            prop_assert!(defect <= 1e-6, "defect {defect}");
            prop_assert!(d.report.is_monotone(1e-12));
        }

        #[test]
        fn squaring_iterates_decrease(seed in any::<u64>(), n in 1usize..=8) {
            let t = contraction(seed, n);
            let mut p = t.matrix().clone();
            let mut q = multiply(&adjoint(&p), &p).unwrap().hermitian_part();
            for _ in 0..10 {
                p = multiply(&p, &p).unwrap();
                let next = multiply(&adjoint(&p), &p).unwrap().hermitian_part();
                prop_assert!(loewner_leq(&next, &q, 1e-10).unwrap());
                q = next;
            }
        }

        #[test]
        fn unitary_conjugation(seed in any::<u64>(), n in 1usize..=6) {
            let t = contraction(seed, n);
            let mut rng = Lcg64::new(seed.wrapping_add(1));
            let u: M = random_unitary(&mut rng, n);
            let conj = multiply(&multiply(&u, t.matrix()).unwrap(), &adjoint(&u)).unwrap();
            let a = asymptotic_limit_dense(&t, 1e-10, 60).unwrap().limit;
            let b = asymptotic_limit_dense(&DenseContraction::new(conj).unwrap(), 1e-10, 60).unwrap().limit;
            let expected = multiply(&multiply(&u, &a).unwrap(), &adjoint(&u)).unwrap();
            prop_assert!(operator_norm(&b.sub(&expected).unwrap()) <= 1e-8);
        }

        #[test]
        fn direct_sum_law(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4) {
            let (s, t) = (contraction(seed, n), contraction(seed ^ 0xABCD, m));
            let op = BlockDiagonalOperator { blocks: vec![Block::Dense(s.clone()), Block::Dense(t.clone())] };
            let w = Window::interval(IndexUniverse::Naturals, 1, 1);
            let whole = asymptotic_limit_blocks(&op, &w, 1e-10).unwrap();
            let (a, b) = (asymptotic_limit_dense(&s, 1e-10, 60).unwrap().limit, asymptotic_limit_dense(&t, 1e-10, 60).unwrap().limit);
            prop_assert!(whole.sub(&a.direct_sum(&b)).unwrap().max_abs() <= 1e-10);
        }

        #[test]
        fn stable_vectors_vanish(seed in any::<u64>(), n in 1usize..=8) {
            let t = contraction(seed, n);
            let d = asymptotic_limit_dense(&t, 1e-10, 60).unwrap();
            let sub = stable_subspace(&d.limit, 1e-8).unwrap();
            for x in sub.vectors() {
                prop_assert!(vector_norm(&d.final_power.mat_vec(&x)) <= 1e-5);
            }
        }

        #[test]
        fn intertwining(seed in any::<u64>(), n in 1usize..=6) {
            let t = contraction(seed, n);
            let tol = 1e-10;
            let x = asymlim::asymptotics::isometric_asymptote(&t, tol).unwrap();
            prop_assert!(x.intertwining_residual(&t).unwrap() <= 10.0 * tol.sqrt());
        }
    }
}

mod constructions {
    use super::*;

    fn ascending(values: Vec<f64>) -> Vec<f64> {
        let mut v = values;
        v.sort_by(f64::total_cmp);
        v
    }

    proptest! {
        #![proptest_config(config(32))]

        #[test]
        fn block_construction_is_contraction(seed in any::<u64>(), count in 2usize..8, d in 1usize..4) {
            // spectra nested upward: block j has eigenvalues in [c_j, c_{j+1}]
            let mut rng = Lcg64::new(seed);
            let cuts = ascending((0..=count).map(|_| rng.uniform_range(0.05, 0.999)).collect());
            let blocks: Vec<M> = (0..count)
                .map(|j| {
                    let u: M = random_unitary(&mut rng, d);
                    let eig: Vec<f64> = (0..d).map(|_| rng.uniform_range(cuts[j], cuts[j + 1])).collect();
                    let diag = M::from_real_diagonal(&eig);
                    multiply(&multiply(&u, &diag).unwrap(), &adjoint(&u)).unwrap().hermitian_part()
                })
                .collect();
            let c = lemma_block_construction(&BlockSpec::new(blocks)).unwrap();
            prop_assert!(operator_norm(c.t.matrix()) <= 1.0 + 1e-10);
            let report = c.table(count - 1).unwrap();
            prop_assert!(report.respects_bounds(1e-10));
        }

        #[test]
        fn diagonal_construction_weights_and_limits(p in 0.5f64..3.0, c in 0.05f64..1.0, l in 1i64..6, m in 1i64..6) {
            // λ_j = 1 - c/(j+1)^p
            let lambda = Eigenvalues::Formula(parse(&format!("1 - {c}/(j+1)^{p}")).unwrap());
            let k = lemma_diagonal_construction::<f64>(lambda).unwrap();
            for (a, b) in [(l, m), (m, l), (l + m, 1)] {
                prop_assert!(k.t.weight(Index::Pair(a, b)).unwrap() <= 1.0);
            }
            let idx = Index::Pair(l, m);
            let got = asymptotic_limit_orbit(&k.t, idx, 1e-14, 1 << 22).unwrap().value;
            prop_assert!((got - k.exact_limit(idx)).abs() <= 1e-10, "{idx}: {got} vs {}", k.exact_limit(idx));
            prop_assert!(antidiag_index(l, m) >= 1);
        }

        #[test]
        fn diagonal_bound_law(p in 0.5f64..2.0, c in 0.1f64..1.0) {
            let lambda = Eigenvalues::Formula(parse(&format!("1 - {c}/(j+1)^{p}")).unwrap());
            let k = lemma_diagonal_construction::<f64>(lambda).unwrap();
            prop_assert!(k.table(16, 12).unwrap().respects_bounds(1e-10));
        }

        #[test]
        fn mobius_contractive_and_involutive(seed in any::<u64>(), n in 1usize..=6, r in 0.0f64..0.9, theta in 0.0f64..6.28) {
            let t = contraction(seed, n);
            let p = MobiusParam::new(Cx::new(r * theta.cos(), r * theta.sin())).unwrap();
            let b = mobius(&t, p).unwrap();
            prop_assert!(operator_norm(b.matrix()) <= 1.0 + 1e-8);
            let back = mobius(&b, p.negated()).unwrap();
            prop_assert!(back.matrix().sub(t.matrix()).unwrap().max_abs() <= 1e-8);
        }
    }
}

mod admissibility {
    use super::*;

    fn admissible_spec() -> impl Strategy<Value = SpectrumSpec> {
        prop_oneof![
            (1u64..5).prop_map(|r| SpectrumSpec { atoms: vec![Atom { value: 1.0, mult: Multiplicity::Finite(r) }], tails: vec![] }),
            (0.05f64..1.0, 0.5f64..2.0, 0.0f64..0.9).prop_map(|(c, p, a)| SpectrumSpec {
                atoms: vec![Atom { value: a, mult: Multiplicity::Finite(2) }],
                tails: vec![Tail::parse(&format!("1 - {c}/(j+1)^{p}"), 1, true).unwrap()],
            }),
        ]
    }

    proptest! {
        #![proptest_config(config(24))]

        #[test]
        fn limits_pass_trichotomy(seed in any::<u64>(), n in 1usize..=8) {
            let t = contraction(seed, n);
            let a = asymptotic_limit_dense(&t, 1e-10, 60).unwrap().limit;
            let v = trichotomy_of(&a, 1e-6).unwrap();
            prop_assert_ne!(v.case, AdmissibilityCase::Inadmissible);
        }

        #[test]
        fn construction_specs_are_admissible(spec in admissible_spec()) {
            prop_assert!(check_admissible(&spec).unwrap().admissible);
        }

        #[test]
        fn transforms_preserve_verdict(spec in admissible_spec(), q in prop_oneof![Just(0.5f64), Just(2.0), Just(5.0), 0.2f64..4.0]) {
            let before = check_admissible(&spec).unwrap();
            let g = parse(&format!("j^{q}")).unwrap();
            let after = check_admissible(&g_transform(&spec, &g).unwrap()).unwrap();
            prop_assert!(after.admissible);
            prop_assert_eq!(before.case, after.case);
        }
    }
}

mod expr {
    use super::*;

    fn ast() -> impl Strategy<Value = ExprAst> {
        let leaf = prop_oneof![
            Just(ExprAst::Var),
            (0u32..1000, 0u32..4).prop_map(|(m, e)| ExprAst::Literal(m as f64 / 10f64.powi(e as i32))),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| ExprAst::Neg(Box::new(e))),
                inner.clone().prop_map(|e| ExprAst::Sqrt(Box::new(e))),
                (inner.clone(), inner, prop_oneof![
                    Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)
                ])
                .prop_map(|(l, r, op)| ExprAst::binary(op, l, r)),
            ]
        })
    }

    proptest! {
        #![proptest_config(config(256))]

        #[test]
        fn print_parse_fixpoint(e in ast()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e);
            prop_assert_eq!(parse(&reparsed.to_string()).unwrap(), reparsed);
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("2+3*4").unwrap().eval(1).unwrap(), 14.0);
        assert_eq!(parse("2^3^2").unwrap().eval(1).unwrap(), 512.0);
    }
}
