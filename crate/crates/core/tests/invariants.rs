use cellcover_core::arith::{qi, Q};
use cellcover_core::constructions::{build_corner, build_free_kernel, FreeKernelSpec, ZRule};
use cellcover_core::groups::{normalize_offset, purify, Basis, GroupPresentation, Role};
use cellcover_core::homsolver::Bounds;
use cellcover_core::rankone::{Height, HeightSequence, RationalGroup};
use cellcover_core::valuations::{MultiplicativeSet, DEFAULT_BUDGET};
use cellcover_core::verifier::{find_section, obstruct_free_kernel, verify_cellular, Conclusion, Overall};
use num_bigint::BigInt;
use proptest::prelude::*;

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn height() -> impl Strategy<Value = Height> {
    prop_oneof![(0u32..4).prop_map(Height::Finite), Just(Height::Inf)]
}

fn heights() -> impl Strategy<Value = HeightSequence> {
    (height(), proptest::collection::btree_map(proptest::sample::select(PRIMES.to_vec()), height(), 0..4))
        .prop_map(|(d, ex)| HeightSequence::new(d, ex).unwrap())
}

fn rank_two() -> impl Strategy<Value = GroupPresentation> {
    (heights(), heights()).prop_map(|(a, b)| {
        let basis = Basis::from_pairs(&[("x", Role::CokernelLift), ("y", Role::CokernelLift)]).unwrap();
        GroupPresentation::new(basis, vec![a, b], vec![]).unwrap()
    })
}

fn vector(n: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec((-9i64..=9).prop_map(qi), n)
}

fn constant_spec() -> impl Strategy<Value = FreeKernelSpec> {
    proptest::collection::vec(-6i64..=6, 1..=2)
        .prop_map(|zs| FreeKernelSpec::new(zs.into_iter().map(ZRule::Constant).collect(), vec![2]).unwrap())
}

fn bounds() -> Bounds {
    Bounds { coeff_bound: 20, prime_bound: 31, exponent_bound: 2, level: 0, budget: DEFAULT_BUDGET }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn purify_is_idempotent(g in rank_two(), v in vector(2)) {
        let k = purify(&g, &[v]).unwrap();
        prop_assert_eq!(purify(&g, &k.span).unwrap(), k);
    }

    #[test]
    fn baer_equivalence_is_an_equivalence(a in heights(), b in heights(), c in heights()) {
        prop_assert!(a.baer_equivalent(&a));
        prop_assert_eq!(a.baer_equivalent(&b), b.baer_equivalent(&a));
        if a.baer_equivalent(&b) && b.baer_equivalent(&c) {
            prop_assert!(a.baer_equivalent(&c));
        }
        let (ga, gb) = (RationalGroup::new(a), RationalGroup::new(b));
        prop_assert_eq!(ga.baer_equivalent(&gb), ga.type_leq(&gb) && gb.type_leq(&ga));
    }

    #[test]
    fn normalized_offsets_agree_modulo_the_denominator(z in proptest::collection::vec(-50i64..=50, 3), p in proptest::sample::select(PRIMES.to_vec()), k in 1u32..3) {
        let z: Vec<BigInt> = z.into_iter().map(BigInt::from).collect();
        let n = normalize_offset(&z, p, k);
        let m = BigInt::from(p).pow(k);
        for (a, b) in z.iter().zip(&n) {
            prop_assert_eq!((a - b) % &m, BigInt::from(0));
        }
    }

    #[test]
    fn verify_and_obstruct_agree(spec in constant_spec()) {
        let c = build_free_kernel(&spec).unwrap();
        let r = verify_cellular(&c, &bounds()).unwrap();
        let o = obstruct_free_kernel(&spec, 31).unwrap();
        prop_assert!(matches!(r.overall, Overall::NotCellular(_)));
        prop_assert_eq!(o.conclusion, Conclusion::NotCellularSplit);
        prop_assert!(find_section(&c, &bounds()).unwrap().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn corner_construction_is_deterministic(kappa in 1usize..=2, seed in any::<u64>()) {
        let base = MultiplicativeSet::powers_of(5, 24).unwrap();
        let a = build_corner(kappa, base.clone(), 24, seed, 200, DEFAULT_BUDGET);
        let b = build_corner(kappa, base, 24, seed, 200, DEFAULT_BUDGET);
        prop_assert_eq!(a, b);
    }
}
