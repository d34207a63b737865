mod common;

use std::sync::Arc;

use cmtype::field::FieldSpec;
use cmtype::local::split_quadratic;
use cmtype::pairs::{
    build_indecomposable_pair_module, case_one, conductor_square, is_indecomposable_pair_module, ArtinianPair,
    IndecomposabilityOptions, DEFAULT_MAX_DEGREE,
};
use cmtype::series::{Ctx, Monomial, TruncatedSeries};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PREC: u32 = 12;
const SPLIT_PREC: u32 = 8;

fn terms_strategy(nvars: usize, min_deg: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((prop::collection::vec(0u32..4, nvars), -5i64..=5), 0..6)
        .prop_map(move |ts| ts.into_iter().filter(|(e, _)| e.iter().sum::<u32>() >= min_deg).collect())
}

fn build(c: &Ctx, terms: &[(Vec<u32>, i64)], prec: u32) -> TruncatedSeries {
    let field = c.field();
    let ts: Vec<_> = terms.iter().map(|(e, v)| (Monomial::new(e.clone()), field.from_i64(*v))).collect();
    TruncatedSeries::from_terms(c, prec, ts, true)
}

fn xy() -> Ctx {
    ctx(&["x", "y"], FieldSpec::rationals())
}

proptest! {
    #[test]
    fn ring_laws(a in terms_strategy(2, 0), b in terms_strategy(2, 0), c in terms_strategy(2, 0)) {
        let cx = xy();
        let (a, b, c) = (build(&cx, &a, PREC), build(&cx, &b, PREC), build(&cx, &c, PREC));
        prop_assert!(a.poly_mul(&b).unwrap().equals_exactly(&b.poly_mul(&a).unwrap()));
        let ab_c = a.poly_mul(&b).unwrap().poly_mul(&c).unwrap();
        prop_assert!(ab_c.equals_exactly(&a.poly_mul(&b.poly_mul(&c).unwrap()).unwrap()));
        let left = a.poly_add(&b).unwrap().poly_mul(&c).unwrap();
        let right = a.poly_mul(&c).unwrap().poly_add(&b.poly_mul(&c).unwrap()).unwrap();
        prop_assert!(left.equals_exactly(&right));
        let truncated = a.mul(&b).unwrap().mul(&c).unwrap();
        prop_assert!(truncated.agrees_with(&a.mul(&b.mul(&c).unwrap()).unwrap()) && truncated.agrees_with(&ab_c));
    }

    #[test]
    fn unit_inverse(t in terms_strategy(2, 1), c0 in 1i64..=4) {
        let cx = xy();
        let u = build(&cx, &t, PREC).add(&TruncatedSeries::one(&cx, PREC).scale(&cx.field().from_i64(c0))).unwrap();
        let inv = u.invert_unit().unwrap();
        prop_assert!(u.mul(&inv).unwrap().agrees_with(&TruncatedSeries::one(&cx, PREC)));
    }

    #[test]
    fn jet_order_invariant(t in terms_strategy(3, 2), seed in any::<u64>()) {
        let c3 = ctx(&["x", "y", "z"], FieldSpec::rationals());
        let f = build(&c3, &t, PREC);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = linear_change(&f, &random_invertible(&mut rng, 3));
        prop_assert_eq!(f.jet_order().order, g.jet_order().order);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn split_round_trip(t in terms_strategy(3, 3), mixed in terms_strategy(2, 1), seed in any::<u64>()) {
        let c3 = ctx(&["x", "y", "z"], FieldSpec::rationals());
        let field = c3.field();
        let mut ts: Vec<(Monomial, _)> = t.iter().map(|(e, v)| (Monomial::new(e.clone()), field.from_i64(*v))).collect();
        ts.push((Monomial::new(vec![0, 0, 2]), field.one()));
        ts.extend(mixed.iter().map(|(e, v)| (Monomial::new(vec![e[0], e[1], 1]), field.from_i64(*v))));
        let f = TruncatedSeries::from_terms(&c3, SPLIT_PREC, ts, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = linear_change(&f, &random_invertible(&mut rng, 3));
        let split = split_quadratic(&f).unwrap();
        prop_assert!(split.verify(&f));
    }
}

fn random_gl(rng: &mut ChaCha8Rng, field: FieldSpec, n: usize) -> Vec<Vec<cmtype::Scalar>> {
    random_invertible(rng, n).iter().map(|r| r.iter().map(|v| field.from_i64(*v)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn direct_sums_decompose(n1 in 1usize..=2, n2 in 1usize..=2, char7 in any::<bool>(), seed in any::<u64>()) {
        let field = if char7 { FieldSpec::prime(7).unwrap() } else { FieldSpec::rationals() };
        let pair = Arc::new(ArtinianPair::k_into_d(field));
        let a = build_indecomposable_pair_module(&pair, n1).unwrap();
        let b = build_indecomposable_pair_module(&pair, n2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sum = a.direct_sum(&b).unwrap().transform(&random_gl(&mut rng, field, n1 + n2)).unwrap();
        prop_assert!(sum.is_a_closed() && sum.generates_w());
        prop_assert!(!is_indecomposable_pair_module(&sum, &IndecomposabilityOptions::default()).unwrap());
    }
}

#[test]
fn constructed_modules_are_pair_modules() {
    let square = conductor_square(&case_one(FieldSpec::rationals()), DEFAULT_MAX_DEGREE).unwrap();
    let pairs = [
        Arc::new(ArtinianPair::k_into_d(FieldSpec::rationals())),
        Arc::new(ArtinianPair::k_into_d(FieldSpec::prime(7).unwrap())),
        square.pair.clone(),
    ];
    for pair in &pairs {
        for n in 1..=3 {
            let m = build_indecomposable_pair_module(pair, n).unwrap();
            assert!(m.is_a_closed(), "A V not inside V for rank {n}");
            assert!(m.generates_w(), "B V differs from W for rank {n}");
        }
    }
}
