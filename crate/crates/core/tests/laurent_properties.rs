use std::collections::BTreeMap;

use microlim::laurent::{Bindings, LaurentPoly, Monomial, SymbolId, Valuation, Var};
use microlim::rational::rat;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn monomial(e: [i32; 4]) -> Monomial {
    SymbolId::ALL
        .iter()
        .zip(e)
        .fold(Monomial::ONE, |m, (s, x)| m.with_exponent(*s, x))
}

fn raw_terms() -> impl Strategy<Value = Vec<([i32; 4], i64, i64)>> {
    prop::collection::vec(
        (prop::array::uniform4(-3i32..=3), -12i64..=12, 1i64..=7),
        0..5,
    )
}

fn build(raw: &[([i32; 4], i64, i64)]) -> LaurentPoly {
    LaurentPoly::from_terms(raw.iter().map(|(e, n, d)| (monomial(*e), rat(*n, *d))))
}

fn poly() -> impl Strategy<Value = LaurentPoly> {
    raw_terms().prop_map(|r| build(&r))
}

fn positive_rational() -> impl Strategy<Value = BigRational> {
    (1i64..=9, 1i64..=9).prop_map(|(n, d)| rat(n, d))
}

fn valuation() -> impl Strategy<Value = Valuation> {
    prop::array::uniform4(positive_rational()).prop_map(Valuation)
}

/// Product computed term by term on raw exponent vectors.
fn naive_product(a: &LaurentPoly, b: &LaurentPoly) -> BTreeMap<[i32; 4], BigRational> {
    let vec = |m: &Monomial| SymbolId::ALL.map(|s| m.exponent(s));
    let mut acc: BTreeMap<[i32; 4], BigRational> = BTreeMap::new();
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let (ea, eb) = (vec(ma), vec(mb));
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
            *acc.entry(e).or_insert_with(BigRational::zero) += ca * cb;
        }
    }
    acc.retain(|_, c| !c.is_zero());
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &LaurentPoly::zero(), a.clone());
        prop_assert_eq!(&a * &LaurentPoly::one(), a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn no_zero_coefficients_survive(a in poly(), b in poly()) {
        for p in [&a + &b, &a * &b, &a - &b, a.scale(&rat(0, 1))] {
            prop_assert!(p.terms().all(|(_, c)| !c.is_zero()));
        }
    }

    #[test]
    fn product_matches_naive_oracle(a in poly(), b in poly()) {
        let vec = |m: &Monomial| SymbolId::ALL.map(|s| m.exponent(s));
        let got: BTreeMap<[i32; 4], BigRational> = (&a * &b).terms().map(|(m, c)| (vec(m), c.clone())).collect();
        prop_assert_eq!(got, naive_product(&a, &b));
    }

    #[test]
    fn eval_is_a_homomorphism(a in poly(), b in poly(), v in valuation()) {
        prop_assert_eq!((&a + &b).eval(&v), a.eval(&v) + b.eval(&v));
        prop_assert_eq!((&a * &b).eval(&v), a.eval(&v) * b.eval(&v));
    }

    #[test]
    fn text_round_trip(a in poly()) {
        let text = a.to_string();
        let back: LaurentPoly = text.parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn substitute_then_eval_composes(
        a in poly(),
        dt_raw in (prop::array::uniform4(-2i32..=2), 1i64..=5, 1i64..=5),
        v in valuation(),
    ) {
        // dt -> c * monomial, an invertible replacement
        let (e, n, d) = dt_raw;
        let e = [e[0], e[1], 0, e[3]];
        let replacement = LaurentPoly::term(rat(n, d), monomial(e));
        let mut bindings = Bindings::new();
        bindings.insert(Var::Symbol(SymbolId::TimeStep), replacement.clone());
        let substituted = a.substitute(&bindings).unwrap();
        let mut composed = v.clone();
        composed.0[SymbolId::TimeStep.index()] = replacement.eval(&v);
        prop_assert_eq!(substituted.eval(&v), a.eval(&composed));
    }

    #[test]
    fn square_binding_matches_eval(a in poly(), n in 1i64..=9, v in valuation()) {
        // dx^2 -> n * D * tau, with dx evaluated at sqrt only through even powers
        let even = LaurentPoly::from_terms(a.terms().map(|(m, c)| {
            let k = m.exponent(SymbolId::SpaceStep);
            (m.with_exponent(SymbolId::SpaceStep, 2 * k), c.clone())
        }));
        let value = LaurentPoly::term(rat(n, 1), monomial([1, 1, 0, 0]));
        let mut bindings = Bindings::new();
        bindings.insert(Var::Square(SymbolId::SpaceStep), value.clone());
        let substituted = even.substitute(&bindings).unwrap();
        prop_assert!(!substituted.contains(SymbolId::SpaceStep));
        let mut at = v.clone();
        at.0[SymbolId::SpaceStep.index()] = rat(1, 1);
        let dx2 = value.eval(&v);
        let expected = a.terms().fold(BigRational::zero(), |acc, (m, c)| {
            let k = m.exponent(SymbolId::SpaceStep);
            let rest = LaurentPoly::term(c.clone(), m.with_exponent(SymbolId::SpaceStep, 0)).eval(&v);
            acc + rest * pow(&dx2, k)
        });
        prop_assert_eq!(substituted.eval(&at), expected);
    }
}

fn pow(x: &BigRational, k: i32) -> BigRational {
    let mut acc = rat(1, 1);
    for _ in 0..k.unsigned_abs() {
        acc *= x;
    }
    if k < 0 {
        rat(1, 1) / acc
    } else {
        acc
    }
}

#[test]
fn relaxation_coefficient_collapses_to_two() {
    let p: LaurentPoly = "1 + D*tau^-1*dt^2*dx^-2".parse().unwrap();
    let mut b = Bindings::new();
    b.insert(Var::Symbol(SymbolId::TimeStep), "2*tau".parse().unwrap());
    b.insert(Var::Square(SymbolId::SpaceStep), "4*D*tau".parse().unwrap());
    assert_eq!(p.substitute(&b).unwrap(), LaurentPoly::integer(2));
}

#[test]
fn canonical_text_of_symmetry_coefficient() {
    let p = &LaurentPoly::one() - &"3*D*tau*dx^-2".parse::<LaurentPoly>().unwrap();
    assert_eq!(p.to_string(), "1 - 3*D*tau*dx^-2");
}
