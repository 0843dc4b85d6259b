use devissage::{Elem, Error, Ring, RingKind};
use num_bigint::BigInt;
use proptest::prelude::*;

fn rings() -> Vec<Ring> {
    vec![
        Ring::rationals(),
        Ring::prime_field(5).unwrap(),
        Ring::prime_field(7).unwrap(),
        Ring::two_inverted(),
        Ring::local_at(3).unwrap(),
        Ring::local_at(5).unwrap(),
    ]
}

/// Random member of `ring` built from an integer pair: denominators are
/// forced into the allowed shape.
fn member(ring: Ring, n: i64, k: u32) -> Elem {
    let d: i64 = match ring.kind() {
        RingKind::RationalField => 1 + k as i64 % 9,
        RingKind::PrimeField(_) => 1,
        RingKind::IntegersTwoInverted => 1 << (k % 5),
        RingKind::LocalIntegersAt(p) => {
            let c = [1, 2, 4, 7, 8, 11][(k % 6) as usize];
            if c % p as i64 == 0 { c + 1 } else { c }
        }
    };
    ring.frac(n, d).unwrap()
}

#[test]
fn dimension_parameter_per_kind() {
    assert_eq!(Ring::prime_field(5).unwrap().d(), 0);
    assert_eq!(Ring::rationals().d(), 0);
    assert_eq!(Ring::two_inverted().d(), 1);
    assert_eq!(Ring::local_at(3).unwrap().d(), 1);
}

#[test]
fn even_characteristic_rejected() {
    assert!(matches!(Ring::prime_field(2), Err(Error::UnsupportedRing(_))));
    assert!(matches!(Ring::local_at(2), Err(Error::UnsupportedRing(_))));
    assert!(matches!(Ring::prime_field(9), Err(Error::UnsupportedRing(_))));
    assert!(matches!("fp:2".parse::<Ring>(), Err(Error::UnsupportedRing(_))));
    assert!(matches!("z".parse::<Ring>(), Err(Error::UnsupportedRing(_))));
}

#[test]
fn descriptors_round_trip() {
    for r in rings() {
        let s = r.descriptor();
        assert_eq!(s.parse::<Ring>().unwrap(), r);
        let j = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Ring>(&j).unwrap(), r);
    }
    assert_eq!(Ring::two_inverted().descriptor(), "z-half");
    assert_eq!(Ring::local_at(3).unwrap().descriptor(), "zloc:3");
}

#[test]
fn unit_examples() {
    let zh = Ring::two_inverted();
    assert!(zh.is_unit(&zh.int(2)));
    assert!(!zh.is_unit(&zh.int(3)));
    let f5 = Ring::prime_field(5).unwrap();
    assert!(f5.is_unit(&f5.int(3)));
}

#[test]
fn valuation_examples() {
    let z3 = Ring::local_at(3).unwrap();
    let f = z3.valuation_and_unit(&z3.int(9)).unwrap();
    assert_eq!(f.exponent_of(3), 2);
    assert_eq!(f.unit, Elem::ONE);
    let f = z3.valuation_and_unit(&z3.int(5)).unwrap();
    assert_eq!(f.exponent_of(3), 0);
    assert_eq!(f.unit, Elem::int(5));
    assert_eq!(z3.valuation_and_unit(&Elem::ZERO), Err(Error::ZeroElement));
}

/// Oracle: strip factors of two, then trial-divide the odd part.
fn factor_oracle(mut n: u64) -> (u64, Vec<(u64, u32)>) {
    let mut two = 1;
    while n % 2 == 0 {
        n /= 2;
        two *= 2;
    }
    let mut out = vec![];
    let mut q = 3;
    while q * q <= n {
        let mut e = 0;
        while n % q == 0 {
            n /= q;
            e += 1;
        }
        if e > 0 {
            out.push((q, e));
        }
        q += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    (two, out)
}

#[test]
fn twelve_over_two_inverted() {
    let (unit, factors) = factor_oracle(12);
    assert_eq!((unit, factors.clone()), (4, vec![(3, 1)]));
    let zh = Ring::two_inverted();
    let f = zh.valuation_and_unit(&zh.int(12)).unwrap();
    assert_eq!(f.unit, Elem::int(4));
    assert_eq!(f.factors, vec![(BigInt::from(3), 1)]);
}

proptest! {
    #[test]
    fn factorization_matches_trial_division(n in 1u64..5000) {
        let zh = Ring::two_inverted();
        let f = zh.valuation_and_unit(&zh.int(n as i64)).unwrap();
        let (unit, factors) = factor_oracle(n);
        prop_assert_eq!(f.unit, Elem::int(unit as i64));
        let got: Vec<(u64, u32)> = f.factors.iter().map(|(p, e)| (p.try_into().unwrap(), *e)).collect();
        prop_assert_eq!(got, factors);
    }

    #[test]
    fn ring_axioms(ri in 0usize..6, a in -60i64..60, b in -60i64..60, c in -60i64..60, k in 0u32..30) {
        let r = rings()[ri];
        let (x, y, z) = (member(r, a, k), member(r, b, k / 2), member(r, c, k / 3));
        prop_assert_eq!(r.add(&r.add(&x, &y), &z), r.add(&x, &r.add(&y, &z)));
        prop_assert_eq!(r.mul(&r.mul(&x, &y), &z), r.mul(&x, &r.mul(&y, &z)));
        prop_assert_eq!(r.mul(&x, &r.add(&y, &z)), r.add(&r.mul(&x, &y), &r.mul(&x, &z)));
        prop_assert_eq!(r.add(&x, &r.zero()), x.clone());
        prop_assert_eq!(r.mul(&x, &r.one()), x.clone());
        prop_assert_eq!(r.add(&x, &r.neg(&x)), r.zero());
        prop_assert_eq!(r.mul(&x, &y), r.mul(&y, &x));
    }

    #[test]
    fn units_closed_and_invertible(ri in 0usize..6, a in -60i64..60, b in -60i64..60, k in 0u32..30) {
        let r = rings()[ri];
        let (x, y) = (member(r, a, k), member(r, b, k + 1));
        if r.is_unit(&x) && r.is_unit(&y) {
            prop_assert!(r.is_unit(&r.mul(&x, &y)));
        }
        if r.is_unit(&x) {
            let inv = r.inv(&x).unwrap();
            prop_assert_eq!(r.mul(&x, &inv), r.one());
        }
    }

    #[test]
    fn canonicalization_idempotent(ri in 0usize..6, a in -1000i64..1000, k in 0u32..30) {
        let r = rings()[ri];
        let x = member(r, a, k);
        let c = r.canonical(&x).unwrap();
        prop_assert_eq!(r.canonical(&c).unwrap(), c.clone());
        prop_assert_eq!(r.parse_elem(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn bezout_produces_gcd(ri in 0usize..6, a in -200i64..200, b in -200i64..200) {
        let r = rings()[ri];
        let (x, y) = (r.int(a), r.int(b));
        let (s, t, g) = r.bezout(&x, &y);
        prop_assert_eq!(r.add(&r.mul(&s, &x), &r.mul(&t, &y)), g.clone());
        if !g.is_zero() {
            prop_assert!(r.divides(&g, &x) && r.divides(&g, &y));
        }
    }
}
