//! Coefficient rings with 2 invertible: ℚ, F_p, ℤ[1/2] and ℤ₍p₎ (p odd).
//!
//! Elements of the three rational kinds are reduced fractions subject to a
//! denominator constraint; elements of F_p are residues `0 <= v < p` stored as
//! integers. All operations assume their arguments are canonical members.

mod elem;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use elem::Elem;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    RationalField,
    PrimeField(u64),
    IntegersTwoInverted,
    LocalIntegersAt(u64),
}

/// A supported coefficient ring together with its dimension parameter `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    kind: RingKind,
    d: u32,
}

/// Pivot size used by normal-form algorithms; smaller divides more.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Norm {
    Small(u64),
    Big(BigInt),
}

/// `x = unit · ∏ pᵉ` over a PID kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(BigInt, u32)>,
    pub unit: Elem,
}

impl Factorization {
    /// Exponent of `p` (zero when absent).
    pub fn exponent_of(&self, p: u64) -> u32 {
        let p = BigInt::from(p);
        self.factors.iter().find(|(q, _)| *q == p).map_or(0, |(_, e)| *e)
    }
}

pub(crate) fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut q = 3u64;
    while q * q <= p {
        if p % q == 0 {
            return false;
        }
        q += 2;
    }
    true
}

pub(crate) fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

pub(crate) fn big_mod(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

fn odd_part(n: &BigInt) -> BigInt {
    let mut n = n.abs();
    if n.is_zero() {
        return n;
    }
    let tz = n.trailing_zeros().unwrap_or(0);
    n >>= tz;
    n
}

fn is_power_of_two(n: &BigInt) -> bool {
    n.is_positive() && odd_part(n).is_one()
}

pub(crate) fn valuation_big(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

fn small_valuation(mut n: i64, p: u64) -> u32 {
    let p = p as i64;
    let mut v = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Trial-division factorization of a positive integer.
pub(crate) fn factor_integer(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    if let Some(mut m) = n.to_u64() {
        let mut q = 2u64;
        while q.saturating_mul(q) <= m {
            let mut e = 0;
            while m % q == 0 {
                m /= q;
                e += 1;
            }
            if e > 0 {
                out.push((BigInt::from(q), e));
            }
            q += if q == 2 { 1 } else { 2 };
        }
        if m > 1 {
            out.push((BigInt::from(m), 1));
        }
        return out;
    }
    let mut m = n.clone();
    let mut q = BigInt::from(2u32);
    while &q * &q <= m {
        let mut e = 0;
        while (&m % &q).is_zero() {
            m /= &q;
            e += 1;
        }
        if e > 0 {
            out.push((q.clone(), e));
        }
        q += 1;
    }
    if m > BigInt::one() {
        out.push((m, 1));
    }
    out
}

impl Ring {
    /// Validates a ring kind. Even characteristic and `p = 2` are rejected.
    pub fn make(kind: RingKind) -> Result<Ring> {
        match kind {
            RingKind::RationalField => Ok(Ring { kind, d: 0 }),
            RingKind::IntegersTwoInverted => Ok(Ring { kind, d: 1 }),
            RingKind::PrimeField(p) | RingKind::LocalIntegersAt(p) => {
                if p == 2 {
                    return Err(Error::UnsupportedRing("2 must be invertible".into()));
                }
                if !is_odd_prime(p) || p >= 1 << 31 {
                    return Err(Error::UnsupportedRing(format!("{p} is not a supported odd prime")));
                }
                let d = if matches!(kind, RingKind::PrimeField(_)) { 0 } else { 1 };
                Ok(Ring { kind, d })
            }
        }
    }

    pub fn rationals() -> Ring {
        Ring { kind: RingKind::RationalField, d: 0 }
    }

    pub fn two_inverted() -> Ring {
        Ring { kind: RingKind::IntegersTwoInverted, d: 1 }
    }

    pub fn prime_field(p: u64) -> Result<Ring> {
        Ring::make(RingKind::PrimeField(p))
    }

    pub fn local_at(p: u64) -> Result<Ring> {
        Ring::make(RingKind::LocalIntegersAt(p))
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    /// Dimension parameter: 0 for fields, 1 for the PID kinds.
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn is_field(&self) -> bool {
        matches!(self.kind, RingKind::RationalField | RingKind::PrimeField(_))
    }

    /// The characteristic for F_p, the localizing prime for ℤ₍p₎.
    pub fn prime(&self) -> Option<u64> {
        match self.kind {
            RingKind::PrimeField(p) | RingKind::LocalIntegersAt(p) => Some(p),
            _ => None,
        }
    }

    pub fn descriptor(&self) -> String {
        match self.kind {
            RingKind::RationalField => "q".into(),
            RingKind::PrimeField(p) => format!("fp:{p}"),
            RingKind::IntegersTwoInverted => "z-half".into(),
            RingKind::LocalIntegersAt(p) => format!("zloc:{p}"),
        }
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// Image of an integer.
    pub fn int(&self, n: i64) -> Elem {
        match self.kind {
            RingKind::PrimeField(p) => Elem::Small(n.rem_euclid(p as i64), 1),
            _ => Elem::int(n),
        }
    }

    /// `n / d` as a ring element, if it belongs to the ring.
    pub fn frac(&self, n: i64, d: i64) -> Result<Elem> {
        if d == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        self.canonical(&Elem::frac_i128(n as i128, d as i128))
    }

    /// Membership test for a rational value (F_p: denominator prime to p).
    pub fn contains(&self, x: &Elem) -> bool {
        match (self.kind, x) {
            (RingKind::RationalField, _) => true,
            (_, Elem::Small(_, 1)) => true,
            (RingKind::IntegersTwoInverted, Elem::Small(_, d)) => (*d as u64).is_power_of_two(),
            (RingKind::LocalIntegersAt(p) | RingKind::PrimeField(p), Elem::Small(_, d)) => {
                (*d as u64) % p != 0
            }
            (RingKind::IntegersTwoInverted, Elem::Big(r)) => is_power_of_two(r.denom()),
            (RingKind::LocalIntegersAt(p) | RingKind::PrimeField(p), Elem::Big(r)) => {
                big_mod(r.denom(), p) != 0
            }
        }
    }

    /// Canonical representative of a rational value, or an error if it is not
    /// a member. Idempotent on canonical inputs.
    pub fn canonical(&self, x: &Elem) -> Result<Elem> {
        if !self.contains(x) {
            return Err(Error::NotInRing { value: x.to_string(), ring: self.descriptor() });
        }
        match self.kind {
            RingKind::PrimeField(p) => {
                let (n, d) = match x {
                    Elem::Small(n, d) => (n.rem_euclid(p as i64) as u64, (*d as u64) % p),
                    Elem::Big(r) => (big_mod(r.numer(), p), big_mod(r.denom(), p)),
                };
                let v = ((n as u128 * mod_pow(d, p - 2, p) as u128) % p as u128) as i64;
                Ok(Elem::Small(v, 1))
            }
            _ => Ok(x.clone()),
        }
    }

    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let x = Elem::parse(s).ok_or_else(|| Error::Parse(format!("bad element {s:?}")))?;
        self.canonical(&x)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        match self.kind {
            RingKind::PrimeField(p) => {
                let (x, y) = (fp_val(a), fp_val(b));
                Elem::Small(((x + y) % p) as i64, 1)
            }
            _ => a.add(b),
        }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        match self.kind {
            RingKind::PrimeField(p) => {
                let x = fp_val(a);
                Elem::Small(((p - x) % p) as i64, 1)
            }
            _ => a.neg(),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match self.kind {
            RingKind::PrimeField(p) => {
                let (x, y) = (fp_val(a), fp_val(b));
                Elem::Small(((x as u128 * y as u128) % p as u128) as i64, 1)
            }
            _ => a.mul(b),
        }
    }

    /// `acc + a*b`.
    pub fn mul_add(&self, acc: &Elem, a: &Elem, b: &Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return acc.clone();
        }
        self.add(acc, &self.mul(a, b))
    }

    pub fn is_unit(&self, x: &Elem) -> bool {
        if x.is_zero() {
            return false;
        }
        match (self.kind, x) {
            (RingKind::RationalField | RingKind::PrimeField(_), _) => true,
            (RingKind::IntegersTwoInverted, Elem::Small(n, _)) => {
                let m = n.unsigned_abs();
                m >> m.trailing_zeros() == 1
            }
            (RingKind::IntegersTwoInverted, Elem::Big(r)) => odd_part(r.numer()).is_one(),
            (RingKind::LocalIntegersAt(p), Elem::Small(n, _)) => n.unsigned_abs() % p != 0,
            (RingKind::LocalIntegersAt(p), Elem::Big(r)) => big_mod(r.numer(), p) != 0,
        }
    }

    /// Inverse of a unit.
    pub fn inv(&self, x: &Elem) -> Option<Elem> {
        if !self.is_unit(x) {
            return None;
        }
        match self.kind {
            RingKind::PrimeField(p) => Some(Elem::Small(mod_pow(fp_val(x), p - 2, p) as i64, 1)),
            _ => Some(Elem::ONE.div(x)),
        }
    }

    /// Exact quotient `a / b` when `b` divides `a` in the ring.
    pub fn div(&self, a: &Elem, b: &Elem) -> Option<Elem> {
        if b.is_zero() {
            return if a.is_zero() { Some(Elem::ZERO) } else { None };
        }
        match self.kind {
            RingKind::PrimeField(_) => Some(self.mul(a, &self.inv(b)?)),
            _ => {
                let q = a.div(b);
                self.contains(&q).then_some(q)
            }
        }
    }

    pub fn divides(&self, a: &Elem, b: &Elem) -> bool {
        if b.is_zero() {
            return true;
        }
        if a.is_zero() {
            return false;
        }
        match self.kind {
            RingKind::RationalField | RingKind::PrimeField(_) => true,
            _ => self.norm(a) <= self.norm(b) && self.div(b, a).is_some(),
        }
    }

    /// Quotient `q` with `norm(b - q·a) < norm(a)` on ℤ[1/2] (symmetric
    /// remainder on odd parts); the exact quotient on the other rings, where
    /// a minimal-norm `a` always divides `b`.
    pub(crate) fn euclidean_quotient(&self, b: &Elem, a: &Elem) -> Elem {
        if let Some(q) = self.div(b, a) {
            return q;
        }
        let (ua, alpha) = self.unit_normal(a);
        let (ub, beta) = self.unit_normal(b);
        let (al, be) = (alpha.numer(), beta.numer());
        let two = BigInt::from(2);
        let q0: BigInt = (&be * &two + &al).div_floor(&(&al * &two));
        let q0 = Elem::from_big(num_rational::BigRational::from_integer(q0));
        self.mul(&ub, &q0).div(&ua)
    }

    /// Pivot size: 0 on fields, the p-adic valuation on ℤ₍p₎, the odd part of
    /// the numerator on ℤ[1/2]. Only meaningful on nonzero elements.
    pub fn norm(&self, x: &Elem) -> Norm {
        match (self.kind, x) {
            (RingKind::RationalField | RingKind::PrimeField(_), _) => Norm::Small(0),
            (RingKind::LocalIntegersAt(p), Elem::Small(n, _)) => Norm::Small(small_valuation(*n, p) as u64),
            (RingKind::LocalIntegersAt(p), Elem::Big(r)) => Norm::Small(valuation_big(r.numer(), p) as u64),
            (RingKind::IntegersTwoInverted, Elem::Small(n, _)) => {
                let m = n.unsigned_abs();
                Norm::Small(if m == 0 { 0 } else { m >> m.trailing_zeros() })
            }
            (RingKind::IntegersTwoInverted, Elem::Big(r)) => {
                let o = odd_part(r.numer());
                match o.to_u64() {
                    Some(v) => Norm::Small(v),
                    None => Norm::Big(o),
                }
            }
        }
    }

    /// `(unit, normal)` with `x = unit · normal` and `normal` the canonical
    /// associate: 1 on fields, `pᵛ` on ℤ₍p₎, the positive odd part on ℤ[1/2].
    pub fn unit_normal(&self, x: &Elem) -> (Elem, Elem) {
        if x.is_zero() {
            return (Elem::ONE, Elem::ZERO);
        }
        let normal = match self.kind {
            RingKind::RationalField | RingKind::PrimeField(_) => Elem::ONE,
            RingKind::LocalIntegersAt(p) => match self.norm(x) {
                Norm::Small(v) => Elem::from_big(num_rational::BigRational::from_integer(
                    BigInt::from(p).pow(v as u32),
                )),
                Norm::Big(_) => unreachable!("valuations are small"),
            },
            RingKind::IntegersTwoInverted => {
                Elem::from_big(num_rational::BigRational::from_integer(odd_part(&x.numer())))
            }
        };
        let unit = self.div(x, &normal).expect("normal associate divides");
        (unit, normal)
    }

    /// `(s, t, g)` with `s·a + t·b = g`, `g` the normalized gcd.
    pub fn bezout(&self, a: &Elem, b: &Elem) -> (Elem, Elem, Elem) {
        if a.is_zero() && b.is_zero() {
            return (Elem::ZERO, Elem::ZERO, Elem::ZERO);
        }
        match self.kind {
            RingKind::IntegersTwoInverted => {
                if a.is_zero() || b.is_zero() {
                    let (x, s_is_a) = if a.is_zero() { (b, false) } else { (a, true) };
                    let (u, g) = self.unit_normal(x);
                    let s = self.inv(&u).expect("unit");
                    return if s_is_a { (s, Elem::ZERO, g) } else { (Elem::ZERO, s, g) };
                }
                let (ua, na) = self.unit_normal(a);
                let (ub, nb) = self.unit_normal(b);
                let (x, y, g) = elem::ext_gcd(&na.numer(), &nb.numer());
                let s = Elem::from_big(num_rational::BigRational::from_integer(x)).div(&ua);
                let t = Elem::from_big(num_rational::BigRational::from_integer(y)).div(&ub);
                (s, t, Elem::from_big(num_rational::BigRational::from_integer(g)))
            }
            _ => {
                let pick_a = !a.is_zero() && (b.is_zero() || self.norm(a) <= self.norm(b));
                let x = if pick_a { a } else { b };
                let (u, g) = self.unit_normal(x);
                let s = self.inv(&u).expect("unit");
                if pick_a {
                    (s, Elem::ZERO, g)
                } else {
                    (Elem::ZERO, s, g)
                }
            }
        }
    }

    /// Factorization into a unit and prime powers (ℤ[1/2], ℤ₍p₎ only).
    pub fn valuation_and_unit(&self, x: &Elem) -> Result<Factorization> {
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        match self.kind {
            RingKind::LocalIntegersAt(p) => {
                let v = match self.norm(x) {
                    Norm::Small(v) => v as u32,
                    Norm::Big(_) => unreachable!(),
                };
                let (unit, _) = self.unit_normal(x);
                Ok(Factorization { factors: vec![(BigInt::from(p), v)], unit })
            }
            RingKind::IntegersTwoInverted => {
                let (unit, normal) = self.unit_normal(x);
                Ok(Factorization { factors: factor_integer(&normal.numer()), unit })
            }
            _ => Err(Error::UnsupportedRing(format!(
                "valuations are defined on the PID kinds, not {}",
                self.descriptor()
            ))),
        }
    }
}

fn fp_val(x: &Elem) -> u64 {
    match x {
        Elem::Small(v, 1) if *v >= 0 => *v as u64,
        _ => panic!("non-canonical F_p element {x}"),
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for Ring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ring> {
        let s = s.trim();
        let prime = |t: &str| -> Result<u64> {
            t.parse::<u64>().map_err(|_| Error::UnsupportedRing(format!("bad prime in {s:?}")))
        };
        match s {
            "q" => Ok(Ring::rationals()),
            "z-half" => Ok(Ring::two_inverted()),
            _ => {
                if let Some(p) = s.strip_prefix("fp:") {
                    Ring::prime_field(prime(p)?)
                } else if let Some(p) = s.strip_prefix("zloc:") {
                    Ring::local_at(prime(p)?)
                } else {
                    Err(Error::UnsupportedRing(format!("unknown ring descriptor {s:?}")))
                }
            }
        }
    }
}

impl Serialize for Ring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.descriptor())
    }
}

impl<'de> Deserialize<'de> for Ring {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Ring, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rules() {
        assert_eq!(Ring::prime_field(5).unwrap().d(), 0);
        assert_eq!(Ring::two_inverted().d(), 1);
        assert_eq!(Ring::local_at(3).unwrap().d(), 1);
        assert!(matches!(Ring::prime_field(2), Err(Error::UnsupportedRing(_))));
        assert!(matches!(Ring::local_at(9), Err(Error::UnsupportedRing(_))));
        assert!(matches!("zp:3".parse::<Ring>(), Err(Error::UnsupportedRing(_))));
        for s in ["q", "fp:7", "z-half", "zloc:5"] {
            assert_eq!(s.parse::<Ring>().unwrap().descriptor(), s);
        }
    }

    #[test]
    fn units() {
        let z = Ring::two_inverted();
        assert!(z.is_unit(&z.int(2)));
        assert!(!z.is_unit(&z.int(3)));
        assert!(z.is_unit(&z.frac(-1, 8).unwrap()));
        let f5 = Ring::prime_field(5).unwrap();
        assert!(f5.is_unit(&f5.int(3)));
        let l3 = Ring::local_at(3).unwrap();
        assert!(l3.is_unit(&l3.frac(5, 7).unwrap()));
        assert!(!l3.is_unit(&l3.int(6)));
    }

    #[test]
    fn membership() {
        let z = Ring::two_inverted();
        assert!(z.frac(1, 3).is_err());
        assert!(z.frac(3, 4).is_ok());
        let l3 = Ring::local_at(3).unwrap();
        assert!(l3.frac(1, 3).is_err());
        assert!(l3.frac(1, 2).is_ok());
        let f5 = Ring::prime_field(5).unwrap();
        assert_eq!(f5.frac(1, 2).unwrap(), f5.int(3));
    }

    #[test]
    fn valuations() {
        let l3 = Ring::local_at(3).unwrap();
        let f = l3.valuation_and_unit(&l3.int(9)).unwrap();
        assert_eq!((f.exponent_of(3), f.unit.clone()), (2, l3.int(1)));
        let f = l3.valuation_and_unit(&l3.int(5)).unwrap();
        assert_eq!((f.exponent_of(3), f.unit.clone()), (0, l3.int(5)));
        assert_eq!(l3.valuation_and_unit(&l3.zero()), Err(Error::ZeroElement));
    }

    #[test]
    fn twelve_over_z_half() {
        // Oracle: 12 = 2^2 * 3 by hand; the 2-part is a unit.
        let z = Ring::two_inverted();
        let f = z.valuation_and_unit(&z.int(12)).unwrap();
        assert_eq!(f.factors, vec![(BigInt::from(3), 1)]);
        assert_eq!(f.unit, z.int(4));
    }

    #[test]
    fn bezout_identity() {
        let z = Ring::two_inverted();
        for (a, b) in [(9, 15), (6, 10), (3, 0), (0, 5), (-21, 12)] {
            let (a, b) = (z.int(a), z.int(b));
            let (s, t, g) = z.bezout(&a, &b);
            assert_eq!(z.add(&z.mul(&s, &a), &z.mul(&t, &b)), g);
            assert!(z.divides(&g, &a) && z.divides(&g, &b));
        }
    }
}
