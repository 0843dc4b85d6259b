//! Exact rationals with an inline fast path.
//!
//! `Small(n, d)` holds a reduced fraction with `d > 0` whenever both parts fit
//! in an `i64` (and `n != i64::MIN`); everything else lives in `Big`. The
//! representation is canonical, so derived equality and hashing are sound.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Elem {
    Small(i64, i64),
    Big(Arc<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn fits(x: i128) -> bool {
    x > i64::MIN as i128 && x <= i64::MAX as i128
}

impl Elem {
    pub const ZERO: Elem = Elem::Small(0, 1);
    pub const ONE: Elem = Elem::Small(1, 1);

    pub fn int(n: i64) -> Elem {
        if n == i64::MIN {
            Elem::from_big(BigRational::from_integer(BigInt::from(n)))
        } else {
            Elem::Small(n, 1)
        }
    }

    /// Reduced fraction `n / d`; `d` must be nonzero.
    pub fn frac_i128(n: i128, d: i128) -> Elem {
        assert!(d != 0, "zero denominator");
        if n == 0 {
            return Elem::ZERO;
        }
        if d == 1 && fits(n) {
            return Elem::Small(n as i64, 1);
        }
        if n == i128::MIN || d == i128::MIN {
            return Elem::from_big(BigRational::new(BigInt::from(n), BigInt::from(d)));
        }
        let (mut n, mut d) = if d < 0 { (-n, -d) } else { (n, d) };
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        if g > 1 {
            n /= g;
            d /= g;
        }
        if fits(n) && fits(d) {
            Elem::Small(n as i64, d as i64)
        } else {
            Elem::Big(Arc::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d))))
        }
    }

    pub fn from_big(r: BigRational) -> Elem {
        // BigRational keeps itself reduced with a positive denominator.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Elem::Small(n, d),
            _ => Elem::Big(Arc::new(r)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Elem::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Elem::Big(r) => (**r).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Elem::Small(n, _) => BigInt::from(*n),
            Elem::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Elem::Small(_, d) => BigInt::from(*d),
            Elem::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Elem::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Elem::Small(1, 1))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Elem::Small(_, d) => *d == 1,
            Elem::Big(r) => r.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Elem::Small(n, _) => *n < 0,
            Elem::Big(r) => r.is_negative(),
        }
    }

    pub fn small(&self) -> Option<(i64, i64)> {
        match self {
            Elem::Small(n, d) => Some((*n, *d)),
            Elem::Big(_) => None,
        }
    }

    pub fn add(&self, other: &Elem) -> Elem {
        match (self, other) {
            (Elem::Small(a, 1), Elem::Small(b, 1)) => {
                let s = *a as i128 + *b as i128;
                if fits(s) {
                    Elem::Small(s as i64, 1)
                } else {
                    Elem::frac_i128(s, 1)
                }
            }
            (Elem::Small(a, b), Elem::Small(c, d)) => {
                if b == d {
                    Elem::frac_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    Elem::frac_i128(
                        *a as i128 * *d as i128 + *c as i128 * *b as i128,
                        *b as i128 * *d as i128,
                    )
                }
            }
            _ => Elem::from_big(self.to_big() + other.to_big()),
        }
    }

    pub fn neg(&self) -> Elem {
        match self {
            Elem::Small(n, d) => Elem::Small(-n, *d),
            Elem::Big(r) => Elem::from_big(-(**r).clone()),
        }
    }

    pub fn sub(&self, other: &Elem) -> Elem {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Elem) -> Elem {
        match (self, other) {
            (Elem::Small(0, _), _) | (_, Elem::Small(0, _)) => Elem::ZERO,
            (Elem::Small(a, 1), Elem::Small(c, 1)) => {
                let p = *a as i128 * *c as i128;
                if fits(p) {
                    Elem::Small(p as i64, 1)
                } else {
                    Elem::frac_i128(p, 1)
                }
            }
            (Elem::Small(a, b), Elem::Small(c, d)) => {
                Elem::frac_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Elem::from_big(self.to_big() * other.to_big()),
        }
    }

    /// Rational quotient; `other` must be nonzero.
    pub fn div(&self, other: &Elem) -> Elem {
        assert!(!other.is_zero(), "division by zero");
        match (self, other) {
            (Elem::Small(a, b), Elem::Small(c, d)) => {
                Elem::frac_i128(*a as i128 * *d as i128, *b as i128 * *c as i128)
            }
            _ => Elem::from_big(self.to_big() / other.to_big()),
        }
    }

    pub fn parse(s: &str) -> Option<Elem> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
            None => (s.parse::<BigInt>().ok()?, BigInt::one()),
        };
        if d.is_zero() {
            return None;
        }
        Some(Elem::from_big(BigRational::new(n, d)))
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Small(n, 1) => write!(f, "{n}"),
            Elem::Small(n, d) => write!(f, "{n}/{d}"),
            Elem::Big(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

/// `(s, t, g)` with `s*a + t*b = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.x, -e.y, -e.gcd)
    } else {
        (e.x, e.y, e.gcd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_path_matches_big_path() {
        let vals = [(3, 4), (-7, 2), (5, 1), (0, 1), (i64::MAX, 3), (-9, 6)];
        for &(a, b) in &vals {
            for &(c, d) in &vals {
                let x = Elem::frac_i128(a as i128, b as i128);
                let y = Elem::frac_i128(c as i128, d as i128);
                let bx = x.to_big();
                let by = y.to_big();
                assert_eq!(x.add(&y), Elem::from_big(&bx + &by));
                assert_eq!(x.mul(&y), Elem::from_big(&bx * &by));
                assert_eq!(x.sub(&y), Elem::from_big(&bx - &by));
                if !y.is_zero() {
                    assert_eq!(x.div(&y), Elem::from_big(&bx / &by));
                }
            }
        }
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Elem::int(i64::MAX).add(&Elem::int(i64::MAX));
        assert!(matches!(big, Elem::Big(_)));
        let back = big.sub(&Elem::int(i64::MAX));
        assert_eq!(back, Elem::int(i64::MAX));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "-3", "5/4", "-12/7", "123456789012345678901234567891/8"] {
            assert_eq!(Elem::parse(s).unwrap().to_string(), s);
        }
        assert_eq!(Elem::parse("6/4").unwrap().to_string(), "3/2");
        assert!(Elem::parse("1/0").is_none());
    }
}
