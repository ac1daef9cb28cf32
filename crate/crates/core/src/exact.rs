//! Exact ordered arithmetic in `Q` and `Q(sqrt(D))`.
//!
//! An [`ExactReal`] is either a reduced rational or a quadratic surd
//! `a + b*sqrt(D)` with `b != 0` and `D >= 2` squarefree. Values from two
//! different quadratic fields never meet in one computation: the fallible
//! `try_*` methods report [`Error::MixedRadicands`], while the operator
//! impls panic, so generic code must check fields up front (see
//! [`crate::scalar::common_field`]).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExactReal {
    Rational(BigRational),
    /// `rational + coeff * sqrt(radicand)`; `coeff` is never zero.
    Surd {
        rational: BigRational,
        coeff: BigRational,
        radicand: u64,
    },
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Splits `n` into `(k, s)` with `n = k^2 * s` and `s` squarefree.
pub fn squarefree_split(mut n: u64) -> (u64, u64) {
    let mut square = 1u64;
    let mut free = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= p;
        }
        if e % 2 == 1 {
            free *= p;
        }
        p += 1;
    }
    (square, free * n)
}

impl ExactReal {
    pub fn zero() -> Self {
        ExactReal::Rational(BigRational::zero())
    }

    pub fn int(n: i64) -> Self {
        ExactReal::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `n/d`. Panics when `d == 0`.
    pub fn rational(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        ExactReal::Rational(ratio(n, d))
    }

    pub fn from_ratio(q: BigRational) -> Self {
        ExactReal::Rational(q)
    }

    /// `a + b*sqrt(n)`, normalized: square factors of `n` move into `b`,
    /// and a vanishing irrational part collapses to a rational.
    pub fn surd(a: BigRational, b: BigRational, n: u64) -> Self {
        let (k, free) = squarefree_split(n);
        if b.is_zero() || free == 1 || n == 0 {
            let extra = if n == 0 {
                BigRational::zero()
            } else {
                b * BigRational::from_integer(BigInt::from(k))
            };
            return ExactReal::Rational(a + extra);
        }
        ExactReal::Surd {
            rational: a,
            coeff: b * BigRational::from_integer(BigInt::from(k)),
            radicand: free,
        }
    }

    /// `sqrt(n)` for a non-negative integer `n`.
    pub fn sqrt(n: u64) -> Self {
        Self::surd(BigRational::zero(), BigRational::one(), n)
    }

    /// Shorthand for `(a_num/a_den) + (b_num/b_den)*sqrt(n)`.
    pub fn quadratic(a_num: i64, a_den: i64, b_num: i64, b_den: i64, n: u64) -> Self {
        Self::surd(ratio(a_num, a_den), ratio(b_num, b_den), n)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ExactReal::Rational(_))
    }

    pub fn radicand(&self) -> Option<u64> {
        match self {
            ExactReal::Rational(_) => None,
            ExactReal::Surd { radicand, .. } => Some(*radicand),
        }
    }

    pub fn rational_part(&self) -> BigRational {
        match self {
            ExactReal::Rational(q) => q.clone(),
            ExactReal::Surd { rational, .. } => rational.clone(),
        }
    }

    pub fn irrational_coeff(&self) -> BigRational {
        match self {
            ExactReal::Rational(_) => BigRational::zero(),
            ExactReal::Surd { coeff, .. } => coeff.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExactReal::Rational(q) => Some(q),
            ExactReal::Surd { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExactReal::Rational(q) if q.is_zero())
    }

    fn parts(&self) -> (BigRational, BigRational, Option<u64>) {
        (self.rational_part(), self.irrational_coeff(), self.radicand())
    }

    fn joint_radicand(&self, other: &Self) -> Result<Option<u64>> {
        match (self.radicand(), other.radicand()) {
            (Some(a), Some(b)) if a != b => Err(Error::MixedRadicands(a, b)),
            (Some(a), _) | (_, Some(a)) => Ok(Some(a)),
            (None, None) => Ok(None),
        }
    }

    fn build(a: BigRational, b: BigRational, d: Option<u64>) -> Self {
        match d {
            Some(d) if !b.is_zero() => ExactReal::Surd {
                rational: a,
                coeff: b,
                radicand: d,
            },
            _ => ExactReal::Rational(a),
        }
    }

    /// Sign of the represented real, decided without floating point:
    /// mixed-sign surds compare `a^2` against `b^2 * D`.
    pub fn signum(&self) -> Ordering {
        match self {
            ExactReal::Rational(q) => q.cmp(&BigRational::zero()),
            ExactReal::Surd {
                rational,
                coeff,
                radicand,
            } => {
                let sa = rational.cmp(&BigRational::zero());
                let sb = coeff.cmp(&BigRational::zero());
                match (sa, sb) {
                    (Ordering::Less, Ordering::Less) | (Ordering::Equal, Ordering::Less) => {
                        Ordering::Less
                    }
                    (Ordering::Greater, Ordering::Greater)
                    | (Ordering::Equal, Ordering::Greater) => Ordering::Greater,
                    _ => {
                        let a2 = rational * rational;
                        let b2d = coeff * coeff * BigRational::from_integer(BigInt::from(*radicand));
                        // a^2 = b^2 D is impossible for squarefree D >= 2
                        match a2.cmp(&b2d) {
                            Ordering::Greater => sa,
                            _ => sb,
                        }
                    }
                }
            }
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let d = self.joint_radicand(other)?;
        let (a1, b1, _) = self.parts();
        let (a2, b2, _) = other.parts();
        Ok(Self::build(a1 + a2, b1 + b2, d))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        let d = self.joint_radicand(other)?;
        let (a1, b1, _) = self.parts();
        let (a2, b2, _) = other.parts();
        Ok(Self::build(a1 - a2, b1 - b2, d))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let d = self.joint_radicand(other)?;
        let (a1, b1, _) = self.parts();
        let (a2, b2, _) = other.parts();
        let dd = BigRational::from_integer(BigInt::from(d.unwrap_or(0)));
        let a = &a1 * &a2 + &b1 * &b2 * dd;
        let b = a1 * b2 + b1 * a2;
        Ok(Self::build(a, b, d))
    }

    /// Exact division; the denominator is rationalized via its conjugate.
    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.joint_radicand(other)?;
        let inv = other.recip()?;
        self.try_mul(&inv)
    }

    pub fn recip(&self) -> Result<Self> {
        match self {
            ExactReal::Rational(q) => {
                if q.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(ExactReal::Rational(q.recip()))
                }
            }
            ExactReal::Surd {
                rational,
                coeff,
                radicand,
            } => {
                let norm = rational * rational
                    - coeff * coeff * BigRational::from_integer(BigInt::from(*radicand));
                Ok(ExactReal::Surd {
                    rational: rational / &norm,
                    coeff: -coeff / &norm,
                    radicand: *radicand,
                })
            }
        }
    }

    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        if let (ExactReal::Rational(a), ExactReal::Rational(b)) = (self, other) {
            return Ok(a.cmp(b));
        }
        Ok(self.try_sub(other)?.signum())
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        match self {
            ExactReal::Rational(q) => q.floor().to_integer(),
            ExactReal::Surd {
                rational,
                coeff,
                radicand,
            } => {
                // |b| sqrt(D) = sqrt(b^2 D); integer sqrt of its floor is within 1
                let b2d = coeff * coeff * BigRational::from_integer(BigInt::from(*radicand));
                let root = b2d.floor().to_integer().sqrt();
                let mut n = if coeff.is_positive() {
                    rational.floor().to_integer() + root
                } else {
                    rational.floor().to_integer() - root - 1
                };
                let int = |n: &BigInt| ExactReal::Rational(BigRational::from_integer(n.clone()));
                while self.signum_against(&int(&n)) == Ordering::Less {
                    n -= 1;
                }
                loop {
                    let next = &n + 1;
                    if self.signum_against(&int(&next)) == Ordering::Less {
                        break;
                    }
                    n = next;
                }
                n
            }
        }
    }

    fn signum_against(&self, other: &Self) -> Ordering {
        self.try_cmp(other).expect("rational comparison cannot mix radicands")
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactReal::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            ExactReal::Surd {
                rational,
                coeff,
                radicand,
            } => {
                rational.to_f64().unwrap_or(f64::NAN)
                    + coeff.to_f64().unwrap_or(f64::NAN) * (*radicand as f64).sqrt()
            }
        }
    }

    /// Hand-typed input: the strict grammar, or a signed sum of terms
    /// `p`, `p/q`, `sqrt(D)` and `p/q*sqrt(D)` such as `1+3*sqrt(2)`.
    pub fn parse_lenient(s: &str) -> Result<Self> {
        if let Ok(x) = s.trim().parse() {
            return Ok(x);
        }
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(parse_err(s, "empty"));
        }
        let mut total = ExactReal::zero();
        let mut start = 0;
        let bytes = t.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || (matches!(bytes[i], b'+' | b'-') && bytes[i - 1] != b'(') {
                let term = lenient_term(&t[start..i]).ok_or_else(|| parse_err(s, "expected a sum of p/q and p/q*sqrt(D) terms"))?;
                total = total.try_add(&term).map_err(|_| parse_err(s, "terms mix radicands"))?;
                start = i;
            }
        }
        Ok(total)
    }
}

fn lenient_ratio(t: &str) -> Option<BigRational> {
    let (n, d) = t.split_once('/').unwrap_or((t, "1"));
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

fn lenient_term(t: &str) -> Option<ExactReal> {
    let (sign, body) = match t.as_bytes().first()? {
        b'-' => (-BigRational::one(), &t[1..]),
        b'+' => (BigRational::one(), &t[1..]),
        _ => (BigRational::one(), t),
    };
    let Some(pos) = body.find("sqrt(") else {
        return Some(ExactReal::Rational(sign * lenient_ratio(body)?));
    };
    let coeff = match &body[..pos] {
        "" => BigRational::one(),
        c => lenient_ratio(c.strip_suffix('*')?)?,
    };
    let n: u64 = body[pos + 5..].strip_suffix(')')?.parse().ok()?;
    Some(ExactReal::surd(BigRational::zero(), sign * coeff, n))
}

fn parse_err(text: &str, reason: &str) -> Error {
    Error::Parse {
        text: text.to_string(),
        reason: reason.to_string(),
    }
}

fn write_ratio(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    write!(f, "{}/{}", q.numer(), q.denom())
}

/// `p/q` for rationals, `p/q+r/s*sqrt(D)` for surds; signs sit on the
/// numerators and a zero rational part is omitted.
impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactReal::Rational(q) => write_ratio(f, q),
            ExactReal::Surd {
                rational,
                coeff,
                radicand,
            } => {
                if !rational.is_zero() {
                    write_ratio(f, rational)?;
                    f.write_str("+")?;
                }
                write_ratio(f, coeff)?;
                write!(f, "*sqrt({radicand})")
            }
        }
    }
}

fn parse_ratio(full: &str, s: &str) -> Result<BigRational> {
    let (n, d) = s
        .split_once('/')
        .ok_or_else(|| parse_err(full, "expected p/q"))?;
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|c| c.is_ascii_digit());
    let n_body = n.strip_prefix('-').unwrap_or(n);
    if !digits(n_body) || !digits(d) {
        return Err(parse_err(full, "expected p/q with decimal integers"));
    }
    let n: BigInt = n.parse().map_err(|_| parse_err(full, "bad numerator"))?;
    let d: BigInt = d.parse().map_err(|_| parse_err(full, "bad denominator"))?;
    if d.sign() == Sign::NoSign {
        return Err(parse_err(full, "zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

fn parse_surd_term(full: &str, s: &str) -> Result<(BigRational, u64)> {
    let (coeff, rest) = s
        .split_once("*sqrt(")
        .ok_or_else(|| parse_err(full, "expected r/s*sqrt(D)"))?;
    let rad = rest
        .strip_suffix(')')
        .ok_or_else(|| parse_err(full, "missing ')'"))?;
    if rad.is_empty() || !rad.bytes().all(|c| c.is_ascii_digit()) {
        return Err(parse_err(full, "radicand must be a positive integer"));
    }
    let rad: u64 = rad.parse().map_err(|_| parse_err(full, "radicand out of range"))?;
    if rad == 0 {
        return Err(parse_err(full, "radicand must be positive"));
    }
    Ok((parse_ratio(full, coeff)?, rad))
}

impl FromStr for ExactReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if !s.contains("sqrt") {
            return parse_ratio(s, s).map(ExactReal::Rational);
        }
        let (a, term) = match s.split_once('+') {
            Some((a, term)) => (parse_ratio(s, a)?, term),
            None => (BigRational::zero(), s),
        };
        let (b, rad) = parse_surd_term(s, term)?;
        Ok(ExactReal::surd(a, b, rad))
    }
}

impl PartialOrd for ExactReal {
    /// `None` for surds from different quadratic fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&ExactReal> for &ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: &ExactReal) -> ExactReal {
                match self.$try(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $trait<ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: ExactReal) -> ExactReal {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: &ExactReal) -> ExactReal {
                (&self).$method(rhs)
            }
        }
        impl $trait<ExactReal> for &ExactReal {
            type Output = ExactReal;
            fn $method(self, rhs: ExactReal) -> ExactReal {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        match self {
            ExactReal::Rational(q) => ExactReal::Rational(-q),
            ExactReal::Surd {
                rational,
                coeff,
                radicand,
            } => ExactReal::Surd {
                rational: -rational,
                coeff: -coeff,
                radicand,
            },
        }
    }
}

impl Neg for &ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        -self.clone()
    }
}

impl Zero for ExactReal {
    fn zero() -> Self {
        ExactReal::zero()
    }
    fn is_zero(&self) -> bool {
        ExactReal::is_zero(self)
    }
}

impl One for ExactReal {
    fn one() -> Self {
        ExactReal::int(1)
    }
}

impl From<i64> for ExactReal {
    fn from(n: i64) -> Self {
        ExactReal::int(n)
    }
}

impl From<BigRational> for ExactReal {
    fn from(q: BigRational) -> Self {
        ExactReal::Rational(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> ExactReal {
        ExactReal::rational(n, d)
    }

    #[test]
    fn compare_examples() {
        assert_eq!(r(1, 2).try_cmp(&r(1, 3)).unwrap(), Ordering::Greater);
        assert_eq!(ExactReal::sqrt(2).try_cmp(&r(3, 2)).unwrap(), Ordering::Less);
        assert_eq!(
            ExactReal::sqrt(2).try_cmp(&ExactReal::sqrt(2)).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn sqrt2_against_three_halves_by_squaring() {
        // 2 < 9/4 and both sides positive
        assert!(BigRational::from_integer(2.into()) < ratio(9, 4));
        assert!(ExactReal::sqrt(2) < r(3, 2));
    }

    #[test]
    fn mixed_radicands_rejected() {
        let e = ExactReal::sqrt(2).try_cmp(&ExactReal::sqrt(3)).unwrap_err();
        assert_eq!(e, Error::MixedRadicands(2, 3));
        assert!(ExactReal::sqrt(2).try_add(&ExactReal::sqrt(5)).is_err());
        assert_eq!(ExactReal::sqrt(2).partial_cmp(&ExactReal::sqrt(3)), None);
    }

    #[test]
    fn arithmetic_examples() {
        let one = ExactReal::int(1);
        let s = ExactReal::sqrt(2);
        assert_eq!((&one + &s) * (&one - &s), ExactReal::int(-1));
        let inv = one.try_div(&s).unwrap();
        assert_eq!(inv, ExactReal::quadratic(0, 1, 1, 2, 2));
        // rationalization check: (1/sqrt 2)^2 = 1/2
        assert_eq!(&inv * &inv, r(1, 2));
        assert_eq!(&s + ExactReal::zero(), s);
        assert_eq!(r(1, 2).try_div(&ExactReal::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn normalization() {
        assert_eq!(ExactReal::sqrt(8), ExactReal::quadratic(0, 1, 2, 1, 2));
        assert_eq!(ExactReal::sqrt(9), ExactReal::int(3));
        assert!(ExactReal::sqrt(12).radicand() == Some(3));
        assert!((ExactReal::sqrt(2) - ExactReal::sqrt(2)).is_rational());
    }

    #[test]
    fn square_of_root_is_radicand() {
        for d in 2..200u64 {
            let s = ExactReal::sqrt(d);
            assert_eq!(&s * &s, ExactReal::int(d as i64), "D = {d}");
        }
    }

    #[test]
    fn text_form() {
        assert_eq!(r(3, 6).to_string(), "1/2");
        assert_eq!(ExactReal::int(-2).to_string(), "-2/1");
        assert_eq!(ExactReal::sqrt(2).to_string(), "1/1*sqrt(2)");
        let x = ExactReal::quadratic(1, 1, -1, 1, 2);
        assert_eq!(x.to_string(), "1/1+-1/1*sqrt(2)");
        assert_eq!("1/1+-1/1*sqrt(2)".parse::<ExactReal>().unwrap(), x);
        assert_eq!(
            "0/1+1/1*sqrt(2)".parse::<ExactReal>().unwrap(),
            ExactReal::sqrt(2)
        );
        assert_eq!("2/4".parse::<ExactReal>().unwrap(), r(1, 2));
        for bad in ["1", "1/0", "1/2-1/1*sqrt(2)", "1/1*sqrt(0)", "a/b", "1/1*sqrt(2", "+1/2", "1/-2"] {
            assert!(bad.parse::<ExactReal>().is_err(), "{bad} accepted");
        }
        assert_eq!(ExactReal::parse_lenient("3").unwrap(), ExactReal::int(3));
        assert_eq!(ExactReal::parse_lenient("-3").unwrap(), ExactReal::int(-3));
        assert_eq!(ExactReal::parse_lenient("sqrt(2)").unwrap(), ExactReal::sqrt(2));
        assert_eq!(ExactReal::parse_lenient("1 + 3*sqrt(2)").unwrap(), ExactReal::quadratic(1, 1, 3, 1, 2));
        assert_eq!(ExactReal::parse_lenient("-1/2-sqrt(8)").unwrap(), ExactReal::quadratic(-1, 2, -2, 1, 2));
        assert_eq!(ExactReal::parse_lenient("sqrt(4)").unwrap(), ExactReal::int(2));
        assert!(ExactReal::parse_lenient("sqrt(2)+sqrt(3)").is_err());
        assert!(ExactReal::parse_lenient("1.5").is_err());
        assert!(ExactReal::parse_lenient("1/0").is_err());
    }

    #[test]
    fn floor_of_surds() {
        assert_eq!(ExactReal::sqrt(2).floor(), BigInt::from(1));
        assert_eq!((-ExactReal::sqrt(2)).floor(), BigInt::from(-2));
        assert_eq!(ExactReal::quadratic(1, 2, 3, 1, 5).floor(), BigInt::from(7));
        assert_eq!(r(-1, 2).floor(), BigInt::from(-1));
        assert_eq!(ExactReal::sqrt(10_000_000_000 + 1).floor(), BigInt::from(100_000));
    }

    #[test]
    fn signum_mixed_signs() {
        // 3 - 2 sqrt 2 > 0 since 9 > 8
        assert_eq!(ExactReal::quadratic(3, 1, -2, 1, 2).signum(), Ordering::Greater);
        // 2 - 3 sqrt 2 < 0
        assert_eq!(ExactReal::quadratic(2, 1, -3, 1, 2).signum(), Ordering::Less);
        assert_eq!(ExactReal::quadratic(-3, 1, 2, 1, 2).signum(), Ordering::Less);
    }
}
