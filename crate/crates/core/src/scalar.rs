//! The scalar abstraction shared by every structure in the crate.
//!
//! Metric spaces, distance sets, amalgams and Ramsey searches are written
//! once over [`Scalar`]. Exact instances are [`ExactReal`] and
//! [`BigRational`]; `f64`/`f32` are available for quick experiments, with
//! the usual caveat that equality of distances is then approximate.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::ExactReal;

/// The algebraic home of a scalar value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Rational,
    Quadratic(u64),
    Float,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Whether `==` and `<` are exact for this type.
    const EXACT: bool;

    fn field(&self) -> Field;
    fn from_ratio(q: &BigRational) -> Self;
    /// The exact rational value, when the scalar is rational.
    fn to_ratio(&self) -> Option<BigRational>;
    fn to_f64(&self) -> f64;
    fn floor_int(&self) -> BigInt;
    /// Canonical text form (the JSON wire format for exact types).
    fn to_text(&self) -> String;
    fn parse_text(s: &str) -> Result<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(&BigRational::from_integer(BigInt::from(n)))
    }
}

/// Total comparison; values are assumed to share one field.
pub fn cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b)
        .unwrap_or_else(|| panic!("incomparable scalars {a:?} and {b:?}"))
}

pub fn min<T: Scalar>(a: &T, b: &T) -> T {
    if cmp(a, b) == Ordering::Greater {
        b.clone()
    } else {
        a.clone()
    }
}

pub fn abs<T: Scalar>(a: &T) -> T {
    if cmp(a, &T::zero()) == Ordering::Less {
        -a.clone()
    } else {
        a.clone()
    }
}

/// The single field that all `values` live in, or `MixedRadicands`.
pub fn common_field<'a, T: Scalar>(values: impl IntoIterator<Item = &'a T>) -> Result<Field> {
    let mut acc = Field::Rational;
    for v in values {
        acc = join_fields(acc, v.field())?;
    }
    Ok(acc)
}

pub fn join_fields(a: Field, b: Field) -> Result<Field> {
    match (a, b) {
        (Field::Quadratic(x), Field::Quadratic(y)) if x != y => Err(Error::MixedRadicands(x, y)),
        (Field::Float, _) | (_, Field::Float) => Ok(Field::Float),
        (Field::Quadratic(x), _) | (_, Field::Quadratic(x)) => Ok(Field::Quadratic(x)),
        _ => Ok(Field::Rational),
    }
}

/// `|x - y| <= z <= x + y`.
pub fn triangle_ok<T: Scalar>(x: &T, y: &T, z: &T) -> bool {
    let diff = abs(&(x.clone() - y.clone()));
    cmp(&diff, z) != Ordering::Greater && cmp(z, &(x.clone() + y.clone())) != Ordering::Greater
}

impl Scalar for ExactReal {
    const EXACT: bool = true;

    fn field(&self) -> Field {
        match self.radicand() {
            Some(d) => Field::Quadratic(d),
            None => Field::Rational,
        }
    }
    fn from_ratio(q: &BigRational) -> Self {
        ExactReal::Rational(q.clone())
    }
    fn to_ratio(&self) -> Option<BigRational> {
        self.as_rational().cloned()
    }
    fn to_f64(&self) -> f64 {
        ExactReal::to_f64(self)
    }
    fn floor_int(&self) -> BigInt {
        self.floor()
    }
    fn to_text(&self) -> String {
        self.to_string()
    }
    fn parse_text(s: &str) -> Result<Self> {
        s.parse()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn field(&self) -> Field {
        Field::Rational
    }
    fn from_ratio(q: &BigRational) -> Self {
        q.clone()
    }
    fn to_ratio(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn floor_int(&self) -> BigInt {
        self.floor().to_integer()
    }
    fn to_text(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
    fn parse_text(s: &str) -> Result<Self> {
        match s.parse::<ExactReal>()? {
            ExactReal::Rational(q) => Ok(q),
            _ => Err(Error::Parse {
                text: s.to_string(),
                reason: "expected a rational".into(),
            }),
        }
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn field(&self) -> Field {
                Field::Float
            }
            fn from_ratio(q: &BigRational) -> Self {
                ToPrimitive::to_f64(q).unwrap_or(f64::NAN) as $t
            }
            fn to_ratio(&self) -> Option<BigRational> {
                BigRational::from_float(*self as f64)
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn floor_int(&self) -> BigInt {
                BigInt::from_f64(self.floor() as f64).unwrap_or_default()
            }
            fn to_text(&self) -> String {
                format!("{:?}", self)
            }
            fn parse_text(s: &str) -> Result<Self> {
                s.trim().parse::<$t>().map_err(|e| Error::Parse {
                    text: s.to_string(),
                    reason: e.to_string(),
                })
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_join() {
        let a = ExactReal::sqrt(2);
        let b = ExactReal::int(3);
        assert_eq!(common_field([&a, &b]).unwrap(), Field::Quadratic(2));
        assert!(common_field([&a, &ExactReal::sqrt(3)]).is_err());
        assert_eq!(common_field::<f64>([]).unwrap(), Field::Rational);
    }

    #[test]
    fn triangle_predicate_over_all_scalars() {
        fn check<T: Scalar>() {
            let t = |n| T::from_int(n);
            assert!(triangle_ok(&t(1), &t(1), &t(2)));
            assert!(!triangle_ok(&t(1), &t(1), &t(3)));
            assert!(triangle_ok(&t(1), &t(2), &t(3)));
        }
        check::<ExactReal>();
        check::<BigRational>();
        check::<f64>();
        check::<f32>();
    }

    #[test]
    fn rational_text_round_trip() {
        let q = BigRational::new(BigInt::from(-6), BigInt::from(4));
        assert_eq!(q.to_text(), "-3/2");
        assert_eq!(BigRational::parse_text("-3/2").unwrap(), q);
        assert!(BigRational::parse_text("1/1*sqrt(2)").is_err());
    }
}
