//! Finite fragments of distance value sets.
//!
//! A distance value set is a set of positive reals closed under the
//! truncated sum `min(x + y, sup)`. Only finite pieces of such sets are
//! computable, so a [`DistanceSet`] is a sorted fragment together with its
//! cap. For unbounded fragments the largest listed value is the *horizon*:
//! sums beyond it are not counted as closure failures.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::ExactReal;
use crate::scalar::{self, cmp, Field, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Cap<T> {
    Bounded(T),
    Unbounded,
}

impl<T> Cap<T> {
    pub fn bounded(&self) -> Option<&T> {
        match self {
            Cap::Bounded(c) => Some(c),
            Cap::Unbounded => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Closure<T> {
    Closed,
    FirstViolation(T, T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceSet<T> {
    values: Vec<T>,
    cap: Cap<T>,
    closed: bool,
    field: Field,
}

impl<T: Scalar> DistanceSet<T> {
    /// Builds a fragment from arbitrary-order values. Values must be
    /// positive, pairwise distinct and not above the cap.
    pub fn new(mut values: Vec<T>, cap: Cap<T>) -> Result<Self> {
        let field = scalar::common_field(values.iter().chain(cap.bounded()))?;
        values.sort_by(cmp);
        for w in values.windows(2) {
            if cmp(&w[0], &w[1]) == Ordering::Equal {
                return Err(Error::Malformed(format!(
                    "duplicate distance value {}",
                    w[0].to_text()
                )));
            }
        }
        if let Some(v) = values.first() {
            if cmp(v, &T::zero()) != Ordering::Greater {
                return Err(Error::Malformed(format!(
                    "distance values must be positive, got {}",
                    v.to_text()
                )));
            }
        }
        if let Cap::Bounded(c) = &cap {
            if cmp(c, &T::zero()) != Ordering::Greater {
                return Err(Error::Malformed("cap must be positive".into()));
            }
            if let Some(v) = values.last() {
                if cmp(v, c) == Ordering::Greater {
                    return Err(Error::Malformed(format!(
                        "value {} exceeds cap {}",
                        v.to_text(),
                        c.to_text()
                    )));
                }
            }
        }
        let mut set = DistanceSet {
            values,
            cap,
            closed: false,
            field,
        };
        set.closed = set.compute_closed();
        Ok(set)
    }

    pub fn unbounded(values: Vec<T>) -> Result<Self> {
        Self::new(values, Cap::Unbounded)
    }

    pub fn bounded(values: Vec<T>, cap: T) -> Result<Self> {
        Self::new(values, Cap::Bounded(cap))
    }

    pub fn empty() -> Self {
        DistanceSet {
            values: Vec::new(),
            cap: Cap::Unbounded,
            closed: true,
            field: Field::Rational,
        }
    }

    fn compute_closed(&self) -> bool {
        let cap_attained = match &self.cap {
            Cap::Bounded(c) => self.contains(c),
            Cap::Unbounded => true,
        };
        cap_attained && self.validate_closure() == Closure::Closed
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn cap(&self) -> &Cap<T> {
        &self.cap
    }

    /// True when the fragment is closed under truncated sums and, if
    /// bounded, attains its cap.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<&T> {
        self.values.first()
    }

    pub fn max(&self) -> Option<&T> {
        self.values.last()
    }

    pub fn position(&self, x: &T) -> Option<usize> {
        if scalar::join_fields(self.field, x.field()).is_err() {
            return None;
        }
        self.values.binary_search_by(|v| cmp(v, x)).ok()
    }

    pub fn contains(&self, x: &T) -> bool {
        self.position(x).is_some()
    }

    /// `min(x + y, cap)`, or the plain sum when unbounded.
    pub fn truncated_sum(&self, x: &T, y: &T) -> T {
        let s = x.clone() + y.clone();
        match &self.cap {
            Cap::Bounded(c) => scalar::min(&s, c),
            Cap::Unbounded => s,
        }
    }

    fn sum_violates(&self, x: &T, y: &T) -> bool {
        let t = self.truncated_sum(x, y);
        if matches!(self.cap, Cap::Unbounded) {
            match self.values.last() {
                Some(m) if cmp(&t, m) == Ordering::Greater => return false,
                _ => {}
            }
        }
        !self.contains(&t)
    }

    /// Scans pairs `(x_i, x_j)`, `i <= j`, in index order and reports the
    /// first truncated sum missing from the fragment.
    pub fn validate_closure(&self) -> Closure<T> {
        let n = self.values.len();
        for i in 0..n {
            for j in i..n {
                let (x, y) = (&self.values[i], &self.values[j]);
                if self.sum_violates(x, y) {
                    return Closure::FirstViolation(x.clone(), y.clone());
                }
            }
        }
        Closure::Closed
    }

    /// All failing pairs, in the same order as [`Self::validate_closure`].
    pub fn closure_violations(&self) -> Vec<(T, T)> {
        let n = self.values.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let (x, y) = (&self.values[i], &self.values[j]);
                if self.sum_violates(x, y) {
                    out.push((x.clone(), y.clone()));
                }
            }
        }
        out
    }

    /// Least superset closed under truncated sums, cut at `bound`.
    ///
    /// For a bounded fragment `bound` must equal the cap; for an unbounded
    /// one it is the horizon of the result, which stays unbounded.
    pub fn close(&self, bound: &T, limit: usize) -> Result<Self> {
        if let Some(m) = self.values.last() {
            if cmp(bound, m) == Ordering::Less {
                return Err(Error::Malformed(format!(
                    "bound {} is below the largest value {}",
                    bound.to_text(),
                    m.to_text()
                )));
            }
        }
        if let Cap::Bounded(c) = &self.cap {
            if cmp(c, bound) != Ordering::Equal {
                return Err(Error::Malformed("bound must equal the cap of a bounded set".into()));
            }
        }
        scalar::common_field(self.values.iter().chain(std::iter::once(bound)))?;

        let mut values = self.values.clone();
        let mut frontier: Vec<T> = values.clone();
        while !frontier.is_empty() {
            let mut fresh: Vec<T> = Vec::new();
            for x in &frontier {
                for y in &values {
                    let mut s = x.clone() + y.clone();
                    if cmp(&s, bound) == Ordering::Greater {
                        match self.cap {
                            Cap::Bounded(_) => s = bound.clone(),
                            Cap::Unbounded => continue,
                        }
                    }
                    let known = values.binary_search_by(|v| cmp(v, &s)).is_ok()
                        || fresh.iter().any(|f| cmp(f, &s) == Ordering::Equal);
                    if !known {
                        fresh.push(s);
                    }
                }
            }
            for f in &fresh {
                let at = values
                    .binary_search_by(|v| cmp(v, f))
                    .expect_err("fresh values are new");
                values.insert(at, f.clone());
            }
            if values.len() > limit {
                return Err(Error::BudgetExceeded {
                    what: "closure size",
                    needed: values.len() as u128,
                    limit: limit as u128,
                });
            }
            frontier = fresh;
        }
        Self::new(values, self.cap.clone())
    }

    /// Multiplies every value and the cap by `r > 0`.
    pub fn scale(&self, r: &T) -> Result<Self> {
        if cmp(r, &T::zero()) != Ordering::Greater {
            return Err(Error::Malformed("scale factor must be positive".into()));
        }
        let field = scalar::join_fields(self.field, r.field())?;
        let values = self.values.iter().map(|v| v.clone() * r.clone()).collect();
        let cap = match &self.cap {
            Cap::Bounded(c) => Cap::Bounded(c.clone() * r.clone()),
            Cap::Unbounded => Cap::Unbounded,
        };
        Ok(DistanceSet {
            values,
            cap,
            closed: self.closed,
            field,
        })
    }
}

/// `x, y, z` all lie in the fragment and `|x - y| <= z <= x + y`.
pub fn delta_triangle<T: Scalar>(x: &T, y: &T, z: &T, set: &DistanceSet<T>) -> bool {
    set.contains(x) && set.contains(y) && set.contains(z) && scalar::triangle_ok(x, y, z)
}

/// Reduced rationals `n/d` with `|n|, |d| <= height`, ordered by
/// denominator and then numerator.
pub fn height_rationals(height: u64) -> Vec<BigRational> {
    let h = height as i64;
    let mut out = Vec::new();
    for d in 1..=h {
        for n in -h..=h {
            if num_integer::gcd(n, d) == 1 || (n == 0 && d == 1) {
                out.push(BigRational::new(BigInt::from(n), BigInt::from(d)));
            }
        }
    }
    out
}

/// The part of `{p*alpha + q : p, q rational}` reachable with heights at
/// most `height`, restricted to `(0, bound]` and capped at `bound`.
pub fn gen_delta_alpha(
    alpha: &ExactReal,
    height: u64,
    bound: &ExactReal,
) -> Result<DistanceSet<ExactReal>> {
    if alpha.is_rational() || alpha.signum() != Ordering::Greater {
        return Err(Error::Malformed("alpha must be a positive irrational surd".into()));
    }
    if bound.signum() != Ordering::Greater {
        return Err(Error::Malformed("bound must be positive".into()));
    }
    alpha.try_cmp(bound)?;
    let coeffs = height_rationals(height);
    let mut values = Vec::new();
    for p in &coeffs {
        for q in &coeffs {
            let v = ExactReal::Rational(p.clone())
                .try_mul(alpha)?
                .try_add(&ExactReal::Rational(q.clone()))?;
            if v.signum() == Ordering::Greater && v.try_cmp(bound)? != Ordering::Greater {
                values.push(v);
            }
        }
    }
    values.sort_by(cmp);
    for w in values.windows(2) {
        assert!(
            w[0] != w[1],
            "p*alpha + q produced {} twice; alpha must be irrational",
            w[0]
        );
    }
    DistanceSet::bounded(values, bound.clone())
}

impl DistanceSet<ExactReal> {
    /// Convenience for tests and examples: integer values.
    pub fn from_ints(values: &[i64], cap: Option<i64>) -> Result<Self> {
        let vals = values.iter().map(|&v| ExactReal::int(v)).collect();
        match cap {
            Some(c) => Self::bounded(vals, ExactReal::int(c)),
            None => Self::unbounded(vals),
        }
    }
}

/// Positive rational strictly between `lo` and `hi` with a power-of-two
/// denominator. Requires `0 <= lo < hi`.
pub fn dyadic_between<T: Scalar>(lo: &T, hi: &T) -> BigRational {
    assert!(cmp(lo, hi) == Ordering::Less, "empty interval");
    let mut scale = BigInt::one();
    loop {
        let s = T::from_ratio(&BigRational::from_integer(scale.clone()));
        let a = (lo.clone() * s.clone()).floor_int();
        let b = (hi.clone() * s).floor_int();
        if &b - &a >= BigInt::from(2) {
            let q = BigRational::new(a + 1, scale);
            debug_assert!(q.is_positive() || q.is_zero());
            return q;
        }
        scale *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactReal {
        ExactReal::rational(n, d)
    }

    fn ints(v: &[i64], cap: Option<i64>) -> DistanceSet<ExactReal> {
        DistanceSet::from_ints(v, cap).unwrap()
    }

    fn root2_fragment() -> Vec<ExactReal> {
        vec![
            ExactReal::quadratic(-1, 1, 1, 1, 2),
            ExactReal::int(1),
            ExactReal::sqrt(2),
        ]
    }

    #[test]
    fn closure_examples() {
        assert_eq!(ints(&[1, 2], Some(2)).validate_closure(), Closure::Closed);
        assert_eq!(
            ints(&[1, 3], Some(3)).validate_closure(),
            Closure::FirstViolation(ExactReal::int(1), ExactReal::int(1))
        );
    }

    #[test]
    fn horizon_rule_on_unbounded_root2_fragment() {
        let s = DistanceSet::unbounded(root2_fragment()).unwrap();
        let violations = s.closure_violations();
        // 1 + 1 = 2 lies beyond the horizon sqrt 2
        assert!(!violations.contains(&(ExactReal::int(1), ExactReal::int(1))));
        // (sqrt2 - 1) * 2 ~ 0.83 is inside the horizon and missing
        let a = ExactReal::quadratic(-1, 1, 1, 1, 2);
        assert_eq!(s.validate_closure(), Closure::FirstViolation(a.clone(), a));
    }

    #[test]
    fn close_examples() {
        let c = ints(&[1, 3], Some(3)).close(&ExactReal::int(3), 100).unwrap();
        assert_eq!(c.values(), ints(&[1, 2, 3], Some(3)).values());
        assert!(c.is_closed());
        let c = ints(&[1], Some(1)).close(&ExactReal::int(1), 100).unwrap();
        assert_eq!(c.values(), &[ExactReal::int(1)]);
        let half = DistanceSet::unbounded(vec![q(1, 2)]).unwrap();
        let c = half.close(&ExactReal::int(2), 100).unwrap();
        assert_eq!(c.values(), &[q(1, 2), q(1, 1), q(3, 2), q(2, 1)]);
        assert_eq!(c.cap(), &Cap::Unbounded);
    }

    #[test]
    fn close_matches_fixed_point_oracle() {
        // naive oracle: repeat full pairwise rounds until nothing changes
        fn oracle(start: &[ExactReal], cap: &ExactReal) -> Vec<ExactReal> {
            let mut cur: Vec<ExactReal> = start.to_vec();
            loop {
                let mut next = cur.clone();
                for x in &cur {
                    for y in &cur {
                        let s = scalar::min(&(x + y), cap);
                        if !next.contains(&s) {
                            next.push(s);
                        }
                    }
                }
                next.sort_by(cmp);
                if next == cur {
                    return cur;
                }
                cur = next;
            }
        }
        let cases: Vec<(Vec<ExactReal>, ExactReal)> = vec![
            (vec![ExactReal::int(1), ExactReal::int(3)], ExactReal::int(3)),
            (vec![q(2, 3), q(5, 4)], ExactReal::int(3)),
            (root2_fragment(), ExactReal::int(2)),
        ];
        for (vals, cap) in cases {
            let s = DistanceSet::bounded(vals.clone(), cap.clone()).unwrap();
            let c = s.close(&cap, 10_000).unwrap();
            assert_eq!(c.values(), oracle(&vals, &cap).as_slice());
        }
    }

    #[test]
    fn close_budget() {
        let s = DistanceSet::unbounded(vec![q(1, 100)]).unwrap();
        assert!(matches!(
            s.close(&ExactReal::int(10), 50),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn delta_triangle_examples() {
        let s = ints(&[1, 2], None);
        let t = |a, b, c| delta_triangle(&ExactReal::int(a), &ExactReal::int(b), &ExactReal::int(c), &s);
        assert!(t(1, 1, 2));
        let s2 = DistanceSet::unbounded(vec![q(1, 4), q(1, 1)]).unwrap();
        assert!(!delta_triangle(&q(1, 4), &q(1, 4), &q(1, 1), &s2));
        let s3 = ints(&[1, 2, 3], None);
        assert!(delta_triangle(&ExactReal::int(1), &ExactReal::int(2), &ExactReal::int(3), &s3));
        assert!(!delta_triangle(&ExactReal::int(1), &ExactReal::int(1), &ExactReal::int(3), &s3));
        assert!(!delta_triangle(&ExactReal::sqrt(3), &ExactReal::int(1), &ExactReal::int(1), &s3));
    }

    #[test]
    fn delta_alpha_examples() {
        let s = gen_delta_alpha(&ExactReal::sqrt(2), 1, &ExactReal::int(2)).unwrap();
        assert_eq!(s.values(), root2_fragment().as_slice());
        assert!(!s.is_closed());
        let v = s.closure_violations();
        assert!(v.contains(&(ExactReal::int(1), ExactReal::int(1))));
        assert!(gen_delta_alpha(&ExactReal::sqrt(2), 0, &ExactReal::int(2))
            .unwrap()
            .is_empty());
        assert!(gen_delta_alpha(&ExactReal::int(2), 1, &ExactReal::int(2)).is_err());
    }

    #[test]
    fn delta_alpha_matches_enumeration_oracle() {
        // independent route: enumerate integer-and-fraction pairs in floats,
        // then count positive values in (0, M]
        let h = 2i64;
        let mut fl: Vec<f64> = Vec::new();
        let mut rats: Vec<(i64, i64)> = Vec::new();
        for d in 1..=h {
            for n in -h..=h {
                if num_integer::gcd(n, d) == 1 || n == 0 && d == 1 {
                    rats.push((n, d));
                }
            }
        }
        for &(pn, pd) in &rats {
            for &(qn, qd) in &rats {
                let v = pn as f64 / pd as f64 * 2f64.sqrt() + qn as f64 / qd as f64;
                if v > 1e-12 && v <= 3.0 + 1e-12 {
                    fl.push(v);
                }
            }
        }
        fl.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s = gen_delta_alpha(&ExactReal::sqrt(2), 2, &ExactReal::int(3)).unwrap();
        assert_eq!(s.len(), fl.len());
        for (a, b) in s.values().iter().zip(&fl) {
            assert!((a.to_f64() - b).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_examples() {
        let s = ints(&[1, 2], Some(2));
        assert_eq!(s.scale(&ExactReal::int(3)).unwrap(), ints(&[3, 6], Some(6)));
        assert_eq!(s.scale(&ExactReal::int(1)).unwrap(), s);
        let t = DistanceSet::unbounded(root2_fragment()).unwrap();
        let scaled = t.scale(&ExactReal::sqrt(2)).unwrap();
        assert_eq!(
            scaled.values(),
            &[
                ExactReal::quadratic(2, 1, -1, 1, 2),
                ExactReal::sqrt(2),
                ExactReal::int(2)
            ]
        );
        assert!(s.scale(&ExactReal::int(0)).is_err());
    }

    #[test]
    fn construction_rejects_bad_fragments() {
        assert!(DistanceSet::from_ints(&[1, 1], None).is_err());
        assert!(DistanceSet::from_ints(&[0, 1], None).is_err());
        assert!(DistanceSet::from_ints(&[1, 3], Some(2)).is_err());
        assert!(DistanceSet::unbounded(vec![ExactReal::sqrt(2), ExactReal::sqrt(3)]).is_err());
    }

    #[test]
    fn dyadic_between_is_strict() {
        let lo = ExactReal::sqrt(2);
        let hi = ExactReal::quadratic(1, 1000, 1, 1, 2);
        let m = ExactReal::Rational(dyadic_between(&lo, &hi));
        assert!(lo < m && m < hi);
        let m = dyadic_between(&ExactReal::int(0), &q(1, 3));
        assert!(m.is_positive() && ExactReal::Rational(m) < q(1, 3));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_set() -> impl Strategy<Value = DistanceSet<ExactReal>> {
            proptest::collection::btree_set(1i64..24, 1..6).prop_map(|s| {
                let v: Vec<ExactReal> = s.into_iter().map(|n| q(n, 4)).collect();
                DistanceSet::unbounded(v).unwrap()
            })
        }

        proptest! {
            #[test]
            fn triangle_symmetric_under_permutation(s in small_set(), i in 0usize..6, j in 0usize..6, k in 0usize..6) {
                let v = s.values();
                let (x, y, z) = (&v[i % v.len()], &v[j % v.len()], &v[k % v.len()]);
                // symmetric reading: each side at most the sum of the other two
                let sym = cmp(x, &(y + z)) != Ordering::Greater
                    && cmp(y, &(x + z)) != Ordering::Greater
                    && cmp(z, &(x + y)) != Ordering::Greater;
                for (a, b, c) in [(x, y, z), (x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
                    prop_assert_eq!(delta_triangle(a, b, c, &s), sym);
                }
            }

            #[test]
            fn triangle_homogeneous(s in small_set(), i in 0usize..6, j in 0usize..6, k in 0usize..6, rn in 1i64..9, rd in 1i64..9, irr in any::<bool>()) {
                let r = if irr { ExactReal::quadratic(rn, rd, 1, 1, 3) } else { q(rn, rd) };
                let t = s.scale(&r).unwrap();
                let v = s.values();
                let (x, y, z) = (&v[i % v.len()], &v[j % v.len()], &v[k % v.len()]);
                prop_assert_eq!(
                    delta_triangle(x, y, z, &s),
                    delta_triangle(&(x * &r), &(y * &r), &(z * &r), &t)
                );
            }

            #[test]
            fn close_idempotent(s in small_set(), extra in 0i64..8) {
                let b = s.max().unwrap() + ExactReal::int(extra);
                let once = s.close(&b, 10_000).unwrap();
                let twice = once.close(&b, 10_000).unwrap();
                prop_assert_eq!(once.values(), twice.values());
                prop_assert!(once.is_closed());
            }
        }
    }
}
