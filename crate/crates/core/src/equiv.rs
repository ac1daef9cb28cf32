//! Equivalence of distance value sets.
//!
//! Two kinds of evidence: exhaustive triangle-pattern comparison on finite
//! fragments (which can only ever show fragment consistency), and explicit
//! witnesses, either a scaling ratio or a fractional linear map over Q.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::dvs::{delta_triangle, Cap, DistanceSet};
use crate::error::{Error, Result};
use crate::exact::ExactReal;
use crate::scalar::{self, cmp, Scalar};
use crate::BigRational;

/// Verdict of [`triangle_bijection_check`]. A consistent verdict says
/// nothing about the full sets the fragments were cut from.
#[derive(Clone, Debug, PartialEq)]
pub enum FragmentVerdict<T> {
    FragmentConsistent,
    /// A triple whose triangle status differs from that of its image.
    Broken(T, T, T),
}

impl<T> FragmentVerdict<T> {
    pub fn is_consistent(&self) -> bool {
        matches!(self, FragmentVerdict::FragmentConsistent)
    }
}

fn lookup<'a, T: Scalar>(f: &'a [(T, T)], x: &T) -> Option<&'a T> {
    f.iter().find(|(a, _)| a == x).map(|(_, b)| b)
}

fn check_bijection<T: Scalar>(d1: &DistanceSet<T>, d2: &DistanceSet<T>, f: &[(T, T)]) -> Result<()> {
    let fail = |msg: String| Err(Error::NotABijection(msg));
    if f.len() != d1.len() || d1.len() != d2.len() {
        return fail(format!("{} pairs for sets of size {} and {}", f.len(), d1.len(), d2.len()));
    }
    let mut hit = vec![false; d2.len()];
    for (a, b) in f {
        if !d1.contains(a) {
            return fail(format!("{} is not in the domain", a.to_text()));
        }
        match d2.position(b) {
            Some(j) if !hit[j] => hit[j] = true,
            Some(_) => return fail(format!("{} is hit twice", b.to_text())),
            None => return fail(format!("{} is not in the codomain", b.to_text())),
        }
    }
    Ok(())
}

/// Compares the triangle status of every triple of `d1` with that of its
/// image under `f`. Triples are scanned in index order with `x <= y <= z`.
pub fn triangle_bijection_check<T: Scalar>(
    d1: &DistanceSet<T>,
    d2: &DistanceSet<T>,
    f: &[(T, T)],
) -> Result<FragmentVerdict<T>> {
    check_bijection(d1, d2, f)?;
    let v = d1.values();
    let img: Vec<&T> = v.iter().map(|x| lookup(f, x).expect("total")).collect();
    for i in 0..v.len() {
        for j in i..v.len() {
            for k in j..v.len() {
                let before = delta_triangle(&v[i], &v[j], &v[k], d1);
                let after = delta_triangle(img[i], img[j], img[k], d2);
                if before != after {
                    return Ok(FragmentVerdict::Broken(v[i].clone(), v[j].clone(), v[k].clone()));
                }
            }
        }
    }
    Ok(FragmentVerdict::FragmentConsistent)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingWitness<T> {
    pub ratio: T,
    pub domain: DistanceSet<T>,
    pub codomain: DistanceSet<T>,
}

impl<T: Scalar> ScalingWitness<T> {
    /// The value map `x -> r x`.
    pub fn map(&self) -> Vec<(T, T)> {
        self.domain
            .values()
            .iter()
            .map(|x| (x.clone(), x.clone() * self.ratio.clone()))
            .collect()
    }
}

fn ratios_rational<T: Scalar>(d: &DistanceSet<T>) -> Option<Vec<BigRational>> {
    let v = d.values();
    v.iter().map(|x| (x.clone() / v[0].clone()).to_ratio()).collect()
}

/// The scaling `x -> r x` carrying `d1` onto `d2`, if there is one.
///
/// The only candidate is `min(d2) / min(d1)`. Fails with `MixedRadicands`
/// only when a witness exists but its ratio lies outside every single
/// quadratic field.
pub fn scaling_witness<T: Scalar>(
    d1: &DistanceSet<T>,
    d2: &DistanceSet<T>,
) -> Result<Option<ScalingWitness<T>>> {
    if d1.len() != d2.len() {
        return Ok(None);
    }
    let caps = match (d1.cap(), d2.cap()) {
        (Cap::Bounded(a), Cap::Bounded(b)) => Some((a, b)),
        (Cap::Unbounded, Cap::Unbounded) => None,
        _ => return Ok(None),
    };
    let ratio = match (d1.min(), d2.min(), caps) {
        (Some(a), Some(b), _) => (a, b),
        (None, None, Some((a, b))) => (a, b),
        (None, None, None) => {
            return Ok(Some(ScalingWitness {
                ratio: T::one(),
                domain: d1.clone(),
                codomain: d2.clone(),
            }))
        }
        _ => return Ok(None),
    };
    if scalar::join_fields(d1.field(), d2.field()).is_err() {
        if d1.is_empty() {
            return Err(Error::MixedRadicands(radicand(d1.field()), radicand(d2.field())));
        }
        return match (ratios_rational(d1), ratios_rational(d2)) {
            (Some(a), Some(b)) if a == b => {
                let caps_match = caps.is_none_or(|(c1, c2)| {
                    (c1.clone() / ratio.0.clone()).to_ratio() == (c2.clone() / ratio.1.clone()).to_ratio()
                });
                if caps_match {
                    Err(Error::MixedRadicands(radicand(d1.field()), radicand(d2.field())))
                } else {
                    Ok(None)
                }
            }
            _ => Ok(None),
        };
    }
    let r = ratio.1.clone() / ratio.0.clone();
    let scaled = d1.scale(&r)?;
    let same = scaled.values().len() == d2.values().len()
        && scaled
            .values()
            .iter()
            .zip(d2.values())
            .all(|(a, b)| cmp(a, b) == Ordering::Equal)
        && match (scaled.cap(), d2.cap()) {
            (Cap::Bounded(a), Cap::Bounded(b)) => cmp(a, b) == Ordering::Equal,
            _ => true,
        };
    Ok(same.then(|| ScalingWitness {
        ratio: r,
        domain: d1.clone(),
        codomain: d2.clone(),
    }))
}

fn radicand(f: scalar::Field) -> u64 {
    match f {
        scalar::Field::Quadratic(d) => d,
        _ => 1,
    }
}

/// `f` is additive wherever `x + y` stays in `d`, and `f(x)/x` is constant.
pub fn linearity_check<T: Scalar>(f: &[(T, T)], d: &DistanceSet<T>) -> bool {
    let v = d.values();
    let img: Option<Vec<&T>> = v.iter().map(|x| lookup(f, x)).collect();
    let Some(img) = img else { return false };
    let fields = v.iter().chain(img.iter().copied());
    if scalar::common_field(fields).is_err() {
        return false;
    }
    for i in 0..v.len() {
        for j in i..v.len() {
            let s = v[i].clone() + v[j].clone();
            if let Some(k) = d.position(&s) {
                let fs = img[i].clone() + img[j].clone();
                if cmp(&fs, img[k]) != Ordering::Equal {
                    return false;
                }
            }
        }
    }
    match v.first() {
        None => true,
        Some(x0) => {
            let r0 = img[0].clone() / x0.clone();
            v.iter()
                .zip(&img)
                .all(|(x, fx)| cmp(&((*fx).clone() / x.clone()), &r0) == Ordering::Equal)
        }
    }
}

/// A rational 2x2 matrix `(a, b; c, d)` with non-zero determinant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
}

impl RatMatrix {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Result<Self> {
        let m = RatMatrix { a, b, c, d };
        if m.det().is_zero() {
            Err(Error::SingularMatrix)
        } else {
            Ok(m)
        }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let q = |n: i64| BigRational::from_integer(n.into());
        Self::new(q(a), q(b), q(c), q(d))
    }

    pub fn identity() -> Self {
        RatMatrix {
            a: BigRational::one(),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::one(),
        }
    }

    pub fn entries(&self) -> [&BigRational; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn det(&self) -> BigRational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        RatMatrix {
            a: &self.d / &det,
            b: -&self.b / &det,
            c: -&self.c / &det,
            d: &self.a / &det,
        }
    }

    /// `self * other`; acting by the product is acting by `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        RatMatrix {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }
}

/// `(a alpha + b) / (c alpha + d)`, exactly.
pub fn gl2_apply(m: &RatMatrix, alpha: &ExactReal) -> Result<ExactReal> {
    let q = |x: &BigRational| ExactReal::Rational(x.clone());
    let num = q(&m.a).try_mul(alpha)?.try_add(&q(&m.b))?;
    let den = q(&m.c).try_mul(alpha)?.try_add(&q(&m.d))?;
    if den.is_zero() {
        return Err(Error::PoleAtAlpha);
    }
    num.try_div(&den)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gl2Verdict {
    Equivalent(RatMatrix),
    Inequivalent,
    Unknown,
}

/// Decides whether `beta` lies in the GL2(Q) orbit of `alpha`.
///
/// Irrational surds are equivalent exactly when they share a radicand; the
/// witness is the affine map `(v/t, u - v s/t; 0, 1)` for `alpha = s + t sqrt D`
/// and `beta = u + v sqrt D`. Every returned matrix is checked with
/// [`gl2_apply`]; should that ever fail, a bounded search up to
/// `search_height` is tried before answering `Unknown`.
pub fn gl2_equivalent(alpha: &ExactReal, beta: &ExactReal, search_height: u64) -> Gl2Verdict {
    let verified = |m: RatMatrix| match gl2_apply(&m, alpha) {
        Ok(ref x) if x == beta => Gl2Verdict::Equivalent(m),
        _ => gl2_search(alpha, beta, search_height).map_or(Gl2Verdict::Unknown, Gl2Verdict::Equivalent),
    };
    match (alpha.radicand(), beta.radicand()) {
        (None, None) => {
            let shift = beta.rational_part() - alpha.rational_part();
            verified(RatMatrix {
                b: shift,
                ..RatMatrix::identity()
            })
        }
        (Some(x), Some(y)) if x == y => {
            let (s, t) = (alpha.rational_part(), alpha.irrational_coeff());
            let (u, v) = (beta.rational_part(), beta.irrational_coeff());
            let a = &v / &t;
            let b = &u - &a * &s;
            match RatMatrix::new(a, b, BigRational::zero(), BigRational::one()) {
                Ok(m) => verified(m),
                Err(_) => Gl2Verdict::Unknown,
            }
        }
        _ => Gl2Verdict::Inequivalent,
    }
}

/// Brute-force search over integer matrices with entries in
/// `[-height, height]`, in lexicographic order of `(a, b, c, d)`.
/// Candidates are screened in floating point and confirmed exactly.
pub fn gl2_search(alpha: &ExactReal, beta: &ExactReal, height: u64) -> Option<RatMatrix> {
    let h = height as i64;
    let (fa, fb) = (alpha.to_f64(), beta.to_f64());
    for a in -h..=h {
        for b in -h..=h {
            for c in -h..=h {
                for d in -h..=h {
                    if a * d == b * c {
                        continue;
                    }
                    let den = c as f64 * fa + d as f64;
                    if den.abs() < 1e-12 {
                        continue;
                    }
                    let f = (a as f64 * fa + b as f64) / den;
                    if (f - fb).abs() >= 1e-6 {
                        continue;
                    }
                    let m = RatMatrix::from_ints(a, b, c, d).expect("non-singular");
                    if matches!(gl2_apply(&m, alpha), Ok(ref x) if x == beta) {
                        return Some(m);
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvs::gen_delta_alpha;
    use proptest::prelude::*;

    fn int(n: i64) -> ExactReal {
        ExactReal::int(n)
    }

    fn pairs(xs: &[(i64, i64)]) -> Vec<(ExactReal, ExactReal)> {
        xs.iter().map(|&(a, b)| (int(a), int(b))).collect()
    }

    #[test]
    fn triangle_bijections() {
        let d = DistanceSet::from_ints(&[1, 2, 3], None).unwrap();
        let id = pairs(&[(1, 1), (2, 2), (3, 3)]);
        assert!(triangle_bijection_check(&d, &d, &id).unwrap().is_consistent());
        let swap = pairs(&[(1, 1), (2, 3), (3, 2)]);
        assert_eq!(
            triangle_bijection_check(&d, &d, &swap).unwrap(),
            FragmentVerdict::Broken(int(1), int(1), int(2))
        );
        let d5 = DistanceSet::from_ints(&[5, 10, 15], None).unwrap();
        let times5 = pairs(&[(1, 5), (2, 10), (3, 15)]);
        assert!(triangle_bijection_check(&d, &d5, &times5).unwrap().is_consistent());
        let not_bij = pairs(&[(1, 1), (2, 1), (3, 3)]);
        assert!(matches!(
            triangle_bijection_check(&d, &d, &not_bij),
            Err(Error::NotABijection(_))
        ));
    }

    #[test]
    fn scaling_examples() {
        let a = DistanceSet::from_ints(&[1, 2], None).unwrap();
        let b = DistanceSet::from_ints(&[3, 6], None).unwrap();
        assert_eq!(scaling_witness(&a, &b).unwrap().unwrap().ratio, int(3));
        let c = DistanceSet::from_ints(&[1, 3], None).unwrap();
        assert!(scaling_witness(&a, &c).unwrap().is_none());
        let bounded = DistanceSet::from_ints(&[1, 2], Some(2)).unwrap();
        assert!(scaling_witness(&a, &bounded).unwrap().is_none());

        let s2 = ExactReal::sqrt(2);
        let d = gen_delta_alpha(&s2, 1, &int(2)).unwrap();
        let scaled = d.scale(&s2).unwrap();
        let w = scaling_witness(&d, &scaled).unwrap().unwrap();
        assert_eq!(w.ratio, s2);
        for (x, y) in w.map() {
            assert_eq!(x.try_mul(&s2).unwrap(), y);
        }
        assert!(linearity_check(&w.map(), &d));
    }

    #[test]
    fn scaling_across_fields() {
        let s2 = DistanceSet::unbounded(vec![ExactReal::sqrt(2), ExactReal::sqrt(2) * int(2)]).unwrap();
        let s3 = DistanceSet::unbounded(vec![ExactReal::sqrt(3), ExactReal::sqrt(3) * int(2)]).unwrap();
        assert!(matches!(scaling_witness(&s2, &s3), Err(Error::MixedRadicands(2, 3))));
        let s3b = DistanceSet::unbounded(vec![ExactReal::sqrt(3), ExactReal::sqrt(3) * int(3)]).unwrap();
        assert!(scaling_witness(&s2, &s3b).unwrap().is_none());
        let g2 = gen_delta_alpha(&ExactReal::sqrt(2), 1, &int(2)).unwrap();
        let g3 = gen_delta_alpha(&ExactReal::sqrt(3), 1, &int(2)).unwrap();
        assert!(scaling_witness(&g2, &g3).unwrap().is_none());
    }

    #[test]
    fn linearity_examples() {
        let d = DistanceSet::from_ints(&[1, 2, 3], None).unwrap();
        assert!(linearity_check(&pairs(&[(1, 2), (2, 4), (3, 6)]), &d));
        assert!(!linearity_check(&pairs(&[(1, 1), (2, 4), (3, 9)]), &d));
        assert!(!linearity_check(&pairs(&[(1, 1), (2, 4)]), &d));
    }

    #[test]
    fn gl2_apply_examples() {
        let s2 = ExactReal::sqrt(2);
        let t = RatMatrix::from_ints(1, 1, 0, 1).unwrap();
        assert_eq!(gl2_apply(&t, &s2).unwrap(), s2.clone() + int(1));
        let flip = RatMatrix::from_ints(0, 1, 1, 0).unwrap();
        // oracle: 1/sqrt2 = sqrt2/2 by rationalizing
        assert_eq!(gl2_apply(&flip, &s2).unwrap(), ExactReal::quadratic(0, 1, 1, 2, 2));
        assert_eq!(gl2_apply(&RatMatrix::identity(), &s2).unwrap(), s2);
        let pole = RatMatrix::from_ints(1, 1, 1, 0).unwrap();
        assert_eq!(gl2_apply(&pole, &int(0)), Err(Error::PoleAtAlpha));
        assert_eq!(RatMatrix::from_ints(1, 2, 2, 4), Err(Error::SingularMatrix));
    }

    #[test]
    fn gl2_examples() {
        let s2 = ExactReal::sqrt(2);
        let beta = ExactReal::quadratic(1, 1, 3, 1, 2);
        match gl2_equivalent(&s2, &beta, 10) {
            Gl2Verdict::Equivalent(m) => {
                assert_eq!(m, RatMatrix::from_ints(3, 1, 0, 1).unwrap());
                assert_eq!(gl2_apply(&m, &s2).unwrap(), beta);
            }
            v => panic!("{v:?}"),
        }
        assert_eq!(gl2_equivalent(&s2, &ExactReal::sqrt(3), 10), Gl2Verdict::Inequivalent);
        assert!(gl2_search(&s2, &ExactReal::sqrt(3), 4).is_none());
        assert_eq!(gl2_equivalent(&s2, &s2, 10), Gl2Verdict::Equivalent(RatMatrix::identity()));
        assert!(gl2_search(&s2, &beta, 3).is_some());
    }

    fn surd(d: u64) -> impl Strategy<Value = ExactReal> {
        (-20i64..20, 1i64..8, 1i64..20, 1i64..8, any::<bool>()).prop_map(move |(a, ad, b, bd, neg)| {
            let b = if neg { -b } else { b };
            ExactReal::quadratic(a, ad, b, bd, d)
        })
    }

    fn matrix() -> impl Strategy<Value = RatMatrix> {
        (-9i64..10, -9i64..10, -9i64..10, -9i64..10)
            .prop_filter_map("singular", |(a, b, c, d)| RatMatrix::from_ints(a, b, c, d).ok())
    }

    proptest! {
        #[test]
        fn inverse_round_trip(m in matrix(), x in surd(5)) {
            let y = gl2_apply(&m, &x).unwrap();
            prop_assert_eq!(gl2_apply(&m.inverse(), &y).unwrap(), x);
        }

        #[test]
        fn orbit_relation_is_an_equivalence(x in surd(7), y in surd(7), z in surd(7)) {
            let get = |a: &ExactReal, b: &ExactReal| match gl2_equivalent(a, b, 0) {
                Gl2Verdict::Equivalent(m) => m,
                v => panic!("{v:?}"),
            };
            prop_assert_eq!(get(&x, &x), RatMatrix::identity());
            let mxy = get(&x, &y);
            prop_assert_eq!(gl2_apply(&mxy.inverse(), &y).unwrap(), x.clone());
            let myz = get(&y, &z);
            prop_assert_eq!(gl2_apply(&myz.compose(&mxy), &x).unwrap(), z);
        }

        #[test]
        fn scaling_witness_is_fragment_consistent(
            vals in proptest::collection::btree_set(1i64..30, 1..6),
            r in (1i64..9, 1i64..9),
        ) {
            let v: Vec<i64> = vals.into_iter().collect();
            let d1 = DistanceSet::from_ints(&v, None).unwrap();
            let d2 = d1.scale(&ExactReal::rational(r.0, r.1)).unwrap();
            let w = scaling_witness(&d1, &d2).unwrap().unwrap();
            prop_assert!(triangle_bijection_check(&d1, &d2, &w.map()).unwrap().is_consistent());
            prop_assert!(linearity_check(&w.map(), &d1));
        }
    }
}
