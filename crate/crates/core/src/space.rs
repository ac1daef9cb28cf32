//! Finite metric spaces with an optional strict linear order.
//!
//! Points are indexed `0..n`; labels exist for input and output only. The
//! order, when present, is stored as the list of point indices from least
//! to greatest, with the inverse permutation cached as ranks.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use itertools::Itertools;

use crate::dvs::DistanceSet;
use crate::error::{Error, Result};
use crate::scalar::{self, cmp, Field, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace<T> {
    labels: Vec<String>,
    dist: Vec<Vec<T>>,
    order: Option<Vec<usize>>,
    rank: Option<Vec<usize>>,
    delta: Option<DistanceSet<T>>,
}

/// The first metric-axiom failure found by [`MetricSpace::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation<T> {
    NonZeroDiagonal(usize),
    Asymmetric(usize, usize),
    NonPositive(usize, usize),
    /// `d(i, k) > d(i, j) + d(j, k)`.
    Triangle(usize, usize, usize),
    NotInDelta(usize, usize, T),
    MixedFields,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Validation<T> {
    Ok,
    Violation(Violation<T>),
}

impl<T> Validation<T> {
    pub fn is_ok(&self) -> bool {
        matches!(self, Validation::Ok)
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<Vec<usize>> {
    if order.len() != n {
        return Err(Error::InvalidSpace(format!(
            "order lists {} points, space has {n}",
            order.len()
        )));
    }
    let mut rank = vec![usize::MAX; n];
    for (r, &i) in order.iter().enumerate() {
        if i >= n || rank[i] != usize::MAX {
            return Err(Error::InvalidSpace("order is not a permutation".into()));
        }
        rank[i] = r;
    }
    Ok(rank)
}

impl<T: Scalar> MetricSpace<T> {
    /// Checks only the shape (square matrix, order a permutation); metric
    /// axioms are reported by [`Self::validate`].
    pub fn new(labels: Vec<String>, dist: Vec<Vec<T>>, order: Option<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace(format!(
                "distance matrix must be {n}x{n}"
            )));
        }
        if labels.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidSpace("labels must be distinct".into()));
        }
        let rank = order.as_deref().map(|o| check_permutation(o, n)).transpose()?;
        Ok(MetricSpace {
            labels,
            dist,
            order,
            rank,
            delta: None,
        })
    }

    pub fn empty(ordered: bool) -> Self {
        MetricSpace {
            labels: Vec::new(),
            dist: Vec::new(),
            order: ordered.then(Vec::new),
            rank: ordered.then(Vec::new),
            delta: None,
        }
    }

    /// Points `p0..p{n-1}` with `d(i, j) = f(i, j)` off the diagonal.
    pub fn from_fn(n: usize, ordered: bool, f: impl Fn(usize, usize) -> T) -> Self {
        let labels = (0..n).map(|i| format!("p{i}")).collect();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { T::zero() } else { f(i.min(j), i.max(j)) })
                    .collect()
            })
            .collect();
        let order = ordered.then(|| (0..n).collect());
        Self::new(labels, dist, order).expect("well-shaped by construction")
    }

    /// `n` points, all pairwise distances equal to `d`, ordered by index.
    pub fn uniform(n: usize, d: T, ordered: bool) -> Self {
        Self::from_fn(n, ordered, |_, _| d.clone())
    }

    pub fn with_delta(mut self, delta: DistanceSet<T>) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn without_delta(mut self) -> Self {
        self.delta = None;
        self
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Result<Self> {
        self.rank = Some(check_permutation(&order, self.len())?);
        self.order = Some(order);
        Ok(self)
    }

    pub fn without_order(mut self) -> Self {
        self.order = None;
        self.rank = None;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn d(&self, i: usize, j: usize) -> &T {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.dist
    }

    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    pub fn is_ordered(&self) -> bool {
        self.order.is_some()
    }

    pub fn rank(&self, i: usize) -> Option<usize> {
        self.rank.as_ref().map(|r| r[i])
    }

    /// `i < j` in the linear order. Unordered spaces have no strict pairs.
    pub fn less(&self, i: usize, j: usize) -> bool {
        match &self.rank {
            Some(r) => r[i] < r[j],
            None => false,
        }
    }

    pub fn delta(&self) -> Option<&DistanceSet<T>> {
        self.delta.as_ref()
    }

    pub fn field(&self) -> Result<Field> {
        let mut f = scalar::common_field(self.dist.iter().flatten())?;
        if let Some(d) = &self.delta {
            f = scalar::join_fields(f, d.field())?;
        }
        Ok(f)
    }

    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if cmp(self.d(i, j), &best) == Ordering::Greater {
                    best = self.d(i, j).clone();
                }
            }
        }
        best
    }

    /// Sorted list of off-diagonal distances.
    pub fn distance_values(&self) -> Vec<T> {
        let mut out: Vec<T> = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                out.push(self.d(i, j).clone());
            }
        }
        out.sort_by(cmp);
        out.dedup_by(|a, b| cmp(a, b) == Ordering::Equal);
        out
    }

    /// Induced substructure on `points` (in the given index order); the
    /// order, if any, is inherited.
    pub fn induced(&self, points: &[usize]) -> Self {
        let labels = points.iter().map(|&i| self.labels[i].clone()).collect();
        let dist = points
            .iter()
            .map(|&i| points.iter().map(|&j| self.dist[i][j].clone()).collect())
            .collect();
        let order = self.rank.as_ref().map(|r| {
            let mut idx: Vec<usize> = (0..points.len()).collect();
            idx.sort_by_key(|&k| r[points[k]]);
            idx
        });
        let mut sub = Self::new(labels, dist, order).expect("induced shape is valid");
        sub.delta = self.delta.clone();
        sub
    }

    /// Points sorted by the linear order (index order when unordered).
    pub fn sorted_by_order(&self, points: &[usize]) -> Vec<usize> {
        let mut v = points.to_vec();
        match &self.rank {
            Some(r) => v.sort_by_key(|&i| r[i]),
            None => v.sort_unstable(),
        }
        v
    }

    /// Checks symmetry, zero diagonal, positivity, the triangle inequality
    /// and membership of every distance in the bound distance set.
    pub fn validate(&self) -> Validation<T> {
        if self.field().is_err() {
            return Validation::Violation(Violation::MixedFields);
        }
        let n = self.len();
        for i in 0..n {
            if !self.d(i, i).is_zero() {
                return Validation::Violation(Violation::NonZeroDiagonal(i));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if cmp(self.d(i, j), self.d(j, i)) != Ordering::Equal {
                    return Validation::Violation(Violation::Asymmetric(i, j));
                }
                if cmp(self.d(i, j), &T::zero()) != Ordering::Greater {
                    return Validation::Violation(Violation::NonPositive(i, j));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let via = self.d(i, j).clone() + self.d(j, k).clone();
                    if cmp(self.d(i, k), &via) == Ordering::Greater {
                        return Validation::Violation(Violation::Triangle(i, j, k));
                    }
                }
            }
        }
        if let Some(delta) = &self.delta {
            for i in 0..n {
                for j in i + 1..n {
                    if !delta.contains(self.d(i, j)) {
                        return Validation::Violation(Violation::NotInDelta(
                            i,
                            j,
                            self.d(i, j).clone(),
                        ));
                    }
                }
            }
        }
        Validation::Ok
    }

    /// The identity map is distance- and order-preserving between the
    /// point lists `a` (in `self`) and `b` (in `other`).
    fn aligned(&self, a: &[usize], other: &Self, b: &[usize]) -> bool {
        for x in 0..a.len() {
            for y in x + 1..a.len() {
                if cmp(self.d(a[x], a[y]), other.d(b[x], b[y])) != Ordering::Equal {
                    return false;
                }
            }
        }
        true
    }
}

/// Isomorphism `X -> Y` as `map[x] = y`.
///
/// Ordered spaces admit at most one candidate, the rank match. Unordered
/// spaces are searched by backtracking with distance-profile pruning.
pub fn isomorphic<T: Scalar>(x: &MetricSpace<T>, y: &MetricSpace<T>) -> Option<Vec<usize>> {
    if x.len() != y.len() || x.is_ordered() != y.is_ordered() {
        return None;
    }
    if scalar::join_fields(x.field().ok()?, y.field().ok()?).is_err() {
        return None;
    }
    match (x.order(), y.order()) {
        (Some(ox), Some(oy)) => {
            if !x.aligned(ox, y, oy) {
                return None;
            }
            let mut map = vec![0; x.len()];
            for (a, b) in ox.iter().zip(oy) {
                map[*a] = *b;
            }
            Some(map)
        }
        _ => {
            let mut found = None;
            search_isomorphisms(x, y, false, |m| {
                found = Some(m.to_vec());
                false
            });
            found
        }
    }
}

fn profile<T: Scalar>(s: &MetricSpace<T>, i: usize) -> Vec<T> {
    let mut v: Vec<T> = (0..s.len()).filter(|&j| j != i).map(|j| s.d(i, j).clone()).collect();
    v.sort_by(cmp);
    v
}

/// Enumerates distance-preserving bijections `x -> y` (also order-preserving
/// when `respect_order`), calling `visit` on each; `visit` returns `false`
/// to stop. Returns the number of maps visited.
pub fn search_isomorphisms<T: Scalar>(
    x: &MetricSpace<T>,
    y: &MetricSpace<T>,
    respect_order: bool,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> usize {
    let n = x.len();
    if n != y.len() {
        return 0;
    }
    let px: Vec<Vec<T>> = (0..n).map(|i| profile(x, i)).collect();
    let py: Vec<Vec<T>> = (0..n).map(|i| profile(y, i)).collect();
    let same = |a: &[T], b: &[T]| a.iter().zip(b).all(|(u, v)| cmp(u, v) == Ordering::Equal);
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| same(&px[i], &py[j])).collect())
        .collect();

    struct Frame<'a, T> {
        x: &'a MetricSpace<T>,
        y: &'a MetricSpace<T>,
        candidates: Vec<Vec<usize>>,
        map: Vec<usize>,
        used: Vec<bool>,
        respect_order: bool,
        count: usize,
    }

    fn go<T: Scalar>(f: &mut Frame<'_, T>, i: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if i == f.map.len() {
            f.count += 1;
            return visit(&f.map);
        }
        for c in 0..f.candidates[i].len() {
            let j = f.candidates[i][c];
            if f.used[j] {
                continue;
            }
            let ok = (0..i).all(|k| {
                let m = f.map[k];
                cmp(f.x.d(i, k), f.y.d(j, m)) == Ordering::Equal
                    && (!f.respect_order || f.x.less(i, k) == f.y.less(j, m))
            });
            if !ok {
                continue;
            }
            f.map[i] = j;
            f.used[j] = true;
            let keep_going = go(f, i + 1, visit);
            f.used[j] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }

    let mut frame = Frame {
        x,
        y,
        candidates,
        map: vec![0; n],
        used: vec![false; n],
        respect_order,
        count: 0,
    };
    go(&mut frame, 0, &mut visit);
    frame.count
}

/// Every subset of `c`'s points whose induced substructure is isomorphic to
/// `a`. Each copy is listed as `copy[i] = image of a's point i`.
pub fn copies_of<T: Scalar>(c: &MetricSpace<T>, a: &MetricSpace<T>) -> Result<Vec<Vec<usize>>> {
    if c.is_ordered() != a.is_ordered() {
        return Err(Error::OrderMismatch);
    }
    scalar::join_fields(c.field()?, a.field()?)?;
    let k = a.len();
    let mut out = Vec::new();
    if k > c.len() {
        return Ok(out);
    }
    // a distance absent from c rules out every subset
    let cd = c.distance_values();
    if a
        .distance_values()
        .iter()
        .any(|v| cd.binary_search_by(|w| cmp(w, v)).is_err())
    {
        return Ok(out);
    }
    for subset in (0..c.len()).combinations(k) {
        match a.order() {
            Some(oa) => {
                let sorted = c.sorted_by_order(&subset);
                if a.aligned(oa, c, &sorted) {
                    let mut copy = vec![0; k];
                    for (ai, ci) in oa.iter().zip(&sorted) {
                        copy[*ai] = *ci;
                    }
                    out.push(copy);
                }
            }
            None => {
                let sub = c.induced(&subset);
                if let Some(m) = isomorphic(a, &sub) {
                    out.push(m.iter().map(|&j| subset[j]).collect());
                }
            }
        }
    }
    Ok(out)
}

/// A finite injective partial map between the points of two spaces.
/// Isometry and order preservation are checked against concrete spaces,
/// never assumed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialIsometry {
    pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsometryCheck {
    pub isometric: bool,
    pub order_preserving: bool,
}

impl PartialIsometry {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let doms: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
        let imgs: BTreeSet<usize> = pairs.iter().map(|p| p.1).collect();
        if doms.len() != pairs.len() {
            return Err(Error::InvalidIsometry("a point is mapped twice".into()));
        }
        if imgs.len() != pairs.len() {
            return Err(Error::InvalidIsometry("map is not injective".into()));
        }
        Ok(PartialIsometry { pairs })
    }

    pub fn identity(points: &[usize]) -> Self {
        PartialIsometry {
            pairs: points.iter().map(|&p| (p, p)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn range(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == x).map(|p| p.1)
    }

    pub fn inverse(&self) -> Self {
        PartialIsometry {
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    pub fn push(&mut self, x: usize, y: usize) -> Result<()> {
        if self.apply(x).is_some() || self.pairs.iter().any(|p| p.1 == y) {
            return Err(Error::InvalidIsometry(format!("({x}, {y}) breaks injectivity")));
        }
        self.pairs.push((x, y));
        Ok(())
    }

    pub fn check<T: Scalar>(&self, source: &MetricSpace<T>, target: &MetricSpace<T>) -> IsometryCheck {
        let mut isometric = true;
        let mut order_preserving = source.is_ordered() && target.is_ordered();
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            for &(c, d) in &self.pairs[i + 1..] {
                if cmp(source.d(a, c), target.d(b, d)) != Ordering::Equal {
                    isometric = false;
                }
                if source.less(a, c) != target.less(b, d) {
                    order_preserving = false;
                }
            }
        }
        IsometryCheck {
            isometric,
            order_preserving,
        }
    }

    /// Periodic points `Z(p)` (some iterate returns to the point without
    /// leaving the domain) and fixed points `F(p)`, both sorted.
    pub fn periodic_fixed(&self) -> (Vec<usize>, Vec<usize>) {
        let mut periodic = Vec::new();
        let mut fixed = Vec::new();
        for &(x, y) in &self.pairs {
            if x == y {
                fixed.push(x);
            }
            let mut cur = y;
            for _ in 0..self.pairs.len() {
                if cur == x {
                    periodic.push(x);
                    break;
                }
                match self.apply(cur) {
                    Some(next) => cur = next,
                    None => break,
                }
            }
        }
        periodic.sort_unstable();
        fixed.sort_unstable();
        (periodic, fixed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ExactReal;

    fn int(n: i64) -> ExactReal {
        ExactReal::int(n)
    }

    fn path3() -> MetricSpace<ExactReal> {
        MetricSpace::from_fn(3, true, |i, j| int((j - i) as i64))
    }

    #[test]
    fn validate_examples() {
        assert!(MetricSpace::uniform(3, int(1), true).validate().is_ok());
        let bad = MetricSpace::from_fn(3, false, |i, j| match (i, j) {
            (0, 2) => int(3),
            _ => int(1),
        });
        assert_eq!(bad.validate(), Validation::Violation(Violation::Triangle(0, 1, 2)));
        let delta = DistanceSet::from_ints(&[1, 2], None).unwrap();
        let off = MetricSpace::from_fn(3, false, |i, j| if (i, j) == (0, 2) { int(3) } else { int(2) })
            .with_delta(delta);
        assert_eq!(
            off.validate(),
            Validation::Violation(Violation::NotInDelta(0, 2, int(3)))
        );
    }

    #[test]
    fn validate_structural_failures() {
        let mut m = path3();
        m.dist[0][1] = int(5);
        assert_eq!(m.validate(), Validation::Violation(Violation::Asymmetric(0, 1)));
        let z = MetricSpace::uniform(2, int(0), false);
        assert_eq!(z.validate(), Validation::Violation(Violation::NonPositive(0, 1)));
        assert!(MetricSpace::<ExactReal>::new(vec!["a".into()], vec![vec![int(0)]], Some(vec![1])).is_err());
        assert!(MetricSpace::<ExactReal>::new(vec!["a".into(), "a".into()], vec![vec![int(0), int(1)], vec![int(1), int(0)]], None).is_err());
    }

    #[test]
    fn copies_examples() {
        let c = MetricSpace::uniform(3, int(1), true);
        let a = MetricSpace::uniform(2, int(1), true);
        assert_eq!(copies_of(&c, &a).unwrap().len(), 3);
        let a2 = MetricSpace::uniform(2, int(2), true);
        assert!(copies_of(&c, &a2).unwrap().is_empty());
        let copies = copies_of(&path3(), &a2).unwrap();
        assert_eq!(copies, vec![vec![0, 2]]);
        assert_eq!(copies_of(&c, &a.clone().without_order()), Err(Error::OrderMismatch));
    }

    #[test]
    fn isomorphic_examples() {
        let x = path3();
        assert_eq!(isomorphic(&x, &x), Some(vec![0, 1, 2]));
        let one = MetricSpace::uniform(2, int(1), true);
        let two = MetricSpace::uniform(2, int(2), true);
        assert_eq!(isomorphic(&one, &two), None);
        let u = MetricSpace::from_fn(3, false, |i, j| int((i + j) as i64));
        let v = u.induced(&[2, 0, 1]).without_order();
        let m = isomorphic(&u, &v).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(u.d(i, j), v.d(m[i], m[j]));
            }
        }
    }

    #[test]
    fn periodic_fixed_examples() {
        let id = PartialIsometry::identity(&[4]);
        assert_eq!(id.periodic_fixed(), (vec![4], vec![4]));
        let swap = PartialIsometry::new(vec![(0, 1), (1, 0)]).unwrap();
        assert_eq!(swap.periodic_fixed(), (vec![0, 1], vec![]));
        let chain = PartialIsometry::new(vec![(0, 1)]).unwrap();
        assert_eq!(chain.periodic_fixed(), (vec![], vec![]));
        let mixed = PartialIsometry::new(vec![(0, 1), (1, 2), (2, 0), (3, 3), (4, 5)]).unwrap();
        assert_eq!(mixed.periodic_fixed(), (vec![0, 1, 2, 3], vec![3]));
        assert!(PartialIsometry::new(vec![(0, 1), (2, 1)]).is_err());
    }

    #[test]
    fn isometry_check_flags() {
        let m = MetricSpace::from_fn(3, true, |_, _| int(1));
        let p = PartialIsometry::new(vec![(0, 1), (1, 0)]).unwrap();
        let c = p.check(&m, &m);
        assert!(c.isometric && !c.order_preserving);
        let q = PartialIsometry::new(vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(q.check(&m, &m), IsometryCheck { isometric: true, order_preserving: true });
    }
}
