//! Free amalgamation, distance capping and constrained order extension.
//!
//! These three primitives are the building blocks of every construction in
//! [`crate::limitbuilder`]: glue a small space onto a larger one, pull the
//! new distances back under the cap of the distance set, then place the new
//! points in the linear order subject to explicit constraints.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::scalar::{self, cmp, Scalar};
use crate::space::MetricSpace;

/// Result of [`free_amalgam`]: the glued space plus both embeddings.
#[derive(Clone, Debug)]
pub struct Amalgam<T> {
    /// Points of `B` first (same indices), then the points of `C` outside
    /// the overlap in index order. Unordered and without a distance set.
    pub space: MetricSpace<T>,
    pub from_b: Vec<usize>,
    pub from_c: Vec<usize>,
}

impl<T> Amalgam<T> {
    /// Indices of the points contributed by `C` alone.
    pub fn new_points(&self) -> std::ops::Range<usize> {
        self.from_b.len()..self.from_b.len() + self.from_c.len() - self.overlap_len()
    }

    fn overlap_len(&self) -> usize {
        self.from_c.iter().filter(|&&i| i < self.from_b.len()).count()
    }
}

fn fresh_label(taken: &HashSet<String>, wanted: &str) -> String {
    let mut l = wanted.to_string();
    while taken.contains(&l) {
        l.push('\'');
    }
    l
}

/// Glues `b` and `c` along `overlap` (pairs of a `b` point and the `c`
/// point identified with it). Cross distances are
/// `min over z in overlap of d_B(x, z) + d_C(z, y)`, or
/// `diam(B) + diam(C)` for an empty overlap.
pub fn free_amalgam<T: Scalar>(
    b: &MetricSpace<T>,
    c: &MetricSpace<T>,
    overlap: &[(usize, usize)],
) -> Result<Amalgam<T>> {
    scalar::join_fields(b.field()?, c.field()?)?;
    let bs: BTreeSet<usize> = overlap.iter().map(|p| p.0).collect();
    let cs: BTreeSet<usize> = overlap.iter().map(|p| p.1).collect();
    if bs.len() != overlap.len() || cs.len() != overlap.len() {
        return Err(Error::Malformed("overlap must be injective".into()));
    }
    if overlap.iter().any(|&(x, y)| x >= b.len() || y >= c.len()) {
        return Err(Error::Malformed("overlap point out of range".into()));
    }
    for (i, &(b0, c0)) in overlap.iter().enumerate() {
        for &(b1, c1) in &overlap[i + 1..] {
            if cmp(b.d(b0, b1), c.d(c0, c1)) != Ordering::Equal {
                return Err(Error::OverlapNotIsometric {
                    b0: b.label(b0).into(),
                    b1: b.label(b1).into(),
                    c0: c.label(c0).into(),
                    c1: c.label(c1).into(),
                });
            }
        }
    }

    let nb = b.len();
    let mut from_c = vec![usize::MAX; c.len()];
    for &(x, y) in overlap {
        from_c[y] = x;
    }
    let mut labels: Vec<String> = b.labels().to_vec();
    let mut taken: HashSet<String> = labels.iter().cloned().collect();
    let mut extra = Vec::new();
    for (j, slot) in from_c.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = labels.len();
            let l = fresh_label(&taken, c.label(j));
            taken.insert(l.clone());
            labels.push(l);
            extra.push(j);
        }
    }

    let empty_cross = if overlap.is_empty() {
        let s = b.diameter() + c.diameter();
        if nb > 0 && !extra.is_empty() && s.is_zero() {
            return Err(Error::DegenerateAmalgam);
        }
        Some(s)
    } else {
        None
    };

    let n = labels.len();
    let mut dist = vec![vec![T::zero(); n]; n];
    for i in 0..nb {
        for j in 0..nb {
            dist[i][j] = b.d(i, j).clone();
        }
    }
    for (a, &ca) in extra.iter().enumerate() {
        for (e, &ce) in extra.iter().enumerate() {
            dist[nb + a][nb + e] = c.d(ca, ce).clone();
        }
    }
    for x in 0..nb {
        for (e, &y) in extra.iter().enumerate() {
            let d = match &empty_cross {
                Some(s) => s.clone(),
                None => overlap
                    .iter()
                    .map(|&(zb, zc)| b.d(x, zb).clone() + c.d(zc, y).clone())
                    .reduce(|m, v| scalar::min(&m, &v))
                    .expect("nonempty overlap"),
            };
            dist[x][nb + e] = d.clone();
            dist[nb + e][x] = d;
        }
    }

    let space = MetricSpace::new(labels, dist, None)?;
    if let crate::space::Validation::Violation(v) = space.validate() {
        return Err(Error::InvalidSpace(format!(
            "amalgam is not a metric ({v:?}); are both inputs metric spaces?"
        )));
    }
    Ok(Amalgam {
        space,
        from_b: (0..nb).collect(),
        from_c,
    })
}

/// Replaces every distance `d` by `min(d, cap)`. Order and distance set
/// binding are kept.
pub fn cap_distances<T: Scalar>(x: &MetricSpace<T>, cap: &T) -> Result<MetricSpace<T>> {
    if cmp(cap, &T::zero()) != Ordering::Greater {
        return Err(Error::Malformed("cap must be positive".into()));
    }
    let dist = x
        .matrix()
        .iter()
        .map(|row| row.iter().map(|d| scalar::min(d, cap)).collect())
        .collect();
    let mut out = MetricSpace::new(x.labels().to_vec(), dist, x.order().map(<[usize]>::to_vec))?;
    if let Some(d) = x.delta() {
        out = out.with_delta(d.clone());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Before,
    After,
}

/// `point` is placed `relation` `other`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderConstraint {
    pub point: usize,
    pub relation: Relation,
    pub other: usize,
}

impl OrderConstraint {
    pub fn before(point: usize, other: usize) -> Self {
        OrderConstraint {
            point,
            relation: Relation::Before,
            other,
        }
    }

    pub fn after(point: usize, other: usize) -> Self {
        OrderConstraint {
            point,
            relation: Relation::After,
            other,
        }
    }

    fn edge(&self) -> (usize, usize) {
        match self.relation {
            Relation::Before => (self.point, self.other),
            Relation::After => (self.other, self.point),
        }
    }
}

/// A linear order on all points of `space` that extends `base` (the old
/// points, least first) and satisfies every constraint.
///
/// Kahn's algorithm with a fixed tie-break: an available old point always
/// goes first, and available new points go in label order. A new point
/// with no constraints therefore lands after every old point.
pub fn extend_order<T: Scalar>(
    space: &MetricSpace<T>,
    base: &[usize],
    constraints: &[OrderConstraint],
) -> Result<Vec<usize>> {
    let n = space.len();
    let mut base_rank = vec![None; n];
    for (r, &p) in base.iter().enumerate() {
        if p >= n || base_rank[p].is_some() {
            return Err(Error::Malformed("base order must list distinct points".into()));
        }
        base_rank[p] = Some(r);
    }
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    let mut add_edge = |a: usize, b: usize, succ: &mut Vec<Vec<usize>>| {
        succ[a].push(b);
        indeg[b] += 1;
    };
    for w in base.windows(2) {
        add_edge(w[0], w[1], &mut succ);
    }
    for c in constraints {
        let (a, b) = c.edge();
        if a >= n || b >= n {
            return Err(Error::Malformed("constraint point out of range".into()));
        }
        add_edge(a, b, &mut succ);
    }

    let key = |p: usize| match base_rank[p] {
        Some(r) => (0u8, r, String::new(), p),
        None => (1u8, 0, space.label(p).to_string(), p),
    };
    let mut ready: BTreeSet<(u8, usize, String, usize)> =
        (0..n).filter(|&p| indeg[p] == 0).map(key).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(k) = ready.pop_first() {
        let p = k.3;
        out.push(p);
        for &q in &succ[p] {
            indeg[q] -= 1;
            if indeg[q] == 0 {
                ready.insert(key(q));
            }
        }
    }
    if out.len() == n {
        return Ok(out);
    }

    // every leftover point has a leftover predecessor: walk back to a repeat
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, s) in succ.iter().enumerate() {
        for &b in s {
            if indeg[a] > 0 {
                pred[b].push(a);
            }
        }
    }
    let start = (0..n).find(|&p| indeg[p] > 0).expect("some point is stuck");
    let mut seen = vec![usize::MAX; n];
    let mut walk = vec![start];
    let mut cur = start;
    seen[cur] = 0;
    loop {
        let prev = *pred[cur].first().expect("stuck point has a stuck predecessor");
        if seen[prev] != usize::MAX {
            let mut cycle: Vec<usize> = walk[seen[prev]..].to_vec();
            cycle.reverse();
            let labels = cycle.iter().map(|&p| space.label(p).to_string()).collect();
            return Err(Error::CyclicConstraints(labels));
        }
        seen[prev] = walk.len();
        walk.push(prev);
        cur = prev;
    }
}

/// [`extend_order`], returning the space with the new order installed.
pub fn with_extended_order<T: Scalar>(
    space: MetricSpace<T>,
    base: &[usize],
    constraints: &[OrderConstraint],
) -> Result<MetricSpace<T>> {
    let order = extend_order(&space, base, constraints)?;
    space.with_order(order)
}
