//! Finite approximations of the ordered Fraïssé limit over a distance set.
//!
//! Everything here grows a finite ordered space by gluing small pieces onto
//! it with [`free_amalgam`], capping at the distance set's cap and placing
//! the new points with [`extend_order`]. The infinite limit is never built;
//! callers iterate these bounded steps themselves.

use std::cmp::Ordering;

use itertools::Itertools;

use crate::amalgam::{cap_distances, extend_order, free_amalgam, OrderConstraint};
use crate::dvs::{Cap, DistanceSet};
use crate::error::{Error, Result};
use crate::scalar::{self, cmp, Scalar};
use crate::space::{MetricSpace, PartialIsometry, Validation, Violation};

/// Search budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest space a construction may produce.
    pub max_points: usize,
    /// Largest number of (substructure, extension) pairs examined.
    pub max_pairs: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_points: 64,
            max_pairs: 1_000_000,
        }
    }
}

/// A one-point extension of the substructure on `base`: a new point at
/// distance `profile[i]` from `base[i]`, with exactly `slot` base points
/// below it in the order.
#[derive(Clone, Debug, PartialEq)]
pub struct Extension<T> {
    pub base: Vec<usize>,
    pub profile: Vec<T>,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionReport<T> {
    pub checked: u128,
    pub unrealized: Vec<Extension<T>>,
}

impl<T> ExtensionReport<T> {
    pub fn is_complete(&self) -> bool {
        self.unrealized.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Saturation<T> {
    pub space: MetricSpace<T>,
    /// Extensions that could not be realized within `max_points`.
    pub report: ExtensionReport<T>,
    pub added: usize,
}

#[derive(Clone, Debug)]
pub struct Perturbation<T> {
    pub space: MetricSpace<T>,
    /// `images[i]` is the new point `y_i'` matched with `x_i`.
    pub images: Vec<usize>,
    pub delta: T,
    /// The auxiliary space on `y_1..y_n, z_1..z_n` that was glued in.
    pub gadget: MetricSpace<T>,
}

fn require_ordered<T: Scalar>(m: &MetricSpace<T>) -> Result<()> {
    if m.is_ordered() {
        Ok(())
    } else {
        Err(Error::OrderMismatch)
    }
}

/// Distance profiles to `base` (over `d`'s values) that keep the triangle
/// inequality, in lexicographic order of value indices.
fn profiles<T: Scalar>(
    m: &MetricSpace<T>,
    base: &[usize],
    d: &DistanceSet<T>,
    budget: u128,
) -> Result<Vec<Vec<T>>> {
    let vals = d.values();
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(base.len());

    fn rec<T: Scalar>(
        m: &MetricSpace<T>,
        base: &[usize],
        vals: &[T],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<T>>,
        budget: u128,
    ) -> Result<()> {
        let i = cur.len();
        if i == base.len() {
            if out.len() as u128 >= budget {
                return Err(Error::BudgetExceeded {
                    what: "one-point extensions",
                    needed: out.len() as u128 + 1,
                    limit: budget,
                });
            }
            out.push(cur.iter().map(|&v| vals[v].clone()).collect());
            return Ok(());
        }
        for v in 0..vals.len() {
            let ok = (0..i).all(|j| scalar::triangle_ok(&vals[v], &vals[cur[j]], m.d(base[i], base[j])));
            if ok {
                cur.push(v);
                rec(m, base, vals, cur, out, budget)?;
                cur.pop();
            }
        }
        Ok(())
    }

    rec(m, base, vals, &mut cur, &mut out, budget)?;
    Ok(out)
}

/// All one-point extensions of the substructure on `base`: each admissible
/// profile, times every order slot (one slot when unordered).
pub fn extensions_of<T: Scalar>(
    m: &MetricSpace<T>,
    base: &[usize],
    d: &DistanceSet<T>,
    budget: u128,
) -> Result<Vec<Extension<T>>> {
    scalar::join_fields(m.field()?, d.field())?;
    let slots = if m.is_ordered() { base.len() + 1 } else { 1 };
    let profs = profiles(m, base, d, budget)?;
    let total = profs.len() as u128 * slots as u128;
    if total > budget {
        return Err(Error::BudgetExceeded {
            what: "one-point extensions",
            needed: total,
            limit: budget,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    for p in profs {
        for slot in 0..slots {
            out.push(Extension {
                base: base.to_vec(),
                profile: p.clone(),
                slot,
            });
        }
    }
    Ok(out)
}

/// Every space `X + {z}` with all `d(z, x)` in `d` and the triangle
/// inequality intact, for each admissible order position of `z`.
pub fn one_point_extensions<T: Scalar>(
    x: &MetricSpace<T>,
    d: &DistanceSet<T>,
    limits: &Limits,
) -> Result<Vec<MetricSpace<T>>> {
    if x.len() + 1 > limits.max_points {
        return Err(Error::BudgetExceeded {
            what: "points",
            needed: x.len() as u128 + 1,
            limit: limits.max_points as u128,
        });
    }
    let all: Vec<usize> = (0..x.len()).collect();
    extensions_of(x, &all, d, limits.max_pairs)?
        .iter()
        .map(|e| gadget(x, e).map(|g| g.with_delta(d.clone())))
        .collect()
}

fn fresh_label<T: Scalar>(m: &MetricSpace<T>, stem: &str) -> String {
    let mut k = m.len();
    loop {
        let l = format!("{stem}{k}");
        if m.index_of(&l).is_none() {
            return l;
        }
        k += 1;
    }
}

/// The space on `e.base` plus one new last point realizing `e`, ordered
/// when `m` is.
fn gadget<T: Scalar>(m: &MetricSpace<T>, e: &Extension<T>) -> Result<MetricSpace<T>> {
    let n = e.base.len();
    let mut labels: Vec<String> = e.base.iter().map(|&i| m.label(i).to_string()).collect();
    labels.push(fresh_label(m, "z"));
    let mut dist = vec![vec![T::zero(); n + 1]; n + 1];
    for a in 0..n {
        for b in 0..n {
            dist[a][b] = m.d(e.base[a], e.base[b]).clone();
        }
        dist[a][n] = e.profile[a].clone();
        dist[n][a] = e.profile[a].clone();
    }
    let order = m.is_ordered().then(|| {
        let sorted = m.sorted_by_order(&e.base);
        let mut ord: Vec<usize> = sorted
            .iter()
            .map(|p| e.base.iter().position(|q| q == p).expect("base point"))
            .collect();
        ord.insert(e.slot, n);
        ord
    });
    MetricSpace::new(labels, dist, order)
}

/// A point of `m` outside `e.base` realizing `e`, lowest index first.
pub fn realizer<T: Scalar>(m: &MetricSpace<T>, e: &Extension<T>) -> Option<usize> {
    (0..m.len()).find(|&w| realizes(m, e, w))
}

fn realizes<T: Scalar>(m: &MetricSpace<T>, e: &Extension<T>, w: usize) -> bool {
    if e.base.contains(&w) {
        return false;
    }
    let dist_ok = e
        .base
        .iter()
        .zip(&e.profile)
        .all(|(&b, v)| cmp(m.d(w, b), v) == Ordering::Equal);
    dist_ok && (!m.is_ordered() || e.base.iter().filter(|&&b| m.less(b, w)).count() == e.slot)
}

/// Glues `e` onto `m` along `overlap` (pairs of an `m` point and an `e`
/// point), caps at `cap`, binds `delta`, and orders the new points by
/// `constraints` (given in `e`'s indices). Returns the new space and the
/// position of each `e` point in it.
fn attach<T: Scalar>(
    m: &MetricSpace<T>,
    e: &MetricSpace<T>,
    overlap: &[(usize, usize)],
    cap: Option<&T>,
    delta: Option<&DistanceSet<T>>,
    constraints: &[OrderConstraint],
) -> Result<(MetricSpace<T>, Vec<usize>)> {
    let b = m.clone().without_delta().without_order();
    let e = e.clone().without_delta().without_order();
    let am = if m.is_empty() {
        crate::amalgam::Amalgam {
            from_c: (0..e.len()).collect(),
            from_b: Vec::new(),
            space: e,
        }
    } else {
        free_amalgam(&b, &e, overlap)?
    };
    let mut space = match cap {
        Some(c) => cap_distances(&am.space, c)?,
        None => am.space.clone(),
    };
    if let Some(d) = delta {
        space = space.with_delta(d.clone());
        if let Validation::Violation(v) = space.validate() {
            return Err(match v {
                Violation::NotInDelta(_, _, x) => Error::OutsideFragment(x.to_text()),
                other => Error::InvalidSpace(format!("{other:?}")),
            });
        }
    }
    if let Some(base) = m.order() {
        let mapped: Vec<OrderConstraint> = constraints
            .iter()
            .map(|c| OrderConstraint {
                point: am.from_c[c.point],
                relation: c.relation,
                other: am.from_c[c.other],
            })
            .collect();
        let order = extend_order(&space, base, &mapped)?;
        space = space.with_order(order)?;
    }
    Ok((space, am.from_c))
}

fn cap_of<T: Scalar>(d: &DistanceSet<T>) -> Option<&T> {
    match d.cap() {
        Cap::Bounded(c) => Some(c),
        Cap::Unbounded => None,
    }
}

/// Adds a point realizing `e` to `m`.
fn realize<T: Scalar>(
    m: &MetricSpace<T>,
    e: &Extension<T>,
    d: &DistanceSet<T>,
) -> Result<(MetricSpace<T>, usize)> {
    let g = gadget(m, e)?;
    let n = e.base.len();
    let overlap: Vec<(usize, usize)> = e.base.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut cons = Vec::new();
    if m.is_ordered() {
        let sorted = m.sorted_by_order(&e.base);
        let local = |p: usize| e.base.iter().position(|&q| q == p).expect("base point");
        if e.slot > 0 {
            cons.push(OrderConstraint::after(n, local(sorted[e.slot - 1])));
        }
        if e.slot < n {
            cons.push(OrderConstraint::before(n, local(sorted[e.slot])));
        }
    }
    let (space, from_c) = attach(m, &g, &overlap, cap_of(d), Some(d), &cons)?;
    Ok((space, from_c[n]))
}

fn subsets_up_to(points: &[usize], k: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..=k.min(points.len())).flat_map(move |s| points.iter().copied().combinations(s))
}

/// Checks the `k`-extension property of `m` over `d`, restricted to
/// substructures drawn from `within`.
pub fn extension_property_check_within<T: Scalar>(
    m: &MetricSpace<T>,
    d: &DistanceSet<T>,
    k: usize,
    within: &[usize],
    limits: &Limits,
) -> Result<ExtensionReport<T>> {
    let mut report = ExtensionReport {
        checked: 0,
        unrealized: Vec::new(),
    };
    for base in subsets_up_to(within, k) {
        let left = limits.max_pairs.saturating_sub(report.checked);
        for e in extensions_of(m, &base, d, left)? {
            report.checked += 1;
            if realizer(m, &e).is_none() {
                report.unrealized.push(e);
            }
        }
    }
    Ok(report)
}

/// For every substructure of at most `k` points and every one-point
/// extension of it over `d`, looks for a realizing point in `m`.
pub fn extension_property_check<T: Scalar>(
    m: &MetricSpace<T>,
    d: &DistanceSet<T>,
    k: usize,
    limits: &Limits,
) -> Result<ExtensionReport<T>> {
    let all: Vec<usize> = (0..m.len()).collect();
    extension_property_check_within(m, d, k, &all, limits)
}

/// One saturation round: realizes every one-point extension of every
/// substructure of the original `m` with at most `k` points. Points of `m`
/// keep their indices. Extensions that would push the space past
/// `max_points` are left in the report.
pub fn saturate<T: Scalar>(
    m: &MetricSpace<T>,
    d: &DistanceSet<T>,
    k: usize,
    limits: &Limits,
) -> Result<Saturation<T>> {
    let all: Vec<usize> = (0..m.len()).collect();
    saturate_within(m, d, k, &all, limits)
}

/// [`saturate`] over the substructures drawn from `within` only.
pub fn saturate_within<T: Scalar>(
    m: &MetricSpace<T>,
    d: &DistanceSet<T>,
    k: usize,
    within: &[usize],
    limits: &Limits,
) -> Result<Saturation<T>> {
    require_ordered(m)?;
    if within.iter().any(|&i| i >= m.len()) {
        return Err(Error::Malformed("substructure point out of range".into()));
    }
    if let crate::dvs::Closure::FirstViolation(x, y) = d.validate_closure() {
        return Err(Error::NotClosed(x.to_text(), y.to_text()));
    }
    let m0 = m.clone().with_delta(d.clone());
    if let Validation::Violation(v) = m0.validate() {
        return Err(Error::InvalidSpace(format!("{v:?}")));
    }
    let mut space = m0;
    let mut report = ExtensionReport {
        checked: 0,
        unrealized: Vec::new(),
    };
    let mut added = 0;
    for base in subsets_up_to(within, k) {
        let left = limits.max_pairs.saturating_sub(report.checked);
        for e in extensions_of(&space, &base, d, left)? {
            report.checked += 1;
            if realizer(&space, &e).is_some() {
                continue;
            }
            if space.len() + 1 > limits.max_points {
                report.unrealized.push(e);
                continue;
            }
            let (next, _) = realize(&space, &e, d)?;
            space = next;
            added += 1;
        }
    }
    Ok(Saturation {
        space,
        report,
        added,
    })
}

fn require_order_preserving<T: Scalar>(m: &MetricSpace<T>, p: &PartialIsometry) -> Result<()> {
    if p.pairs().iter().any(|&(a, b)| a >= m.len() || b >= m.len()) {
        return Err(Error::InvalidIsometry("point out of range".into()));
    }
    let c = p.check(m, m);
    if !c.isometric {
        return Err(Error::InvalidIsometry("map does not preserve distances".into()));
    }
    if !c.order_preserving {
        return Err(Error::InvalidIsometry("map does not preserve the order".into()));
    }
    Ok(())
}

/// One forth step: extends the order-preserving partial isometry `p` of
/// `m` to `x`. The image is `x` itself when admissible, otherwise the
/// lowest-index point of `m` with the right distance and order profile;
/// failing that, a new point is glued onto `m`. Existing distances never
/// change.
pub fn extend_partial_isometry<T: Scalar>(
    m: &MetricSpace<T>,
    p: &PartialIsometry,
    x: usize,
) -> Result<(MetricSpace<T>, PartialIsometry)> {
    require_ordered(m)?;
    require_order_preserving(m, p)?;
    if x >= m.len() {
        return Err(Error::InvalidIsometry(format!("point {x} out of range")));
    }
    if p.apply(x).is_some() {
        return Err(Error::InvalidIsometry(format!("{} is already mapped", m.label(x))));
    }
    let range = p.range();
    let fits = |w: usize| {
        !range.contains(&w)
            && p.pairs().iter().all(|&(a, b)| {
                cmp(m.d(w, b), m.d(x, a)) == Ordering::Equal && m.less(w, b) == m.less(x, a)
            })
    };
    let found = if fits(x) { Some(x) } else { (0..m.len()).find(|&w| fits(w)) };
    if let Some(w) = found {
        let mut q = p.clone();
        q.push(x, w)?;
        return Ok((m.clone(), q));
    }

    let r = range.len();
    let mut labels: Vec<String> = range.iter().map(|&i| m.label(i).to_string()).collect();
    labels.push(fresh_label(m, "w"));
    let mut dist = vec![vec![T::zero(); r + 1]; r + 1];
    for (i, &(a, b)) in p.pairs().iter().enumerate() {
        for (j, &(_, c)) in p.pairs().iter().enumerate() {
            dist[i][j] = m.d(b, c).clone();
        }
        dist[i][r] = m.d(x, a).clone();
        dist[r][i] = m.d(x, a).clone();
    }
    let g = MetricSpace::new(labels, dist, None)?;
    let overlap: Vec<(usize, usize)> = range.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let cons: Vec<OrderConstraint> = p
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, &(a, _))| {
            if m.less(x, a) {
                OrderConstraint::before(r, i)
            } else {
                OrderConstraint::after(r, i)
            }
        })
        .collect();
    let delta = m.delta();
    let cap = delta.and_then(cap_of);
    let (space, from_c) = attach(m, &g, &overlap, cap, delta, &cons)?;
    let mut q = p.clone();
    q.push(x, from_c[r])?;
    Ok((space, q))
}

/// One back step: extends `p` so that `y` enters its range.
pub fn extend_partial_isometry_back<T: Scalar>(
    m: &MetricSpace<T>,
    p: &PartialIsometry,
    y: usize,
) -> Result<(MetricSpace<T>, PartialIsometry)> {
    let (space, q) = extend_partial_isometry(m, &p.inverse(), y)?;
    Ok((space, q.inverse()))
}

/// Given a partial isometry `x_i -> y_i` of `m`, adds points `y_i'` with
/// `d(y_i, y_i') = delta < eps` such that `x_i -> y_i'` is an
/// order-preserving partial isometry.
///
/// `delta` is the largest value of `d` below `eps`. The glued gadget has
/// `d(y_i, z_j) = delta + d(y_i, y_j)` for all `i, j` (capped when `d` is
/// bounded), the `z`'s above all `y`'s and ordered like the `x`'s.
pub fn density_perturb<T: Scalar>(
    m: &MetricSpace<T>,
    pairs: &PartialIsometry,
    eps: &T,
    d: &DistanceSet<T>,
) -> Result<Perturbation<T>> {
    require_ordered(m)?;
    scalar::join_fields(m.field()?, d.field())?;
    if pairs.pairs().iter().any(|&(a, b)| a >= m.len() || b >= m.len()) {
        return Err(Error::InvalidIsometry("point out of range".into()));
    }
    if !pairs.check(m, m).isometric {
        return Err(Error::InvalidIsometry("map does not preserve distances".into()));
    }
    let delta = d
        .values()
        .iter()
        .rev()
        .find(|v| cmp(*v, eps) == Ordering::Less)
        .cloned()
        .ok_or_else(|| Error::NoSmallEnoughDelta(eps.to_text()))?;

    let xs = pairs.domain();
    let ys = pairs.range();
    let n = ys.len();
    let cap = cap_of(d);
    let mut dist = vec![vec![T::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let dy = m.d(ys[i], ys[j]).clone();
            dist[i][j] = dy.clone();
            dist[n + i][n + j] = dy.clone();
            let mut s = delta.clone() + dy;
            if let Some(c) = cap {
                s = scalar::min(&s, c);
            }
            if !d.contains(&s) {
                return Err(Error::ZNotInDelta { sum: s.to_text() });
            }
            dist[i][n + j] = s.clone();
            dist[n + j][i] = s;
        }
    }
    let mut labels: Vec<String> = ys.iter().map(|&y| m.label(y).to_string()).collect();
    for i in 0..n {
        labels.push(format!("{}'", fresh_label(m, &format!("{}~", m.label(ys[i])))));
    }
    let mut z_order: Vec<usize> = m.sorted_by_order(&ys).iter().map(|y| ys.iter().position(|q| q == y).expect("y")).collect();
    let mut zs: Vec<usize> = (0..n).collect();
    zs.sort_by(|&a, &b| {
        if m.less(xs[a], xs[b]) {
            Ordering::Less
        } else if m.less(xs[b], xs[a]) {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    });
    z_order.extend(zs.iter().map(|&i| n + i));
    let gadget = MetricSpace::new(labels, dist, Some(z_order))?.with_delta(d.clone());
    if let Validation::Violation(v) = gadget.validate() {
        return Err(Error::InvalidSpace(format!("perturbation gadget: {v:?}")));
    }

    let overlap: Vec<(usize, usize)> = ys.iter().enumerate().map(|(i, &y)| (y, i)).collect();
    let mut cons = Vec::new();
    for j in 0..n {
        for i in 0..n {
            cons.push(OrderConstraint::after(n + j, i));
        }
    }
    for w in zs.windows(2) {
        cons.push(OrderConstraint::before(n + w[0], n + w[1]));
    }
    let (space, from_c) = attach(m, &gadget, &overlap, cap, Some(d), &cons)?;
    let images = (0..n).map(|i| from_c[n + i]).collect();
    Ok(Perturbation {
        space,
        images,
        delta,
        gadget,
    })
}
