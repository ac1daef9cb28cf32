//! Sequence codes for distance value sets, the relations `~` and `≈` on
//! them, the ternary triangle structure of a set, and the first-order
//! model built from a set together with a checker for its theory.
//!
//! Codes here are finite prefixes. Every quantifier over permutations of
//! the naturals is read as a quantifier over permutations of the prefix
//! ("prefix semantics"), and every statement about the tail of a sequence
//! is reported as not falsifiable rather than guessed.

use std::cmp::Ordering;
use std::sync::Mutex;

use num_traits::{One, Signed};

use crate::dvs::{dyadic_between, height_rationals, Cap, DistanceSet};
use crate::error::{Error, Result};
use crate::scalar::{self, cmp, Scalar};
use crate::BigRational;

/// A finite prefix of a code `(d_i)`, plus whether the coded set is
/// bounded.
#[derive(Clone, Debug, PartialEq)]
pub struct DvsCode<T> {
    pub prefix: Vec<T>,
    pub bounded: bool,
}

impl<T: Scalar> DvsCode<T> {
    pub fn new(prefix: Vec<T>, bounded: bool) -> Self {
        DvsCode { prefix, bounded }
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    fn is_zero(&self, i: usize) -> bool {
        self.prefix[i].is_zero()
    }

    /// Index of the smallest positive entry.
    fn min_positive(&self) -> Option<usize> {
        (0..self.len())
            .filter(|&i| cmp(&self.prefix[i], &T::zero()) == Ordering::Greater)
            .min_by(|&a, &b| cmp(&self.prefix[a], &self.prefix[b]))
    }

    fn max(&self) -> Option<&T> {
        self.prefix.iter().max_by(|a, b| cmp(*a, *b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClauseStatus<W> {
    Satisfied,
    Violated(W),
    /// Nothing in the finite data refutes the clause, but it speaks about
    /// more than the data; carries a pending instance when there is one.
    NotFalsifiable(Option<W>),
}

impl<W> ClauseStatus<W> {
    pub fn is_violated(&self) -> bool {
        matches!(self, ClauseStatus::Violated(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CodeReport {
    /// Clauses (a) to (d), in order; witnesses are prefix indices.
    pub clauses: [ClauseStatus<Vec<usize>>; 4],
}

impl CodeReport {
    pub fn is_valid(&self) -> bool {
        self.clauses.iter().all(|c| !c.is_violated())
    }
}

/// Checks the four code clauses on a prefix: entries non-negative with
/// infinitely many zeros, positive entries distinct, the supremum attained
/// when finite, and sums below the supremum present.
pub fn validate_code<T: Scalar>(code: &DvsCode<T>) -> CodeReport {
    let p = &code.prefix;
    let n = p.len();
    let a = match (0..n).find(|&i| cmp(&p[i], &T::zero()) == Ordering::Less) {
        Some(i) => ClauseStatus::Violated(vec![i]),
        None => ClauseStatus::NotFalsifiable(None),
    };
    let mut b = ClauseStatus::Satisfied;
    'outer: for i in 0..n {
        for j in i + 1..n {
            if !code.is_zero(i) && cmp(&p[i], &p[j]) == Ordering::Equal {
                b = ClauseStatus::Violated(vec![i, j]);
                break 'outer;
            }
        }
    }
    let c = if code.bounded {
        ClauseStatus::Satisfied
    } else {
        ClauseStatus::NotFalsifiable(None)
    };
    let mut d = ClauseStatus::Satisfied;
    if let Some(top) = code.max() {
        'scan: for i in 0..n {
            for j in i..n {
                let s = p[i].clone() + p[j].clone();
                let below = match cmp(&s, top) {
                    Ordering::Less => true,
                    // past the horizon of an unbounded code nothing is known
                    _ => false,
                };
                if below && !p.iter().any(|v| cmp(v, &s) == Ordering::Equal) {
                    d = ClauseStatus::NotFalsifiable(Some(vec![i, j]));
                    break 'scan;
                }
            }
        }
    }
    CodeReport { clauses: [a, b, c, d] }
}

/// Interleaves zeros with the sorted values: `(0, v_1, 0, v_2, ...)`.
pub fn encode_dvs<T: Scalar>(d: &DistanceSet<T>) -> DvsCode<T> {
    let mut prefix = Vec::with_capacity(2 * d.len());
    for v in d.values() {
        prefix.push(T::zero());
        prefix.push(v.clone());
    }
    DvsCode {
        prefix,
        bounded: matches!(d.cap(), Cap::Bounded(_)),
    }
}

/// The positive entries as a fragment; a bounded code is capped at its
/// largest entry.
pub fn decode<T: Scalar>(code: &DvsCode<T>) -> Result<DistanceSet<T>> {
    let values: Vec<T> = code
        .prefix
        .iter()
        .filter(|v| cmp(*v, &T::zero()) == Ordering::Greater)
        .cloned()
        .collect();
    if code.bounded {
        match code.max().filter(|m| !m.is_zero()) {
            Some(top) => DistanceSet::bounded(values.clone(), top.clone()),
            None => Err(Error::Malformed("a bounded code needs a positive entry".into())),
        }
    } else {
        DistanceSet::unbounded(values)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimWitness<T> {
    /// `d[perm[i]] = ratio * c[i]`.
    pub perm: Vec<usize>,
    pub ratio: T,
}

/// A prefix permutation `g` and ratio `r > 0` with `d_{g(i)} = r c_i`.
///
/// The ratio is forced as the quotient of the smallest positive entries.
/// Codes of different length or boundedness, or in different fields, are
/// never related.
pub fn sim_check<T: Scalar>(c: &DvsCode<T>, d: &DvsCode<T>) -> Option<SimWitness<T>> {
    if c.len() != d.len() || c.bounded != d.bounded {
        return None;
    }
    scalar::common_field(c.prefix.iter().chain(&d.prefix)).ok()?;
    let ratio = match (c.min_positive(), d.min_positive()) {
        (Some(i), Some(j)) => d.prefix[j].clone() / c.prefix[i].clone(),
        (None, None) => T::one(),
        _ => return None,
    };
    let mut used = vec![false; d.len()];
    let mut perm = Vec::with_capacity(c.len());
    for x in &c.prefix {
        let target = x.clone() * ratio.clone();
        let j = (0..d.len()).find(|&j| !used[j] && cmp(&d.prefix[j], &target) == Ordering::Equal)?;
        used[j] = true;
        perm.push(j);
    }
    Some(SimWitness { perm, ratio })
}

/// `table[i][j][k]` is `|v_j - v_k| <= v_i <= v_j + v_k`.
fn triple_table<T: Scalar>(v: &[T]) -> Vec<Vec<Vec<bool>>> {
    let n = v.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| scalar::triangle_ok(&v[j], &v[k], &v[i])).collect())
                .collect()
        })
        .collect()
}

/// Isomorphism search between two ternary relations (with an optional
/// unary colouring) on `0..n`, by backtracking with incidence-count
/// pruning. Branches over the image of point 0 run on `jobs` threads; the
/// answer is that of the lowest branch that succeeds, and each branch has
/// its own node budget, if any.
struct Ternary<'a> {
    p: &'a [Vec<Vec<bool>>],
    q: &'a [Vec<Vec<bool>>],
    candidates: Vec<Vec<usize>>,
}

enum Found {
    Map(Vec<usize>),
    None,
    Budget(u128),
}

impl Ternary<'_> {
    fn new<'a>(
        p: &'a [Vec<Vec<bool>>],
        q: &'a [Vec<Vec<bool>>],
        up: &[u8],
        uq: &[u8],
    ) -> Ternary<'a> {
        let n = p.len();
        let profile = |t: &[Vec<Vec<bool>>], i: usize| {
            let mut r = [0usize; 3];
            for a in 0..n {
                for b in 0..n {
                    r[0] += t[i][a][b] as usize;
                    r[1] += t[a][i][b] as usize;
                    r[2] += t[a][b][i] as usize;
                }
            }
            r
        };
        let pp: Vec<_> = (0..n).map(|i| profile(p, i)).collect();
        let pq: Vec<_> = (0..n).map(|i| profile(q, i)).collect();
        let candidates = (0..n)
            .map(|i| (0..n).filter(|&j| pp[i] == pq[j] && up[i] == uq[j] && p[i][i][i] == q[j][j][j]).collect())
            .collect();
        Ternary { p, q, candidates }
    }

    fn consistent(&self, map: &[usize], i: usize, j: usize) -> bool {
        let (p, q) = (self.p, self.q);
        (0..=i).all(|a| {
            let ga = if a == i { j } else { map[a] };
            (0..=i).all(|b| {
                let gb = if b == i { j } else { map[b] };
                p[i][a][b] == q[j][ga][gb] && p[a][i][b] == q[ga][j][gb] && p[a][b][i] == q[ga][gb][j]
            })
        })
    }

    fn branch(&self, first: usize, budget: Option<u128>) -> Found {
        let n = self.p.len();
        let mut map = vec![0; n];
        let mut used = vec![false; n];
        let mut nodes = 0u128;
        if !self.consistent(&map, 0, first) {
            return Found::None;
        }
        map[0] = first;
        used[first] = true;

        fn go(
            t: &Ternary<'_>,
            i: usize,
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
            nodes: &mut u128,
            budget: Option<u128>,
        ) -> Option<bool> {
            if i == map.len() {
                return Some(true);
            }
            for &j in &t.candidates[i] {
                if used[j] {
                    continue;
                }
                *nodes += 1;
                if budget.is_some_and(|b| *nodes > b) {
                    return None;
                }
                if !t.consistent(map, i, j) {
                    continue;
                }
                map[i] = j;
                used[j] = true;
                let r = go(t, i + 1, map, used, nodes, budget);
                used[j] = false;
                if r != Some(false) {
                    return r;
                }
            }
            Some(false)
        }

        match go(self, 1, &mut map, &mut used, &mut nodes, budget) {
            Some(true) => Found::Map(map),
            Some(false) => Found::None,
            None => Found::Budget(nodes),
        }
    }

    fn search(&self, budget: Option<u128>, jobs: usize) -> Result<Option<Vec<usize>>> {
        let n = self.p.len();
        if n == 0 {
            return Ok(Some(Vec::new()));
        }
        let firsts = self.candidates[0].clone();
        let results: Mutex<Vec<Option<Found>>> = Mutex::new((0..firsts.len()).map(|_| None).collect());
        let next = std::sync::atomic::AtomicUsize::new(0);
        let work = || loop {
            let b = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            if b >= firsts.len() {
                break;
            }
            let r = self.branch(firsts[b], budget);
            results.lock().expect("poisoned")[b] = Some(r);
        };
        let jobs = jobs.clamp(1, firsts.len().max(1));
        if jobs == 1 {
            work();
        } else {
            std::thread::scope(|s| {
                for _ in 0..jobs {
                    s.spawn(work);
                }
            });
        }
        for r in results.into_inner().expect("poisoned") {
            match r.expect("every branch runs") {
                Found::Map(m) => return Ok(Some(m)),
                Found::None => {}
                Found::Budget(used) => {
                    return Err(Error::BudgetExceeded {
                        what: "permutation search nodes",
                        needed: used,
                        limit: budget.unwrap_or(0),
                    })
                }
            }
        }
        Ok(None)
    }
}

/// Prefixes up to this length are searched without a budget.
pub const EXHAUSTIVE_PREFIX: usize = 8;

/// A prefix permutation preserving the zero pattern and the triple
/// predicate `|c_j - c_k| <= c_i <= c_j + c_k` in both directions.
pub fn approx_check<T: Scalar>(
    c: &DvsCode<T>,
    d: &DvsCode<T>,
    budget: u128,
    jobs: usize,
) -> Result<Option<Vec<usize>>> {
    if c.len() != d.len() {
        return Ok(None);
    }
    scalar::common_field(&c.prefix)?;
    scalar::common_field(&d.prefix)?;
    let (tc, td) = (triple_table(&c.prefix), triple_table(&d.prefix));
    let zc: Vec<u8> = (0..c.len()).map(|i| c.is_zero(i) as u8).collect();
    let zd: Vec<u8> = (0..d.len()).map(|i| d.is_zero(i) as u8).collect();
    let budget = (c.len() > EXHAUSTIVE_PREFIX).then_some(budget);
    Ternary::new(&tc, &td, &zc, &zd).search(budget, jobs)
}

/// A distance value set as a ternary structure: the relation holds of
/// `(x, y, z)` exactly when it is a triangle of the set.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleStructure<T> {
    pub universe: Vec<T>,
    table: Vec<Vec<Vec<bool>>>,
}

impl<T: Scalar> TriangleStructure<T> {
    pub fn holds(&self, i: usize, j: usize, k: usize) -> bool {
        self.table[i][j][k]
    }

    /// The relation as index triples with `i <= j <= k` (it is symmetric).
    pub fn triples(&self) -> Vec<[usize; 3]> {
        let n = self.universe.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    if self.table[i][j][k] {
                        out.push([i, j, k]);
                    }
                }
            }
        }
        out
    }
}

pub fn triangle_structure<T: Scalar>(d: &DistanceSet<T>) -> TriangleStructure<T> {
    TriangleStructure {
        universe: d.values().to_vec(),
        table: triple_table(d.values()),
    }
}

/// An isomorphism `map[i] = j` between two triangle structures.
pub fn ts_isomorphic<T: Scalar>(
    s: &TriangleStructure<T>,
    t: &TriangleStructure<T>,
    budget: u128,
) -> Result<Option<Vec<usize>>> {
    if s.universe.len() != t.universe.len() {
        return Ok(None);
    }
    let z = vec![0u8; s.universe.len()];
    Ternary::new(&s.table, &t.table, &z, &z).search(Some(budget), 1)
}

/// The finite model of a set: universe `{0}` together with the additive
/// semigroup generated by the set up to its horizon, the constant `c`
/// (the cap, or 0 when unbounded), partial addition, and `R_q(x, y)` iff
/// `q < x/y` for every sampled `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedModel<T> {
    /// Sorted; `universe[0]` is 0.
    pub universe: Vec<T>,
    /// Index of `c` in the universe.
    pub c: usize,
    /// Sorted, distinct, positive, contains 1.
    pub sample: Vec<BigRational>,
    /// `plus[x][y]`, when the sum is in the universe.
    pub plus: Vec<Vec<Option<usize>>>,
    /// `rq[q][x][y]`.
    pub rq: Vec<Vec<Vec<bool>>>,
    /// `(p, q, i)` with `sample[p] * sample[q] = sample[i]`.
    products: Vec<(usize, usize, usize)>,
    /// `(p, q, i)` with `sample[p] + sample[q] = sample[i]`.
    sums: Vec<(usize, usize, usize)>,
}

fn sample_table(
    sample: &[BigRational],
    op: impl Fn(&BigRational, &BigRational) -> BigRational,
) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for p in 0..sample.len() {
        for q in 0..sample.len() {
            if let Ok(i) = sample.binary_search(&op(&sample[p], &sample[q])) {
                out.push((p, q, i));
            }
        }
    }
    out
}

impl<T: Scalar> EncodedModel<T> {
    /// Assembles a model from its tables, checking their shapes. The
    /// sample must be sorted, distinct, positive and contain 1.
    pub fn from_parts(
        universe: Vec<T>,
        c: usize,
        sample: Vec<BigRational>,
        plus: Vec<Vec<Option<usize>>>,
        rq: Vec<Vec<Vec<bool>>>,
    ) -> Result<Self> {
        let n = universe.len();
        let bad = |what: &str| Err(Error::Malformed(format!("model: {what}")));
        if n == 0 || !universe[0].is_zero() {
            return bad("the universe must start with 0");
        }
        if universe.windows(2).any(|w| cmp(&w[0], &w[1]) != Ordering::Less) {
            return bad("the universe must be strictly increasing");
        }
        if c >= n {
            return bad("c is out of range");
        }
        if sample.windows(2).any(|w| w[0] >= w[1])
            || sample.first().is_some_and(|q| !q.is_positive())
            || sample.binary_search(&BigRational::one()).is_err()
        {
            return bad("the sample must be sorted, positive and contain 1");
        }
        if plus.len() != n || plus.iter().any(|r| r.len() != n || r.iter().flatten().any(|&i| i >= n)) {
            return bad("the addition table has the wrong shape");
        }
        if rq.len() != sample.len() || rq.iter().any(|t| t.len() != n || t.iter().any(|r| r.len() != n)) {
            return bad("an R_q table has the wrong shape");
        }
        let products = sample_table(&sample, |a, b| a * b);
        let sums = sample_table(&sample, |a, b| a + b);
        Ok(EncodedModel {
            universe,
            c,
            sample,
            plus,
            rq,
            products,
            sums,
        })
    }

    pub fn r(&self, q: usize, x: usize, y: usize) -> bool {
        self.rq[q][x][y]
    }

    /// Flips one entry of one `R_q` table.
    pub fn corrupt(&mut self, q: usize, x: usize, y: usize) {
        self.rq[q][x][y] = !self.rq[q][x][y];
    }

    fn sample_index(&self, q: &BigRational) -> Option<usize> {
        self.sample.binary_search(q).ok()
    }
}

fn horizon<T: Scalar>(d: &DistanceSet<T>) -> Option<T> {
    match d.cap() {
        Cap::Bounded(c) => Some(c.clone()),
        Cap::Unbounded => d.max().cloned(),
    }
}

/// Farey fractions of order 8 (without 0), every rational quotient of
/// universe elements, a dyadic rational between each pair of consecutive
/// quotients and beyond both ends, and `rho (1 - eps)` just below each
/// rational quotient `rho`.
pub fn default_sample<T: Scalar>(d: &DistanceSet<T>, limit: usize) -> Result<Vec<BigRational>> {
    let universe = semigroup_fragment(d, limit)?;
    let mut sample: Vec<BigRational> = height_rationals(8)
        .into_iter()
        .filter(|q| q.is_positive() && q <= &BigRational::one())
        .collect();
    let mut ratios: Vec<T> = Vec::new();
    for x in &universe {
        for y in &universe {
            ratios.push(x.clone() / y.clone());
        }
    }
    ratios.sort_by(cmp);
    ratios.dedup_by(|a, b| cmp(a, b) == Ordering::Equal);
    let rational: Vec<BigRational> = ratios.iter().filter_map(|r| r.to_ratio()).collect();
    sample.extend(rational.iter().cloned());
    sample.push(BigRational::one());
    if let (Some(lo), Some(hi)) = (ratios.first(), ratios.last()) {
        sample.push(dyadic_between(&T::zero(), lo));
        let above = hi.clone() + T::one();
        sample.push(dyadic_between(hi, &above));
    }
    for w in ratios.windows(2) {
        sample.push(dyadic_between(&w[0], &w[1]));
    }
    sample.sort();
    sample.dedup();

    // every point of the base sample, rational or not, must stay clear of
    // rho (1 - eps) from below
    let mut points: Vec<T> = sample.iter().map(T::from_ratio).chain(ratios).collect();
    points.sort_by(cmp);
    points.dedup_by(|a, b| cmp(a, b) == Ordering::Equal);
    let mut eps = BigRational::new(1.into(), 2.into());
    let half = eps.clone();
    loop {
        let shrink = T::from_ratio(&(BigRational::one() - &eps * BigRational::from_integer(2.into())));
        if points
            .windows(2)
            .all(|w| cmp(&w[0], &(w[1].clone() * shrink.clone())) == Ordering::Less)
        {
            break;
        }
        eps *= half.clone();
    }
    let below: Vec<BigRational> = rational.iter().map(|r| r * (BigRational::one() - &eps)).collect();
    sample.extend(below);
    sample.sort();
    sample.dedup();
    Ok(sample)
}

/// Plain sums of elements of `d` up to its horizon, with the cap.
fn semigroup_fragment<T: Scalar>(d: &DistanceSet<T>, limit: usize) -> Result<Vec<T>> {
    let Some(h) = horizon(d) else {
        return Ok(Vec::new());
    };
    let base = DistanceSet::unbounded(d.values().to_vec())?.close(&h, limit)?;
    let mut v = base.values().to_vec();
    if let Cap::Bounded(c) = d.cap() {
        if v.last().is_none_or(|m| cmp(m, c) != Ordering::Equal) {
            return Err(Error::Malformed(format!("the cap {} is not attained", c.to_text())));
        }
    }
    v.dedup_by(|a, b| cmp(a, b) == Ordering::Equal);
    Ok(v)
}

/// Builds the model of `d`. `sample` defaults to [`default_sample`]; 1 is
/// always added. `limit` bounds the size of the universe.
pub fn model_encode<T: Scalar>(
    d: &DistanceSet<T>,
    sample: Option<&[BigRational]>,
    limit: usize,
) -> Result<EncodedModel<T>> {
    let mut universe = vec![T::zero()];
    universe.extend(semigroup_fragment(d, limit)?);
    let mut sample = match sample {
        Some(s) => {
            if let Some(bad) = s.iter().find(|q| !q.is_positive()) {
                return Err(Error::Malformed(format!("sample entry {bad} is not positive")));
            }
            s.to_vec()
        }
        None => default_sample(d, limit)?,
    };
    sample.push(BigRational::one());
    sample.sort();
    sample.dedup();
    let n = universe.len();
    let c = match d.cap() {
        Cap::Bounded(_) => n - 1,
        Cap::Unbounded => 0,
    };
    let plus = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| {
                    let s = universe[x].clone() + universe[y].clone();
                    universe.binary_search_by(|v| cmp(v, &s)).ok()
                })
                .collect()
        })
        .collect();
    let rq = sample
        .iter()
        .map(|q| {
            let qt = T::from_ratio(q);
            (0..n)
                .map(|x| {
                    (0..n)
                        .map(|y| {
                            x != 0
                                && y != 0
                                && cmp(&(qt.clone() * universe[y].clone()), &universe[x]) == Ordering::Less
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    EncodedModel::from_parts(universe, c, sample, plus, rq)
}

/// A clause instance: sampled rationals and universe indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryWitness {
    pub q: Vec<BigRational>,
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryClause {
    pub clause: u8,
    pub status: ClauseStatus<TheoryWitness>,
    pub checked: u64,
    pub violations: u64,
    /// Instances whose existential part has no witness in the sample.
    pub unwitnessed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryReport {
    pub clauses: Vec<TheoryClause>,
}

impl TheoryReport {
    pub fn clause(&self, n: u8) -> &TheoryClause {
        &self.clauses[n as usize - 1]
    }

    pub fn violated(&self) -> Vec<u8> {
        self.clauses.iter().filter(|c| c.status.is_violated()).map(|c| c.clause).collect()
    }
}

struct Tally {
    clause: u8,
    checked: u64,
    violations: u64,
    unwitnessed: u64,
    first: Option<TheoryWitness>,
    pending: Option<TheoryWitness>,
}

impl Tally {
    fn new(clause: u8) -> Self {
        Tally {
            clause,
            checked: 0,
            violations: 0,
            unwitnessed: 0,
            first: None,
            pending: None,
        }
    }

    fn check(&mut self, ok: bool, w: impl FnOnce() -> TheoryWitness) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(w());
            }
        }
    }

    fn unwitnessed(&mut self, w: impl FnOnce() -> TheoryWitness) {
        self.unwitnessed += 1;
        if self.pending.is_none() {
            self.pending = Some(w());
        }
    }

    fn finish(self) -> TheoryClause {
        let status = match (self.first, self.unwitnessed) {
            (Some(w), _) => ClauseStatus::Violated(w),
            (None, 0) => ClauseStatus::Satisfied,
            (None, _) if self.clause == 6 => ClauseStatus::Satisfied,
            (None, _) => ClauseStatus::NotFalsifiable(self.pending),
        };
        TheoryClause {
            clause: self.clause,
            status,
            checked: self.checked,
            violations: self.violations,
            unwitnessed: self.unwitnessed,
        }
    }
}

/// Checks the seven clauses of the theory on a finite model, reading every
/// quantifier over positive rationals as ranging over the sample.
///
/// Clause 6 is only refutable in one direction (a sampled splitting
/// `q1 + q2 = q` whose conclusion fails); forward instances without a
/// sampled splitting are counted as unwitnessed. Clause 7 is existential
/// over the whole set and is never reported as violated.
pub fn check_theory_t<T: Scalar>(m: &EncodedModel<T>) -> TheoryReport {
    let n = m.universe.len();
    let s = m.sample.len();
    let nz: Vec<usize> = (1..n).collect();
    let w = |q: Vec<&BigRational>, points: Vec<usize>| TheoryWitness {
        q: q.into_iter().cloned().collect(),
        points,
    };

    let mut c1 = Tally::new(1);
    for qi in 0..s {
        for x in 0..n {
            c1.check(!m.r(qi, x, 0) && !m.r(qi, 0, x), || w(vec![&m.sample[qi]], vec![x]));
        }
    }

    let one = m.sample_index(&BigRational::one()).expect("1 is sampled");
    let mut c2 = Tally::new(2);
    for &x in &nz {
        for &y in &nz {
            // downward closed
            for qi in 1..s {
                c2.check(!m.r(qi, x, y) || m.r(qi - 1, x, y), || {
                    w(vec![&m.sample[qi - 1], &m.sample[qi]], vec![x, y])
                });
            }
            if x == y {
                for qi in 0..s {
                    c2.check(m.r(qi, x, x) == (qi < one), || w(vec![&m.sample[qi]], vec![x, x]));
                }
            }
        }
    }

    let mut c3 = Tally::new(3);
    for &y in &nz {
        for &x in &nz {
            for &x2 in &nz {
                if x < x2 {
                    let differ = (0..s).any(|qi| m.r(qi, x, y) != m.r(qi, x2, y));
                    c3.check(differ, || w(vec![], vec![x, x2, y]));
                }
            }
        }
    }

    let mut c4 = Tally::new(4);
    for &x in &nz {
        for &y in &nz {
            for &z in &nz {
                for &(p, q, pq) in &m.products {
                    let (a, b, ab) = (m.r(p, x, y), m.r(q, y, z), m.r(pq, x, z));
                    let ok = !(a && b && !ab) && !(!a && !b && ab);
                    c4.check(ok, || w(vec![&m.sample[p], &m.sample[q]], vec![x, y, z]));
                }
            }
        }
    }

    let mut c5 = Tally::new(5);
    for x in 0..n {
        c5.check(x == 0 || cmp(&m.universe[0], &m.universe[x]) == Ordering::Less, || w(vec![], vec![x]));
    }
    for &x in &nz {
        for &x2 in &nz {
            let le = cmp(&m.universe[x], &m.universe[x2]) != Ordering::Greater;
            c5.check(le == (x == x2 || m.r(one, x2, x)), || w(vec![&m.sample[one]], vec![x, x2]));
        }
    }

    let sums = &m.sums;
    let mut c6 = Tally::new(6);
    for &x in &nz {
        for &x2 in &nz {
            let Some(sum) = m.plus[x][x2] else { continue };
            for &y in &nz {
                for &(q1, q2, q) in sums {
                    if m.r(q1, x, y) && m.r(q2, x2, y) {
                        c6.check(m.r(q, sum, y), || {
                            w(vec![&m.sample[q1], &m.sample[q2]], vec![x, x2, y])
                        });
                    }
                }
                for q in 0..s {
                    if m.r(q, sum, y) {
                        let split = sums.iter().any(|&(a, b, t)| t == q && m.r(a, x, y) && m.r(b, x2, y));
                        if !split {
                            c6.unwitnessed(|| w(vec![&m.sample[q]], vec![x, x2, y]));
                        }
                    }
                }
            }
        }
    }

    let mut c7 = Tally::new(7);
    for &x in &nz {
        for q in 0..s {
            c7.checked += 1;
            if !nz.iter().any(|&x2| !m.r(q, x2, x)) {
                c7.unwitnessed(|| w(vec![&m.sample[q]], vec![x]));
            }
        }
    }

    TheoryReport {
        clauses: [c1, c2, c3, c4, c5, c6, c7].into_iter().map(Tally::finish).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvs::gen_delta_alpha;
    use crate::equiv::scaling_witness;
    use crate::exact::ExactReal;

    fn int(n: i64) -> ExactReal {
        ExactReal::int(n)
    }

    fn code(v: &[i64], bounded: bool) -> DvsCode<ExactReal> {
        DvsCode::new(v.iter().map(|&x| int(x)).collect(), bounded)
    }

    #[test]
    fn validate_examples() {
        let r = validate_code(&code(&[0, 1, 0, 2, 0, 0], true));
        assert_eq!(r.clauses[0], ClauseStatus::NotFalsifiable(None));
        assert_eq!(r.clauses[1], ClauseStatus::Satisfied);
        assert_eq!(r.clauses[2], ClauseStatus::Satisfied);
        assert_eq!(r.clauses[3], ClauseStatus::Satisfied);
        let r = validate_code(&code(&[0, 1, 0, 1], false));
        assert_eq!(r.clauses[1], ClauseStatus::Violated(vec![1, 3]));
        let r = validate_code(&code(&[0, 0, 0], false));
        assert!(r.is_valid());
        let r = validate_code(&code(&[0, -1], false));
        assert_eq!(r.clauses[0], ClauseStatus::Violated(vec![1]));
        let r = validate_code(&code(&[0, 1, 3, 5], true));
        assert_eq!(r.clauses[3], ClauseStatus::NotFalsifiable(Some(vec![1, 1])));
        // an unbounded code is not asked for sums past its largest entry
        assert!(validate_code(&code(&[0, 1, 2], false)).clauses[3] == ClauseStatus::Satisfied);
    }

    #[test]
    fn encode_examples() {
        let d = DistanceSet::from_ints(&[1, 2], None).unwrap();
        assert_eq!(encode_dvs(&d), code(&[0, 1, 0, 2], false));
        assert!(encode_dvs(&DistanceSet::<ExactReal>::empty()).is_empty());
        let g = gen_delta_alpha(&ExactReal::sqrt(2), 1, &int(2)).unwrap();
        let s2 = ExactReal::sqrt(2);
        assert_eq!(
            encode_dvs(&g).prefix,
            vec![int(0), s2.clone() - int(1), int(0), int(1), int(0), s2]
        );
        assert_eq!(decode(&encode_dvs(&g)).unwrap().values(), g.values());
        assert_eq!(decode(&encode_dvs(&d)).unwrap(), d);
    }

    #[test]
    fn sim_examples() {
        let w = sim_check(&code(&[0, 1, 2], false), &code(&[0, 2, 4], false)).unwrap();
        assert_eq!((w.perm, w.ratio), (vec![0, 1, 2], int(2)));
        let w = sim_check(&code(&[1, 2], false), &code(&[4, 2], false)).unwrap();
        assert_eq!((w.perm, w.ratio), (vec![1, 0], int(2)));
        assert!(sim_check(&code(&[0, 1, 2], false), &code(&[0, 0, 2], false)).is_none());
    }

    #[test]
    fn approx_examples() {
        let c = code(&[0, 1, 0, 2, 0, 3], false);
        assert_eq!(approx_check(&c, &c, 1000, 1).unwrap(), Some(vec![0, 1, 2, 3, 4, 5]));
        assert_eq!(approx_check(&code(&[0, 1, 4], false), &code(&[0, 1, 2], false), 1000, 1).unwrap(), None);
        let d = code(&[0, 4, 0, 2, 0, 6], false);
        let g = sim_check(&c, &d).unwrap().perm;
        let found = approx_check(&c, &d, 1000, 2).unwrap().unwrap();
        assert_eq!(found, g);
    }

    #[test]
    fn approx_budget_beyond_exhaustive_length() {
        let c = code(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10], false);
        let d = code(&[10, 9, 8, 7, 6, 5, 4, 3, 2, 1], false);
        assert!(approx_check(&c, &d, 100_000, 1).unwrap().is_some());
        let d2 = code(&[10, 9, 8, 7, 6, 5, 4, 3, 2, 11], false);
        assert!(matches!(approx_check(&c, &d2, 1, 1), Ok(None) | Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn triangle_structures() {
        let d = DistanceSet::from_ints(&[1, 2, 3], None).unwrap();
        let s = triangle_structure(&d);
        assert!(s.holds(1, 0, 0));
        assert!(!s.holds(2, 0, 0));
        let scaled = triangle_structure(&d.scale(&ExactReal::rational(7, 3)).unwrap());
        assert_eq!(ts_isomorphic(&s, &scaled, 1000).unwrap(), Some(vec![0, 1, 2]));
        let e = triangle_structure(&DistanceSet::from_ints(&[1, 2, 4], None).unwrap());
        assert_eq!(ts_isomorphic(&s, &e, 1000).unwrap(), None);
        let f = triangle_structure(&DistanceSet::from_ints(&[1, 2], None).unwrap());
        assert_eq!(ts_isomorphic(&s, &f, 1000).unwrap(), None);
    }

    #[test]
    fn bridge_on_small_battery() {
        let sets = [
            DistanceSet::from_ints(&[1, 2, 3], None).unwrap(),
            DistanceSet::from_ints(&[2, 4, 6], None).unwrap(),
            DistanceSet::from_ints(&[1, 3], None).unwrap(),
            gen_delta_alpha(&ExactReal::sqrt(2), 1, &int(2)).unwrap(),
            gen_delta_alpha(&ExactReal::sqrt(2), 1, &int(2)).unwrap().scale(&ExactReal::sqrt(2)).unwrap(),
        ];
        for a in &sets {
            for b in &sets {
                let sw = scaling_witness(a, b).ok().flatten().map(|w| w.ratio);
                let sc = sim_check(&encode_dvs(a), &encode_dvs(b)).map(|w| w.ratio);
                assert_eq!(sw, sc);
            }
        }
    }

    #[test]
    fn model_basics() {
        let d = DistanceSet::from_ints(&[1, 2], Some(2)).unwrap();
        let m = model_encode(&d, None, 100).unwrap();
        assert_eq!(m.universe, vec![int(0), int(1), int(2)]);
        assert_eq!(m.c, 2);
        let half = m.sample_index(&BigRational::new(1.into(), 2.into())).unwrap();
        assert!(!m.r(half, 1, 2));
        let rep = check_theory_t(&m);
        for c in 1..=6 {
            assert_eq!(rep.clause(c).status, ClauseStatus::Satisfied, "clause {c}");
        }
        assert_eq!(m.plus[1][1], Some(2));
        assert_eq!(m.plus[2][1], None);

        let unb = DistanceSet::from_ints(&[1, 3], None).unwrap();
        let m = model_encode(&unb, None, 100).unwrap();
        assert_eq!(m.universe, vec![int(0), int(1), int(2), int(3)]);
        assert_eq!(m.c, 0);
    }

    #[test]
    fn every_single_corruption_is_caught() {
        let d = DistanceSet::from_ints(&[2, 3, 4], Some(4)).unwrap();
        let m = model_encode(&d, None, 100).unwrap();
        assert!(check_theory_t(&m).violated().is_empty());
        let n = m.universe.len();
        for q in 0..m.sample.len() {
            for x in 0..n {
                for y in 0..n {
                    let mut bad = m.clone();
                    bad.corrupt(q, x, y);
                    let v = check_theory_t(&bad).violated();
                    assert!(
                        v.iter().any(|c| [1, 2, 4].contains(c)),
                        "flip at q={} x={x} y={y} caught only by {v:?}",
                        m.sample[q]
                    );
                    if x != 0 && y != 0 {
                        assert!(v.contains(&2) || v.contains(&4));
                    }
                }
            }
        }
    }

    #[test]
    fn surd_model_is_a_model() {
        let g = gen_delta_alpha(&ExactReal::sqrt(2), 1, &int(2)).unwrap();
        let m = model_encode(&g, None, 100).unwrap();
        let rep = check_theory_t(&m);
        assert!(rep.violated().is_empty(), "{rep:?}");
    }
}
