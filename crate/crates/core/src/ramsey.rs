//! Certification of Erdős–Rado arrows `C -> (B)^A_k` on small spaces, and
//! rigidity.

use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{copies_of, search_isomorphisms, MetricSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArrowStatus {
    Holds,
    Fails,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Every coloring, checked at the leaves.
    Exhaustive,
    /// Depth-first with pruning on monochromatic copies of `B`.
    Backtrack,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowStats {
    pub a_copies: usize,
    pub b_copies: usize,
    /// Search nodes visited (colorings, for the exhaustive strategy).
    pub nodes: u128,
    pub strategy: Strategy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowVerdict {
    pub status: ArrowStatus,
    /// Each copy of `A` (as a sorted point set of `C`) with its color.
    pub bad_coloring: Option<Vec<(Vec<usize>, usize)>>,
    pub stats: ArrowStats,
}

/// The copies of `A` in `C` and, for every copy of `B`, which of them it
/// contains.
#[derive(Clone, Debug)]
pub struct ArrowInstance {
    pub a_copies: Vec<Vec<usize>>,
    pub b_members: Vec<Vec<usize>>,
    pub k: usize,
}

impl ArrowInstance {
    pub fn new<T: Scalar>(c: &MetricSpace<T>, b: &MetricSpace<T>, a: &MetricSpace<T>, k: usize) -> Result<Self> {
        if copies_of(b, a)?.is_empty() {
            return Err(Error::NotEmbeddable("A does not embed in B"));
        }
        let sets = |copies: Vec<Vec<usize>>| -> Vec<Vec<usize>> {
            copies
                .into_iter()
                .map(|mut v| {
                    v.sort_unstable();
                    v
                })
                .collect()
        };
        let b_sets = sets(copies_of(c, b)?);
        if b_sets.is_empty() {
            return Err(Error::NotEmbeddable("B does not embed in C"));
        }
        let a_copies = sets(copies_of(c, a)?);
        let b_members = b_sets
            .iter()
            .map(|bs| {
                (0..a_copies.len())
                    .filter(|&i| a_copies[i].iter().all(|p| bs.binary_search(p).is_ok()))
                    .collect()
            })
            .collect();
        Ok(ArrowInstance { a_copies, b_members, k })
    }

    /// A copy of `B` on which `coloring` is constant, if any.
    pub fn monochromatic(&self, coloring: &[usize]) -> Option<usize> {
        self.b_members.iter().position(|m| {
            m.split_first()
                .is_none_or(|(f, rest)| rest.iter().all(|i| coloring[*i] == coloring[*f]))
        })
    }
}

enum Outcome {
    Done,
    Bad(Vec<usize>),
    OutOfBudget,
}

struct Search<'a> {
    inst: &'a ArrowInstance,
    containing: Vec<Vec<usize>>,
    counts: Vec<Vec<usize>>,
    coloring: Vec<usize>,
    prune: bool,
    nodes: u128,
    budget: u128,
    cancel: &'a AtomicUsize,
    branch: usize,
}

impl Search<'_> {
    fn assign(&mut self, i: usize, c: usize) -> bool {
        self.coloring[i] = c;
        let mut mono = false;
        for &b in &self.containing[i] {
            self.counts[b][c] += 1;
            mono |= self.counts[b][c] == self.inst.b_members[b].len();
        }
        mono
    }

    fn unassign(&mut self, i: usize, c: usize) {
        for &b in &self.containing[i] {
            self.counts[b][c] -= 1;
        }
    }

    fn run(&mut self, i: usize) -> Outcome {
        self.nodes += 1;
        if self.nodes > self.budget || self.cancel.load(AtomicOrdering::Relaxed) < self.branch {
            return Outcome::OutOfBudget;
        }
        if i == self.coloring.len() {
            if self.prune || self.inst.monochromatic(&self.coloring).is_none() {
                return Outcome::Bad(self.coloring.clone());
            }
            return Outcome::Done;
        }
        for c in 0..self.inst.k {
            let mono = self.assign(i, c);
            let out = if mono && self.prune { Outcome::Done } else { self.run(i + 1) };
            self.unassign(i, c);
            if !matches!(out, Outcome::Done) {
                return out;
            }
        }
        Outcome::Done
    }
}

/// Checks `C -> (B)^A_k` with the default strategy choice: exhaustive
/// when `k^(copies of A - 1)` colorings fit in `budget`, backtracking
/// otherwise.
pub fn arrow<T: Scalar>(
    c: &MetricSpace<T>,
    b: &MetricSpace<T>,
    a: &MetricSpace<T>,
    k: usize,
    budget: u128,
    jobs: usize,
) -> Result<ArrowVerdict> {
    let inst = ArrowInstance::new(c, b, a, k)?;
    let m = inst.a_copies.len().saturating_sub(1);
    let fits = (k as u128).checked_pow(m as u32).is_some_and(|n| n <= budget);
    let strategy = if fits { Strategy::Exhaustive } else { Strategy::Backtrack };
    Ok(arrow_instance(&inst, strategy, budget, jobs))
}

/// Runs one strategy on a prepared instance.
///
/// The first copy of `A` is fixed to color 0. The tree is split into
/// top-level branches over the colors of the next few copies, each with an
/// equal share of `budget`; the verdict and statistics are those of the
/// lowest-index branch that does not complete, so they do not depend on
/// `jobs`.
pub fn arrow_instance(inst: &ArrowInstance, strategy: Strategy, budget: u128, jobs: usize) -> ArrowVerdict {
    let stats = |nodes| ArrowStats {
        a_copies: inst.a_copies.len(),
        b_copies: inst.b_members.len(),
        nodes,
        strategy,
    };
    let k = inst.k;
    if k <= 1 {
        return ArrowVerdict {
            status: ArrowStatus::Holds,
            bad_coloring: None,
            stats: stats(0),
        };
    }
    let m = inst.a_copies.len();
    if m == 0 {
        // the empty coloring leaves every copy of B constant
        return ArrowVerdict {
            status: ArrowStatus::Holds,
            bad_coloring: None,
            stats: stats(0),
        };
    }
    let prune = strategy == Strategy::Backtrack;
    let mut containing = vec![Vec::new(); m];
    for (bi, members) in inst.b_members.iter().enumerate() {
        for &a in members {
            containing[a].push(bi);
        }
    }

    let mut depth = 0;
    let mut branches = 1usize;
    while depth + 1 < m && branches < 64 {
        depth += 1;
        branches *= k;
    }
    let share = (budget / branches as u128).max(1);
    let cancel = AtomicUsize::new(usize::MAX);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<(Outcome, u128)>>> = Mutex::new((0..branches).map(|_| None).collect());

    let work = || loop {
        let br = next.fetch_add(1, AtomicOrdering::SeqCst);
        if br >= branches || cancel.load(AtomicOrdering::SeqCst) < br {
            break;
        }
        let mut s = Search {
            inst,
            containing: containing.clone(),
            counts: vec![vec![0; k]; inst.b_members.len()],
            coloring: vec![0; m],
            prune,
            nodes: 0,
            budget: share,
            cancel: &cancel,
            branch: br,
        };
        let mut mono = s.assign(0, 0);
        let mut code = br;
        for i in 1..=depth {
            let col = code % k;
            code /= k;
            mono |= s.assign(i, col);
        }
        let out = if mono && prune { Outcome::Done } else { s.run(depth + 1) };
        if !matches!(out, Outcome::Done) {
            cancel.fetch_min(br, AtomicOrdering::SeqCst);
        }
        results.lock().expect("poisoned")[br] = Some((out, s.nodes));
    };

    let jobs = jobs.clamp(1, branches);
    if jobs == 1 {
        work();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(work);
            }
        });
    }

    let results = results.into_inner().expect("poisoned");
    let mut nodes = 0;
    for r in results {
        let (out, n) = r.expect("branches below the first failure all run");
        nodes += n;
        match out {
            Outcome::Done => {}
            Outcome::Bad(coloring) => {
                assert!(
                    inst.monochromatic(&coloring).is_none(),
                    "bad coloring must leave every copy of B non-constant"
                );
                let listed = inst.a_copies.iter().cloned().zip(coloring).collect();
                return ArrowVerdict {
                    status: ArrowStatus::Fails,
                    bad_coloring: Some(listed),
                    stats: stats(nodes),
                };
            }
            Outcome::OutOfBudget => {
                return ArrowVerdict {
                    status: ArrowStatus::Unknown,
                    bad_coloring: None,
                    stats: stats(nodes),
                }
            }
        }
    }
    ArrowVerdict {
        status: ArrowStatus::Holds,
        bad_coloring: None,
        stats: stats(nodes),
    }
}

/// Number of automorphisms, respecting the order when `x` has one.
pub fn automorphism_count<T: Scalar>(x: &MetricSpace<T>) -> usize {
    search_isomorphisms(x, x, x.is_ordered(), |_| true)
}

/// Whether the identity is the only automorphism.
pub fn is_rigid<T: Scalar>(x: &MetricSpace<T>) -> bool {
    let mut seen = 0;
    search_isomorphisms(x, x, x.is_ordered(), |_| {
        seen += 1;
        seen < 2
    });
    seen <= 1
}
