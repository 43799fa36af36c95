//! Section-existence as a binary constraint satisfaction problem.
//!
//! Variables are base points, the domain of a base point is its fiber, and
//! every base edge carries the constraint "lifts equal or adjacent". The
//! solver maintains arc consistency during backtracking, picks the variable
//! with the smallest domain and tries values in ascending order.

use std::cell::{Cell, RefCell};
use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::homotopy::Outcome;
use crate::lattice::DigitalImage;

/// A map onto a base image whose sections are sought.
pub trait LiftProblem {
    fn base(&self) -> &DigitalImage;

    /// Sorted lift identifiers over base point `b`.
    fn fiber(&self, b: usize) -> &[usize];

    /// Whether two lifts are equal or adjacent in the total image.
    fn lifts_compatible(&self, a: usize, c: usize) -> bool;

    /// Lifts over `target` compatible with `lift`, sorted ascending.
    fn compatible_lifts(&self, lift: usize, target: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend(
            self.fiber(target)
                .iter()
                .copied()
                .filter(|&c| self.lifts_compatible(lift, c)),
        );
    }

    /// Set bit `p` of `bits` for every position `p` in `fiber(target)` whose
    /// lift is compatible with `lift`; `bits` starts zeroed.
    fn support_bits(&self, lift: usize, target: usize, bits: &mut [u64]) {
        let mut out = Vec::new();
        self.compatible_lifts(lift, target, &mut out);
        let fiber = self.fiber(target);
        for c in out {
            if let Ok(p) = fiber.binary_search(&c) {
                bits[p / 64] |= 1 << (p % 64);
            }
        }
    }

    /// Some position `p` in `fiber(target)` with `accept(p)` whose lift is
    /// compatible with `lift`.
    fn find_support(&self, lift: usize, target: usize, accept: &dyn Fn(usize) -> bool) -> Option<usize> {
        self.fiber(target)
            .iter()
            .enumerate()
            .find(|&(p, &c)| accept(p) && self.lifts_compatible(lift, c))
            .map(|(p, _)| p)
    }

    /// Human-readable label of a base point for error messages.
    fn describe_base(&self, b: usize) -> String {
        self.base().point(b).to_string()
    }
}

#[derive(Clone, Debug)]
struct BitSet {
    words: Vec<u64>,
    count: usize,
}

impl BitSet {
    fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if n % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (n % 64)) - 1;
            }
        }
        BitSet { words, count: n }
    }

    fn singleton(n: usize, i: usize) -> Self {
        let mut words = vec![0; n.div_ceil(64)];
        words[i / 64] |= 1 << (i % 64);
        BitSet { words, count: 1 }
    }

    #[inline]
    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn remove(&mut self, i: usize) {
        let w = &mut self.words[i / 64];
        let bit = 1 << (i % 64);
        if *w & bit != 0 {
            *w &= !bit;
            self.count -= 1;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }

    fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

/// Default cap on the number of search nodes of one section search.
pub const DEFAULT_NODE_LIMIT: usize = 2_000_000;

/// Cap on the total number of cached support words.
const SUPPORT_CACHE_WORDS: usize = 48_000_000;

/// Fibers up to this size get full support bitsets; larger ones are
/// handled with residual supports.
const BITSET_FIBER: usize = 1024;

const NO_RESIDUE: u32 = u32::MAX;

/// Revise a large domain from the other side when that side is this many
/// times smaller.
const SMALL_SIDE_RATIO: usize = 2;

/// Support bitset: positions in `fiber(target)` compatible with a lift.
type Support = Rc<[u64]>;

/// Section search over subsets of the base of a [`LiftProblem`], with
/// supports cached across calls.
pub struct SectionSolver<'p, P: LiftProblem + ?Sized> {
    problem: &'p P,
    supports: RefCell<HashMap<(usize, u32, usize), Support>>,
    cached: Cell<usize>,
    /// `residues[b][k][a]`: last known support of lift `a` over `b` in the
    /// fiber of the `k`-th neighbor of `b`.
    residues: RefCell<Vec<Vec<Vec<u32>>>>,
    node_limit: usize,
    nodes: Cell<u64>,
}

impl<'p, P: LiftProblem + ?Sized> SectionSolver<'p, P> {
    pub fn new(problem: &'p P) -> Self {
        Self::with_node_limit(problem, DEFAULT_NODE_LIMIT)
    }

    pub fn with_node_limit(problem: &'p P, node_limit: usize) -> Self {
        SectionSolver {
            problem,
            supports: RefCell::new(HashMap::new()),
            cached: Cell::new(0),
            residues: RefCell::new(vec![Vec::new(); problem.base().len()]),
            node_limit,
            nodes: Cell::new(0),
        }
    }

    pub fn problem(&self) -> &'p P {
        self.problem
    }

    /// Total search nodes expanded over the solver's lifetime.
    pub fn nodes_used(&self) -> u64 {
        self.nodes.get()
    }

    fn support(&self, b: usize, pos: usize, target: usize) -> Support {
        let key = (b, pos as u32, target);
        if let Some(s) = self.supports.borrow().get(&key) {
            return s.clone();
        }
        let lift = self.problem.fiber(b)[pos];
        let mut bits = vec![0u64; self.problem.fiber(target).len().div_ceil(64)];
        self.problem.support_bits(lift, target, &mut bits);
        let s: Support = bits.into();
        if self.cached.get() + s.len() < SUPPORT_CACHE_WORDS {
            self.cached.set(self.cached.get() + s.len() + 4);
            self.supports.borrow_mut().insert(key, s.clone());
        }
        s
    }

    /// Whether lift position `a` over `b` has a compatible lift in `dom`
    /// over the `k`-th base neighbor of `b`, using residual supports.
    fn has_support(&self, b: usize, k: usize, a: usize, dom: &BitSet) -> bool {
        let target = self.problem.base().neighbors(b)[k];
        {
            let res = self.residues.borrow();
            if let Some(r) = res[b].get(k).and_then(|v| v.get(a)) {
                if *r != NO_RESIDUE && dom.contains(*r as usize) {
                    return true;
                }
            }
        }
        let lift = self.problem.fiber(b)[a];
        let found = self
            .problem
            .find_support(lift, target, &|p| dom.contains(p));
        if let Some(p) = found {
            let mut res = self.residues.borrow_mut();
            let row = &mut res[b];
            if row.is_empty() {
                *row = vec![Vec::new(); self.problem.base().degree(b)];
            }
            if row[k].is_empty() {
                row[k] = vec![NO_RESIDUE; self.problem.fiber(b).len()];
            }
            row[k][a] = p as u32;
        }
        found.is_some()
    }

    fn check_fibers(&self, w: &[usize]) -> Result<()> {
        for &b in w {
            if b >= self.problem.base().len() {
                return Err(Error::IndexOutOfRange {
                    index: b,
                    len: self.problem.base().len(),
                });
            }
            if self.problem.fiber(b).is_empty() {
                return Err(Error::EmptyFiber(self.problem.describe_base(b)));
            }
        }
        Ok(())
    }

    /// A section over `w`: one lift per point of `w` (aligned with `w`) such
    /// that lifts over adjacent points are compatible.
    pub fn solve(&self, w: &[usize]) -> Result<Outcome<Vec<usize>>> {
        self.check_fibers(w)?;
        if w.is_empty() {
            return Ok(Outcome::Found(Vec::new()));
        }
        let mut search = Search::new(self, w);
        Ok(search.run())
    }

    /// A lift over `p` compatible with the lifts already chosen over the
    /// neighbors of `p` in `block`; `lifts` is aligned with `block`.
    pub fn try_extend(&self, block: &[usize], lifts: &[usize], p: usize) -> Option<usize> {
        let base = self.problem.base();
        let fiber_p = self.problem.fiber(p);
        if fiber_p.len() > BITSET_FIBER {
            let fixed: Vec<usize> = block
                .iter()
                .zip(lifts)
                .filter(|(&q, _)| base.is_adjacent(p, q))
                .map(|(_, &l)| l)
                .collect();
            let Some((&first, others)) = fixed.split_first() else {
                return fiber_p.first().copied();
            };
            let accept = |x: usize| {
                others
                    .iter()
                    .all(|&l| self.problem.lifts_compatible(l, fiber_p[x]))
            };
            return self
                .problem
                .find_support(first, p, &accept)
                .map(|x| fiber_p[x]);
        }
        let mut allowed = BitSet::full(fiber_p.len());
        for (i, &q) in block.iter().enumerate() {
            if !base.is_adjacent(p, q) {
                continue;
            }
            let pos = self.problem.fiber(q).binary_search(&lifts[i]).ok()?;
            let s = self.support(q, pos, p);
            for (w, bits) in allowed.words.iter_mut().zip(s.iter()) {
                *w &= bits;
            }
        }
        allowed.first().map(|x| fiber_p[x])
    }

    /// Check a claimed section using only the compatibility predicate.
    pub fn verify(&self, w: &[usize], lifts: &[usize]) -> bool {
        if w.len() != lifts.len() {
            return false;
        }
        let base = self.problem.base();
        let in_fiber = w
            .iter()
            .zip(lifts)
            .all(|(&b, l)| self.problem.fiber(b).binary_search(l).is_ok());
        in_fiber
            && (0..w.len()).all(|i| {
                (i + 1..w.len()).all(|j| {
                    !base.is_adjacent(w[i], w[j])
                        || self.problem.lifts_compatible(lifts[i], lifts[j])
                })
            })
    }
}

struct Search<'s, 'p, P: LiftProblem + ?Sized> {
    solver: &'s SectionSolver<'p, P>,
    w: Vec<usize>,
    sizes: Vec<usize>,
    nbrs: Vec<Vec<usize>>,
    /// `rev[x][k]` is the slot of `x` in the neighbor list of `nbrs[x][k]`.
    rev: Vec<Vec<usize>>,
    /// `table[x][k]` holds, per value of `x`, the supporting values of
    /// `nbrs[x][k]` as a bitset; filled lazily.
    table: Vec<Vec<Vec<Option<Support>>>>,
    /// `slot[x][k]` is the index of `w[nbrs[x][k]]` among the base
    /// neighbors of `w[x]`.
    slot: Vec<Vec<usize>>,
    /// Conflict weights of the constraints, indexed like `nbrs`.
    weight: Vec<Vec<u32>>,
    start_nodes: u64,
}

impl<'s, 'p, P: LiftProblem + ?Sized> Search<'s, 'p, P> {
    fn new(solver: &'s SectionSolver<'p, P>, w: &[usize]) -> Self {
        let base = solver.problem.base();
        let pos: HashMap<usize, usize> = w.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let nbrs: Vec<Vec<usize>> = w
            .iter()
            .map(|&b| {
                base.neighbors(b)
                    .iter()
                    .filter_map(|q| pos.get(q).copied())
                    .collect()
            })
            .collect();
        let rev = nbrs
            .iter()
            .enumerate()
            .map(|(x, ns)| {
                ns.iter()
                    .map(|&y| nbrs[y].iter().position(|&z| z == x).expect("symmetric adjacency"))
                    .collect()
            })
            .collect();
        let sizes: Vec<usize> = w.iter().map(|&b| solver.problem.fiber(b).len()).collect();
        let table = nbrs
            .iter()
            .enumerate()
            .map(|(x, ns)| {
                ns.iter()
                    .map(|&y| if sizes[y] > BITSET_FIBER { Vec::new() } else { vec![None; sizes[x]] })
                    .collect()
            })
            .collect();
        let weight = nbrs.iter().map(|ns| vec![1; ns.len()]).collect();
        let slot = nbrs
            .iter()
            .enumerate()
            .map(|(x, ns)| {
                let bn = base.neighbors(w[x]);
                ns.iter()
                    .map(|&y| bn.binary_search(&w[y]).expect("neighbor in base"))
                    .collect()
            })
            .collect();
        Search {
            solver,
            w: w.to_vec(),
            sizes,
            nbrs,
            rev,
            table,
            slot,
            weight,
            start_nodes: solver.nodes.get(),
        }
    }

    fn supported(&mut self, x: usize, k: usize, a: usize, dom_y: &BitSet) -> bool {
        let y = self.nbrs[x][k];
        if self.sizes[y] > BITSET_FIBER {
            return self.solver.has_support(self.w[x], self.slot[x][k], a, dom_y);
        }
        if self.table[x][k][a].is_none() {
            let y = self.nbrs[x][k];
            self.table[x][k][a] = Some(self.solver.support(self.w[x], a, self.w[y]));
        }
        let bits = self.table[x][k][a].as_deref().expect("filled above");
        bits.iter().zip(&dom_y.words).any(|(s, d)| s & d != 0)
    }

    /// Remove values of `x` without support in its `k`-th neighbor; true if
    /// anything changed.
    fn revise(&mut self, doms: &mut [BitSet], x: usize, k: usize) -> bool {
        let y = self.nbrs[x][k];
        if self.sizes[x] > BITSET_FIBER && doms[y].count * SMALL_SIDE_RATIO < doms[x].count {
            return self.revise_from_small_side(doms, x, y);
        }
        let mut removed = Vec::new();
        for a in doms[x].iter() {
            if !self.supported(x, k, a, &doms[y]) {
                removed.push(a);
            }
        }
        for &a in &removed {
            doms[x].remove(a);
        }
        !removed.is_empty()
    }

    /// Revise by enumerating the lifts of `x` compatible with the (few)
    /// remaining values of `y`.
    fn revise_from_small_side(&mut self, doms: &mut [BitSet], x: usize, y: usize) -> bool {
        let mut mask = vec![0u64; self.sizes[x].div_ceil(64)];
        for b in doms[y].iter() {
            let s = self.solver.support(self.w[y], b, self.w[x]);
            for (m, bits) in mask.iter_mut().zip(s.iter()) {
                *m |= bits;
            }
        }
        let before = doms[x].count;
        let mut count = 0;
        for (d, m) in doms[x].words.iter_mut().zip(&mask) {
            *d &= m;
            count += d.count_ones() as usize;
        }
        doms[x].count = count;
        count != before
    }

    /// Arc consistency from a queue of `(x, k)` arcs.
    fn propagate(&mut self, doms: &mut [BitSet], mut queue: VecDeque<(usize, usize)>) -> bool {
        let mut queued: Vec<Vec<bool>> = self.nbrs.iter().map(|ns| vec![false; ns.len()]).collect();
        for &(x, k) in &queue {
            queued[x][k] = true;
        }
        while let Some((x, k)) = queue.pop_front() {
            queued[x][k] = false;
            if self.revise(doms, x, k) {
                if doms[x].count == 0 {
                    self.weight[x][k] += 1;
                    let y = self.nbrs[x][k];
                    self.weight[y][self.rev[x][k]] += 1;
                    return false;
                }
                let y = self.nbrs[x][k];
                for (j, &z) in self.nbrs[x].iter().enumerate() {
                    let back = self.rev[x][j];
                    if z != y && !queued[z][back] {
                        queued[z][back] = true;
                        queue.push_back((z, back));
                    }
                }
            }
        }
        true
    }

    fn run(&mut self) -> Outcome<Vec<usize>> {
        let mut doms: Vec<BitSet> = self.sizes.iter().map(|&s| BitSet::full(s)).collect();
        let queue = (0..self.w.len())
            .flat_map(|x| (0..self.nbrs[x].len()).map(move |k| (x, k)))
            .collect();
        if !self.propagate(&mut doms, queue) {
            return Outcome::Exhausted;
        }
        match self.backtrack(doms) {
            Ok(Some(doms)) => Outcome::Found(
                doms.iter()
                    .enumerate()
                    .map(|(i, d)| self.solver.problem.fiber(self.w[i])[d.first().unwrap()])
                    .collect(),
            ),
            Ok(None) => Outcome::Exhausted,
            Err(()) => Outcome::BudgetHit,
        }
    }

    /// Branching variable: smallest ratio of domain size to the conflict
    /// weight of its constraints towards unfixed neighbors.
    fn pick(&self, doms: &[BitSet]) -> Option<usize> {
        let mut best: Option<(usize, u64, u64)> = None;
        for (x, d) in doms.iter().enumerate() {
            if d.count <= 1 {
                continue;
            }
            let wdeg: u64 = self.nbrs[x]
                .iter()
                .zip(&self.weight[x])
                .filter(|(&y, _)| doms[y].count > 1)
                .map(|(_, &w)| w as u64)
                .sum::<u64>()
                .max(1);
            let size = d.count as u64;
            let better = match best {
                None => true,
                Some((_, bs, bw)) => size * bw < bs * wdeg,
            };
            if better {
                best = Some((x, size, wdeg));
            }
        }
        best.map(|(x, _, _)| x)
    }

    fn backtrack(&mut self, doms: Vec<BitSet>) -> std::result::Result<Option<Vec<BitSet>>, ()> {
        let nodes = self.solver.nodes.get() + 1;
        self.solver.nodes.set(nodes);
        if nodes - self.start_nodes > self.solver.node_limit as u64 {
            return Err(());
        }
        let Some(x) = self.pick(&doms) else {
            return Ok(Some(doms));
        };
        let size = self.sizes[x];
        for a in doms[x].iter().collect::<Vec<_>>() {
            let mut next = doms.clone();
            next[x] = BitSet::singleton(size, a);
            let queue = (0..self.nbrs[x].len())
                .map(|k| (self.nbrs[x][k], self.rev[x][k]))
                .collect();
            if self.propagate(&mut next, queue) {
                if let Some(done) = self.backtrack(next)? {
                    return Ok(Some(done));
                }
            }
        }
        Ok(None)
    }
}

/// Sections of a plain map: lifts are domain points of `g`, compatibility is
/// adjacency-or-equality in the domain.
pub struct MapLifts<'a> {
    map: &'a crate::maps::DigitalMap,
    fibers: Vec<Vec<usize>>,
}

impl<'a> MapLifts<'a> {
    pub fn new(map: &'a crate::maps::DigitalMap) -> Self {
        let fibers = (0..map.codomain().len()).map(|z| map.fiber(z)).collect();
        MapLifts { map, fibers }
    }
}

impl LiftProblem for MapLifts<'_> {
    fn base(&self) -> &DigitalImage {
        self.map.codomain()
    }

    fn fiber(&self, b: usize) -> &[usize] {
        &self.fibers[b]
    }

    fn lifts_compatible(&self, a: usize, c: usize) -> bool {
        self.map.domain().adjacent_or_equal(a, c)
    }
}
