//! Minimal covers of a base image by "good" blocks.
//!
//! One engine serves every invariant: Schwarz genus (blocks admit sections),
//! topological complexity (genus of π or π_g, swept over the path length),
//! genus of a plain map, and category (blocks on which a map is
//! null-homotopic). The engine assigns base points in index order to at most
//! `l` blocks; a block is opened only by its smallest point, which enumerates
//! each partition exactly once. Feasibility verdicts are memoized, and any
//! superset of an infeasible block is pruned.

use std::collections::HashMap;
use std::sync::Arc;

use varisat::{ExtendFormula, Lit, Solver};

use crate::csp::{LiftProblem, MapLifts, SectionSolver, DEFAULT_NODE_LIMIT};
use crate::error::{Error, Result};
use crate::homotopy::{homotopic_to_constant, HomotopyBudget, HomotopyTrace, Outcome};
use crate::lattice::DigitalImage;
use crate::maps::DigitalMap;
use crate::path_space::{pi_g_map_with, pi_map_with, EndpointFibration, EndpointKind, PathAdjacency, PathOptions};

/// Whether blocks must be disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// A SAT solver proposes block assignments avoiding every known
    /// infeasible core; each failing block is shrunk to a new core.
    #[default]
    CoreGuided,
    /// Depth-first assignment of points in index order to blocks.
    Partition,
    /// Like `Partition`, but a point may join several blocks.
    Cover,
    /// Like `CoreGuided`, but over covers: a point joins every block the
    /// SAT model puts it in, and no symmetry breaking is applied.
    CoverGuided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenusOptions {
    pub max_l: usize,
    /// Node cap of a single section search.
    pub csp_nodes: usize,
    /// Node cap of the block-assignment search for one value of `l`.
    pub branch_nodes: u64,
    pub mode: SearchMode,
    /// Budget for null-homotopy searches (category only).
    pub homotopy: HomotopyBudget,
}

impl Default for GenusOptions {
    fn default() -> Self {
        GenusOptions {
            max_l: 4,
            csp_nodes: DEFAULT_NODE_LIMIT,
            branch_nodes: 20_000_000,
            mode: SearchMode::CoreGuided,
            homotopy: HomotopyBudget::default(),
        }
    }
}

/// Options of the sweep over path lengths used by TC.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    /// Largest path length; `None` means diameter + 2.
    pub max_m: Option<usize>,
    /// Smallest path length; `None` means the diameter of the domain.
    pub min_m: Option<usize>,
    pub paths: PathOptions,
    /// Keep sweeping after a value of 1 (which is already exact).
    pub full_sweep: bool,
    pub genus: GenusOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            max_m: None,
            min_m: None,
            paths: PathOptions::default(),
            full_sweep: false,
            genus: GenusOptions::default(),
        }
    }
}

/// A replayable certificate for a cover.
#[derive(Clone, Debug)]
pub enum Witness {
    /// Sections of an endpoint map; `paths[i][k]` lifts `blocks[i][k]`.
    PathSections {
        host: Arc<DigitalImage>,
        second: Arc<DigitalImage>,
        /// `None` for π; the table of `g` for π_g.
        map: Option<DigitalMap>,
        m: usize,
        relation: PathAdjacency,
        blocks: Vec<Vec<usize>>,
        paths: Vec<Vec<Vec<usize>>>,
    },
    /// Right inverses of a map over each block of its codomain.
    MapSections {
        map: DigitalMap,
        blocks: Vec<Vec<usize>>,
        lifts: Vec<Vec<usize>>,
    },
    /// Null-homotopies of the restriction of a map to each block.
    NullHomotopies {
        map: DigitalMap,
        blocks: Vec<Vec<usize>>,
        traces: Vec<HomotopyTrace>,
    },
}

impl Witness {
    pub fn blocks(&self) -> &[Vec<usize>] {
        match self {
            Witness::PathSections { blocks, .. }
            | Witness::MapSections { blocks, .. }
            | Witness::NullHomotopies { blocks, .. } => blocks,
        }
    }
}

/// Outcome of a minimal-cover computation.
#[derive(Clone, Debug)]
pub struct GenusResult {
    /// The least `l` found, or `max_l + 1` when no cover with at most
    /// `max_l` blocks was found.
    pub value: usize,
    /// Path length of the reported value, for path-space invariants.
    pub m_used: Option<usize>,
    /// The last two swept lengths gave the same value (or the value is 1).
    pub stabilized: bool,
    /// Every `l < value` was refuted by a complete search.
    pub exhausted: bool,
    /// `(m, value)` for every swept path length.
    pub history: Vec<(usize, usize)>,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
    pub stats: SearchStats,
}

impl GenusResult {
    /// A value is certified when it is witnessed and its lower bound proven.
    pub fn is_certified(&self) -> bool {
        self.witness.is_some() && self.exhausted
    }

    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub branch_nodes: u64,
    pub oracle_calls: u64,
    pub csp_nodes: u64,
}

/// Decides whether a set of base points forms a good block.
pub(crate) trait BlockOracle {
    type Cert: Clone;

    fn size(&self) -> usize;

    /// `block` is sorted ascending.
    fn solve(&mut self, block: &[usize]) -> Result<Outcome<Self::Cert>>;

    /// A certificate for `block + [p]` derived cheaply from one for `block`.
    fn extend(&mut self, _block: &[usize], _cert: &Self::Cert, _p: usize) -> Option<Self::Cert> {
        None
    }

    /// Base adjacency, used to split blocks into components.
    fn adjacent(&self, a: usize, b: usize) -> bool;

    fn csp_nodes(&self) -> u64 {
        0
    }
}

type Key = Vec<u64>;

fn key_of(block: &[usize], n: usize) -> Key {
    let mut k = vec![0u64; n.div_ceil(64)];
    for &i in block {
        k[i / 64] |= 1 << (i % 64);
    }
    k
}

fn is_subset(a: &Key, b: &Key) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

#[derive(Clone)]
enum Verdict<C> {
    Feasible(C),
    Infeasible,
    Unknown,
}

struct Engine<'o, O: BlockOracle> {
    oracle: &'o mut O,
    n: usize,
    memo: HashMap<Key, Verdict<O::Cert>>,
    /// Minimal infeasible blocks, indexed by their largest point.
    cores: Vec<Vec<Key>>,
    incomplete: bool,
    aborted: bool,
    stats: SearchStats,
    branch_limit: u64,
    branch_start: u64,
}

type Blocks<C> = Vec<(Vec<usize>, C)>;

impl<'o, O: BlockOracle> Engine<'o, O> {
    fn new(oracle: &'o mut O, branch_limit: u64) -> Self {
        let n = oracle.size();
        Engine {
            oracle,
            n,
            memo: HashMap::new(),
            cores: vec![Vec::new(); n],
            incomplete: false,
            aborted: false,
            stats: SearchStats::default(),
            branch_limit,
            branch_start: 0,
        }
    }

    fn contains_core(&self, key: &Key, newest: Option<usize>) -> bool {
        match newest {
            Some(p) => self.cores[p].iter().any(|c| is_subset(c, key)),
            None => self.cores.iter().flatten().any(|c| is_subset(c, key)),
        }
    }

    fn solve_memo(&mut self, block: &[usize]) -> Result<Verdict<O::Cert>> {
        let key = key_of(block, self.n);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if self.contains_core(&key, None) {
            self.memo.insert(key, Verdict::Infeasible);
            return Ok(Verdict::Infeasible);
        }
        self.stats.oracle_calls += 1;
        let v = match self.oracle.solve(block)? {
            Outcome::Found(c) => Verdict::Feasible(c),
            Outcome::Exhausted => Verdict::Infeasible,
            Outcome::BudgetHit => Verdict::Unknown,
        };
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    fn components(&self, block: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; block.len()];
        let mut out = Vec::new();
        for s in 0..block.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let a = block[comp[i]];
                for t in 0..block.len() {
                    if !seen[t] && self.oracle.adjacent(a, block[t]) {
                        seen[t] = true;
                        comp.push(t);
                    }
                }
                i += 1;
            }
            let mut pts: Vec<usize> = comp.into_iter().map(|t| block[t]).collect();
            pts.sort_unstable();
            out.push(pts);
        }
        out
    }

    /// Deletion-based shrinking of an infeasible set to a minimal one.
    fn minimize(&mut self, set: Vec<usize>) -> Result<Vec<usize>> {
        let mut core = set;
        let mut chunk = (core.len() / 2).max(1);
        loop {
            let mut i = 0;
            while i < core.len() && core.len() > 1 {
                let hi = (i + chunk).min(core.len());
                if hi - i == core.len() {
                    i = hi;
                    continue;
                }
                let cand: Vec<usize> = core[..i].iter().chain(&core[hi..]).copied().collect();
                if matches!(self.solve_memo(&cand)?, Verdict::Infeasible) {
                    core = cand;
                } else {
                    i = hi;
                }
            }
            if chunk == 1 {
                return Ok(core);
            }
            chunk /= 2;
        }
    }

    /// Shrink an infeasible block to minimal infeasible subsets (one per
    /// infeasible component) and record them.
    fn record_core(&mut self, block: &[usize]) -> Result<Vec<Vec<usize>>> {
        let comps = self.components(block);
        let mut found = Vec::new();
        if comps.len() > 1 {
            for comp in comps {
                if matches!(self.solve_memo(&comp)?, Verdict::Infeasible) {
                    found.push(comp);
                }
            }
        }
        if found.is_empty() {
            found.push(block.to_vec());
        }
        let mut cores = Vec::new();
        for set in found {
            let core = self.minimize(set)?;
            let max = *core.last().unwrap();
            let key = key_of(&core, self.n);
            if !self.cores[max].contains(&key) {
                self.cores[max].push(key);
            }
            cores.push(core);
        }
        Ok(cores)
    }

    fn check(&mut self, block: &[usize], parent: Option<&O::Cert>) -> Result<Option<O::Cert>> {
        let key = key_of(block, self.n);
        match self.memo.get(&key) {
            Some(Verdict::Feasible(c)) => return Ok(Some(c.clone())),
            Some(Verdict::Infeasible) => return Ok(None),
            Some(Verdict::Unknown) => {
                self.incomplete = true;
                return Ok(None);
            }
            None => {}
        }
        let newest = parent.map(|_| *block.last().unwrap());
        if self.contains_core(&key, newest) {
            self.memo.insert(key, Verdict::Infeasible);
            return Ok(None);
        }
        if let Some(cert) = parent {
            let (rest, p) = block.split_at(block.len() - 1);
            if let Some(c) = self.oracle.extend(rest, cert, p[0]) {
                self.memo.insert(key, Verdict::Feasible(c.clone()));
                return Ok(Some(c));
            }
        }
        match self.solve_memo(block)? {
            Verdict::Feasible(c) => Ok(Some(c)),
            Verdict::Infeasible => {
                self.record_core(block)?;
                Ok(None)
            }
            Verdict::Unknown => {
                self.incomplete = true;
                Ok(None)
            }
        }
    }

    fn tick(&mut self) -> bool {
        self.stats.branch_nodes += 1;
        if self.stats.branch_nodes - self.branch_start > self.branch_limit {
            self.aborted = true;
            self.incomplete = true;
        }
        !self.aborted
    }

    fn core_guided(&mut self, l: usize, overlap: bool) -> Result<Option<Blocks<O::Cert>>> {
        let n = self.n;
        let mut sat = Solver::new();
        let x: Vec<Vec<Lit>> = (0..n)
            .map(|_| (0..l).map(|_| sat.new_var().positive()).collect())
            .collect();
        for (p, row) in x.iter().enumerate() {
            sat.add_clause(row);
            if !overlap {
                for lit in row.iter().skip(p + 1) {
                    sat.add_clause(&[!*lit]);
                }
            }
        }
        let forbid = |sat: &mut Solver, set: &[usize]| {
            for j in 0..l {
                let clause: Vec<Lit> = set.iter().map(|&q| !x[q][j]).collect();
                sat.add_clause(&clause);
            }
        };
        for key in self.cores.iter().flatten() {
            let set: Vec<usize> = (0..n).filter(|&i| key[i / 64] >> (i % 64) & 1 == 1).collect();
            forbid(&mut sat, &set);
        }
        loop {
            if !self.tick() {
                return Ok(None);
            }
            let satisfiable = sat
                .solve()
                .map_err(|e| Error::Budget(format!("SAT solver failure: {e}")))?;
            if !satisfiable {
                return Ok(None);
            }
            let model = sat.model().expect("model of a satisfiable formula");
            let mut truth = vec![false; n * l];
            for lit in model {
                if lit.is_positive() {
                    truth[lit.var().index()] = true;
                }
            }
            let mut members = vec![Vec::new(); l];
            for (p, row) in x.iter().enumerate() {
                let mut chosen = row.iter().enumerate().filter(|(_, lit)| truth[lit.var().index()]);
                if overlap {
                    chosen.for_each(|(j, _)| members[j].push(p));
                } else {
                    let (j, _) = chosen.next().expect("every point has a block");
                    members[j].push(p);
                }
            }
            let mut blocks = Vec::new();
            let mut all_good = true;
            for block in members.into_iter().filter(|b| !b.is_empty()) {
                match self.solve_memo(&block)? {
                    Verdict::Feasible(c) => blocks.push((block, c)),
                    Verdict::Infeasible => {
                        all_good = false;
                        for core in self.record_core(&block)? {
                            forbid(&mut sat, &core);
                        }
                    }
                    Verdict::Unknown => {
                        all_good = false;
                        self.incomplete = true;
                        forbid(&mut sat, &block);
                    }
                }
            }
            if all_good {
                return Ok(Some(blocks));
            }
        }
    }

    fn partition(&mut self, k: usize, l: usize, blocks: &mut Blocks<O::Cert>) -> Result<bool> {
        if !self.tick() {
            return Ok(false);
        }
        if k == self.n {
            return Ok(true);
        }
        for j in 0..blocks.len() {
            let mut grown = blocks[j].0.clone();
            grown.push(k);
            if let Some(c) = self.check(&grown, Some(&blocks[j].1))? {
                let old = std::mem::replace(&mut blocks[j], (grown, c));
                if self.partition(k + 1, l, blocks)? {
                    return Ok(true);
                }
                blocks[j] = old;
            }
            if self.aborted {
                return Ok(false);
            }
        }
        if blocks.len() < l {
            if let Some(c) = self.check(&[k], None)? {
                blocks.push((vec![k], c));
                if self.partition(k + 1, l, blocks)? {
                    return Ok(true);
                }
                blocks.pop();
            }
        }
        Ok(false)
    }

    fn cover(&mut self, k: usize, l: usize, blocks: &mut Blocks<O::Cert>) -> Result<bool> {
        if !self.tick() {
            return Ok(false);
        }
        if k == self.n {
            return Ok(true);
        }
        let existing = blocks.len();
        let slots = if existing < l { existing + 1 } else { existing };
        for mask in 1u64..(1 << slots) {
            let saved = blocks.clone();
            let mut ok = true;
            for j in 0..slots {
                if mask >> j & 1 == 0 {
                    continue;
                }
                if j == existing {
                    match self.check(&[k], None)? {
                        Some(c) => blocks.push((vec![k], c)),
                        None => ok = false,
                    }
                } else {
                    let mut grown = blocks[j].0.clone();
                    grown.push(k);
                    match self.check(&grown, Some(&blocks[j].1))? {
                        Some(c) => blocks[j] = (grown, c),
                        None => ok = false,
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok && self.cover(k + 1, l, blocks)? {
                return Ok(true);
            }
            *blocks = saved;
            if self.aborted {
                return Ok(false);
            }
        }
        Ok(false)
    }

    fn search(&mut self, l: usize, mode: SearchMode) -> Result<Outcome<Blocks<O::Cert>>> {
        self.aborted = false;
        self.incomplete = false;
        self.branch_start = self.stats.branch_nodes;
        let mut blocks = Vec::new();
        let found = if l == 1 {
            let all: Vec<usize> = (0..self.n).collect();
            match self.solve_memo(&all)? {
                Verdict::Feasible(c) => {
                    blocks.push((all, c));
                    true
                }
                Verdict::Infeasible => false,
                Verdict::Unknown => {
                    self.incomplete = true;
                    false
                }
            }
        } else {
            match mode {
                SearchMode::CoreGuided | SearchMode::CoverGuided => {
                    match self.core_guided(l, mode == SearchMode::CoverGuided)? {
                        Some(found) => {
                            blocks = found;
                            true
                        }
                        None => false,
                    }
                }
                SearchMode::Partition => self.partition(0, l, &mut blocks)?,
                SearchMode::Cover => self.cover(0, l, &mut blocks)?,
            }
        };
        Ok(if found {
            Outcome::Found(blocks)
        } else if self.incomplete {
            Outcome::BudgetHit
        } else {
            Outcome::Exhausted
        })
    }
}

/// Raw minimal-cover result before it is dressed as a [`GenusResult`].
pub(crate) struct MinCover<C> {
    pub value: usize,
    pub exhausted: bool,
    pub blocks: Option<Blocks<C>>,
    pub stats: SearchStats,
}

pub(crate) fn min_cover<O: BlockOracle>(oracle: &mut O, opts: &GenusOptions) -> Result<MinCover<O::Cert>> {
    let mut engine = Engine::new(oracle, opts.branch_nodes);
    let mut lower_certified = true;
    for l in 1..=opts.max_l.max(1) {
        match engine.search(l, opts.mode)? {
            Outcome::Found(blocks) => {
                let mut stats = engine.stats;
                stats.csp_nodes = engine.oracle.csp_nodes();
                return Ok(MinCover {
                    value: l,
                    exhausted: lower_certified,
                    blocks: Some(blocks),
                    stats,
                });
            }
            Outcome::Exhausted => {}
            Outcome::BudgetHit => lower_certified = false,
        }
    }
    let mut stats = engine.stats;
    stats.csp_nodes = engine.oracle.csp_nodes();
    Ok(MinCover {
        value: opts.max_l.max(1) + 1,
        exhausted: lower_certified,
        blocks: None,
        stats,
    })
}

struct SectionOracle<'s, 'p, P: LiftProblem + ?Sized> {
    solver: &'s SectionSolver<'p, P>,
}

impl<P: LiftProblem + ?Sized> BlockOracle for SectionOracle<'_, '_, P> {
    type Cert = Vec<usize>;

    fn size(&self) -> usize {
        self.solver.problem().base().len()
    }

    fn solve(&mut self, block: &[usize]) -> Result<Outcome<Vec<usize>>> {
        self.solver.solve(block)
    }

    fn extend(&mut self, block: &[usize], cert: &Vec<usize>, p: usize) -> Option<Vec<usize>> {
        let lift = self.solver.try_extend(block, cert, p)?;
        let mut next = cert.clone();
        next.push(lift);
        Some(next)
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.solver.problem().base().is_adjacent(a, b)
    }

    fn csp_nodes(&self) -> u64 {
        self.solver.nodes_used()
    }
}

fn require_nonempty_fibers<P: LiftProblem + ?Sized>(problem: &P) -> Result<()> {
    for b in 0..problem.base().len() {
        if problem.fiber(b).is_empty() {
            return Err(Error::EmptyFiber(problem.describe_base(b)));
        }
    }
    Ok(())
}

/// A section of `fib` over the base subset `w`, if one exists.
pub fn section_exists(fib: &EndpointFibration, w: &[usize]) -> Result<Outcome<Vec<usize>>> {
    SectionSolver::new(fib).solve(w)
}

fn path_witness(fib: &EndpointFibration, blocks: Blocks<Vec<usize>>) -> Witness {
    let (bs, paths) = blocks
        .into_iter()
        .map(|(b, lifts)| {
            let ps = lifts.iter().map(|&id| fib.space().steps(id)).collect();
            (b, ps)
        })
        .unzip();
    Witness::PathSections {
        host: fib.space().host().clone(),
        second: fib.second().clone(),
        map: fib.map().cloned(),
        m: fib.m(),
        relation: fib.space().relation(),
        blocks: bs,
        paths,
    }
}

/// Least number of blocks covering the base of `fib`, each with a section.
pub fn schwarz_genus(fib: &EndpointFibration, opts: &GenusOptions) -> Result<GenusResult> {
    schwarz_genus_for(fib, None, opts)
}

/// `seed` is a known cover with sections; only smaller covers are searched.
fn schwarz_genus_for(
    fib: &EndpointFibration,
    seed: Option<Blocks<Vec<usize>>>,
    opts: &GenusOptions,
) -> Result<GenusResult> {
    require_nonempty_fibers(fib)?;
    let solver = SectionSolver::with_node_limit(fib, opts.csp_nodes);
    let seed = seed.filter(|blocks| {
        blocks.len() <= opts.max_l && blocks.iter().all(|(b, lifts)| solver.verify(b, lifts))
    });
    let below = seed.as_ref().map_or(opts.max_l, |s| s.len() - 1);
    let mut cover = if below == 0 {
        MinCover {
            value: 1,
            exhausted: true,
            blocks: None,
            stats: SearchStats::default(),
        }
    } else {
        let mut oracle = SectionOracle { solver: &solver };
        min_cover(&mut oracle, &GenusOptions { max_l: below, ..*opts })?
    };
    if cover.blocks.is_none() {
        if let Some(blocks) = seed {
            cover.value = blocks.len();
            cover.blocks = Some(blocks);
        }
    }
    let witness = cover.blocks.map(|b| path_witness(fib, b));
    Ok(GenusResult {
        value: cover.value,
        m_used: Some(fib.m()),
        stabilized: false,
        exhausted: cover.exhausted,
        history: vec![(fib.m(), cover.value)],
        witness,
        notes: Vec::new(),
        stats: cover.stats,
    })
}

/// The cover of a shorter path length, with every section padded to the
/// path length of `fib`.
fn padded_seed(fib: &EndpointFibration, prev: Option<&GenusResult>) -> Option<Blocks<Vec<usize>>> {
    let Some(Witness::PathSections { m, blocks, paths, .. }) = prev.and_then(|r| r.witness.as_ref()) else {
        return None;
    };
    let extra = fib.m().checked_sub(*m)?;
    blocks
        .iter()
        .zip(paths)
        .map(|(block, ps)| {
            let lifts = ps
                .iter()
                .map(|steps| {
                    let mut padded = steps.clone();
                    padded.extend(std::iter::repeat(*steps.last()?).take(extra));
                    fib.space().rank(&padded)
                })
                .collect::<Option<Vec<usize>>>()?;
            Some((block.clone(), lifts))
        })
        .collect()
}

/// Least number of blocks covering the codomain of `g`, each admitting a
/// continuous right inverse of `g`.
pub fn genus_of_map(g: &DigitalMap, opts: &GenusOptions) -> Result<GenusResult> {
    if !g.is_continuous() {
        return Err(Error::NotContinuous("genus needs a continuous map".into()));
    }
    if !g.is_surjective() {
        return Err(Error::NotSurjective("genus needs a surjective map".into()));
    }
    let lifts = MapLifts::new(g);
    let solver = SectionSolver::with_node_limit(&lifts, opts.csp_nodes);
    let mut oracle = SectionOracle { solver: &solver };
    let cover = min_cover(&mut oracle, opts)?;
    let witness = cover.blocks.map(|blocks| {
        let (bs, ls) = blocks.into_iter().unzip();
        Witness::MapSections {
            map: g.clone(),
            blocks: bs,
            lifts: ls,
        }
    });
    Ok(GenusResult {
        value: cover.value,
        m_used: None,
        stabilized: true,
        exhausted: cover.exhausted,
        history: Vec::new(),
        witness,
        notes: Vec::new(),
        stats: cover.stats,
    })
}

fn sweep(
    domain: &DigitalImage,
    opts: &SweepOptions,
    mut at: impl FnMut(usize, Option<&GenusResult>) -> Result<GenusResult>,
) -> Result<GenusResult> {
    domain.require_connected("domain")?;
    let diameter = domain.diameter().expect("connected images have a diameter");
    let lo = opts.min_m.unwrap_or(diameter).max(diameter);
    let hi = opts.max_m.unwrap_or(diameter + 2);
    if hi < lo {
        return Err(Error::Precondition(format!(
            "max m = {hi} is below the smallest usable length {lo}"
        )));
    }
    let mut history = Vec::new();
    let mut last: Option<GenusResult> = None;
    let mut stats = SearchStats::default();
    for m in lo..=hi {
        let r = at(m, last.as_ref())?;
        stats.branch_nodes += r.stats.branch_nodes;
        stats.oracle_calls += r.stats.oracle_calls;
        stats.csp_nodes += r.stats.csp_nodes;
        if let Some(prev) = &last {
            if prev.is_certified() && r.is_certified() {
                assert!(
                    r.value <= prev.value,
                    "genus increased from {} to {} between m = {} and m = {m}",
                    prev.value,
                    r.value,
                    m - 1
                );
            }
        }
        history.push((m, r.value));
        let done = r.value == 1 && r.found() && !opts.full_sweep;
        last = Some(r);
        if done {
            break;
        }
    }
    let mut result = last.expect("at least one length is swept");
    let n = history.len();
    result.stabilized = (result.value == 1 && result.found())
        || (n >= 2 && history[n - 1].1 == history[n - 2].1 && result.exhausted);
    if result.value == 1 && result.found() && n < (hi - lo + 1) {
        result
            .notes
            .push(format!("sweep stopped at m = {} since a value of 1 is exact", history[n - 1].0));
    }
    result.history = history;
    result.stats = stats;
    Ok(result)
}

/// Topological complexity of a connected image: the genus of π swept over
/// path lengths.
pub fn tc_space(img: &Arc<DigitalImage>, opts: &SweepOptions) -> Result<GenusResult> {
    sweep(img, opts, |m, prev| {
        let fib = pi_map_with(img.clone(), m, opts.paths)?;
        let seed = padded_seed(&fib, prev);
        schwarz_genus_for(&fib, seed, &opts.genus)
    })
}

/// Topological complexity of a surjective continuous map: the genus of π_g
/// swept over path lengths.
pub fn tc_map(g: &DigitalMap, opts: &SweepOptions) -> Result<GenusResult> {
    g.codomain().require_connected("codomain")?;
    let mut r = sweep(g.domain(), opts, |m, prev| {
        let fib = pi_g_map_with(g, m, opts.paths)?;
        debug_assert_eq!(fib.kind(), EndpointKind::PiG);
        let seed = padded_seed(&fib, prev);
        schwarz_genus_for(&fib, seed, &opts.genus)
    })?;
    r.notes.push("direct semantics: genus of the endpoint map of g itself".into());
    Ok(r)
}

struct NullOracle<'a> {
    map: &'a DigitalMap,
    budget: HomotopyBudget,
    known: Vec<(Key, Vec<usize>, HomotopyTrace)>,
}

impl BlockOracle for NullOracle<'_> {
    type Cert = HomotopyTrace;

    fn size(&self) -> usize {
        self.map.domain().len()
    }

    fn solve(&mut self, block: &[usize]) -> Result<Outcome<HomotopyTrace>> {
        let key = key_of(block, self.size());
        for (k, set, trace) in &self.known {
            if is_subset(&key, k) {
                let pos: Vec<usize> = block
                    .iter()
                    .map(|b| set.binary_search(b).expect("subset"))
                    .collect();
                return Ok(Outcome::Found(trace.restrict(&pos)?));
            }
        }
        let restricted = self.map.restrict(block)?;
        let out = homotopic_to_constant(&restricted, self.budget)?;
        if let Outcome::Found(trace) = &out {
            self.known.push((key, block.to_vec(), trace.clone()));
        }
        Ok(out)
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.map.domain().is_adjacent(a, b)
    }
}

/// Category of a map: least cover of its connected domain by blocks on which
/// it restricts to a null-homotopic map.
pub fn cat_map(g: &DigitalMap, opts: &GenusOptions) -> Result<GenusResult> {
    if !g.is_continuous() {
        return Err(Error::NotContinuous("category needs a continuous map".into()));
    }
    g.domain().require_connected("domain")?;
    let mut oracle = NullOracle {
        map: g,
        budget: opts.homotopy,
        known: Vec::new(),
    };
    let cover = min_cover(&mut oracle, opts)?;
    let witness = cover.blocks.map(|blocks| {
        let (bs, ts) = blocks.into_iter().unzip();
        Witness::NullHomotopies {
            map: g.clone(),
            blocks: bs,
            traces: ts,
        }
    });
    Ok(GenusResult {
        value: cover.value,
        m_used: None,
        stabilized: true,
        exhausted: cover.exhausted,
        history: Vec::new(),
        witness,
        notes: Vec::new(),
        stats: cover.stats,
    })
}

/// Category of a connected image: least cover by blocks contractible in it.
pub fn cat_space(img: &Arc<DigitalImage>, opts: &GenusOptions) -> Result<GenusResult> {
    cat_map(&DigitalMap::identity(img.clone()), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{digital_interval, digital_sphere, AdjacencySpec, Point};

    fn interval(c: i64, d: i64) -> Arc<DigitalImage> {
        Arc::new(digital_interval(c, d).unwrap())
    }

    fn circle(l: u32) -> Arc<DigitalImage> {
        Arc::new(digital_sphere(1, AdjacencySpec::Cl(l)).unwrap())
    }

    #[test]
    fn constant_map_has_tc_one() {
        let y = interval(0, 3);
        let pt = Arc::new(DigitalImage::singleton(Point::new(vec![0])));
        let c = DigitalMap::constant(y, pt, 0).unwrap();
        let r = tc_map(&c, &SweepOptions::default()).unwrap();
        assert_eq!(r.value, 1);
        assert!(r.stabilized && r.exhausted);
    }

    #[test]
    fn singleton_has_tc_one() {
        let pt = Arc::new(DigitalImage::singleton(Point::new(vec![0, 0])));
        let fib = pi_map_with(pt, 1, PathOptions::default()).unwrap();
        assert_eq!(schwarz_genus(&fib, &GenusOptions::default()).unwrap().value, 1);
    }

    #[test]
    fn interval_and_circles() {
        let r = tc_space(&interval(0, 3), &SweepOptions::default()).unwrap();
        assert_eq!((r.value, r.m_used), (1, Some(3)));
        let r = tc_space(&circle(2), &SweepOptions::default()).unwrap();
        assert_eq!(r.value, 1);
        let r = tc_space(&circle(1), &SweepOptions::default()).unwrap();
        assert_eq!(r.value, 2);
        assert!(r.stabilized && r.exhausted);
        assert_eq!(r.history.len(), 3);
    }

    #[test]
    fn genus_of_small_maps() {
        let r = DigitalMap::new(interval(0, 2), interval(0, 1), vec![0, 1, 1]).unwrap();
        assert_eq!(genus_of_map(&r, &GenusOptions::default()).unwrap().value, 1);
        let g = DigitalMap::new(interval(0, 3), interval(0, 1), vec![0, 0, 1, 1]).unwrap();
        let res = genus_of_map(&g, &GenusOptions::default()).unwrap();
        assert_eq!(res.value, 1);
        match res.witness.unwrap() {
            Witness::MapSections { lifts, .. } => assert_eq!(lifts, vec![vec![1, 2]]),
            other => panic!("unexpected witness {other:?}"),
        }
        let not_onto = DigitalMap::new(interval(0, 1), interval(0, 2), vec![0, 1]).unwrap();
        assert!(genus_of_map(&not_onto, &GenusOptions::default()).is_err());
    }

    #[test]
    fn category_of_circles() {
        let r = cat_space(&circle(1), &GenusOptions::default()).unwrap();
        assert_eq!(r.value, 2);
        assert!(r.exhausted);
        assert_eq!(cat_space(&circle(2), &GenusOptions::default()).unwrap().value, 1);
        assert_eq!(cat_space(&interval(0, 3), &GenusOptions::default()).unwrap().value, 1);
    }

    #[test]
    fn cover_modes_agree_with_partition_modes() {
        let fib = pi_map_with(circle(1), 4, PathOptions::default()).unwrap();
        for mode in [SearchMode::CoreGuided, SearchMode::CoverGuided] {
            let r = schwarz_genus(&fib, &GenusOptions { mode, ..Default::default() }).unwrap();
            assert_eq!((r.value, r.exhausted), (2, true), "{mode:?}");
        }
        // Wrap [0,15] twice around the 4-adjacent circle: no global section.
        let c = circle(1);
        let wrap = DigitalMap::new(interval(0, 15), c.clone(), (0..16).map(|i| [2, 4, 7, 6, 5, 3, 0, 1][i % 8]).collect()).unwrap();
        assert!(wrap.is_continuous());
        for mode in [SearchMode::Partition, SearchMode::Cover, SearchMode::CoreGuided, SearchMode::CoverGuided] {
            let r = genus_of_map(&wrap, &GenusOptions { mode, ..Default::default() }).unwrap();
            assert_eq!((r.value, r.exhausted), (2, true), "{mode:?}");
        }
    }

    #[test]
    fn sweep_bounds_are_checked() {
        let opts = SweepOptions {
            max_m: Some(1),
            ..Default::default()
        };
        assert!(matches!(tc_space(&circle(1), &opts), Err(Error::Precondition(_))));
        let gap = Arc::new(
            DigitalImage::with_cl(vec![Point::new(vec![0]), Point::new(vec![2])], 1).unwrap(),
        );
        assert!(matches!(
            tc_space(&gap, &SweepOptions::default()),
            Err(Error::Disconnected(_))
        ));
    }
}
