//! Digital homotopy as reachability in the graph of continuous maps.
//!
//! Two continuous maps `f, g : A → Y` are joined by an edge when
//! `f(u) ↔= g(u)` for every `u`. A path of length `m` in this graph is exactly
//! an `m`-step digital homotopy: every time slice is continuous and every
//! point track is a digital path. Searches are breadth-first, visit neighbors
//! in lexicographic table order, and report whether a negative answer came
//! from exhausting the connected component or from hitting a budget.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::DigitalImage;
use crate::maps::DigitalMap;

/// Result of a bounded exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<T> {
    Found(T),
    /// The whole search space was explored without success: a disproof.
    Exhausted,
    /// A step or node budget stopped the search: no verdict.
    BudgetHit,
}

impl<T> Outcome<T> {
    pub fn is_found(&self) -> bool {
        matches!(self, Outcome::Found(_))
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Outcome::Exhausted)
    }

    pub fn found(self) -> Option<T> {
        match self {
            Outcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_ref(&self) -> Outcome<&T> {
        match self {
            Outcome::Found(t) => Outcome::Found(t),
            Outcome::Exhausted => Outcome::Exhausted,
            Outcome::BudgetHit => Outcome::BudgetHit,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        match self {
            Outcome::Found(t) => Outcome::Found(f(t)),
            Outcome::Exhausted => Outcome::Exhausted,
            Outcome::BudgetHit => Outcome::BudgetHit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HomotopyBudget {
    /// Maximum homotopy length; `None` means `|domain| · |codomain|`.
    pub max_steps: Option<usize>,
    /// Maximum number of maps visited (or enumerated) by one search.
    pub max_nodes: usize,
}

impl Default for HomotopyBudget {
    fn default() -> Self {
        HomotopyBudget {
            max_steps: None,
            max_nodes: 1_000_000,
        }
    }
}

impl HomotopyBudget {
    pub fn with_steps(max_steps: usize) -> Self {
        HomotopyBudget {
            max_steps: Some(max_steps),
            ..Default::default()
        }
    }

    pub fn steps_for(&self, domain: &DigitalImage, codomain: &DigitalImage) -> usize {
        self.max_steps
            .unwrap_or(domain.len() * codomain.len())
    }
}

/// A replayable sequence of continuous maps `f_0, ..., f_m` with consecutive
/// maps one step apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyTrace {
    domain: Arc<DigitalImage>,
    codomain: Arc<DigitalImage>,
    stages: Vec<Vec<usize>>,
}

impl HomotopyTrace {
    pub fn new(
        domain: Arc<DigitalImage>,
        codomain: Arc<DigitalImage>,
        stages: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Malformed("a homotopy trace needs at least one map".into()));
        }
        for s in &stages {
            DigitalMap::new(domain.clone(), codomain.clone(), s.clone())?;
        }
        Ok(HomotopyTrace {
            domain,
            codomain,
            stages,
        })
    }

    fn constant_trace(f: &DigitalMap) -> Self {
        HomotopyTrace {
            domain: f.domain().clone(),
            codomain: f.codomain().clone(),
            stages: vec![f.table().to_vec()],
        }
    }

    pub fn domain(&self) -> &Arc<DigitalImage> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<DigitalImage> {
        &self.codomain
    }

    /// Number of steps `m`.
    pub fn steps(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn stages(&self) -> &[Vec<usize>] {
        &self.stages
    }

    pub fn map_at(&self, t: usize) -> DigitalMap {
        DigitalMap::new(
            self.domain.clone(),
            self.codomain.clone(),
            self.stages[t].clone(),
        )
        .expect("trace stages are valid tables")
    }

    pub fn first(&self) -> DigitalMap {
        self.map_at(0)
    }

    pub fn last(&self) -> DigitalMap {
        self.map_at(self.steps())
    }

    pub fn reversed(&self) -> Self {
        let mut stages = self.stages.clone();
        stages.reverse();
        HomotopyTrace {
            stages,
            ..self.clone()
        }
    }

    /// Restrict every stage to the induced subimage on `subset`.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let sub = Arc::new(self.domain.induced_subimage(subset)?);
        let mut keep = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let stages = self
            .stages
            .iter()
            .map(|s| keep.iter().map(|&i| s[i]).collect())
            .collect();
        Ok(HomotopyTrace {
            domain: sub,
            codomain: self.codomain.clone(),
            stages,
        })
    }

    /// Check every slice is continuous and every track is a digital path.
    pub fn replay(&self) -> bool {
        let slices_ok = self.stages.iter().all(|s| {
            self.domain
                .edges()
                .all(|(u, v)| self.codomain.adjacent_or_equal(s[u], s[v]))
        });
        let tracks_ok = self.stages.windows(2).all(|w| {
            w[0].iter()
                .zip(&w[1])
                .all(|(&a, &b)| self.codomain.adjacent_or_equal(a, b))
        });
        slices_ok && tracks_ok
    }
}

/// Calls `visit` on every continuous table `g` with `g[u] ∈ candidates[u]`,
/// in lexicographic order; stops early when `visit` returns false. Returns
/// false if stopped early.
pub(crate) fn enumerate_continuous(
    domain: &DigitalImage,
    codomain: &DigitalImage,
    candidates: &[Vec<usize>],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let n = domain.len();
    let earlier: Vec<Vec<usize>> = (0..n)
        .map(|u| domain.neighbors(u).iter().copied().filter(|&w| w < u).collect())
        .collect();
    let mut table = vec![0usize; n];

    fn rec(
        u: usize,
        codomain: &DigitalImage,
        candidates: &[Vec<usize>],
        earlier: &[Vec<usize>],
        table: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if u == table.len() {
            return visit(table);
        }
        for &v in &candidates[u] {
            if earlier[u]
                .iter()
                .all(|&w| codomain.adjacent_or_equal(v, table[w]))
            {
                table[u] = v;
                if !rec(u + 1, codomain, candidates, earlier, table, visit) {
                    return false;
                }
            }
        }
        true
    }

    rec(0, codomain, candidates, &earlier, &mut table, visit)
}

/// All continuous tables `domain → codomain` whose values satisfy `allowed`.
/// Errors when more than `cap` maps exist.
pub(crate) fn all_continuous(
    domain: &DigitalImage,
    codomain: &DigitalImage,
    allowed: &dyn Fn(usize, usize) -> bool,
    cap: usize,
) -> Result<Vec<Vec<usize>>> {
    let candidates: Vec<Vec<usize>> = (0..domain.len())
        .map(|u| (0..codomain.len()).filter(|&v| allowed(u, v)).collect())
        .collect();
    let mut out = Vec::new();
    let complete = enumerate_continuous(domain, codomain, &candidates, &mut |t| {
        out.push(t.to_vec());
        out.len() <= cap
    });
    if !complete {
        return Err(Error::Budget(format!(
            "more than {cap} continuous maps from a {}-point image to a {}-point image",
            domain.len(),
            codomain.len()
        )));
    }
    Ok(out)
}

enum Status {
    Found(usize),
    Exhausted,
    BudgetHit,
}

/// Breadth-first exploration of the one-step graph from a start map.
struct Explorer<'a> {
    domain: &'a DigitalImage,
    codomain: &'a DigitalImage,
    allowed: &'a dyn Fn(usize, usize) -> bool,
    nodes: Vec<Vec<usize>>,
    parent: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
}

impl<'a> Explorer<'a> {
    fn new(
        domain: &'a DigitalImage,
        codomain: &'a DigitalImage,
        allowed: &'a dyn Fn(usize, usize) -> bool,
        start: Vec<usize>,
    ) -> Self {
        let mut index = HashMap::new();
        index.insert(start.clone(), 0);
        Explorer {
            domain,
            codomain,
            allowed,
            nodes: vec![start],
            parent: vec![0],
            index,
        }
    }

    fn candidates(&self, current: &[usize]) -> Vec<Vec<usize>> {
        current
            .iter()
            .enumerate()
            .map(|(u, &c)| {
                self.codomain
                    .closed_neighbors(c)
                    .into_iter()
                    .filter(|&v| (self.allowed)(u, v))
                    .collect()
            })
            .collect()
    }

    fn run(
        &mut self,
        goal: &dyn Fn(&[usize]) -> bool,
        max_steps: usize,
        max_nodes: usize,
    ) -> Status {
        if goal(&self.nodes[0]) {
            return Status::Found(0);
        }
        let mut frontier = vec![0usize];
        let mut depth = 0;
        while !frontier.is_empty() {
            if depth == max_steps {
                for &node in &frontier {
                    let cands = self.candidates(&self.nodes[node]);
                    let mut fresh = false;
                    enumerate_continuous(self.domain, self.codomain, &cands, &mut |t| {
                        fresh = !self.index.contains_key(t);
                        !fresh
                    });
                    if fresh {
                        return Status::BudgetHit;
                    }
                }
                return Status::Exhausted;
            }
            let mut next = Vec::new();
            for &node in &frontier {
                let cands = self.candidates(&self.nodes[node]);
                let mut fresh = Vec::new();
                let room = max_nodes.saturating_sub(self.nodes.len()) + 1;
                let complete = enumerate_continuous(self.domain, self.codomain, &cands, &mut |t| {
                    if !self.index.contains_key(t) {
                        fresh.push(t.to_vec());
                    }
                    fresh.len() <= room
                });
                if !complete {
                    return Status::BudgetHit;
                }
                for t in fresh {
                    if self.index.contains_key(&t) {
                        continue;
                    }
                    let id = self.nodes.len();
                    self.index.insert(t.clone(), id);
                    self.nodes.push(t);
                    self.parent.push(node);
                    if goal(&self.nodes[id]) {
                        return Status::Found(id);
                    }
                    if self.nodes.len() > max_nodes {
                        return Status::BudgetHit;
                    }
                    next.push(id);
                }
            }
            frontier = next;
            depth += 1;
        }
        Status::Exhausted
    }

    /// Stages from the start map to `node`.
    fn path_to(&self, mut node: usize) -> Vec<Vec<usize>> {
        let mut stages = vec![self.nodes[node].clone()];
        while node != 0 {
            node = self.parent[node];
            stages.push(self.nodes[node].clone());
        }
        stages.reverse();
        stages
    }
}

fn require_continuous(f: &DigitalMap, what: &str) -> Result<()> {
    if f.is_continuous() {
        Ok(())
    } else {
        Err(Error::NotContinuous(what.to_string()))
    }
}

fn require_same_images(f: &DigitalMap, g: &DigitalMap) -> Result<()> {
    if f.domain() != g.domain() || f.codomain() != g.codomain() {
        return Err(Error::ImageMismatch(
            "maps must share domain and codomain".into(),
        ));
    }
    Ok(())
}

/// One-step homotopy: `f(u) ↔= g(u)` for every `u`.
pub fn homotopy_step(f: &DigitalMap, g: &DigitalMap) -> Result<bool> {
    require_same_images(f, g)?;
    let cod = f.codomain();
    Ok(f.table()
        .iter()
        .zip(g.table())
        .all(|(&a, &b)| cod.adjacent_or_equal(a, b)))
}

fn search(
    start: &DigitalMap,
    allowed: &dyn Fn(usize, usize) -> bool,
    goal: &dyn Fn(&[usize]) -> bool,
    budget: HomotopyBudget,
) -> Outcome<HomotopyTrace> {
    let dom = start.domain();
    let cod = start.codomain();
    let mut explorer = Explorer::new(dom, cod, allowed, start.table().to_vec());
    match explorer.run(goal, budget.steps_for(dom, cod), budget.max_nodes) {
        Status::Found(node) => Outcome::Found(HomotopyTrace {
            domain: dom.clone(),
            codomain: cod.clone(),
            stages: explorer.path_to(node),
        }),
        Status::Exhausted => Outcome::Exhausted,
        Status::BudgetHit => Outcome::BudgetHit,
    }
}

/// Shortest homotopy from `f` to `g`, if one exists within budget.
pub fn are_homotopic(
    f: &DigitalMap,
    g: &DigitalMap,
    budget: HomotopyBudget,
) -> Result<Outcome<HomotopyTrace>> {
    require_same_images(f, g)?;
    require_continuous(f, "first map")?;
    require_continuous(g, "second map")?;
    let target = g.table();
    Ok(search(f, &|_, _| true, &|t| t == target, budget))
}

/// Shortest homotopy from `f` to some constant map.
pub fn homotopic_to_constant(
    f: &DigitalMap,
    budget: HomotopyBudget,
) -> Result<Outcome<HomotopyTrace>> {
    require_continuous(f, "map")?;
    Ok(search(
        f,
        &|_, _| true,
        &|t| t.windows(2).all(|w| w[0] == w[1]),
        budget,
    ))
}

/// A homotopy from the identity of `img` to a constant map.
///
/// Dismantlable images are contracted by folding dominated points (`x`
/// with `N[x] ⊆ N[y]`) one at a time; otherwise a breadth-first search
/// decides the question within budget.
pub fn is_contractible(
    img: &Arc<DigitalImage>,
    budget: HomotopyBudget,
) -> Result<Outcome<HomotopyTrace>> {
    if let Some(stages) = dismantle(img) {
        if stages.len() - 1 <= budget.steps_for(img, img) {
            return Ok(Outcome::Found(HomotopyTrace {
                domain: img.clone(),
                codomain: img.clone(),
                stages,
            }));
        }
    }
    homotopic_to_constant(&DigitalMap::identity(img.clone()), budget)
}

/// Stages of a contraction by successive folds, if the image dismantles to
/// a single point.
fn dismantle(img: &DigitalImage) -> Option<Vec<Vec<usize>>> {
    let n = img.len();
    let mut alive = vec![true; n];
    let mut current: Vec<usize> = (0..n).collect();
    let mut stages = vec![current.clone()];
    let closed = |x: usize, alive: &[bool]| -> Vec<usize> {
        img.closed_neighbors(x).into_iter().filter(|&w| alive[w]).collect()
    };
    for _ in 1..n {
        let fold = (0..n).filter(|&x| alive[x]).find_map(|x| {
            let nx = closed(x, &alive);
            nx.iter()
                .copied()
                .filter(|&y| y != x)
                .find(|&y| nx.iter().all(|&w| img.adjacent_or_equal(w, y)))
                .map(|y| (x, y))
        })?;
        let (x, y) = fold;
        alive[x] = false;
        for v in current.iter_mut() {
            if *v == x {
                *v = y;
            }
        }
        stages.push(current.clone());
    }
    Some(stages)
}

/// A homotopy from the inclusion of `sub` into `ambient` to a constant map.
pub fn is_nullhomotopic_in(
    ambient: &Arc<DigitalImage>,
    sub: &[usize],
    budget: HomotopyBudget,
) -> Result<Outcome<HomotopyTrace>> {
    let inclusion = DigitalMap::identity(ambient.clone()).restrict(sub)?;
    homotopic_to_constant(&inclusion, budget)
}

/// Witness that `forward : x → y` and `backward : y → x` are mutually
/// inverse up to homotopy.
#[derive(Clone, Debug)]
pub struct HomotopyEquivalence {
    pub forward: DigitalMap,
    pub backward: DigitalMap,
    /// From `backward ∘ forward` to `id_x`.
    pub round_trip_x: HomotopyTrace,
    /// From `forward ∘ backward` to `id_y`.
    pub round_trip_y: HomotopyTrace,
}

/// The maps reachable from `start` within budget, with traces back to it.
struct Component {
    explorer_nodes: Vec<Vec<usize>>,
    parent: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
    complete: bool,
}

impl Component {
    fn explore(
        start: &DigitalMap,
        allowed: &dyn Fn(usize, usize) -> bool,
        budget: HomotopyBudget,
    ) -> Self {
        let dom = start.domain();
        let cod = start.codomain();
        let mut explorer = Explorer::new(dom, cod, allowed, start.table().to_vec());
        let status = explorer.run(&|_| false, budget.steps_for(dom, cod), budget.max_nodes);
        let Explorer {
            nodes,
            parent,
            index,
            ..
        } = explorer;
        Component {
            explorer_nodes: nodes,
            parent,
            index,
            complete: matches!(status, Status::Exhausted),
        }
    }

    /// Trace from `table` back to the start map.
    fn trace_to_start(&self, table: &[usize], template: &DigitalMap) -> Option<HomotopyTrace> {
        let mut node = *self.index.get(table)?;
        let mut stages = vec![self.explorer_nodes[node].clone()];
        while node != 0 {
            node = self.parent[node];
            stages.push(self.explorer_nodes[node].clone());
        }
        Some(HomotopyTrace {
            domain: template.domain().clone(),
            codomain: template.codomain().clone(),
            stages,
        })
    }
}

/// Search for a homotopy equivalence between `x` and `y` by enumerating all
/// continuous maps both ways.
pub fn are_homotopy_equivalent(
    x: &Arc<DigitalImage>,
    y: &Arc<DigitalImage>,
    budget: HomotopyBudget,
) -> Result<Outcome<HomotopyEquivalence>> {
    let id_x = DigitalMap::identity(x.clone());
    let id_y = DigitalMap::identity(y.clone());
    if x == y {
        return Ok(Outcome::Found(HomotopyEquivalence {
            round_trip_x: HomotopyTrace::constant_trace(&id_x),
            round_trip_y: HomotopyTrace::constant_trace(&id_y),
            forward: id_x,
            backward: id_y,
        }));
    }
    let forwards = all_continuous(x, y, &|_, _| true, budget.max_nodes)?;
    let backwards = all_continuous(y, x, &|_, _| true, budget.max_nodes)?;
    match_pair(x, y, &forwards, &backwards, budget)
}

/// A homotopy inverse of `f`: a continuous `g` with `g ∘ f ≃ id` and
/// `f ∘ g ≃ id`, returned as an equivalence whose forward map is `f`.
pub fn homotopy_inverse(f: &DigitalMap, budget: HomotopyBudget) -> Result<Outcome<HomotopyEquivalence>> {
    if !f.is_continuous() {
        return Err(Error::NotContinuous("a homotopy equivalence must be continuous".into()));
    }
    let (x, y) = (f.domain(), f.codomain());
    let backwards = all_continuous(y, x, &|_, _| true, budget.max_nodes)?;
    match_pair(x, y, &[f.table().to_vec()], &backwards, budget)
}

fn match_pair(
    x: &Arc<DigitalImage>,
    y: &Arc<DigitalImage>,
    forwards: &[Vec<usize>],
    backwards: &[Vec<usize>],
    budget: HomotopyBudget,
) -> Result<Outcome<HomotopyEquivalence>> {
    let id_x = DigitalMap::identity(x.clone());
    let id_y = DigitalMap::identity(y.clone());
    let comp_x = Component::explore(&id_x, &|_, _| true, budget);
    let comp_y = Component::explore(&id_y, &|_, _| true, budget);
    for f in forwards {
        for g in backwards {
            let gf: Vec<usize> = f.iter().map(|&i| g[i]).collect();
            if !comp_x.index.contains_key(&gf) {
                continue;
            }
            let fg: Vec<usize> = g.iter().map(|&i| f[i]).collect();
            if !comp_y.index.contains_key(&fg) {
                continue;
            }
            let forward = DigitalMap::new(x.clone(), y.clone(), f.clone())?;
            let backward = DigitalMap::new(y.clone(), x.clone(), g.clone())?;
            return Ok(Outcome::Found(HomotopyEquivalence {
                round_trip_x: comp_x.trace_to_start(&gf, &id_x).expect("member"),
                round_trip_y: comp_y.trace_to_start(&fg, &id_y).expect("member"),
                forward,
                backward,
            }));
        }
    }
    if comp_x.complete && comp_y.complete {
        Ok(Outcome::Exhausted)
    } else {
        Ok(Outcome::BudgetHit)
    }
}

/// A homotopy from `h` to `k` through maps `f_t` with `g ∘ f_t = g ∘ h`.
pub fn fiber_homotopic(
    g: &DigitalMap,
    h: &DigitalMap,
    k: &DigitalMap,
    budget: HomotopyBudget,
) -> Result<Outcome<HomotopyTrace>> {
    require_same_images(h, k)?;
    require_continuous(g, "fibration")?;
    require_continuous(h, "first map")?;
    require_continuous(k, "second map")?;
    let gh = h.then(g)?;
    let gk = k.then(g)?;
    if gh.table() != gk.table() {
        return Err(Error::Precondition(
            "the two maps do not lie over the same map (g∘h ≠ g∘k)".into(),
        ));
    }
    let over = gh.table().to_vec();
    let gt = g.table();
    let target = k.table();
    Ok(search(
        h,
        &|u, v| gt[v] == over[u],
        &|t| t == target,
        budget,
    ))
}

/// Fiber homotopy equivalence witness between `g1 : Y1 → Z` and `g2 : Y2 → Z`.
#[derive(Clone, Debug)]
pub struct FheWitness {
    /// `h : Y1 → Y2` with `g2 ∘ h = g1`.
    pub h: DigitalMap,
    /// `k : Y2 → Y1` with `g1 ∘ k = g2`.
    pub k: DigitalMap,
    /// Fiber homotopy from `k ∘ h` to `id_{Y1}` over `g1`.
    pub kh_trace: HomotopyTrace,
    /// Fiber homotopy from `h ∘ k` to `id_{Y2}` over `g2`.
    pub hk_trace: HomotopyTrace,
}

fn check_fibration_pair(g1: &DigitalMap, g2: &DigitalMap) -> Result<()> {
    if g1.codomain() != g2.codomain() {
        return Err(Error::ImageMismatch(
            "fiber homotopy equivalence needs a common base image".into(),
        ));
    }
    for (g, name) in [(g1, "first"), (g2, "second")] {
        require_continuous(g, name)?;
        if !g.is_surjective() {
            return Err(Error::NotSurjective(format!("{name} map")));
        }
    }
    Ok(())
}

/// Exhaustive search over fiber-preserving map pairs for an FHE witness.
pub fn are_fhe(
    g1: &DigitalMap,
    g2: &DigitalMap,
    budget: HomotopyBudget,
) -> Result<Outcome<FheWitness>> {
    check_fibration_pair(g1, g2)?;
    let y1 = g1.domain();
    let y2 = g2.domain();
    let (t1, t2) = (g1.table(), g2.table());
    let hs = all_continuous(y1, y2, &|u, v| t2[v] == t1[u], budget.max_nodes)?;
    let ks = all_continuous(y2, y1, &|u, v| t1[v] == t2[u], budget.max_nodes)?;
    let id1 = DigitalMap::identity(y1.clone());
    let id2 = DigitalMap::identity(y2.clone());
    let comp1 = Component::explore(&id1, &|u, v| t1[v] == t1[u], budget);
    let comp2 = Component::explore(&id2, &|u, v| t2[v] == t2[u], budget);
    for h in &hs {
        for k in &ks {
            let kh: Vec<usize> = h.iter().map(|&i| k[i]).collect();
            let hk: Vec<usize> = k.iter().map(|&i| h[i]).collect();
            if comp1.index.contains_key(&kh) && comp2.index.contains_key(&hk) {
                return Ok(Outcome::Found(FheWitness {
                    h: DigitalMap::new(y1.clone(), y2.clone(), h.clone())?,
                    k: DigitalMap::new(y2.clone(), y1.clone(), k.clone())?,
                    kh_trace: comp1.trace_to_start(&kh, &id1).expect("member"),
                    hk_trace: comp2.trace_to_start(&hk, &id2).expect("member"),
                }));
            }
        }
    }
    if comp1.complete && comp2.complete {
        Ok(Outcome::Exhausted)
    } else {
        Ok(Outcome::BudgetHit)
    }
}

/// Check a supplied pair `(h, k)` as an FHE witness between `g1` and `g2`.
pub fn check_fhe_pair(
    g1: &DigitalMap,
    g2: &DigitalMap,
    h: &DigitalMap,
    k: &DigitalMap,
    budget: HomotopyBudget,
) -> Result<Outcome<FheWitness>> {
    check_fibration_pair(g1, g2)?;
    if h.then(g2)?.table() != g1.table() || k.then(g1)?.table() != g2.table() {
        return Err(Error::Precondition(
            "h and k must commute with the fibrations".into(),
        ));
    }
    let kh = h.then(k)?;
    let hk = k.then(h)?;
    let id1 = DigitalMap::identity(g1.domain().clone());
    let id2 = DigitalMap::identity(g2.domain().clone());
    let first = fiber_homotopic(g1, &kh, &id1, budget)?;
    let second = fiber_homotopic(g2, &hk, &id2, budget)?;
    Ok(match (first, second) {
        (Outcome::Found(kh_trace), Outcome::Found(hk_trace)) => Outcome::Found(FheWitness {
            h: h.clone(),
            k: k.clone(),
            kh_trace,
            hk_trace,
        }),
        (Outcome::BudgetHit, _) | (_, Outcome::BudgetHit) => Outcome::BudgetHit,
        _ => Outcome::Exhausted,
    })
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
    fn dismantlable_images_contract_by_folds() {
        let square = Arc::new(
            DigitalImage::with_cl((0..3).flat_map(|x| (0..3).map(move |y| Point::new(vec![x, y]))).collect(), 2).unwrap(),
        );
        for img in [interval(0, 5), square] {
            let stages = dismantle(&img).expect("dismantlable");
            let trace = HomotopyTrace {
                domain: img.clone(),
                codomain: img.clone(),
                stages,
            };
            assert!(trace.replay());
            assert!(trace.first().table().iter().enumerate().all(|(i, &v)| i == v));
            assert!(trace.last().is_constant());
        }
        assert!(dismantle(&circle(1)).is_none());
        assert!(is_contractible(&circle(1), HomotopyBudget::default()).unwrap().is_exhausted());
        // Folding stops at a 4-cycle, yet the search contracts it.
        assert!(dismantle(&circle(2)).is_none());
        assert!(is_contractible(&circle(2), HomotopyBudget::default()).unwrap().is_found());
    }

    fn map(dom: &Arc<DigitalImage>, cod: &Arc<DigitalImage>, t: &[usize]) -> DigitalMap {
        DigitalMap::new(dom.clone(), cod.clone(), t.to_vec()).unwrap()
    }

    #[test]
    fn one_step_relation() {
        let (a, b) = (interval(0, 1), interval(0, 3));
        let f = map(&a, &b, &[0, 1]);
        assert!(homotopy_step(&f, &f).unwrap());
        assert!(homotopy_step(&f, &map(&a, &b, &[1, 2])).unwrap());
        assert!(!homotopy_step(&f, &map(&a, &b, &[2, 3])).unwrap());
        let other = map(&a, &a, &[0, 1]);
        assert!(homotopy_step(&f, &other).is_err());
    }

    #[test]
    fn identity_of_interval_contracts_in_three_steps() {
        let y = interval(0, 3);
        let id = DigitalMap::identity(y.clone());
        let zero = DigitalMap::constant(y.clone(), y.clone(), 0).unwrap();
        let trace = are_homotopic(&id, &zero, HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert_eq!(trace.steps(), 3);
        assert!(trace.replay());
        assert_eq!(trace.first(), id);
        assert_eq!(trace.last(), zero);

        let same = are_homotopic(&id, &id, HomotopyBudget::default()).unwrap();
        assert_eq!(same.found().unwrap().steps(), 0);
    }

    #[test]
    fn four_circle_identity_is_not_nullhomotopic() {
        let y = circle(1);
        let id = DigitalMap::identity(y.clone());
        let c = DigitalMap::constant(y.clone(), y.clone(), 0).unwrap();
        assert_eq!(
            are_homotopic(&id, &c, HomotopyBudget::default()).unwrap(),
            Outcome::Exhausted
        );
        assert_eq!(
            is_contractible(&y, HomotopyBudget::default()).unwrap(),
            Outcome::Exhausted
        );
    }

    #[test]
    fn eight_circle_contracts() {
        let trace = is_contractible(&circle(2), HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert!(trace.replay());
        assert!(trace.last().is_constant());
    }

    #[test]
    fn singleton_contracts_trivially() {
        let pt = Arc::new(DigitalImage::singleton(Point::new(vec![0, 0])));
        let trace = is_contractible(&pt, HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert_eq!(trace.steps(), 0);
    }

    #[test]
    fn arcs_of_the_four_circle() {
        let y = circle(1);
        let order = [
            [1, -1],
            [1, 0],
            [1, 1],
            [0, 1],
            [-1, 1],
            [-1, 0],
            [-1, -1],
            [0, -1],
        ];
        let idx: Vec<usize> = order
            .iter()
            .map(|c| y.index_of(&Point::new(c.to_vec())).unwrap())
            .collect();
        let single = is_nullhomotopic_in(&y, &idx[..1], HomotopyBudget::default()).unwrap();
        assert!(single.found().unwrap().steps() <= 1);
        let arc = is_nullhomotopic_in(&y, &idx[..5], HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert!(arc.replay());
        assert_eq!(
            is_nullhomotopic_in(&y, &idx, HomotopyBudget::default()).unwrap(),
            Outcome::Exhausted
        );
    }

    #[test]
    fn step_budget_is_not_a_disproof() {
        let y = interval(0, 3);
        let id = DigitalMap::identity(y.clone());
        let zero = DigitalMap::constant(y.clone(), y.clone(), 0).unwrap();
        assert_eq!(
            are_homotopic(&id, &zero, HomotopyBudget::with_steps(2)).unwrap(),
            Outcome::BudgetHit
        );
    }

    #[test]
    fn homotopy_equivalences() {
        let y = interval(0, 3);
        let found = are_homotopy_equivalent(&y, &y, HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert_eq!(found.forward, DigitalMap::identity(y.clone()));

        let pt = Arc::new(DigitalImage::singleton(Point::new(vec![0])));
        let eq = are_homotopy_equivalent(&y, &pt, HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert!(eq.round_trip_x.replay() && eq.round_trip_y.replay());

        let pt2 = Arc::new(DigitalImage::singleton(Point::new(vec![0, 0])));
        assert!(are_homotopy_equivalent(&circle(1), &pt2, HomotopyBudget::default())
            .unwrap()
            .is_exhausted());
    }

    #[test]
    fn fiber_homotopies_over_the_step_map() {
        let y = interval(0, 3);
        let z = interval(0, 1);
        let g = map(&y, &z, &[0, 0, 1, 1]);
        let id = DigitalMap::identity(y.clone());
        let collapse = map(&y, &y, &[1, 1, 2, 2]);
        let trace = fiber_homotopic(&g, &id, &collapse, HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert_eq!(trace.steps(), 1);
        assert_eq!(
            fiber_homotopic(&g, &id, &id, HomotopyBudget::default())
                .unwrap()
                .found()
                .unwrap()
                .steps(),
            0
        );
        let zero = DigitalMap::constant(y.clone(), y.clone(), 0).unwrap();
        assert!(matches!(
            fiber_homotopic(&g, &id, &zero, HomotopyBudget::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn fhe_of_shifted_step_maps() {
        let y1 = interval(0, 3);
        let y2 = interval(-3, 0);
        let z = interval(0, 1);
        let g1 = map(&y1, &z, &[0, 0, 1, 1]);
        let g2 = map(&y2, &z, &[0, 0, 1, 1]);
        let h = DigitalMap::from_fn(y1.clone(), y2.clone(), |p| Point::new(vec![p.0[0] - 3])).unwrap();
        let k = DigitalMap::from_fn(y2.clone(), y1.clone(), |p| Point::new(vec![p.0[0] + 3])).unwrap();
        let w = check_fhe_pair(&g1, &g2, &h, &k, HomotopyBudget::default())
            .unwrap()
            .found()
            .unwrap();
        assert_eq!(w.kh_trace.steps(), 0);
        assert!(are_fhe(&g1, &g2, HomotopyBudget::default()).unwrap().is_found());
        assert!(are_fhe(&g1, &g1, HomotopyBudget::default()).unwrap().is_found());

        let pt = Arc::new(DigitalImage::singleton(Point::new(vec![0])));
        let c = DigitalMap::constant(z.clone(), pt, 0).unwrap();
        assert!(matches!(
            are_fhe(&g1, &c, HomotopyBudget::default()),
            Err(Error::ImageMismatch(_))
        ));
    }
}
