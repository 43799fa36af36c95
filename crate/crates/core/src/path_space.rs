//! Bounded-length path spaces `Y^{[0,m]}` and the endpoint maps π and π_g.
//!
//! Paths are walks of length `m` in the reflexive closure of the adjacency
//! graph. They are never stored: a path is identified by its rank in
//! lexicographic order, and ranks are computed from a table of walk counts.
//! Two paths α ≠ β are adjacent when `α(u) ↔= β(v)` for all `|u − v| ≤ 1`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::csp::LiftProblem;
use crate::error::{Error, Result};
use crate::lattice::{AdjacencySpec, DigitalImage, Point};
use crate::maps::DigitalMap;

/// Default cap on the number of paths in a path space.
pub const DEFAULT_PATH_CAP: u64 = 20_000_000;

/// Size cap and adjacency relation of a path space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathOptions {
    pub cap: u64,
    pub relation: PathAdjacency,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            cap: DEFAULT_PATH_CAP,
            relation: PathAdjacency::Pointwise,
        }
    }
}

/// A digital path `y_0, ..., y_m` of point indices into some host image.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DigitalPath {
    steps: Vec<usize>,
}

impl DigitalPath {
    pub fn new(host: &DigitalImage, steps: Vec<usize>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Malformed("a path needs at least one point".into()));
        }
        if let Some(&bad) = steps.iter().find(|&&s| s >= host.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: host.len(),
            });
        }
        if steps.windows(2).any(|w| !host.adjacent_or_equal(w[0], w[1])) {
            return Err(Error::Malformed(
                "consecutive path points must be equal or adjacent".into(),
            ));
        }
        Ok(DigitalPath { steps })
    }

    pub fn constant(point: usize, m: usize) -> Self {
        DigitalPath {
            steps: vec![point; m + 1],
        }
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// The length `m` (one less than the number of points).
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> usize {
        self.steps[0]
    }

    pub fn end(&self) -> usize {
        *self.steps.last().unwrap()
    }

    /// Extend by repeating the last point `extra` times.
    pub fn pad(&self, extra: usize) -> Self {
        let mut steps = self.steps.clone();
        steps.extend(std::iter::repeat(self.end()).take(extra));
        DigitalPath { steps }
    }

    /// Follow `self`, then `other`; lengths add.
    pub fn concat(&self, other: &DigitalPath) -> Result<Self> {
        if self.end() != other.start() {
            return Err(Error::Precondition(
                "the second path must start where the first ends".into(),
            ));
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps[1..]);
        Ok(DigitalPath { steps })
    }
}

impl fmt::Display for DigitalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// How two paths of the same length are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PathAdjacency {
    /// `α(t) ↔= β(t)` for every `t`: paths are ρ-connected step by step.
    #[default]
    Pointwise,
    /// `α(u) ↔= β(v)` whenever `|u − v| ≤ 1`: the adjacency of the
    /// function space `Y^{[0,m]}`.
    Window,
}

impl PathAdjacency {
    pub fn name(self) -> &'static str {
        match self {
            PathAdjacency::Window => "window",
            PathAdjacency::Pointwise => "pointwise",
        }
    }

    /// Whether `b` may follow `a` under this relation (equality allowed).
    pub fn compatible(self, host: &DigitalImage, a: &[usize], b: &[usize]) -> bool {
        let m = a.len() - 1;
        match self {
            PathAdjacency::Window => (0..=m).all(|u| {
                let lo = u.saturating_sub(1);
                let hi = (u + 1).min(m);
                (lo..=hi).all(|v| host.adjacent_or_equal(a[u], b[v]))
            }),
            PathAdjacency::Pointwise => (0..=m).all(|t| host.adjacent_or_equal(a[t], b[t])),
        }
    }
}

impl std::str::FromStr for PathAdjacency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "window" => Ok(PathAdjacency::Window),
            "pointwise" => Ok(PathAdjacency::Pointwise),
            other => Err(Error::Malformed(format!("unknown path adjacency {other:?}"))),
        }
    }
}

/// All walks of length `m` in an image, ranked lexicographically.
#[derive(Clone, Debug)]
pub struct PathSpace {
    host: Arc<DigitalImage>,
    m: usize,
    relation: PathAdjacency,
    closed: Vec<Vec<usize>>,
    /// `walks[k][v]`: number of walks of length `k` starting at `v`.
    walks: Vec<Vec<u64>>,
    /// `offsets[v]`: rank of the first walk starting at `v`.
    offsets: Vec<u64>,
    total: u64,
}

impl PathSpace {
    pub fn enumerate(host: Arc<DigitalImage>, m: usize) -> Result<Self> {
        Self::enumerate_with_cap(host, m, DEFAULT_PATH_CAP)
    }

    pub fn enumerate_with_cap(host: Arc<DigitalImage>, m: usize, cap: u64) -> Result<Self> {
        let n = host.len();
        let closed: Vec<Vec<usize>> = (0..n).map(|v| host.closed_neighbors(v)).collect();
        let mut walks = vec![vec![1u64; n]];
        for k in 1..=m {
            let prev = &walks[k - 1];
            let mut row = Vec::with_capacity(n);
            for c in &closed {
                let mut sum = 0u64;
                for &w in c {
                    sum = sum.saturating_add(prev[w]);
                }
                row.push(sum);
            }
            walks.push(row);
        }
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0u64;
        for &c in &walks[m] {
            offsets.push(total);
            total = total.saturating_add(c);
        }
        if total > cap {
            return Err(Error::Budget(format!(
                "path space of length {m} has {total} paths, above the cap of {cap}"
            )));
        }
        Ok(PathSpace {
            host,
            m,
            relation: PathAdjacency::Pointwise,
            closed,
            walks,
            offsets,
            total,
        })
    }

    /// Use a different path adjacency.
    pub fn with_relation(mut self, relation: PathAdjacency) -> Self {
        self.relation = relation;
        self
    }

    pub fn relation(&self) -> PathAdjacency {
        self.relation
    }

    pub fn host(&self) -> &Arc<DigitalImage> {
        &self.host
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.total as usize
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of paths starting at `v`.
    pub fn count_from(&self, v: usize) -> usize {
        self.walks[self.m][v] as usize
    }

    /// Rank of a step sequence, or `None` if it is not a path of this space.
    pub fn rank(&self, steps: &[usize]) -> Option<usize> {
        if steps.len() != self.m + 1 || steps.iter().any(|&s| s >= self.host.len()) {
            return None;
        }
        let mut r = self.offsets[steps[0]];
        for i in 1..=self.m {
            let prev = steps[i - 1];
            let cur = steps[i];
            let c = &self.closed[prev];
            let pos = c.binary_search(&cur).ok()?;
            let rest = &self.walks[self.m - i];
            for &w in &c[..pos] {
                r += rest[w];
            }
        }
        Some(r as usize)
    }

    /// Step sequence of the path with rank `id`.
    pub fn unrank_into(&self, id: usize, out: &mut Vec<usize>) {
        assert!(id < self.len(), "path rank {id} out of range");
        out.clear();
        let mut r = id as u64;
        let start = self.offsets.partition_point(|&o| o <= r) - 1;
        r -= self.offsets[start];
        out.push(start);
        for i in 1..=self.m {
            let rest = &self.walks[self.m - i];
            let prev = *out.last().unwrap();
            for &w in &self.closed[prev] {
                if r < rest[w] {
                    out.push(w);
                    break;
                }
                r -= rest[w];
            }
        }
    }

    pub fn steps(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.m + 1);
        self.unrank_into(id, &mut out);
        out
    }

    pub fn path(&self, id: usize) -> DigitalPath {
        DigitalPath {
            steps: self.steps(id),
        }
    }

    /// Visit every path starting at `start`, in rank order.
    pub fn for_each_from(&self, start: usize, visit: &mut dyn FnMut(usize, &[usize])) {
        let mut steps = vec![start];
        let mut rank = self.offsets[start] as usize;
        self.walk_rec(&mut steps, &mut rank, visit);
    }

    fn walk_rec(&self, steps: &mut Vec<usize>, rank: &mut usize, visit: &mut dyn FnMut(usize, &[usize])) {
        if steps.len() == self.m + 1 {
            visit(*rank, steps);
            *rank += 1;
            return;
        }
        let last = *steps.last().unwrap();
        for &w in &self.closed[last] {
            steps.push(w);
            self.walk_rec(steps, rank, visit);
            steps.pop();
        }
    }

    /// Path-space adjacency: distinct paths satisfying the window condition.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a != b && self.relation.compatible(&self.host, &self.steps(a), &self.steps(b))
    }

    /// Adjacency of explicit paths, which must have length `m`.
    pub fn paths_adjacent(&self, a: &DigitalPath, b: &DigitalPath) -> Result<bool> {
        if a.len() != self.m || b.len() != self.m {
            return Err(Error::DimensionMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        Ok(a != b && self.relation.compatible(&self.host, &a.steps, &b.steps))
    }

    /// Paths `β` starting at `start`, equal or adjacent to `alpha`, whose end
    /// point lies in a target set; reported as ranks in ascending order.
    /// `end_dist[v]` is the distance from `v` to the target set
    /// (`usize::MAX` when unreachable) and prunes hopeless prefixes.
    pub fn compatible_from(
        &self,
        alpha: &[usize],
        start: usize,
        end_dist: &[usize],
        out: &mut Vec<usize>,
    ) {
        out.clear();
        self.walk_compatible(alpha, start, end_dist, &mut |r| {
            out.push(r);
            false
        });
    }

    /// Like [`PathSpace::compatible_from`], but hands each rank to `visit`
    /// and stops as soon as it returns true; returns whether it stopped.
    pub fn walk_compatible(
        &self,
        alpha: &[usize],
        start: usize,
        end_dist: &[usize],
        visit: &mut dyn FnMut(usize) -> bool,
    ) -> bool {
        let m = self.m;
        let host = &self.host;
        let pointwise = self.relation == PathAdjacency::Pointwise;
        let admissible = |v: usize, x: usize| {
            if pointwise {
                return host.adjacent_or_equal(alpha[v], x);
            }
            let lo = v.saturating_sub(1);
            let hi = (v + 1).min(m);
            (lo..=hi).all(|u| host.adjacent_or_equal(alpha[u], x))
        };
        if !admissible(0, start) || end_dist[start] > m {
            return false;
        }
        if m == 0 {
            return visit(self.offsets[start] as usize);
        }
        self.compat_rec(&admissible, end_dist, 1, start, self.offsets[start], visit)
    }

    fn compat_rec(
        &self,
        admissible: &dyn Fn(usize, usize) -> bool,
        end_dist: &[usize],
        i: usize,
        prev: usize,
        prefix_rank: u64,
        visit: &mut dyn FnMut(usize) -> bool,
    ) -> bool {
        let left = self.m - i;
        let rest = &self.walks[left];
        let mut r = prefix_rank;
        for &w in &self.closed[prev] {
            if end_dist[w] <= left && admissible(i, w) {
                let stop = if left == 0 {
                    visit(r as usize)
                } else {
                    self.compat_rec(admissible, end_dist, i + 1, w, r, visit)
                };
                if stop {
                    return true;
                }
            }
            r += rest[w];
        }
        false
    }

    /// The path space as a digital image: each path becomes the point of
    /// concatenated host coordinates, with path-space adjacency.
    pub fn to_image(&self) -> Result<DigitalImage> {
        let all: Vec<Vec<usize>> = (0..self.len()).map(|i| self.steps(i)).collect();
        let points = all
            .iter()
            .map(|s| {
                Point::new(
                    s.iter()
                        .flat_map(|&v| self.host.point(v).coords().to_vec())
                        .collect::<Vec<i64>>(),
                )
            })
            .collect();
        let mut edges = BTreeSet::new();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if self.relation.compatible(&self.host, &all[i], &all[j]) {
                    edges.insert((i, j));
                }
            }
        }
        DigitalImage::new(points, AdjacencySpec::Explicit(edges))
    }
}

/// Which endpoint map a fibration uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndpointKind {
    /// `π(α) = (α(0), α(m))` over `Y × Y`.
    Pi,
    /// `π_g(α) = (α(0), g(α(m)))` over `Y × Z`.
    PiG,
}

/// A path space together with an endpoint projection and its fibers.
#[derive(Clone, Debug)]
pub struct EndpointFibration {
    space: PathSpace,
    kind: EndpointKind,
    base: Arc<DigitalImage>,
    second: Arc<DigitalImage>,
    /// `g` for π_g.
    map: Option<DigitalMap>,
    end_class: Vec<usize>,
    /// `class_dist[z][v]`: distance from `v` to the end points of class `z`.
    class_dist: Vec<Vec<usize>>,
    /// Position of each path inside its fiber.
    fiber_pos: Vec<u32>,
    z_len: usize,
    fibers: Vec<Vec<usize>>,
}

impl EndpointFibration {
    fn build(space: PathSpace, second: Arc<DigitalImage>, map: Option<DigitalMap>) -> Self {
        let kind = if map.is_some() { EndpointKind::PiG } else { EndpointKind::Pi };
        let end_class: Vec<usize> = match &map {
            Some(g) => g.table().to_vec(),
            None => (0..second.len()).collect(),
        };
        let base = Arc::new(space.host().product(&second));
        let z_len = second.len();
        let host = space.host().clone();
        let mut fibers = vec![Vec::new(); base.len()];
        let mut fiber_pos = vec![0u32; space.len()];
        for y in 0..host.len() {
            space.for_each_from(y, &mut |id, steps| {
                let f = &mut fibers[y * z_len + end_class[steps[steps.len() - 1]]];
                fiber_pos[id] = f.len() as u32;
                f.push(id);
            });
        }
        let mut class_dist = vec![vec![usize::MAX; host.len()]; z_len];
        for e in 0..host.len() {
            let row = &mut class_dist[end_class[e]];
            for (v, d) in host.distances_from(e).into_iter().enumerate() {
                if let Some(d) = d {
                    row[v] = row[v].min(d);
                }
            }
        }
        EndpointFibration {
            space,
            kind,
            base,
            second,
            map,
            end_class,
            class_dist,
            fiber_pos,
            z_len,
            fibers,
        }
    }

    pub fn kind(&self) -> EndpointKind {
        self.kind
    }

    pub fn space(&self) -> &PathSpace {
        &self.space
    }

    pub fn base_image(&self) -> &Arc<DigitalImage> {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    /// The second factor of the base: the host for π, the codomain of `g`
    /// for π_g.
    pub fn second(&self) -> &Arc<DigitalImage> {
        &self.second
    }

    /// The map `g` of π_g.
    pub fn map(&self) -> Option<&DigitalMap> {
        self.map.as_ref()
    }

    /// Base index of the projection of a path.
    pub fn project(&self, id: usize) -> usize {
        let s = self.space.steps(id);
        s[0] * self.z_len + self.end_class[s[self.space.m()]]
    }

    /// Base points with no path over them.
    pub fn empty_fibers(&self) -> Vec<usize> {
        (0..self.fibers.len())
            .filter(|&b| self.fibers[b].is_empty())
            .collect()
    }

    pub fn all_fibers_nonempty(&self) -> bool {
        self.fibers.iter().all(|f| !f.is_empty())
    }

    /// Base index of the pair `(y, z)`.
    pub fn base_index(&self, y: usize, z: usize) -> usize {
        y * self.z_len + z
    }

    /// The `(y, z)` pair of a base index.
    pub fn base_pair(&self, b: usize) -> (usize, usize) {
        (b / self.z_len, b % self.z_len)
    }
}

impl LiftProblem for EndpointFibration {
    fn base(&self) -> &DigitalImage {
        &self.base
    }

    fn fiber(&self, b: usize) -> &[usize] {
        &self.fibers[b]
    }

    fn lifts_compatible(&self, a: usize, c: usize) -> bool {
        a == c || self.space.adjacent(a, c)
    }

    fn compatible_lifts(&self, lift: usize, target: usize, out: &mut Vec<usize>) {
        let alpha = self.space.steps(lift);
        let (start, z) = self.base_pair(target);
        self.space
            .compatible_from(&alpha, start, &self.class_dist[z], out);
    }

    fn find_support(&self, lift: usize, target: usize, accept: &dyn Fn(usize) -> bool) -> Option<usize> {
        let alpha = self.space.steps(lift);
        let (start, z) = self.base_pair(target);
        let mut found = None;
        self.space
            .walk_compatible(&alpha, start, &self.class_dist[z], &mut |id| {
                let p = self.fiber_pos[id] as usize;
                if accept(p) {
                    found = Some(p);
                }
                found.is_some()
            });
        found
    }

    fn support_bits(&self, lift: usize, target: usize, bits: &mut [u64]) {
        let mut out = Vec::new();
        self.compatible_lifts(lift, target, &mut out);
        for id in out {
            let p = self.fiber_pos[id] as usize;
            bits[p / 64] |= 1 << (p % 64);
        }
    }

    fn describe_base(&self, b: usize) -> String {
        let (y, z) = self.base_pair(b);
        let second = match self.kind {
            EndpointKind::Pi => self.space.host().point(z).to_string(),
            EndpointKind::PiG => format!("z{z}"),
        };
        format!("({}, {})", self.space.host().point(y), second)
    }
}

/// `π(α) = (α(0), α(m))` on `img^{[0,m]}`.
pub fn pi_map(img: Arc<DigitalImage>, m: usize) -> Result<EndpointFibration> {
    pi_map_with(img, m, PathOptions::default())
}

pub fn pi_map_with(img: Arc<DigitalImage>, m: usize, opts: PathOptions) -> Result<EndpointFibration> {
    let space = PathSpace::enumerate_with_cap(img.clone(), m, opts.cap)?.with_relation(opts.relation);
    Ok(EndpointFibration::build(space, img, None))
}

/// `π_g(α) = (α(0), g(α(m)))` on `Y^{[0,m]}` over `Y × Z`.
pub fn pi_g_map(g: &DigitalMap, m: usize) -> Result<EndpointFibration> {
    pi_g_map_with(g, m, PathOptions::default())
}

pub fn pi_g_map_with(g: &DigitalMap, m: usize, opts: PathOptions) -> Result<EndpointFibration> {
    if !g.is_continuous() {
        return Err(Error::NotContinuous("π_g needs a continuous map".into()));
    }
    if !g.is_surjective() {
        return Err(Error::NotSurjective("π_g needs a surjective map".into()));
    }
    g.domain().require_connected("domain")?;
    g.codomain().require_connected("codomain")?;
    let space = PathSpace::enumerate_with_cap(g.domain().clone(), m, opts.cap)?.with_relation(opts.relation);
    Ok(EndpointFibration::build(space, g.codomain().clone(), Some(g.clone())))
}
