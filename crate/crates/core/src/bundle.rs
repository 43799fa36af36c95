//! Fiber bundles, certified fibrations and homotopy-lifting spot checks.
//!
//! A fibration has the homotopy lifting property for every digital image,
//! which no finite search can establish. The module is therefore
//! asymmetric: the constructors in [`certify_fibration`] carry proofs by
//! construction, while [`spot_check_hlp`] can only refute (a failed test is
//! a non-liftability certificate) or collect evidence.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homotopy::{enumerate_continuous, homotopy_inverse, HomotopyBudget, HomotopyTrace, Outcome};
use crate::lattice::DigitalImage;
use crate::maps::DigitalMap;
use crate::path_space::{EndpointFibration, EndpointKind};

/// A quadruple `(Y, g, Z, T)`: the map `g: Y → Z` carries `Y` and `Z`.
#[derive(Clone, Debug)]
pub struct BundleCandidate {
    map: DigitalMap,
    fiber: Arc<DigitalImage>,
}

impl BundleCandidate {
    pub fn new(map: DigitalMap, fiber: Arc<DigitalImage>) -> Result<Self> {
        if !map.is_continuous() {
            return Err(Error::NotContinuous("the bundle projection".into()));
        }
        if !map.is_surjective() {
            return Err(Error::NotSurjective("the bundle projection".into()));
        }
        map.codomain().require_connected("base")?;
        Ok(BundleCandidate { map, fiber })
    }

    /// Use the fiber over the first base point as the model fiber.
    pub fn with_proposed_fiber(map: DigitalMap) -> Result<Self> {
        let over = map.fiber(0);
        let fiber = Arc::new(map.domain().induced_subimage(&over)?);
        Self::new(map, fiber)
    }

    pub fn map(&self) -> &DigitalMap {
        &self.map
    }

    pub fn total(&self) -> &Arc<DigitalImage> {
        self.map.domain()
    }

    pub fn base(&self) -> &Arc<DigitalImage> {
        self.map.codomain()
    }

    pub fn fiber(&self) -> &Arc<DigitalImage> {
        &self.fiber
    }
}

/// An isomorphism from the fiber over `base_point` onto the model fiber:
/// `preimage[i]` goes to `image[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberIsomorphism {
    pub base_point: usize,
    pub preimage: Vec<usize>,
    pub image: Vec<usize>,
}

/// A local trivialization `φ: g⁻¹(V) → V × T` around `base_point`, with
/// `φ(preimage[i]) = (g(preimage[i]), fiber_coord[i])`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trivialization {
    pub base_point: usize,
    pub neighborhood: Vec<usize>,
    pub preimage: Vec<usize>,
    pub fiber_coord: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleWitness {
    pub isomorphisms: Vec<FiberIsomorphism>,
    pub trivializations: Vec<Trivialization>,
}

/// The first base point at which a bundle condition fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BundleFailure {
    FiberNotIsomorphic { base_point: usize },
    NoTrivialization { base_point: usize },
}

impl fmt::Display for BundleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleFailure::FiberNotIsomorphic { base_point } => {
                write!(f, "fiber over base point {base_point} is not isomorphic to the model fiber")
            }
            BundleFailure::NoTrivialization { base_point } => {
                write!(f, "no local trivialization around base point {base_point}")
            }
        }
    }
}

/// Cap on the number of candidate neighborhoods tried per base point.
pub const DEFAULT_NEIGHBORHOOD_CAP: usize = 100_000;

/// A bijection `s → t` (indices `0..n`) preserving adjacency both ways and
/// respecting `allowed`; `None` when there is none.
fn find_isomorphism(
    n: usize,
    s_adj: &dyn Fn(usize, usize) -> bool,
    t_len: usize,
    t_adj: &dyn Fn(usize, usize) -> bool,
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    if n != t_len {
        return None;
    }
    let s_deg: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| s_adj(i, j)).count()).collect();
    let t_deg: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| t_adj(i, j)).count()).collect();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        s_adj: &dyn Fn(usize, usize) -> bool,
        t_adj: &dyn Fn(usize, usize) -> bool,
        allowed: &dyn Fn(usize, usize) -> bool,
        s_deg: &[usize],
        t_deg: &[usize],
        image: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if i == image.len() {
            return true;
        }
        for j in 0..image.len() {
            if used[j] || s_deg[i] != t_deg[j] || !allowed(i, j) {
                continue;
            }
            if (0..i).all(|k| s_adj(i, k) == t_adj(j, image[k])) {
                image[i] = j;
                used[j] = true;
                if rec(i + 1, s_adj, t_adj, allowed, s_deg, t_deg, image, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }

    rec(0, s_adj, t_adj, allowed, &s_deg, &t_deg, &mut image, &mut used).then_some(image)
}

/// Connected subsets of `img` containing `z`, by size and then
/// lexicographically; stops after `cap` subsets.
fn connected_neighborhoods(img: &DigitalImage, z: usize, cap: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
    let mut level: BTreeSet<Vec<usize>> = BTreeSet::from([vec![z]]);
    let mut produced = 0usize;
    std::iter::from_fn(move || {
        if level.is_empty() {
            return None;
        }
        let current = std::mem::take(&mut level);
        let mut next = BTreeSet::new();
        for set in &current {
            for &p in set {
                for &q in img.neighbors(p) {
                    if set.binary_search(&q).is_err() {
                        let mut grown = set.clone();
                        let at = grown.partition_point(|&x| x < q);
                        grown.insert(at, q);
                        next.insert(grown);
                    }
                }
            }
        }
        level = next;
        Some(current)
    })
    .flatten()
    .take_while(move |_| {
        produced += 1;
        produced <= cap
    })
}

fn fiber_isomorphism(c: &BundleCandidate, z: usize) -> Option<FiberIsomorphism> {
    let y = c.total();
    let t = &c.fiber;
    let pre = c.map.fiber(z);
    let table = find_isomorphism(
        pre.len(),
        &|i, j| y.is_adjacent(pre[i], pre[j]),
        t.len(),
        &|i, j| t.is_adjacent(i, j),
        &|_, _| true,
    )?;
    Some(FiberIsomorphism {
        base_point: z,
        preimage: pre,
        image: table,
    })
}

fn trivialization(c: &BundleCandidate, z: usize, v: &[usize]) -> Option<Trivialization> {
    let y = c.total();
    let base = c.base();
    let t = &c.fiber;
    let tl = t.len();
    let pre: Vec<usize> = (0..y.len())
        .filter(|&p| v.binary_search(&c.map.apply(p)).is_ok())
        .collect();
    let target_adj = |a: usize, b: usize| {
        let (va, ta) = (v[a / tl], a % tl);
        let (vb, tb) = (v[b / tl], b % tl);
        (va, ta) != (vb, tb) && base.adjacent_or_equal(va, vb) && t.adjacent_or_equal(ta, tb)
    };
    let table = find_isomorphism(
        pre.len(),
        &|i, j| y.is_adjacent(pre[i], pre[j]),
        v.len() * tl,
        &target_adj,
        &|i, j| v[j / tl] == c.map.apply(pre[i]),
    )?;
    Some(Trivialization {
        base_point: z,
        neighborhood: v.to_vec(),
        fiber_coord: table.iter().map(|&j| j % tl).collect(),
        preimage: pre,
    })
}

/// Check both conditions of a digital fiber bundle. Condition 2 is read per
/// point: every base point has some connected neighborhood over which the
/// bundle is trivial. Neighborhoods are tried smallest first.
pub fn verify_fiber_bundle(
    c: &BundleCandidate,
    neighborhood_cap: usize,
) -> Result<std::result::Result<BundleWitness, BundleFailure>> {
    let base = c.base();
    let mut isomorphisms = Vec::new();
    for z in 0..base.len() {
        match fiber_isomorphism(c, z) {
            Some(iso) => isomorphisms.push(iso),
            None => return Ok(Err(BundleFailure::FiberNotIsomorphic { base_point: z })),
        }
    }
    let mut trivializations = Vec::new();
    for z in 0..base.len() {
        let mut tried = 0;
        let mut found = None;
        for v in connected_neighborhoods(base, z, neighborhood_cap) {
            tried += 1;
            if let Some(triv) = trivialization(c, z, &v) {
                found = Some(triv);
                break;
            }
        }
        match found {
            Some(triv) => trivializations.push(triv),
            None if tried >= neighborhood_cap => {
                return Err(Error::Budget(format!(
                    "more than {neighborhood_cap} neighborhoods tried around base point {z}"
                )))
            }
            None => return Ok(Err(BundleFailure::NoTrivialization { base_point: z })),
        }
    }
    Ok(Ok(BundleWitness {
        isomorphisms,
        trivializations,
    }))
}

/// Where a fibration claim comes from, weakest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Unverified,
    SpotChecked,
    CertifiedConstant,
    CertifiedProjection,
    CertifiedEndpoint,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Unverified => "unverified",
            Provenance::SpotChecked => "spot-checked",
            Provenance::CertifiedConstant => "certified-constant",
            Provenance::CertifiedProjection => "certified-projection",
            Provenance::CertifiedEndpoint => "certified-endpoint",
        }
    }

    pub fn is_certified(self) -> bool {
        self >= Provenance::CertifiedConstant
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FibrationKind {
    Constant,
    Projection,
    EndpointPi,
    EndpointPiG,
}

/// Input of [`certify_fibration`].
#[derive(Clone, Debug)]
pub enum FibrationData {
    Map(DigitalMap),
    /// A map claimed to be the first projection `left × right → left`.
    Projection {
        map: DigitalMap,
        left: Arc<DigitalImage>,
        right: Arc<DigitalImage>,
    },
    Endpoint(Arc<EndpointFibration>),
}

#[derive(Clone, Debug)]
pub enum FibrationTarget {
    Map(DigitalMap),
    Endpoint(Arc<EndpointFibration>),
}

/// A map together with the evidence that it is a fibration. Evidence is
/// only ever appended.
#[derive(Clone, Debug)]
pub struct FibrationHandle {
    target: FibrationTarget,
    evidence: Vec<Provenance>,
}

impl FibrationHandle {
    pub fn unverified(map: DigitalMap) -> Self {
        FibrationHandle {
            target: FibrationTarget::Map(map),
            evidence: vec![Provenance::Unverified],
        }
    }

    pub fn target(&self) -> &FibrationTarget {
        &self.target
    }

    pub fn map(&self) -> Option<&DigitalMap> {
        match &self.target {
            FibrationTarget::Map(m) => Some(m),
            FibrationTarget::Endpoint(_) => None,
        }
    }

    pub fn evidence(&self) -> &[Provenance] {
        &self.evidence
    }

    /// The strongest evidence held.
    pub fn provenance(&self) -> Provenance {
        self.evidence.iter().copied().max().unwrap_or(Provenance::Unverified)
    }

    /// Record a spot check of this handle's map. Only a report in which
    /// every test lifted counts as evidence; returns whether it was added.
    pub fn record_spot_check(&mut self, report: &HlpReport) -> bool {
        let ok = !report.verdicts.is_empty() && report.all_lifted();
        if ok {
            self.evidence.push(Provenance::SpotChecked);
        }
        ok
    }
}

/// Certify a fibration whose lifting property has a known construction.
pub fn certify_fibration(kind: FibrationKind, data: FibrationData) -> Result<FibrationHandle> {
    let mismatch = |what: &str| Err(Error::Precondition(format!("data does not match kind: {what}")));
    let (target, provenance) = match (kind, data) {
        (FibrationKind::Constant, FibrationData::Map(map)) => {
            if !map.is_constant() || map.codomain().len() != 1 {
                return Err(Error::Precondition(
                    "a constant fibration must map onto a single point".into(),
                ));
            }
            (FibrationTarget::Map(map), Provenance::CertifiedConstant)
        }
        (FibrationKind::Projection, FibrationData::Projection { map, left, right }) => {
            let product = left.product(&right);
            if **map.domain() != product || **map.codomain() != *left {
                return Err(Error::ImageMismatch(
                    "projection must go from left × right to left".into(),
                ));
            }
            let rl = right.len();
            if map.table().iter().enumerate().any(|(i, &v)| v != i / rl) {
                return Err(Error::Precondition("map is not the first projection".into()));
            }
            (FibrationTarget::Map(map), Provenance::CertifiedProjection)
        }
        (FibrationKind::EndpointPi, FibrationData::Endpoint(fib)) => {
            if fib.kind() != EndpointKind::Pi {
                return mismatch("expected the endpoint map π");
            }
            (FibrationTarget::Endpoint(fib), Provenance::CertifiedEndpoint)
        }
        (FibrationKind::EndpointPiG, FibrationData::Endpoint(fib)) => {
            if fib.kind() != EndpointKind::PiG {
                return mismatch("expected an endpoint map π_g");
            }
            (FibrationTarget::Endpoint(fib), Provenance::CertifiedEndpoint)
        }
        (kind, _) => return mismatch(&format!("{kind:?}")),
    };
    Ok(FibrationHandle {
        target,
        evidence: vec![provenance],
    })
}

/// One homotopy-lifting test for `g: Y → Z`: a start `f: A → Y` and a
/// homotopy `H` of maps `A → Z` with `H_0 = g ∘ f`.
#[derive(Clone, Debug)]
pub struct HlpTest {
    pub start: DigitalMap,
    pub homotopy: HomotopyTrace,
}

#[derive(Clone, Debug)]
pub enum HlpVerdict {
    /// A lift `Ĥ` with `Ĥ_0 = f` and `g ∘ Ĥ_t = H_t`.
    Lifted(HomotopyTrace),
    /// Exhaustive search found no lift: `g` is not a fibration.
    NotLiftable,
    Malformed(String),
    BudgetHit,
}

#[derive(Clone, Debug)]
pub struct HlpReport {
    pub verdicts: Vec<HlpVerdict>,
}

impl HlpReport {
    pub fn all_lifted(&self) -> bool {
        self.verdicts.iter().all(|v| matches!(v, HlpVerdict::Lifted(_)))
    }

    /// Indices of tests that are non-liftability certificates.
    pub fn refutations(&self) -> Vec<usize> {
        (0..self.verdicts.len())
            .filter(|&i| matches!(self.verdicts[i], HlpVerdict::NotLiftable))
            .collect()
    }
}

fn malformed(g: &DigitalMap, test: &HlpTest) -> Option<String> {
    let (f, h) = (&test.start, &test.homotopy);
    if f.domain() != h.domain() {
        return Some("start map and homotopy have different domains".into());
    }
    if f.codomain() != g.domain() || h.codomain() != g.codomain() {
        return Some("test maps do not match the images of g".into());
    }
    if !f.is_continuous() || !h.replay() {
        return Some("test maps are not continuous".into());
    }
    let composed: Vec<usize> = f.table().iter().map(|&y| g.apply(y)).collect();
    if composed != h.stages()[0] {
        return Some("g ∘ f differs from the start of the homotopy".into());
    }
    None
}

/// Every one-step test from a one-point source: each start point `y` and
/// each base point `z` equal or adjacent to `g(y)`.
pub fn one_point_tests(g: &DigitalMap) -> Vec<HlpTest> {
    let a = Arc::new(DigitalImage::singleton(crate::lattice::Point::new(vec![0])));
    let z = g.codomain();
    let mut tests = Vec::new();
    for y in 0..g.domain().len() {
        let gy = g.apply(y);
        for w in z.closed_neighbors(gy) {
            tests.push(HlpTest {
                start: DigitalMap::new(a.clone(), g.domain().clone(), vec![y]).expect("in range"),
                homotopy: HomotopyTrace::new(a.clone(), z.clone(), vec![vec![gy], vec![w]]).expect("in range"),
            });
        }
    }
    tests
}

/// Whether `lift` solves `test` for `g`.
pub fn check_lift(g: &DigitalMap, test: &HlpTest, lift: &HomotopyTrace) -> bool {
    let stages = lift.stages();
    lift.domain() == test.start.domain()
        && lift.codomain() == g.domain()
        && lift.replay()
        && stages.len() == test.homotopy.stages().len()
        && stages[0] == test.start.table()
        && stages
            .iter()
            .zip(test.homotopy.stages())
            .all(|(s, h)| s.iter().zip(h).all(|(&y, &z)| g.apply(y) == z))
}

struct LiftSearch<'a> {
    g: &'a DigitalMap,
    a: &'a DigitalImage,
    h: &'a [Vec<usize>],
    fibers: Vec<Vec<usize>>,
    dead: HashSet<(usize, Vec<usize>)>,
    nodes: usize,
    max_nodes: usize,
}

impl LiftSearch<'_> {
    /// Extend a lift whose stage `t` is `prev`; `None` on budget exhaustion.
    fn extend(&mut self, t: usize, prev: &[usize], path: &mut Vec<Vec<usize>>) -> Option<bool> {
        if t + 1 == self.h.len() {
            return Some(true);
        }
        if self.dead.contains(&(t, prev.to_vec())) {
            return Some(false);
        }
        let y = self.g.domain();
        let candidates: Vec<Vec<usize>> = (0..self.a.len())
            .map(|u| {
                self.fibers[self.h[t + 1][u]]
                    .iter()
                    .copied()
                    .filter(|&c| y.adjacent_or_equal(c, prev[u]))
                    .collect()
            })
            .collect();
        let mut stages = Vec::new();
        let mut over = false;
        let max = self.max_nodes;
        let nodes = &mut self.nodes;
        enumerate_continuous(self.a, y, &candidates, &mut |s| {
            *nodes += 1;
            if *nodes > max {
                over = true;
                return false;
            }
            stages.push(s.to_vec());
            true
        });
        if over {
            return None;
        }
        for s in stages {
            path.push(s.clone());
            if self.extend(t + 1, &s, path)? {
                return Some(true);
            }
            path.pop();
        }
        self.dead.insert((t, prev.to_vec()));
        Some(false)
    }
}

/// Exhaustively search for a lift of each test homotopy through `g`.
pub fn spot_check_hlp(g: &DigitalMap, tests: &[HlpTest], max_nodes: usize) -> Result<HlpReport> {
    if !g.is_continuous() {
        return Err(Error::NotContinuous("homotopy lifting needs a continuous map".into()));
    }
    let fibers: Vec<Vec<usize>> = (0..g.codomain().len()).map(|z| g.fiber(z)).collect();
    let verdicts = tests
        .iter()
        .map(|test| {
            if let Some(why) = malformed(g, test) {
                return HlpVerdict::Malformed(why);
            }
            let mut search = LiftSearch {
                g,
                a: test.start.domain(),
                h: test.homotopy.stages(),
                fibers: fibers.clone(),
                dead: HashSet::new(),
                nodes: 0,
                max_nodes,
            };
            let start = test.start.table().to_vec();
            let mut path = vec![start.clone()];
            match search.extend(0, &start, &mut path) {
                Some(true) => {
                    let trace = HomotopyTrace::new(test.start.domain().clone(), g.domain().clone(), path)
                        .expect("lift stages are total");
                    debug_assert!(check_lift(g, test, &trace));
                    HlpVerdict::Lifted(trace)
                }
                Some(false) => HlpVerdict::NotLiftable,
                None => HlpVerdict::BudgetHit,
            }
        })
        .collect();
    Ok(HlpReport { verdicts })
}

/// The lift prescribed by a certified construction: `Ĥ(a, t) = f(a)` for a
/// constant fibration and `Ĥ(a, t) = (H(a, t), p₂ ∘ f(a))` for a projection.
pub fn recipe_lift(handle: &FibrationHandle, test: &HlpTest) -> Option<HomotopyTrace> {
    let g = handle.map()?;
    let f = test.start.table();
    let stages: Vec<Vec<usize>> = match handle.provenance() {
        Provenance::CertifiedConstant => vec![f.to_vec(); test.homotopy.stages().len()],
        Provenance::CertifiedProjection => {
            let rl = g.domain().len() / g.codomain().len();
            test.homotopy
                .stages()
                .iter()
                .map(|h| h.iter().zip(f).map(|(&y, &p)| y * rl + p % rl).collect())
                .collect()
        }
        _ => return None,
    };
    HomotopyTrace::new(test.start.domain().clone(), g.domain().clone(), stages).ok()
}

/// Whether `ghat` is a fibrational substitute of `g` through `k`: the
/// triangle `ghat ∘ k = g` commutes and `k` is a homotopy equivalence.
/// Budget exhaustion is an error, never `false`.
pub fn verify_fibrational_substitute(
    g: &DigitalMap,
    ghat: &FibrationHandle,
    k: &DigitalMap,
    budget: HomotopyBudget,
) -> Result<bool> {
    if ghat.provenance() == Provenance::Unverified {
        return Err(Error::Precondition("the substitute is not a verified fibration".into()));
    }
    let Some(gh) = ghat.map() else {
        return Err(Error::Precondition("the substitute must be a map of images".into()));
    };
    if k.domain() != g.domain() || k.codomain() != gh.domain() {
        return Err(Error::ImageMismatch("k must go from the domain of g to the domain of the substitute".into()));
    }
    if gh.codomain() != g.codomain() {
        return Ok(false);
    }
    let commutes = k.table().iter().map(|&x| gh.apply(x)).eq(g.table().iter().copied());
    if !commutes {
        return Ok(false);
    }
    match homotopy_inverse(k, budget)? {
        Outcome::Found(_) => Ok(true),
        Outcome::Exhausted => Ok(false),
        Outcome::BudgetHit => Err(Error::Budget("homotopy inverse search hit its budget".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{digital_interval, digital_sphere, AdjacencySpec};

    fn interval(c: i64, d: i64) -> Arc<DigitalImage> {
        Arc::new(digital_interval(c, d).unwrap())
    }

    fn step_map() -> DigitalMap {
        DigitalMap::new(interval(0, 3), interval(0, 1), vec![0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn step_map_is_a_bundle_with_singleton_neighborhoods() {
        let c = BundleCandidate::new(step_map(), interval(4, 5)).unwrap();
        let w = verify_fiber_bundle(&c, DEFAULT_NEIGHBORHOOD_CAP).unwrap().unwrap();
        let hoods: Vec<_> = w.trivializations.iter().map(|t| t.neighborhood.clone()).collect();
        assert_eq!(hoods, vec![vec![0], vec![1]]);
        assert_eq!(w.isomorphisms[0].preimage, vec![0, 1]);
    }

    #[test]
    fn uneven_fibers_fail_condition_one() {
        let g = DigitalMap::new(interval(0, 2), interval(0, 1), vec![0, 0, 1]).unwrap();
        let c = BundleCandidate::new(g, interval(0, 1)).unwrap();
        assert_eq!(
            verify_fiber_bundle(&c, DEFAULT_NEIGHBORHOOD_CAP).unwrap(),
            Err(BundleFailure::FiberNotIsomorphic { base_point: 1 })
        );
    }

    #[test]
    fn identity_is_a_bundle_over_itself() {
        let y = Arc::new(digital_sphere(1, AdjacencySpec::Cl(1)).unwrap());
        let c = BundleCandidate::with_proposed_fiber(DigitalMap::identity(y)).unwrap();
        assert_eq!(c.fiber().len(), 1);
        assert!(verify_fiber_bundle(&c, DEFAULT_NEIGHBORHOOD_CAP).unwrap().is_ok());
    }

    #[test]
    fn disconnected_base_is_rejected() {
        let gap = Arc::new(
            DigitalImage::with_cl(vec![crate::Point::new(vec![0]), crate::Point::new(vec![2])], 1).unwrap(),
        );
        let id = DigitalMap::identity(gap.clone());
        assert!(matches!(BundleCandidate::new(id, gap), Err(Error::Disconnected(_))));
    }

    #[test]
    fn neighborhoods_grow_by_size() {
        let z = interval(0, 2);
        let all: Vec<_> = connected_neighborhoods(&z, 1, 100).collect();
        assert_eq!(all, vec![vec![1], vec![0, 1], vec![1, 2], vec![0, 1, 2]]);
    }

    #[test]
    fn certification_checks_its_data() {
        let y = interval(0, 3);
        let pt = interval(0, 0);
        let c = DigitalMap::constant(y.clone(), pt, 0).unwrap();
        let h = certify_fibration(FibrationKind::Constant, FibrationData::Map(c)).unwrap();
        assert_eq!(h.provenance(), Provenance::CertifiedConstant);
        assert!(certify_fibration(FibrationKind::Constant, FibrationData::Map(step_map())).is_err());
        assert!(certify_fibration(FibrationKind::Projection, FibrationData::Map(step_map())).is_err());

        let left = interval(0, 2);
        let right = interval(0, 1);
        let prod = Arc::new(left.product(&right));
        let p1 = DigitalMap::new(prod, left.clone(), (0..6).map(|i| i / 2).collect()).unwrap();
        let h = certify_fibration(
            FibrationKind::Projection,
            FibrationData::Projection { map: p1.clone(), left: left.clone(), right: right.clone() },
        )
        .unwrap();
        assert_eq!(h.provenance().name(), "certified-projection");
        let swapped = DigitalMap::new(p1.domain().clone(), left.clone(), vec![0, 0, 2, 2, 1, 1]);
        if let Ok(bad) = swapped {
            assert!(certify_fibration(
                FibrationKind::Projection,
                FibrationData::Projection { map: bad, left, right },
            )
            .is_err());
        }
    }

    #[test]
    fn projection_lifts_by_its_recipe() {
        let left = interval(0, 2);
        let right = interval(0, 1);
        let prod = Arc::new(left.product(&right));
        let p1 = DigitalMap::new(prod.clone(), left.clone(), (0..6).map(|i| i / 2).collect()).unwrap();
        let handle = certify_fibration(
            FibrationKind::Projection,
            FibrationData::Projection { map: p1.clone(), left: left.clone(), right },
        )
        .unwrap();
        let a = interval(0, 0);
        let f = DigitalMap::new(a.clone(), prod, vec![1]).unwrap();
        let h = HomotopyTrace::new(a, left, vec![vec![0], vec![1], vec![2]]).unwrap();
        let test = HlpTest { start: f, homotopy: h };
        let lift = recipe_lift(&handle, &test).unwrap();
        assert_eq!(lift.stages(), &[vec![1], vec![3], vec![5]]);
        assert!(check_lift(&p1, &test, &lift));
        let report = spot_check_hlp(&p1, &[test], 10_000).unwrap();
        assert!(report.all_lifted());
    }

    #[test]
    fn a_gap_in_the_total_image_blocks_lifting() {
        let g = DigitalMap::new(interval(0, 2), interval(0, 1), vec![0, 0, 1]).unwrap();
        let a = interval(0, 0);
        let f = DigitalMap::new(a.clone(), interval(0, 2), vec![0]).unwrap();
        let h = HomotopyTrace::new(a.clone(), interval(0, 1), vec![vec![0], vec![1]]).unwrap();
        let ok_f = DigitalMap::new(a.clone(), interval(0, 2), vec![1]).unwrap();
        let bad = HomotopyTrace::new(a, interval(0, 1), vec![vec![1], vec![1]]).unwrap();
        let tests = [
            HlpTest { start: f.clone(), homotopy: h.clone() },
            HlpTest { start: ok_f, homotopy: h },
            HlpTest { start: f, homotopy: bad },
        ];
        let report = spot_check_hlp(&g, &tests, 10_000).unwrap();
        assert!(matches!(report.verdicts[0], HlpVerdict::NotLiftable));
        assert!(matches!(report.verdicts[1], HlpVerdict::Lifted(_)));
        assert!(matches!(report.verdicts[2], HlpVerdict::Malformed(_)));
        assert_eq!(report.refutations(), vec![0]);
        let mut handle = FibrationHandle::unverified(g);
        assert!(!handle.record_spot_check(&report));
        assert_eq!(handle.provenance(), Provenance::Unverified);
    }

    #[test]
    fn one_point_tests_find_the_gap() {
        let g = DigitalMap::new(interval(0, 2), interval(0, 1), vec![0, 0, 1]).unwrap();
        let tests = one_point_tests(&g);
        assert_eq!(tests.len(), 6);
        let report = spot_check_hlp(&g, &tests, 10_000).unwrap();
        // From 0 over 0, moving to 1 needs a step 0 → 2.
        assert_eq!(report.refutations(), vec![1]);
        // The step map is a bundle, yet a point at the end of a fiber cannot
        // follow a one-step move of the base.
        let report = spot_check_hlp(&step_map(), &one_point_tests(&step_map()), 10_000).unwrap();
        assert_eq!(report.refutations(), vec![1, 6]);
    }

    #[test]
    fn substitutes() {
        let g = step_map();
        let mut handle = FibrationHandle::unverified(g.clone());
        let id = DigitalMap::identity(g.domain().clone());
        assert!(verify_fibrational_substitute(&g, &handle, &id, HomotopyBudget::default()).is_err());

        let a = interval(0, 0);
        let f = DigitalMap::new(a.clone(), g.domain().clone(), vec![1]).unwrap();
        let h = HomotopyTrace::new(a, g.codomain().clone(), vec![vec![0], vec![1], vec![0]]).unwrap();
        let report = spot_check_hlp(&g, &[HlpTest { start: f, homotopy: h }], 10_000).unwrap();
        assert!(handle.record_spot_check(&report));
        assert_eq!(handle.evidence(), &[Provenance::Unverified, Provenance::SpotChecked]);
        assert!(verify_fibrational_substitute(&g, &handle, &id, HomotopyBudget::default()).unwrap());

        let shift = DigitalMap::new(g.domain().clone(), g.domain().clone(), vec![1, 2, 3, 3]).unwrap();
        assert!(!verify_fibrational_substitute(&g, &handle, &shift, HomotopyBudget::default()).unwrap());
    }
}
