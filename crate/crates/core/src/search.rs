//! Counterexample search over families of small images and maps.
//!
//! Instances are enumerated in a fixed order (by size, then table), the
//! quantities a relation needs are computed per instance, and an instance
//! is reported as a violator only when every input is exact. Anything
//! else lands in `inconclusive` with the reason; nothing is skipped
//! silently.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundle::{certify_fibration, FibrationData, FibrationKind};
use crate::catalog;
use crate::error::{Error, Result};
use crate::genus::{cat_space, genus_of_map, tc_map, tc_space, GenusOptions, GenusResult, SweepOptions};
use crate::homotopy::{is_contractible, HomotopyBudget, Outcome};
use crate::lattice::{AdjacencySpec, DigitalImage, Point};
use crate::maps::DigitalMap;
use crate::relations::{check_relation, InequalityInputs, MapFacts, Quantity, Relation, RelationCheck};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Continuous surjections `[0, a] → [0, b]`, up to reversing either end.
    IntervalsToIntervals,
    /// First projections `Y × Z → Y` for small intervals and named images.
    ProductsWithProjection,
    /// Identities of connected subsets of `Z²` under c1 and c2, up to
    /// translation.
    SubsetsOfZ2,
}

impl Family {
    pub fn id(self) -> &'static str {
        match self {
            Family::IntervalsToIntervals => "intervals-to-intervals",
            Family::ProductsWithProjection => "products-with-projection",
            Family::SubsetsOfZ2 => "subsets-of-z2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        let s = s.strip_suffix("-up-to-size-8").unwrap_or(&s);
        [Family::IntervalsToIntervals, Family::ProductsWithProjection, Family::SubsetsOfZ2]
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::Malformed(format!("unknown family {s:?}")))
    }
}

/// Size bounds of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyBounds {
    /// Largest domain (for projections: largest first factor).
    pub max_domain: usize,
    /// Largest codomain (for projections: largest second factor).
    pub max_codomain: usize,
}

impl Default for FamilyBounds {
    fn default() -> Self {
        FamilyBounds {
            max_domain: 4,
            max_codomain: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub map: DigitalMap,
    /// The map is a first projection (a certified fibration).
    pub projection: bool,
}

fn interval_maps(bounds: FamilyBounds) -> Vec<Instance> {
    let mut out = Vec::new();
    for a in 1..=bounds.max_domain {
        for b in 1..=bounds.max_codomain.min(a) {
            let y = catalog::interval(0, a as i64 - 1);
            let z = catalog::interval(0, b as i64 - 1);
            let mut seen = BTreeSet::new();
            for table in (0..a).map(|_| 0..b).multi_cartesian_product() {
                let canon = [false, true]
                    .into_iter()
                    .cartesian_product([false, true])
                    .map(|(rev_y, rev_z)| {
                        let mut t: Vec<usize> = table.iter().map(|&v| if rev_z { b - 1 - v } else { v }).collect();
                        if rev_y {
                            t.reverse();
                        }
                        t
                    })
                    .min()
                    .expect("four variants");
                if !seen.insert(canon.clone()) {
                    continue;
                }
                let map = DigitalMap::new(y.clone(), z.clone(), canon.clone()).expect("in range");
                if map.is_continuous() && map.is_surjective() {
                    out.push(Instance {
                        name: format!("[0,{}]→[0,{}] {:?}", a - 1, b - 1, canon),
                        map,
                        projection: false,
                    });
                }
            }
        }
    }
    out
}

fn projections(bounds: FamilyBounds) -> Vec<Instance> {
    let mut factors: Vec<(String, Arc<DigitalImage>)> = (1..=bounds.max_domain)
        .map(|n| (format!("[0,{}]", n - 1), catalog::interval(0, n as i64 - 1)))
        .collect();
    for (name, img) in [("C8(c1)", catalog::c8(1)), ("C8(c2)", catalog::c8(2)), ("H6(c2)", catalog::h6())] {
        if img.len() <= bounds.max_domain {
            factors.push((name.to_string(), img));
        }
    }
    factors.sort_by_key(|(_, img)| img.len());
    let mut out = Vec::new();
    for (yn, y) in &factors {
        for b in 1..=bounds.max_codomain {
            let z = catalog::interval(0, b as i64 - 1);
            out.push(Instance {
                name: format!("p1: {yn}×[0,{}]→{yn}", b - 1),
                map: catalog::projection(y, &z),
                projection: true,
            });
        }
    }
    out
}

/// Connected subsets of `Z²` with at most `max` points under `c_l`, with
/// minimum coordinates zero.
fn z2_subsets(max: usize, l: u32) -> Vec<BTreeSet<(i64, i64)>> {
    let steps: Vec<(i64, i64)> = (-1..=1)
        .cartesian_product(-1..=1)
        .filter(|&(dx, dy): &(i64, i64)| {
            let moved = (dx != 0) as u32 + (dy != 0) as u32;
            moved >= 1 && moved <= l
        })
        .collect();
    let normalize = |s: &BTreeSet<(i64, i64)>| -> BTreeSet<(i64, i64)> {
        let mx = s.iter().map(|p| p.0).min().expect("nonempty");
        let my = s.iter().map(|p| p.1).min().expect("nonempty");
        s.iter().map(|&(x, y)| (x - mx, y - my)).collect()
    };
    let mut all = Vec::new();
    let mut level: BTreeSet<BTreeSet<(i64, i64)>> = BTreeSet::from([BTreeSet::from([(0, 0)])]);
    for _ in 0..max {
        all.extend(level.iter().cloned());
        let mut next = BTreeSet::new();
        for s in &level {
            for &(x, y) in s {
                for &(dx, dy) in &steps {
                    let q = (x + dx, y + dy);
                    if !s.contains(&q) {
                        let mut grown = s.clone();
                        grown.insert(q);
                        next.insert(normalize(&grown));
                    }
                }
            }
        }
        level = next;
    }
    all
}

fn z2_identities(bounds: FamilyBounds) -> Vec<Instance> {
    let mut out = Vec::new();
    for l in [1, 2] {
        for s in z2_subsets(bounds.max_domain, l) {
            let pts: Vec<Point> = s.iter().map(|&(x, y)| Point::new(vec![x, y])).collect();
            let name = format!("id on {:?} (c{l})", s.iter().collect_vec());
            let img = Arc::new(DigitalImage::with_cl(pts, l).expect("valid subset"));
            out.push(Instance {
                name,
                map: DigitalMap::identity(img),
                projection: false,
            });
        }
    }
    out.sort_by_key(|i| i.map.domain().len());
    out
}

/// The instances of a family, smallest first.
pub fn instances(family: Family, bounds: FamilyBounds) -> Vec<Instance> {
    match family {
        Family::IntervalsToIntervals => interval_maps(bounds),
        Family::ProductsWithProjection => projections(bounds),
        Family::SubsetsOfZ2 => z2_identities(bounds),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub sweep: SweepOptions,
    pub homotopy: HomotopyBudget,
    /// Worker threads; `Some(1)` gives a single-threaded run.
    pub threads: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            sweep: SweepOptions::default(),
            homotopy: HomotopyBudget::default(),
            threads: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub instance: String,
    pub domain_size: usize,
    pub codomain_size: usize,
    pub check: RelationCheck,
    /// `(quantity, value)` for every input used.
    pub values: Vec<(Quantity, usize)>,
    #[serde(skip)]
    pub map: DigitalMap,
}

#[derive(Clone, Debug, Serialize)]
pub struct Inconclusive {
    pub instance: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SearchReport {
    pub checked: usize,
    pub holds: usize,
    pub not_applicable: usize,
    pub violations: Vec<Violation>,
    pub inconclusive: Vec<Inconclusive>,
}

impl SearchReport {
    /// Violators of the smallest `(|Y|, |Z|)` found.
    pub fn minimal(&self) -> Vec<&Violation> {
        let Some(best) = self.violations.iter().map(|v| (v.domain_size, v.codomain_size)).min() else {
            return Vec::new();
        };
        self.violations
            .iter()
            .filter(|v| (v.domain_size, v.codomain_size) == best)
            .collect()
    }
}

enum InstanceOutcome {
    Checked(Box<Violation>),
    Inconclusive(String),
}

fn respec(img: &DigitalImage, l: u32) -> Option<Arc<DigitalImage>> {
    match img.spec() {
        AdjacencySpec::Cl(_) if l >= 1 && l as usize <= img.dim() => img.with_spec(AdjacencySpec::Cl(l)).ok().map(Arc::new),
        _ => None,
    }
}

fn quantity(q: Quantity, inst: &Instance, opts: &SearchOptions) -> Result<Option<GenusResult>> {
    let g = &inst.map;
    let genus = GenusOptions {
        homotopy: opts.homotopy,
        ..opts.sweep.genus
    };
    Ok(Some(match q {
        Quantity::TcMap => tc_map(g, &opts.sweep)?,
        Quantity::TcDomain => tc_space(g.domain(), &opts.sweep)?,
        Quantity::TcCodomain => tc_space(g.codomain(), &opts.sweep)?,
        Quantity::CatCodomain => cat_space(g.codomain(), &genus)?,
        Quantity::CatProduct => cat_space(&Arc::new(g.domain().product(g.codomain())), &genus)?,
        Quantity::GenusMap => genus_of_map(g, &genus)?,
        Quantity::TcMapCoarserDomain | Quantity::TcMapFinerCodomain => {
            let (dom, cod) = (g.domain(), g.codomain());
            let (new_dom, new_cod) = match (q, dom.spec(), cod.spec()) {
                (Quantity::TcMapCoarserDomain, AdjacencySpec::Cl(l), _) => (respec(dom, l - 1), Some(cod.clone())),
                (Quantity::TcMapFinerCodomain, _, AdjacencySpec::Cl(l)) => (Some(dom.clone()), respec(cod, l + 1)),
                _ => (None, None),
            };
            let (Some(d), Some(c)) = (new_dom, new_cod) else {
                return Ok(None);
            };
            let alt = DigitalMap::new(d, c, g.table().to_vec())?;
            if !alt.is_continuous() || !alt.domain().is_connected() || !alt.codomain().is_connected() {
                return Ok(None);
            }
            tc_map(&alt, &opts.sweep)?
        }
    }))
}

fn facts(inst: &Instance, opts: &SearchOptions) -> Result<MapFacts> {
    let g = &inst.map;
    let certified_fibration = inst.projection && {
        let cod = g.codomain().clone();
        let zl = g.domain().len() / cod.len();
        let right = catalog::interval(0, zl as i64 - 1);
        certify_fibration(
            FibrationKind::Projection,
            FibrationData::Projection {
                map: g.clone(),
                left: cod,
                right,
            },
        )
        .is_ok()
    };
    let domain_contractible = match is_contractible(g.domain(), opts.homotopy)? {
        Outcome::Found(_) => Some(true),
        Outcome::Exhausted => Some(false),
        Outcome::BudgetHit => None,
    };
    let sub: Option<Vec<usize>> = g.codomain().points().iter().map(|p| g.domain().index_of(p)).collect();
    let retraction = match sub {
        Some(sub) => g.is_retraction(&sub)?,
        None => false,
    };
    Ok(MapFacts {
        certified_fibration,
        domain_contractible,
        retraction,
        isomorphism: g.is_isomorphism(),
    })
}

fn run_instance(inst: &Instance, relation: Relation, opts: &SearchOptions) -> Result<InstanceOutcome> {
    let mut inputs = InequalityInputs::new(facts(inst, opts)?);
    let gated = check_relation(relation, &inputs);
    if let crate::relations::CheckStatus::NotApplicable { reason } = &gated.status {
        if !reason.ends_with("was not computed") {
            return Ok(InstanceOutcome::Checked(Box::new(violation(inst, gated, Vec::new()))));
        }
    }
    let mut values = Vec::new();
    for &q in relation.needs() {
        let r = match quantity(q, inst, opts) {
            Ok(Some(r)) => r,
            Ok(None) => {
                let check = check_relation(relation, &inputs);
                return Ok(InstanceOutcome::Checked(Box::new(violation(inst, check, values))));
            }
            Err(e) if e.is_budget() => return Ok(InstanceOutcome::Inconclusive(e.to_string())),
            Err(e) => return Err(e),
        };
        if let Err(e) = inputs.record(q, &r) {
            return Ok(InstanceOutcome::Inconclusive(e.to_string()));
        }
        values.push((q, r.value));
    }
    let check = check_relation(relation, &inputs);
    Ok(InstanceOutcome::Checked(Box::new(violation(inst, check, values))))
}

fn violation(inst: &Instance, check: RelationCheck, values: Vec<(Quantity, usize)>) -> Violation {
    Violation {
        instance: inst.name.clone(),
        domain_size: inst.map.domain().len(),
        codomain_size: inst.map.codomain().len(),
        check,
        values,
        map: inst.map.clone(),
    }
}

/// Check `relation` on every instance of `family`.
pub fn search_counterexamples(
    family: Family,
    bounds: FamilyBounds,
    relation: Relation,
    opts: &SearchOptions,
) -> Result<SearchReport> {
    let list = instances(family, bounds);
    let work = || -> Vec<Result<InstanceOutcome>> {
        list.par_iter().map(|inst| run_instance(inst, relation, opts)).collect()
    };
    let outcomes = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut report = SearchReport::default();
    for (inst, out) in list.iter().zip(outcomes) {
        match out? {
            InstanceOutcome::Inconclusive(reason) => report.inconclusive.push(Inconclusive {
                instance: inst.name.clone(),
                reason,
            }),
            InstanceOutcome::Checked(v) => {
                report.checked += 1;
                if v.check.violated() {
                    report.violations.push(*v);
                } else if v.check.holds() {
                    report.holds += 1;
                } else {
                    report.not_applicable += 1;
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_family_is_canonical() {
        let list = instances(Family::IntervalsToIntervals, FamilyBounds::default());
        let names: Vec<&str> = list.iter().map(|i| i.name.as_str()).collect();
        assert!(names.contains(&"[0,3]→[0,1] [0, 0, 1, 1]"));
        assert!(!names.contains(&"[0,3]→[0,1] [1, 1, 0, 0]"));
        for inst in &list {
            assert!(inst.map.is_continuous() && inst.map.is_surjective());
        }
        // Every surjection onto [0,1] is continuous. Up to reversing either
        // end: 4 constants, then 1, 2 and 5 orbits of 2, 6 and 14 surjections.
        assert_eq!(list.len(), 4 + 1 + 2 + 5);
    }

    #[test]
    fn z2_subsets_are_counted_up_to_translation() {
        let sizes = |l| {
            let all = z2_subsets(3, l);
            (1..=3).map(|n| all.iter().filter(|s| s.len() == n).count()).collect::<Vec<_>>()
        };
        assert_eq!(sizes(1), vec![1, 2, 6]);
        assert_eq!(sizes(2), vec![1, 4, 20]);
    }

    #[test]
    fn identity_law_has_no_violators() {
        let opts = SearchOptions {
            threads: Some(1),
            ..Default::default()
        };
        let r = search_counterexamples(Family::IntervalsToIntervals, FamilyBounds::default(), Relation::TcIsoEqTc, &opts)
            .unwrap();
        assert!(r.violations.is_empty() && r.inconclusive.is_empty());
        assert_eq!(r.holds, 2);
        assert_eq!(r.checked, 12);
    }
}
