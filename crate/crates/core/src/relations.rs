//! Inequalities between computed invariants of a map `g: Y → Z`.
//!
//! Each relation compares exact values only: inputs must be witnessed,
//! exhausted and stabilized, otherwise they are refused.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genus::GenusResult;

/// A quantity attached to a map `g: Y → Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `TC(g)`.
    TcMap,
    /// `TC(Y)`.
    TcDomain,
    /// `TC(Z)`.
    TcCodomain,
    /// `cat(Z)`.
    CatCodomain,
    /// `cat(Y × Z)`.
    CatProduct,
    /// Schwarz genus of `g` itself.
    GenusMap,
    /// `TC(g)` with the domain adjacency replaced by one it contains.
    TcMapCoarserDomain,
    /// `TC(g)` with the codomain adjacency replaced by one containing it.
    TcMapFinerCodomain,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::TcMap => "TC(g)",
            Quantity::TcDomain => "TC(Y)",
            Quantity::TcCodomain => "TC(Z)",
            Quantity::CatCodomain => "cat(Z)",
            Quantity::CatProduct => "cat(Y×Z)",
            Quantity::GenusMap => "genus(g)",
            Quantity::TcMapCoarserDomain => "TC(g) under the coarser domain adjacency",
            Quantity::TcMapFinerCodomain => "TC(g) under the finer codomain adjacency",
        }
    }
}

/// Facts about `g` that decide which relations apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MapFacts {
    /// `g` carries a certified fibration provenance.
    pub certified_fibration: bool,
    /// `None` when not decided.
    pub domain_contractible: Option<bool>,
    pub retraction: bool,
    pub isomorphism: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `cat(Z) ≤ TC(g)`, true for topological spaces.
    CatCodomainLeTc,
    /// `max{cat(Z), genus(g)} ≤ TC(g)`, true for topological spaces.
    MaxCatGenusLeTc,
    /// `TC(g) ≤ min{TC(Y), TC(Z)}`.
    TcLeMinTc,
    /// `TC(g) ≤ cat(Y × Z)` for fibrations.
    TcLeCatProduct,
    /// `TC(g) = cat(Y × Z)` for fibrations with contractible domain.
    TcEqCatProduct,
    /// `TC(r) ≥ genus(r)` for retractions.
    RetractionTcGeGenus,
    /// `TC(r) = 1 ⇒ genus(r) = 1` for retractions.
    RetractionTcOne,
    /// `TC(g) = TC(Y)` for isomorphisms, in particular identities.
    TcIsoEqTc,
    /// Coarsening the domain adjacency does not increase `TC(g)`.
    DomainMonotone,
    /// Refining the codomain adjacency does not decrease `TC(g)`.
    CodomainMonotone,
}

impl Relation {
    pub const ALL: [Relation; 10] = [
        Relation::CatCodomainLeTc,
        Relation::MaxCatGenusLeTc,
        Relation::TcLeMinTc,
        Relation::TcLeCatProduct,
        Relation::TcEqCatProduct,
        Relation::RetractionTcGeGenus,
        Relation::RetractionTcOne,
        Relation::TcIsoEqTc,
        Relation::DomainMonotone,
        Relation::CodomainMonotone,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Relation::CatCodomainLeTc => "cat-codomain-le-tc",
            Relation::MaxCatGenusLeTc => "max-cat-genus-le-tc",
            Relation::TcLeMinTc => "tc-le-min-tc",
            Relation::TcLeCatProduct => "tc-le-cat-product",
            Relation::TcEqCatProduct => "tc-eq-cat-product",
            Relation::RetractionTcGeGenus => "retraction-tc-ge-genus",
            Relation::RetractionTcOne => "retraction-tc-one",
            Relation::TcIsoEqTc => "tc-iso-eq-tc",
            Relation::DomainMonotone => "domain-monotone",
            Relation::CodomainMonotone => "codomain-monotone",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Relation::CatCodomainLeTc => "cat(Z) ≤ TC(g)",
            Relation::MaxCatGenusLeTc => "max{cat(Z), genus(g)} ≤ TC(g)",
            Relation::TcLeMinTc => "TC(g) ≤ min{TC(Y), TC(Z)}",
            Relation::TcLeCatProduct => "TC(g) ≤ cat(Y×Z) for a fibration g",
            Relation::TcEqCatProduct => "TC(g) = cat(Y×Z) for a fibration g with Y contractible",
            Relation::RetractionTcGeGenus => "TC(r) ≥ genus(r) for a retraction r",
            Relation::RetractionTcOne => "TC(r) = 1 implies genus(r) = 1 for a retraction r",
            Relation::TcIsoEqTc => "TC(g) = TC(Y) for an isomorphism g",
            Relation::DomainMonotone => "TC(g) ≥ TC(g) under a coarser domain adjacency",
            Relation::CodomainMonotone => "TC(g) ≤ TC(g) under a finer codomain adjacency",
        }
    }

    /// The quantities this relation reads.
    pub fn needs(self) -> &'static [Quantity] {
        use Quantity::*;
        match self {
            Relation::CatCodomainLeTc => &[TcMap, CatCodomain],
            Relation::MaxCatGenusLeTc => &[TcMap, CatCodomain, GenusMap],
            Relation::TcLeMinTc => &[TcMap, TcDomain, TcCodomain],
            Relation::TcLeCatProduct | Relation::TcEqCatProduct => &[TcMap, CatProduct],
            Relation::RetractionTcGeGenus | Relation::RetractionTcOne => &[TcMap, GenusMap],
            Relation::TcIsoEqTc => &[TcMap, TcDomain],
            Relation::DomainMonotone => &[TcMap, TcMapCoarserDomain],
            Relation::CodomainMonotone => &[TcMap, TcMapFinerCodomain],
        }
    }

    fn hypothesis(self, facts: &MapFacts) -> std::result::Result<(), &'static str> {
        let need = |ok: bool, why| if ok { Ok(()) } else { Err(why) };
        match self {
            Relation::TcLeCatProduct => need(facts.certified_fibration, "g is not a certified fibration"),
            Relation::TcEqCatProduct => {
                need(facts.certified_fibration, "g is not a certified fibration")?;
                need(facts.domain_contractible == Some(true), "Y is not known to be contractible")
            }
            Relation::RetractionTcGeGenus | Relation::RetractionTcOne => {
                need(facts.retraction, "g is not a retraction")
            }
            Relation::TcIsoEqTc => need(facts.isomorphism, "g is not an isomorphism"),
            _ => Ok(()),
        }
    }

    fn evaluate(self, v: &BTreeMap<Quantity, usize>) -> (bool, String) {
        use Quantity::*;
        let q = |k: Quantity| v[&k];
        let tc = q(TcMap);
        match self {
            Relation::CatCodomainLeTc => (q(CatCodomain) <= tc, format!("{} ≤ {tc}", q(CatCodomain))),
            Relation::MaxCatGenusLeTc => {
                let m = q(CatCodomain).max(q(GenusMap));
                (m <= tc, format!("max{{{}, {}}} = {m} ≤ {tc}", q(CatCodomain), q(GenusMap)))
            }
            Relation::TcLeMinTc => {
                let m = q(TcDomain).min(q(TcCodomain));
                (tc <= m, format!("{tc} ≤ min{{{}, {}}} = {m}", q(TcDomain), q(TcCodomain)))
            }
            Relation::TcLeCatProduct => (tc <= q(CatProduct), format!("{tc} ≤ {}", q(CatProduct))),
            Relation::TcEqCatProduct => (tc == q(CatProduct), format!("{tc} = {}", q(CatProduct))),
            Relation::RetractionTcGeGenus => (tc >= q(GenusMap), format!("{tc} ≥ {}", q(GenusMap))),
            Relation::RetractionTcOne => (
                tc != 1 || q(GenusMap) == 1,
                format!("TC(r) = {tc}, genus(r) = {}", q(GenusMap)),
            ),
            Relation::TcIsoEqTc => (tc == q(TcDomain), format!("{tc} = {}", q(TcDomain))),
            Relation::DomainMonotone => {
                (tc >= q(TcMapCoarserDomain), format!("{tc} ≥ {}", q(TcMapCoarserDomain)))
            }
            Relation::CodomainMonotone => {
                (tc <= q(TcMapFinerCodomain), format!("{tc} ≤ {}", q(TcMapFinerCodomain)))
            }
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let squash = |t: &str| t.split_whitespace().collect::<String>();
        Relation::ALL
            .into_iter()
            .find(|r| r.id() == s || squash(r.statement()) == squash(s))
            .ok_or_else(|| {
                let known: Vec<_> = Relation::ALL.iter().map(|r| r.id()).collect();
                Error::Malformed(format!("unknown relation {s:?}; known: {}", known.join(", ")))
            })
    }
}

/// Exact values of some quantities of one map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InequalityInputs {
    pub facts: MapFacts,
    values: BTreeMap<Quantity, usize>,
}

impl InequalityInputs {
    pub fn new(facts: MapFacts) -> Self {
        InequalityInputs {
            facts,
            values: BTreeMap::new(),
        }
    }

    /// Record a computed value, refusing anything that is not exact.
    pub fn record(&mut self, q: Quantity, r: &GenusResult) -> Result<&mut Self> {
        if !(r.found() && r.exhausted && r.stabilized) {
            return Err(Error::Precondition(format!(
                "{} = {} is not exact (witnessed {}, exhausted {}, stabilized {})",
                q.name(),
                r.value,
                r.found(),
                r.exhausted,
                r.stabilized
            )));
        }
        self.values.insert(q, r.value);
        Ok(self)
    }

    /// Record a value known exactly by other means.
    pub fn record_exact(&mut self, q: Quantity, value: usize) -> &mut Self {
        self.values.insert(q, value);
        self
    }

    pub fn get(&self, q: Quantity) -> Option<usize> {
        self.values.get(&q).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CheckStatus {
    Holds { detail: String },
    Violated { detail: String },
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub relation: Relation,
    pub statement: &'static str,
    #[serde(flatten)]
    pub status: CheckStatus,
}

impl RelationCheck {
    pub fn violated(&self) -> bool {
        matches!(self.status, CheckStatus::Violated { .. })
    }

    pub fn holds(&self) -> bool {
        matches!(self.status, CheckStatus::Holds { .. })
    }
}

/// Evaluate one relation.
pub fn check_relation(relation: Relation, inputs: &InequalityInputs) -> RelationCheck {
    let status = match relation.hypothesis(&inputs.facts) {
        Err(reason) => CheckStatus::NotApplicable { reason: reason.into() },
        Ok(()) => match relation.needs().iter().find(|q| !inputs.values.contains_key(q)) {
            Some(q) => CheckStatus::NotApplicable {
                reason: format!("{} was not computed", q.name()),
            },
            None => {
                let (ok, detail) = relation.evaluate(&inputs.values);
                if ok {
                    CheckStatus::Holds { detail }
                } else {
                    CheckStatus::Violated { detail }
                }
            }
        },
    };
    RelationCheck {
        relation,
        statement: relation.statement(),
        status,
    }
}

/// Evaluate every registered relation.
pub fn verify_inequalities(inputs: &InequalityInputs) -> Vec<RelationCheck> {
    Relation::ALL.into_iter().map(|r| check_relation(r, inputs)).collect()
}
