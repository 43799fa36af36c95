//! Invariant reports and their serializable witnesses.
//!
//! A report carries everything needed to reproduce a result: the budgets
//! in force, the sweep history and a witness whose images are embedded as
//! canonical documents. Witnesses are checked by [`crate::replay`], which
//! shares no code with the solvers.

use serde::{Deserialize, Serialize};

use crate::bundle::{BundleCandidate, BundleWitness, FiberIsomorphism, HlpTest, Trivialization};
use crate::docs::ImageDocument;
use crate::genus::{GenusResult, Witness};
use crate::homotopy::{FheWitness, HomotopyTrace};
use crate::maps::DigitalMap;

pub const SCHEMA: &str = "digitc.report/1";

/// Budgets in force for a computation; unset fields did not apply.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csp_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_nodes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_nodes: Option<usize>,
}

/// One map's images and table, as stored in witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapData {
    pub domain: ImageDocument,
    pub codomain: ImageDocument,
    pub table: Vec<usize>,
}

impl MapData {
    pub fn of(map: &DigitalMap) -> Self {
        MapData {
            domain: ImageDocument::from_image(map.domain(), None),
            codomain: ImageDocument::from_image(map.codomain(), None),
            table: map.table().to_vec(),
        }
    }
}

/// A serializable certificate. Every index refers to the sorted point
/// order of the embedded documents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WitnessDoc {
    /// Sections of `(α(0), g(α(m)))` over blocks of `host × second`; base
    /// point `(y, z)` has index `y * |second| + z`. Without `map`, `g` is
    /// the identity of the host.
    PathSections {
        host: ImageDocument,
        second: ImageDocument,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<Vec<usize>>,
        m: usize,
        relation: String,
        blocks: Vec<Vec<usize>>,
        paths: Vec<Vec<Vec<usize>>>,
    },
    /// Right inverses of a map over blocks of its codomain.
    MapSections {
        map: MapData,
        blocks: Vec<Vec<usize>>,
        lifts: Vec<Vec<usize>>,
    },
    /// Null-homotopies of a map restricted to sorted blocks of its domain;
    /// `traces[i][t][k]` is the image of `blocks[i][k]` at time `t`.
    NullHomotopies {
        map: MapData,
        blocks: Vec<Vec<usize>>,
        traces: Vec<Vec<Vec<usize>>>,
    },
    FiberBundle {
        map: MapData,
        fiber: ImageDocument,
        isomorphisms: Vec<FiberIsomorphism>,
        trivializations: Vec<Trivialization>,
    },
    /// A fiber homotopy equivalence `h: Y1 → Y2`, `k: Y2 → Y1` over a base.
    FiberHomotopyEquivalence {
        first: MapData,
        second: MapData,
        h: Vec<usize>,
        k: Vec<usize>,
        kh_trace: Vec<Vec<usize>>,
        hk_trace: Vec<Vec<usize>>,
    },
    /// A lift of a homotopy through `map`.
    HlpLift {
        map: MapData,
        source: ImageDocument,
        start: Vec<usize>,
        homotopy: Vec<Vec<usize>>,
        lift: Vec<Vec<usize>>,
    },
    /// A homotopy-lifting problem with no solution: `map` is not a fibration.
    HlpRefutation {
        map: MapData,
        source: ImageDocument,
        start: Vec<usize>,
        homotopy: Vec<Vec<usize>>,
    },
}

impl WitnessDoc {
    pub fn from_witness(w: &Witness) -> Self {
        match w {
            Witness::PathSections {
                host,
                second,
                map,
                m,
                relation,
                blocks,
                paths,
            } => WitnessDoc::PathSections {
                host: ImageDocument::from_image(host, None),
                second: ImageDocument::from_image(second, None),
                map: map.as_ref().map(|g| g.table().to_vec()),
                m: *m,
                relation: relation.name().to_string(),
                blocks: blocks.clone(),
                paths: paths.clone(),
            },
            Witness::MapSections { map, blocks, lifts } => WitnessDoc::MapSections {
                map: MapData::of(map),
                blocks: blocks.clone(),
                lifts: lifts.clone(),
            },
            Witness::NullHomotopies { map, blocks, traces } => {
                let mut pairs: Vec<(Vec<usize>, Vec<Vec<usize>>)> = blocks
                    .iter()
                    .zip(traces)
                    .map(|(b, t)| sorted_block(b, t.stages()))
                    .collect();
                pairs.sort();
                let (blocks, traces) = pairs.into_iter().unzip();
                WitnessDoc::NullHomotopies {
                    map: MapData::of(map),
                    blocks,
                    traces,
                }
            }
        }
    }

    pub fn bundle(c: &BundleCandidate, w: &BundleWitness) -> Self {
        WitnessDoc::FiberBundle {
            map: MapData::of(c.map()),
            fiber: ImageDocument::from_image(c.fiber(), None),
            isomorphisms: w.isomorphisms.clone(),
            trivializations: w.trivializations.clone(),
        }
    }

    pub fn fhe(g1: &DigitalMap, g2: &DigitalMap, w: &FheWitness) -> Self {
        WitnessDoc::FiberHomotopyEquivalence {
            first: MapData::of(g1),
            second: MapData::of(g2),
            h: w.h.table().to_vec(),
            k: w.k.table().to_vec(),
            kh_trace: w.kh_trace.stages().to_vec(),
            hk_trace: w.hk_trace.stages().to_vec(),
        }
    }

    pub fn hlp_lift(g: &DigitalMap, test: &HlpTest, lift: &HomotopyTrace) -> Self {
        WitnessDoc::HlpLift {
            map: MapData::of(g),
            source: ImageDocument::from_image(test.start.domain(), None),
            start: test.start.table().to_vec(),
            homotopy: test.homotopy.stages().to_vec(),
            lift: lift.stages().to_vec(),
        }
    }

    pub fn hlp_refutation(g: &DigitalMap, test: &HlpTest) -> Self {
        WitnessDoc::HlpRefutation {
            map: MapData::of(g),
            source: ImageDocument::from_image(test.start.domain(), None),
            start: test.start.table().to_vec(),
            homotopy: test.homotopy.stages().to_vec(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WitnessDoc::PathSections { .. } => "path-sections",
            WitnessDoc::MapSections { .. } => "map-sections",
            WitnessDoc::NullHomotopies { .. } => "null-homotopies",
            WitnessDoc::FiberBundle { .. } => "fiber-bundle",
            WitnessDoc::FiberHomotopyEquivalence { .. } => "fiber-homotopy-equivalence",
            WitnessDoc::HlpLift { .. } => "hlp-lift",
            WitnessDoc::HlpRefutation { .. } => "hlp-refutation",
        }
    }

    /// Number of blocks of a cover witness.
    pub fn cover_size(&self) -> Option<usize> {
        match self {
            WitnessDoc::PathSections { blocks, .. }
            | WitnessDoc::MapSections { blocks, .. }
            | WitnessDoc::NullHomotopies { blocks, .. } => Some(blocks.len()),
            _ => None,
        }
    }
}

/// Sort a block and permute the columns of its trace alike.
fn sorted_block(block: &[usize], stages: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut order: Vec<usize> = (0..block.len()).collect();
    order.sort_by_key(|&k| block[k]);
    let b = order.iter().map(|&k| block[k]).collect();
    let t = stages
        .iter()
        .map(|s| order.iter().map(|&k| s[k]).collect())
        .collect();
    (b, t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantReport {
    pub schema: String,
    /// Command or invariant name, such as `tc` or `bundle`.
    pub invariant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    /// Numeric value of a minimal-cover invariant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<usize>,
    /// Verdict of a yes/no check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_used: Option<usize>,
    pub stabilized: bool,
    pub exhausted: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<[usize; 2]>,
    pub budgets: Budgets,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_adjacency: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Command-specific structured data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl InvariantReport {
    pub fn new(invariant: impl Into<String>, budgets: Budgets) -> Self {
        InvariantReport {
            schema: SCHEMA.to_string(),
            invariant: invariant.into(),
            subject: None,
            value: None,
            verdict: None,
            m_used: None,
            stabilized: false,
            exhausted: false,
            history: Vec::new(),
            budgets,
            path_adjacency: None,
            witness: None,
            notes: Vec::new(),
            details: None,
        }
    }

    /// A report of a minimal-cover computation. The witness is embedded
    /// only when `with_witness` is set.
    pub fn from_genus(invariant: impl Into<String>, r: &GenusResult, budgets: Budgets, with_witness: bool) -> Self {
        let mut rep = Self::new(invariant, budgets);
        rep.value = Some(r.value);
        rep.m_used = r.m_used;
        rep.stabilized = r.stabilized;
        rep.exhausted = r.exhausted;
        rep.history = r.history.iter().map(|&(m, v)| [m, v]).collect();
        rep.notes = r.notes.clone();
        if let Some(Witness::PathSections { relation, .. }) = &r.witness {
            rep.path_adjacency = Some(relation.name().to_string());
        }
        if with_witness {
            rep.witness = r.witness.as_ref().map(WitnessDoc::from_witness);
        }
        if r.witness.is_none() {
            rep.notes.push(format!("no cover found with at most {} blocks", r.value - 1));
        }
        rep
    }

    pub fn with_subject(mut self, subject: Option<String>) -> Self {
        self.subject = subject;
        self
    }

    /// Exact: witnessed (when a value is claimed), exhausted and stabilized.
    pub fn is_exact(&self) -> bool {
        self.exhausted && self.stabilized
    }

    /// One line of compact JSON.
    pub fn to_machine(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    pub fn parse(line: &str) -> crate::Result<Self> {
        let rep: Self = serde_json::from_str(line)
            .map_err(|e| crate::Error::Malformed(format!("report: {e}")))?;
        if rep.schema != SCHEMA {
            return Err(crate::Error::Malformed(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                rep.schema
            )));
        }
        Ok(rep)
    }

    /// Human-oriented rendering; not a stable format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let head = match &self.subject {
            Some(s) => format!("{} [{s}]", self.invariant),
            None => self.invariant.clone(),
        };
        out.push_str(&head);
        if let Some(v) = self.value {
            out.push_str(&format!(": {v}"));
        }
        if let Some(v) = self.verdict {
            out.push_str(&format!(": {v}"));
        }
        out.push('\n');
        if let Some(m) = self.m_used {
            out.push_str(&format!("  m used: {m}\n"));
        }
        out.push_str(&format!(
            "  exhausted: {}, stabilized: {}\n",
            self.exhausted, self.stabilized
        ));
        if !self.history.is_empty() {
            let h: Vec<String> = self.history.iter().map(|[m, v]| format!("m={m}→{v}")).collect();
            out.push_str(&format!("  history: {}\n", h.join(", ")));
        }
        if let Some(rel) = &self.path_adjacency {
            out.push_str(&format!("  path adjacency: {rel}\n"));
        }
        let budgets = serde_json::to_string(&self.budgets).expect("budgets serialize");
        out.push_str(&format!("  budgets: {budgets}\n"));
        if let Some(w) = &self.witness {
            out.push_str(&format!("  witness: {}", w.kind()));
            if let Some(n) = w.cover_size() {
                out.push_str(&format!(" with {n} blocks"));
            }
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        if let Some(d) = &self.details {
            out.push_str(&format!("  details: {d}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::{tc_space, SweepOptions};
    use crate::lattice::{digital_sphere, AdjacencySpec};
    use std::sync::Arc;

    #[test]
    fn reports_round_trip() {
        let c = Arc::new(digital_sphere(1, AdjacencySpec::Cl(1)).unwrap());
        let r = tc_space(&c, &SweepOptions::default()).unwrap();
        let rep = InvariantReport::from_genus("tc", &r, Budgets::default(), true);
        let line = rep.to_machine();
        assert!(!line.contains('\n'));
        assert_eq!(InvariantReport::parse(&line).unwrap(), rep);
        assert_eq!(rep.history, vec![[4, 2], [5, 2], [6, 2]]);
        assert_eq!(rep.path_adjacency.as_deref(), Some("pointwise"));
        assert!(rep.to_text().starts_with("tc: 2\n"));
    }

    #[test]
    fn schema_is_checked() {
        let mut rep = InvariantReport::new("tc", Budgets::default());
        rep.schema = "other/9".into();
        assert!(InvariantReport::parse(&rep.to_machine()).is_err());
    }
}
