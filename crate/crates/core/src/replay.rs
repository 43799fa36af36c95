//! Independent witness checker.
//!
//! Nothing here calls into the solvers or into [`crate::lattice`]: images
//! are rebuilt from their documents with a separate adjacency computation,
//! and every certificate is re-validated from first principles.

use std::collections::{BTreeSet, HashSet};

use crate::docs::{AdjacencyDoc, ImageDocument};
use crate::error::{Error, Result};
use crate::report::{InvariantReport, MapData, WitnessDoc};

/// A graph rebuilt from a canonical image document.
struct Graph {
    n: usize,
    edges: HashSet<(usize, usize)>,
}

impl Graph {
    fn from_doc(doc: &ImageDocument) -> std::result::Result<Self, String> {
        let pts = &doc.points;
        if pts.is_empty() {
            return Err("image has no points".into());
        }
        if pts.iter().any(|p| p.0.len() != doc.dim) {
            return Err("point dimension differs from dim".into());
        }
        if pts.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err("points are not strictly sorted".into());
        }
        let mut edges = HashSet::new();
        match &doc.adjacency {
            AdjacencyDoc::Named(name) => {
                let l: usize = name
                    .strip_prefix('c')
                    .and_then(|s| s.parse().ok())
                    .filter(|&l| l >= 1 && l <= doc.dim)
                    .ok_or_else(|| format!("bad adjacency {name:?}"))?;
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        let diffs: Vec<i64> = pts[i].0.iter().zip(&pts[j].0).map(|(a, b)| (a - b).abs()).collect();
                        let moved = diffs.iter().filter(|&&d| d == 1).count();
                        if diffs.iter().all(|&d| d <= 1) && moved >= 1 && moved <= l {
                            edges.insert((i, j));
                        }
                    }
                }
            }
            AdjacencyDoc::Explicit { explicit } => {
                for &[a, b] in explicit {
                    if a >= b || b >= pts.len() {
                        return Err(format!("edge [{a}, {b}] is not canonical"));
                    }
                    edges.insert((a, b));
                }
            }
        }
        Ok(Graph { n: pts.len(), edges })
    }

    fn adj(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    fn near(&self, a: usize, b: usize) -> bool {
        a == b || self.adj(a, b)
    }
}

type Check = std::result::Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn in_range(xs: &[usize], n: usize, what: &str) -> Check {
    ensure(xs.iter().all(|&x| x < n), || format!("{what} index out of range"))
}

struct MapG {
    dom: Graph,
    cod: Graph,
    table: Vec<usize>,
}

fn map_graphs(m: &MapData) -> std::result::Result<MapG, String> {
    let dom = Graph::from_doc(&m.domain)?;
    let cod = Graph::from_doc(&m.codomain)?;
    ensure(m.table.len() == dom.n, || "map table is not total".into())?;
    in_range(&m.table, cod.n, "map table")?;
    Ok(MapG {
        dom,
        cod,
        table: m.table.clone(),
    })
}

fn continuous(dom: &Graph, cod: &Graph, table: &[usize]) -> bool {
    dom.edges.iter().all(|&(a, b)| cod.near(table[a], table[b]))
}

/// Blocks are duplicate-free and cover `0..n`.
fn check_cover(blocks: &[Vec<usize>], n: usize) -> Check {
    let mut seen = vec![false; n];
    for b in blocks {
        in_range(b, n, "block")?;
        let set: BTreeSet<usize> = b.iter().copied().collect();
        ensure(set.len() == b.len(), || "block repeats a point".into())?;
        for &p in b {
            seen[p] = true;
        }
    }
    match seen.iter().position(|&s| !s) {
        Some(p) => Err(format!("point {p} is not covered")),
        None => Ok(()),
    }
}

/// A homotopy given by stages over `dom` into `cod`: total continuous
/// stages with tracks moving by at most one step.
fn check_homotopy(dom: &Graph, cod: &Graph, stages: &[Vec<usize>]) -> Check {
    ensure(!stages.is_empty(), || "homotopy has no stages".into())?;
    for s in stages {
        ensure(s.len() == dom.n, || "stage is not total".into())?;
        in_range(s, cod.n, "stage")?;
        ensure(continuous(dom, cod, s), || "stage is not continuous".into())?;
    }
    for w in stages.windows(2) {
        ensure((0..dom.n).all(|u| cod.near(w[0][u], w[1][u])), || {
            "a track jumps between stages".into()
        })?;
    }
    Ok(())
}

fn induced(g: &Graph, block: &[usize]) -> Graph {
    let mut edges = HashSet::new();
    for (i, &a) in block.iter().enumerate() {
        for (j, &b) in block.iter().enumerate().skip(i + 1) {
            if g.adj(a, b) {
                edges.insert((i, j));
            }
        }
    }
    Graph { n: block.len(), edges }
}

fn check_path_sections(
    host: &ImageDocument,
    second: &ImageDocument,
    map: Option<&[usize]>,
    m: usize,
    relation: &str,
    blocks: &[Vec<usize>],
    paths: &[Vec<Vec<usize>>],
) -> Check {
    let h = Graph::from_doc(host)?;
    let s = Graph::from_doc(second)?;
    let class: Vec<usize> = match map {
        Some(t) => {
            ensure(t.len() == h.n, || "map table is not total".into())?;
            in_range(t, s.n, "map table")?;
            t.to_vec()
        }
        None => {
            ensure(host == second, || "π needs equal factors".into())?;
            (0..h.n).collect()
        }
    };
    let window = match relation {
        "pointwise" => false,
        "window" => true,
        other => return Err(format!("unknown path relation {other:?}")),
    };
    let sn = s.n;
    check_cover(blocks, h.n * sn)?;
    ensure(paths.len() == blocks.len(), || "one path list per block".into())?;
    let related = |p: &[usize], q: &[usize]| {
        (0..=m).all(|t| {
            if window {
                (t.saturating_sub(1)..=(t + 1).min(m)).all(|u| h.near(p[t], q[u]))
            } else {
                h.near(p[t], q[t])
            }
        })
    };
    for (block, ps) in blocks.iter().zip(paths) {
        ensure(ps.len() == block.len(), || "one path per base point".into())?;
        for (&b, p) in block.iter().zip(ps) {
            ensure(p.len() == m + 1, || format!("path over {b} has the wrong length"))?;
            in_range(p, h.n, "path")?;
            ensure(p.windows(2).all(|w| h.near(w[0], w[1])), || {
                format!("lift of {b} is not a digital path")
            })?;
            ensure(p[0] == b / sn && class[p[m]] == b % sn, || {
                format!("path over base point {b} has the wrong end points")
            })?;
        }
        for i in 0..block.len() {
            for j in i + 1..block.len() {
                let (b1, b2) = (block[i], block[j]);
                let base_adj = h.near(b1 / sn, b2 / sn) && s.near(b1 % sn, b2 % sn);
                if base_adj && !related(&ps[i], &ps[j]) {
                    return Err(format!("section is not continuous between base points {b1} and {b2}"));
                }
            }
        }
    }
    Ok(())
}

fn check_map_sections(map: &MapData, blocks: &[Vec<usize>], lifts: &[Vec<usize>]) -> Check {
    let g = map_graphs(map)?;
    check_cover(blocks, g.cod.n)?;
    ensure(lifts.len() == blocks.len(), || "one lift list per block".into())?;
    for (block, ls) in blocks.iter().zip(lifts) {
        ensure(ls.len() == block.len(), || "one lift per point".into())?;
        in_range(ls, g.dom.n, "lift")?;
        for (&z, &y) in block.iter().zip(ls) {
            ensure(g.table[y] == z, || format!("lift of {z} is not in its fiber"))?;
        }
        for i in 0..block.len() {
            for j in i + 1..block.len() {
                if g.cod.adj(block[i], block[j]) && !g.dom.near(ls[i], ls[j]) {
                    return Err(format!("section is not continuous at {} and {}", block[i], block[j]));
                }
            }
        }
    }
    Ok(())
}

fn check_null_homotopies(map: &MapData, blocks: &[Vec<usize>], traces: &[Vec<Vec<usize>>]) -> Check {
    let g = map_graphs(map)?;
    check_cover(blocks, g.dom.n)?;
    ensure(traces.len() == blocks.len(), || "one trace per block".into())?;
    for (block, stages) in blocks.iter().zip(traces) {
        ensure(block.windows(2).all(|w| w[0] < w[1]), || "block is not sorted".into())?;
        let sub = induced(&g.dom, block);
        check_homotopy(&sub, &g.cod, stages)?;
        let first: Vec<usize> = block.iter().map(|&p| g.table[p]).collect();
        ensure(stages[0] == first, || "trace does not start at the restricted map".into())?;
        let last = stages.last().expect("nonempty");
        ensure(last.iter().all(|&v| v == last[0]), || "trace does not end at a constant".into())?;
    }
    Ok(())
}

/// A bijection onto `0..n` preserving adjacency both ways.
fn check_iso(src: &Graph, nodes: &[usize], dst_n: usize, dst_adj: &dyn Fn(usize, usize) -> bool, image: &[usize]) -> Check {
    ensure(image.len() == nodes.len() && nodes.len() == dst_n, || "sizes differ".into())?;
    in_range(image, dst_n, "isomorphism")?;
    let set: BTreeSet<usize> = image.iter().copied().collect();
    ensure(set.len() == dst_n, || "isomorphism is not a bijection".into())?;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if src.adj(nodes[i], nodes[j]) != dst_adj(image[i], image[j]) {
                return Err(format!("adjacency of {} and {} is not preserved", nodes[i], nodes[j]));
            }
        }
    }
    Ok(())
}

fn check_bundle(
    map: &MapData,
    fiber: &ImageDocument,
    isos: &[crate::bundle::FiberIsomorphism],
    trivs: &[crate::bundle::Trivialization],
) -> Check {
    let g = map_graphs(map)?;
    let t = Graph::from_doc(fiber)?;
    ensure(continuous(&g.dom, &g.cod, &g.table), || "projection is not continuous".into())?;
    let pre = |z: &dyn Fn(usize) -> bool| -> Vec<usize> { (0..g.dom.n).filter(|&y| z(g.table[y])).collect() };
    ensure(isos.len() == g.cod.n && trivs.len() == g.cod.n, || "one entry per base point".into())?;
    for (z, iso) in isos.iter().enumerate() {
        ensure(iso.base_point == z, || "isomorphisms are out of order".into())?;
        ensure(iso.preimage == pre(&|w| w == z), || format!("preimage of {z} is wrong"))?;
        check_iso(&g.dom, &iso.preimage, t.n, &|a, b| t.adj(a, b), &iso.image)?;
    }
    let tn = t.n;
    for (z, tr) in trivs.iter().enumerate() {
        ensure(tr.base_point == z, || "trivializations are out of order".into())?;
        let v = &tr.neighborhood;
        in_range(v, g.cod.n, "neighborhood")?;
        ensure(v.windows(2).all(|w| w[0] < w[1]) && v.contains(&z), || {
            format!("neighborhood of {z} is not a sorted set containing it")
        })?;
        let vg = induced(&g.cod, v);
        let mut reached = vec![false; v.len()];
        let mut stack = vec![0];
        reached[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..v.len() {
                if !reached[b] && vg.adj(a, b) {
                    reached[b] = true;
                    stack.push(b);
                }
            }
        }
        ensure(reached.iter().all(|&r| r), || format!("neighborhood of {z} is not connected"))?;
        ensure(tr.preimage == pre(&|w| v.contains(&w)), || format!("preimage over the neighborhood of {z} is wrong"))?;
        ensure(tr.fiber_coord.len() == tr.preimage.len(), || "one fiber coordinate per point".into())?;
        in_range(&tr.fiber_coord, tn, "fiber coordinate")?;
        let image: Vec<usize> = tr
            .preimage
            .iter()
            .zip(&tr.fiber_coord)
            .map(|(&y, &c)| v.iter().position(|&w| w == g.table[y]).expect("in V") * tn + c)
            .collect();
        let prod_adj = |a: usize, b: usize| {
            let (va, ta, vb, tb) = (v[a / tn], a % tn, v[b / tn], b % tn);
            (va, ta) != (vb, tb) && g.cod.near(va, vb) && t.near(ta, tb)
        };
        check_iso(&g.dom, &tr.preimage, v.len() * tn, &prod_adj, &image)?;
    }
    Ok(())
}

fn check_fhe(first: &MapData, second: &MapData, h: &[usize], k: &[usize], kh: &[Vec<usize>], hk: &[Vec<usize>]) -> Check {
    let g1 = map_graphs(first)?;
    let g2 = map_graphs(second)?;
    ensure(first.codomain == second.codomain, || "the maps have different bases".into())?;
    ensure(h.len() == g1.dom.n && k.len() == g2.dom.n, || "h or k is not total".into())?;
    in_range(h, g2.dom.n, "h")?;
    in_range(k, g1.dom.n, "k")?;
    ensure(continuous(&g1.dom, &g2.dom, h) && continuous(&g2.dom, &g1.dom, k), || {
        "h or k is not continuous".into()
    })?;
    ensure((0..g1.dom.n).all(|y| g2.table[h[y]] == g1.table[y]), || "g2 ∘ h differs from g1".into())?;
    ensure((0..g2.dom.n).all(|y| g1.table[k[y]] == g2.table[y]), || "g1 ∘ k differs from g2".into())?;
    for (g, trace, there, back) in [(&g1, kh, h, k), (&g2, hk, k, h)] {
        check_homotopy(&g.dom, &g.dom, trace)?;
        let composed: Vec<usize> = there.iter().map(|&x| back[x]).collect();
        ensure(trace[0] == composed, || "fiber homotopy does not start at the composite".into())?;
        let last = trace.last().expect("nonempty");
        ensure(last.iter().enumerate().all(|(i, &v)| i == v), || "fiber homotopy does not end at the identity".into())?;
        for s in trace {
            ensure(s.iter().enumerate().all(|(u, &v)| g.table[v] == g.table[u]), || {
                "homotopy stage leaves a fiber".into()
            })?;
        }
    }
    Ok(())
}

/// Validate a lifting problem `(A, f, H)` for `map`.
fn check_hlp_problem(map: &MapData, source: &ImageDocument, start: &[usize], homotopy: &[Vec<usize>]) -> std::result::Result<(MapG, Graph), String> {
    let g = map_graphs(map)?;
    let a = Graph::from_doc(source)?;
    ensure(continuous(&g.dom, &g.cod, &g.table), || "map is not continuous".into())?;
    ensure(start.len() == a.n, || "start map is not total".into())?;
    in_range(start, g.dom.n, "start map")?;
    ensure(continuous(&a, &g.dom, start), || "start map is not continuous".into())?;
    check_homotopy(&a, &g.cod, homotopy)?;
    let composed: Vec<usize> = start.iter().map(|&y| g.table[y]).collect();
    ensure(homotopy[0] == composed, || "g ∘ f differs from the start of the homotopy".into())?;
    Ok((g, a))
}

fn check_hlp_lift(map: &MapData, source: &ImageDocument, start: &[usize], homotopy: &[Vec<usize>], lift: &[Vec<usize>]) -> Check {
    let (g, a) = check_hlp_problem(map, source, start, homotopy)?;
    ensure(lift.len() == homotopy.len(), || "lift has the wrong number of stages".into())?;
    check_homotopy(&a, &g.dom, lift)?;
    ensure(lift[0] == start, || "lift does not start at f".into())?;
    for (s, hs) in lift.iter().zip(homotopy) {
        ensure(s.iter().zip(hs).all(|(&y, &z)| g.table[y] == z), || "lift does not cover the homotopy".into())?;
    }
    Ok(())
}

/// Brute force: the set of reachable lifted stages becomes empty.
fn check_hlp_refutation(map: &MapData, source: &ImageDocument, start: &[usize], homotopy: &[Vec<usize>]) -> Check {
    let (g, a) = check_hlp_problem(map, source, start, homotopy)?;
    let mut frontier: BTreeSet<Vec<usize>> = BTreeSet::from([start.to_vec()]);
    for target in &homotopy[1..] {
        let mut next = BTreeSet::new();
        for prev in &frontier {
            let options: Vec<Vec<usize>> = (0..a.n)
                .map(|u| (0..g.dom.n).filter(|&y| g.table[y] == target[u] && g.dom.near(y, prev[u])).collect())
                .collect();
            let mut pick = vec![0usize; a.n];
            enumerate_product(&options, 0, &mut pick, &mut |s| {
                if continuous(&a, &g.dom, s) {
                    next.insert(s.to_vec());
                }
            });
        }
        if next.is_empty() {
            return Ok(());
        }
        frontier = next;
    }
    Err("a lift exists, so the problem is no refutation".into())
}

fn enumerate_product(options: &[Vec<usize>], i: usize, pick: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if i == options.len() {
        visit(pick);
        return;
    }
    for &o in &options[i] {
        pick[i] = o;
        enumerate_product(options, i + 1, pick, visit);
    }
}

/// Problems found in a witness; empty when it checks out.
pub fn check_witness(w: &WitnessDoc) -> Vec<String> {
    let r = match w {
        WitnessDoc::PathSections {
            host,
            second,
            map,
            m,
            relation,
            blocks,
            paths,
        } => check_path_sections(host, second, map.as_deref(), *m, relation, blocks, paths),
        WitnessDoc::MapSections { map, blocks, lifts } => check_map_sections(map, blocks, lifts),
        WitnessDoc::NullHomotopies { map, blocks, traces } => check_null_homotopies(map, blocks, traces),
        WitnessDoc::FiberBundle {
            map,
            fiber,
            isomorphisms,
            trivializations,
        } => check_bundle(map, fiber, isomorphisms, trivializations),
        WitnessDoc::FiberHomotopyEquivalence {
            first,
            second,
            h,
            k,
            kh_trace,
            hk_trace,
        } => check_fhe(first, second, h, k, kh_trace, hk_trace),
        WitnessDoc::HlpLift {
            map,
            source,
            start,
            homotopy,
            lift,
        } => check_hlp_lift(map, source, start, homotopy, lift),
        WitnessDoc::HlpRefutation {
            map,
            source,
            start,
            homotopy,
        } => check_hlp_refutation(map, source, start, homotopy),
    };
    r.err().into_iter().collect()
}

/// Problems found in a report's witness, including a mismatch between the
/// claimed value and the size of a cover witness.
pub fn check_report(rep: &InvariantReport) -> Result<Vec<String>> {
    let w = rep
        .witness
        .as_ref()
        .ok_or_else(|| Error::Malformed("report has no witness".into()))?;
    let mut problems = check_witness(w);
    if let (Some(n), Some(v)) = (w.cover_size(), rep.value) {
        if n != v {
            problems.push(format!("value {v} differs from the {n} blocks of the witness"));
        }
    }
    Ok(problems)
}

/// Whether the report's witness replays.
pub fn replay_witness(rep: &InvariantReport) -> Result<bool> {
    Ok(check_report(rep)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::{genus_of_map, tc_map, tc_space, GenusOptions, SweepOptions};
    use crate::lattice::{digital_interval, digital_sphere, AdjacencySpec};
    use crate::maps::DigitalMap;
    use crate::report::Budgets;
    use std::sync::Arc;

    fn interval(c: i64, d: i64) -> Arc<crate::DigitalImage> {
        Arc::new(digital_interval(c, d).unwrap())
    }

    fn report_of(r: &crate::GenusResult) -> InvariantReport {
        InvariantReport::from_genus("t", r, Budgets::default(), true)
    }

    #[test]
    fn solver_witnesses_replay() {
        let c = Arc::new(digital_sphere(1, AdjacencySpec::Cl(1)).unwrap());
        let rep = report_of(&tc_space(&c, &SweepOptions::default()).unwrap());
        assert_eq!(check_report(&rep).unwrap(), Vec::<String>::new());
        let g = DigitalMap::new(interval(0, 3), interval(0, 1), vec![0, 0, 1, 1]).unwrap();
        assert!(replay_witness(&report_of(&tc_map(&g, &SweepOptions::default()).unwrap())).unwrap());
        assert!(replay_witness(&report_of(&genus_of_map(&g, &GenusOptions::default()).unwrap())).unwrap());
        let cat = crate::genus::cat_space(&c, &GenusOptions::default()).unwrap();
        assert!(replay_witness(&report_of(&cat)).unwrap());
    }

    #[test]
    fn tampering_is_caught() {
        let c = Arc::new(digital_sphere(1, AdjacencySpec::Cl(1)).unwrap());
        let rep = report_of(&tc_space(&c, &SweepOptions::default()).unwrap());

        let mut bad = rep.clone();
        if let Some(WitnessDoc::PathSections { paths, .. }) = &mut bad.witness {
            let p = &mut paths[0][1];
            let last = p.len() - 1;
            p[last] = (p[last] + 1) % 8;
        }
        assert!(!replay_witness(&bad).unwrap());

        let mut bad = rep.clone();
        if let Some(WitnessDoc::PathSections { blocks, paths, .. }) = &mut bad.witness {
            blocks[0].pop();
            paths[0].pop();
        }
        let problems = check_report(&bad).unwrap();
        assert!(problems.iter().any(|p| p.contains("not covered")), "{problems:?}");

        let mut bad = rep;
        bad.value = Some(1);
        assert!(!replay_witness(&bad).unwrap());
        bad.witness = None;
        assert!(replay_witness(&bad).is_err());
    }
}
