//! Digital images: finite point sets in `Z^n` with an adjacency relation.
//!
//! Points are sorted lexicographically when an image is built, and every
//! enumeration in the crate iterates in that order. Explicit edge lists are
//! stored as sorted `(i, j)` pairs with `i < j` over the sorted point order.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice point with exact integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Point(coords.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// The point `-u`.
    pub fn negated(&self) -> Point {
        Point(self.0.iter().map(|c| -c).collect())
    }

    /// Concatenation `(u, v)` used for product images.
    pub fn concat(&self, other: &Point) -> Point {
        let mut coords = self.0.clone();
        coords.extend_from_slice(&other.0);
        Point(coords)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i64]> for Point {
    fn from(coords: &[i64]) -> Self {
        Point(coords.to_vec())
    }
}

/// How adjacency is specified for an image.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AdjacencySpec {
    /// The `c_l` relation: at most `l` coordinates differ by exactly one and
    /// all others agree.
    Cl(u32),
    /// Explicit undirected edges over point indices, stored as `(i, j)`, `i < j`.
    Explicit(BTreeSet<(usize, usize)>),
}

impl AdjacencySpec {
    pub fn explicit<I: IntoIterator<Item = (usize, usize)>>(edges: I) -> Self {
        AdjacencySpec::Explicit(
            edges
                .into_iter()
                .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
                .collect(),
        )
    }
}

impl fmt::Display for AdjacencySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdjacencySpec::Cl(l) => write!(f, "c{l}"),
            AdjacencySpec::Explicit(edges) => write!(f, "explicit({} edges)", edges.len()),
        }
    }
}

pub(crate) fn cl_relation(u: &[i64], v: &[i64], l: u32) -> bool {
    let mut moved = 0u32;
    for (a, b) in u.iter().zip(v) {
        match (a - b).abs() {
            0 => {}
            1 => moved += 1,
            _ => return false,
        }
    }
    moved >= 1 && moved <= l
}

/// The `c_l` adjacency predicate on two points of the same dimension.
pub fn cl_adjacent(u: &Point, v: &Point, l: u32) -> Result<bool> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    check_cl(l, u.dim())?;
    Ok(cl_relation(u.coords(), v.coords(), l))
}

fn check_cl(l: u32, dim: usize) -> Result<()> {
    if l == 0 || l as usize > dim {
        return Err(Error::AdjacencyOutOfRange { l, dim });
    }
    Ok(())
}

/// Derive the edge set of `spec` over `points` (indices follow `points`).
fn derive_edges(points: &[Point], spec: &AdjacencySpec) -> Result<BTreeSet<(usize, usize)>> {
    match spec {
        AdjacencySpec::Cl(l) => {
            let dim = points.first().map(Point::dim).unwrap_or(1);
            check_cl(*l, dim)?;
            let mut edges = BTreeSet::new();
            for i in 0..points.len() {
                for j in (i + 1)..points.len() {
                    if cl_relation(points[i].coords(), points[j].coords(), *l) {
                        edges.insert((i, j));
                    }
                }
            }
            Ok(edges)
        }
        AdjacencySpec::Explicit(edges) => {
            for &(a, b) in edges {
                if a == b || a >= points.len() || b >= points.len() {
                    return Err(Error::InvalidEdge(a, b));
                }
            }
            Ok(edges.clone())
        }
    }
}

/// A finite digital image `(Y, κ)`.
#[derive(Clone)]
pub struct DigitalImage {
    dim: usize,
    points: Vec<Point>,
    spec: AdjacencySpec,
    neighbors: Vec<Vec<usize>>,
    matrix: Vec<u64>,
    index: HashMap<Point, usize>,
}

impl fmt::Debug for DigitalImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DigitalImage")
            .field("dim", &self.dim)
            .field("points", &self.points.len())
            .field("edges", &self.edge_count())
            .field("spec", &self.spec)
            .finish()
    }
}

/// Images are equal when they have the same points and the same adjacency
/// relation, however that relation was specified.
impl PartialEq for DigitalImage {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points && self.neighbors == other.neighbors
    }
}

impl Eq for DigitalImage {}

impl DigitalImage {
    /// Build an image. Points are sorted lexicographically; explicit edges are
    /// given against the input order and remapped.
    pub fn new(points: Vec<Point>, spec: AdjacencySpec) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyImage);
        }
        let dim = points[0].dim();
        if dim == 0 {
            return Err(Error::Malformed("points must have at least one coordinate".into()));
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(Error::DuplicatePoint(points[w[0]].to_string()));
            }
        }
        let mut rank = vec![0usize; points.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        let sorted: Vec<Point> = order.iter().map(|&i| points[i].clone()).collect();
        let spec = match spec {
            AdjacencySpec::Cl(l) => AdjacencySpec::Cl(l),
            AdjacencySpec::Explicit(edges) => {
                for &(a, b) in &edges {
                    if a == b || a >= points.len() || b >= points.len() {
                        return Err(Error::InvalidEdge(a, b));
                    }
                }
                AdjacencySpec::explicit(edges.into_iter().map(|(a, b)| (rank[a], rank[b])))
            }
        };
        let edges = derive_edges(&sorted, &spec)?;
        Ok(Self::from_sorted(dim, sorted, spec, &edges))
    }

    pub fn with_cl(points: Vec<Point>, l: u32) -> Result<Self> {
        Self::new(points, AdjacencySpec::Cl(l))
    }

    fn from_sorted(
        dim: usize,
        points: Vec<Point>,
        spec: AdjacencySpec,
        edges: &BTreeSet<(usize, usize)>,
    ) -> Self {
        let n = points.len();
        let words = (n * n).div_ceil(64);
        let mut matrix = vec![0u64; words];
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
            for (x, y) in [(a, b), (b, a)] {
                let bit = x * n + y;
                matrix[bit / 64] |= 1 << (bit % 64);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        DigitalImage {
            dim,
            points,
            spec,
            neighbors,
            matrix,
            index,
        }
    }

    /// Same points under a different adjacency specification.
    pub fn with_spec(&self, spec: AdjacencySpec) -> Result<Self> {
        let edges = derive_edges(&self.points, &spec)?;
        let spec = match spec {
            AdjacencySpec::Explicit(_) => AdjacencySpec::Explicit(edges.clone()),
            other => other,
        };
        Ok(Self::from_sorted(self.dim, self.points.clone(), spec, &edges))
    }

    pub fn singleton(point: Point) -> Self {
        let dim = point.dim();
        Self::from_sorted(dim, vec![point], AdjacencySpec::Cl(1), &BTreeSet::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false: empty images are rejected at construction.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    pub fn spec(&self) -> &AdjacencySpec {
        &self.spec
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// `i` together with its neighbors, in index order.
    pub fn closed_neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = self.neighbors[i].clone();
        let pos = out.partition_point(|&j| j < i);
        out.insert(pos, i);
        out
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Adjacency between two point indices. Panics on out-of-range indices.
    #[inline]
    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        let bit = i * self.points.len() + j;
        self.matrix[bit / 64] >> (bit % 64) & 1 == 1
    }

    /// `i ↔= j`: equal or adjacent.
    #[inline]
    pub fn adjacent_or_equal(&self, i: usize, j: usize) -> bool {
        i == j || self.is_adjacent(i, j)
    }

    /// Checked adjacency query.
    pub fn adjacent(&self, i: usize, j: usize) -> Result<bool> {
        let len = self.len();
        for index in [i, j] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        Ok(self.is_adjacent(i, j))
    }

    /// Edges as sorted `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges().collect()
    }

    /// Graph distances from `source`; `None` for unreachable points.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(Option::is_some)
    }

    /// Largest graph distance between two points; `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.len() {
            for d in self.distances_from(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    pub fn require_connected(&self, what: &str) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected(what.to_string()))
        }
    }

    /// Connected components as sorted index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in &self.neighbors[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// The cartesian product with the four-case product adjacency. The point
    /// `(a_i, b_j)` has index `i * b.len() + j`.
    pub fn product(&self, other: &DigitalImage) -> DigitalImage {
        let nb = other.len();
        let mut points = Vec::with_capacity(self.len() * nb);
        for p in &self.points {
            for q in &other.points {
                points.push(p.concat(q));
            }
        }
        let mut edges = BTreeSet::new();
        for i in 0..self.len() {
            let ci = self.closed_neighbors(i);
            for j in 0..nb {
                let cj = other.closed_neighbors(j);
                let here = i * nb + j;
                for &i2 in &ci {
                    for &j2 in &cj {
                        let there = i2 * nb + j2;
                        if there > here {
                            edges.insert((here, there));
                        }
                    }
                }
            }
        }
        DigitalImage::from_sorted(
            self.dim + other.dim,
            points,
            AdjacencySpec::Explicit(edges.clone()),
            &edges,
        )
    }

    /// Induced subimage on `subset` (any order, duplicates ignored). The i-th
    /// point of the result is the i-th smallest index of `subset`.
    pub fn induced_subimage(&self, subset: &[usize]) -> Result<DigitalImage> {
        let mut keep: Vec<usize> = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::EmptyImage);
        }
        if let Some(&bad) = keep.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.len(),
            });
        }
        let points = keep.iter().map(|&i| self.points[i].clone()).collect();
        let mut edges = BTreeSet::new();
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate().skip(a + 1) {
                if self.is_adjacent(i, j) {
                    edges.insert((a, b));
                }
            }
        }
        Ok(DigitalImage::from_sorted(
            self.dim,
            points,
            AdjacencySpec::Explicit(edges.clone()),
            &edges,
        ))
    }
}

/// Adjacency in a product `Y × Z` between index pairs, per the four cases:
/// each factor stays equal or moves to an adjacent point, and not both stay.
pub fn product_adjacent(
    a: &DigitalImage,
    b: &DigitalImage,
    (u1, v1): (usize, usize),
    (u2, v2): (usize, usize),
) -> bool {
    (u1, v1) != (u2, v2) && a.adjacent_or_equal(u1, u2) && b.adjacent_or_equal(v1, v2)
}

/// Whether every `a`-adjacent pair of `over` is `b`-adjacent. Explicit specs
/// index into `over` as given.
pub fn refines(a: &AdjacencySpec, b: &AdjacencySpec, over: &[Point]) -> Result<bool> {
    let ea = derive_edges(over, a)?;
    let eb = derive_edges(over, b)?;
    Ok(ea.is_subset(&eb))
}

/// The digital interval `[c, d]_Z` with 2-adjacency.
pub fn digital_interval(c: i64, d: i64) -> Result<DigitalImage> {
    if c > d {
        return Err(Error::InvalidInterval(c, d));
    }
    DigitalImage::with_cl((c..=d).map(|x| Point(vec![x])).collect(), 1)
}

/// The digital `n`-sphere `[-1,1]^{n+1} \ {0}` under the supplied adjacency.
pub fn digital_sphere(n: usize, spec: AdjacencySpec) -> Result<DigitalImage> {
    let dim = n + 1;
    let mut points = Vec::new();
    let total = 3usize.pow(dim as u32);
    for code in 0..total {
        let mut c = code;
        let mut coords = vec![0i64; dim];
        for slot in coords.iter_mut().rev() {
            *slot = (c % 3) as i64 - 1;
            c /= 3;
        }
        if coords.iter().any(|&x| x != 0) {
            points.push(Point(coords));
        }
    }
    DigitalImage::new(points, spec)
}
