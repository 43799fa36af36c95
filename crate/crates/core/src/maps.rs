//! Total maps between digital images, stored as index tables.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{DigitalImage, Point};

/// A total map `g : (Y, κ) → (Z, λ)`; `table[i]` is the codomain index of
/// domain point `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitalMap {
    domain: Arc<DigitalImage>,
    codomain: Arc<DigitalImage>,
    table: Vec<usize>,
}

impl DigitalMap {
    pub fn new(
        domain: Arc<DigitalImage>,
        codomain: Arc<DigitalImage>,
        table: Vec<usize>,
    ) -> Result<Self> {
        if table.len() != domain.len() {
            return Err(Error::PartialMap(format!(
                "table has {} entries for {} domain points",
                table.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&t| t >= codomain.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: codomain.len(),
            });
        }
        Ok(DigitalMap {
            domain,
            codomain,
            table,
        })
    }

    /// Build a map from a point-level rule; every image point must exist in
    /// the codomain.
    pub fn from_fn(
        domain: Arc<DigitalImage>,
        codomain: Arc<DigitalImage>,
        rule: impl Fn(&Point) -> Point,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(domain.len());
        for p in domain.points() {
            let q = rule(p);
            let j = codomain
                .index_of(&q)
                .ok_or_else(|| Error::PartialMap(format!("{p} maps to {q}, not in codomain")))?;
            table.push(j);
        }
        Self::new(domain, codomain, table)
    }

    pub fn identity(img: Arc<DigitalImage>) -> Self {
        let table = (0..img.len()).collect();
        DigitalMap {
            domain: img.clone(),
            codomain: img,
            table,
        }
    }

    pub fn constant(
        domain: Arc<DigitalImage>,
        codomain: Arc<DigitalImage>,
        target: usize,
    ) -> Result<Self> {
        let n = domain.len();
        Self::new(domain, codomain, vec![target; n])
    }

    /// Inclusion of `sub` into `ambient` by point identity.
    pub fn inclusion(sub: Arc<DigitalImage>, ambient: Arc<DigitalImage>) -> Result<Self> {
        Self::from_fn(sub, ambient, Point::clone)
    }

    pub fn domain(&self) -> &Arc<DigitalImage> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<DigitalImage> {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply_point(&self, p: &Point) -> Option<&Point> {
        self.domain
            .index_of(p)
            .map(|i| self.codomain.point(self.table[i]))
    }

    /// `g(u) ↔= g(v)` for every domain edge `{u, v}`.
    pub fn is_continuous(&self) -> bool {
        self.domain
            .edges()
            .all(|(u, v)| self.codomain.adjacent_or_equal(self.table[u], self.table[v]))
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.codomain.len()];
        for &t in &self.table {
            hit[t] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.codomain.len()];
        self.table.iter().all(|&t| !std::mem::replace(&mut hit[t], true))
    }

    pub fn is_bijective(&self) -> bool {
        self.domain.len() == self.codomain.len() && self.is_injective()
    }

    pub fn is_constant(&self) -> bool {
        self.table.windows(2).all(|w| w[0] == w[1])
    }

    pub fn inverse(&self) -> Option<DigitalMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut table = vec![0; self.codomain.len()];
        for (i, &t) in self.table.iter().enumerate() {
            table[t] = i;
        }
        Some(DigitalMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            table,
        })
    }

    /// Bijective, continuous, with continuous inverse.
    pub fn is_isomorphism(&self) -> bool {
        match self.inverse() {
            Some(inv) => self.is_continuous() && inv.is_continuous(),
            None => false,
        }
    }

    /// Domain indices mapped to `z`.
    pub fn fiber(&self, z: usize) -> Vec<usize> {
        (0..self.table.len())
            .filter(|&i| self.table[i] == z)
            .collect()
    }

    /// `g ∘ self`. Requires `self`'s codomain to equal `g`'s domain.
    pub fn then(&self, g: &DigitalMap) -> Result<DigitalMap> {
        if *self.codomain != *g.domain {
            return Err(Error::ImageMismatch(
                "codomain of the first map differs from the domain of the second".into(),
            ));
        }
        let composite = DigitalMap {
            domain: self.domain.clone(),
            codomain: g.codomain.clone(),
            table: self.table.iter().map(|&t| g.table[t]).collect(),
        };
        debug_assert!(
            !(self.is_continuous() && g.is_continuous()) || composite.is_continuous(),
            "composition of continuous maps must be continuous"
        );
        Ok(composite)
    }

    /// Restriction to the induced subimage on `subset` of the domain.
    pub fn restrict(&self, subset: &[usize]) -> Result<DigitalMap> {
        let sub = self.domain.induced_subimage(subset)?;
        let mut keep = subset.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let table = keep.iter().map(|&i| self.table[i]).collect();
        Ok(DigitalMap {
            domain: Arc::new(sub),
            codomain: self.codomain.clone(),
            table,
        })
    }

    /// Whether this map is a retraction of its domain onto the subimage
    /// `sub`: continuous, codomain points equal to those of `sub`, and every
    /// point of `sub` fixed.
    pub fn is_retraction(&self, sub: &[usize]) -> Result<bool> {
        if let Some(&bad) = sub.iter().find(|&&i| i >= self.domain.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.domain.len(),
            });
        }
        let mut sub_points: Vec<&Point> = sub.iter().map(|&i| self.domain.point(i)).collect();
        sub_points.sort();
        sub_points.dedup();
        let codomain_points: Vec<&Point> = self.codomain.points().iter().collect();
        if sub_points != codomain_points || !self.is_continuous() {
            return Ok(false);
        }
        let fixes = sub
            .iter()
            .all(|&i| self.codomain.point(self.table[i]) == self.domain.point(i));
        if fixes {
            assert!(self.is_surjective(), "a retraction is onto its codomain");
        }
        Ok(fixes)
    }
}

/// `g ∘ f`.
pub fn compose(f: &DigitalMap, g: &DigitalMap) -> Result<DigitalMap> {
    f.then(g)
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
    fn continuity() {
        assert!(DigitalMap::identity(interval(0, 4)).is_continuous());
        assert!(step_map().is_continuous());
        let h = DigitalMap::new(interval(0, 2), interval(0, 2), vec![0, 2, 0]).unwrap();
        assert!(!h.is_continuous());
    }

    #[test]
    fn surjectivity() {
        assert!(step_map().is_surjective());
        let y = interval(0, 1);
        let yy = Arc::new(y.product(&y));
        let diagonal = DigitalMap::from_fn(y.clone(), yy, |p| p.concat(p)).unwrap();
        assert!(!diagonal.is_surjective());
        assert!(DigitalMap::identity(y).is_surjective());
    }

    #[test]
    fn composition() {
        let f = step_map();
        let id = DigitalMap::identity(f.domain().clone());
        assert_eq!(compose(&id, &f).unwrap(), f);

        let s1 = Arc::new(digital_sphere(1, AdjacencySpec::Cl(1)).unwrap());
        let antipodal = DigitalMap::from_fn(s1.clone(), s1.clone(), Point::negated).unwrap();
        assert_eq!(
            compose(&antipodal, &antipodal).unwrap(),
            DigitalMap::identity(s1)
        );

        let inc = DigitalMap::inclusion(interval(0, 1), interval(0, 3)).unwrap();
        let c = compose(&inc, &f).unwrap();
        assert_eq!(c.table(), &[0, 0]);
        assert!(c.is_constant());

        assert!(matches!(compose(&f, &f), Err(Error::ImageMismatch(_))));
    }

    #[test]
    fn isomorphisms() {
        let alpha = DigitalMap::from_fn(interval(0, 1), interval(4, 5), |p| {
            Point::new(vec![p.0[0] + 4])
        })
        .unwrap();
        assert!(alpha.is_isomorphism());

        // Swap (1,0) with (0,1) on the 4-circle: a bijection whose inverse is
        // not continuous.
        let y = Arc::new(digital_sphere(1, AdjacencySpec::Cl(1)).unwrap());
        let a = y.index_of(&Point::new(vec![1, -1])).unwrap();
        let b = y.index_of(&Point::new(vec![-1, 1])).unwrap();
        let mut table: Vec<usize> = (0..y.len()).collect();
        table.swap(a, b);
        let swap = DigitalMap::new(y.clone(), y.clone(), table).unwrap();
        assert!(swap.is_bijective());
        assert!(!swap.is_isomorphism());
        assert!(DigitalMap::identity(y).is_isomorphism());
    }

    #[test]
    fn retractions() {
        let r = DigitalMap::new(interval(0, 2), interval(0, 1), vec![0, 1, 1]).unwrap();
        assert!(r.is_retraction(&[0, 1]).unwrap());
        let id = DigitalMap::identity(interval(0, 3));
        assert!(id.is_retraction(&[0, 1, 2, 3]).unwrap());
        assert!(!step_map().is_retraction(&[0, 1]).unwrap());
        assert!(r.is_retraction(&[0, 7]).is_err());
    }

    #[test]
    fn partial_tables_are_errors() {
        assert!(matches!(
            DigitalMap::new(interval(0, 3), interval(0, 1), vec![0, 0, 1]),
            Err(Error::PartialMap(_))
        ));
        assert!(DigitalMap::new(interval(0, 1), interval(0, 1), vec![0, 2]).is_err());
    }

    #[test]
    fn restriction_keeps_continuity() {
        let f = step_map();
        let r = f.restrict(&[1, 2]).unwrap();
        assert_eq!(r.table(), &[0, 1]);
        assert!(r.is_continuous());
    }
}
