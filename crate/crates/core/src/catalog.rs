//! Named images and maps used throughout tests, benches and the corpus.

use std::sync::Arc;

use crate::lattice::{digital_interval, digital_sphere, AdjacencySpec, DigitalImage, Point};
use crate::maps::DigitalMap;

pub fn interval(c: i64, d: i64) -> Arc<DigitalImage> {
    Arc::new(digital_interval(c, d).expect("c <= d"))
}

/// The eight points of `[-1, 1]²` without the origin, under `c_l`.
pub fn c8(l: u32) -> Arc<DigitalImage> {
    Arc::new(digital_sphere(1, AdjacencySpec::Cl(l)).expect("l is 1 or 2"))
}

/// The hexagon `{(−2,0), (−1,1), (0,1), (1,0), (0,−1), (−1,−1)}` under c2.
pub fn h6() -> Arc<DigitalImage> {
    let pts = [(-2, 0), (-1, 1), (0, 1), (1, 0), (0, -1), (-1, -1)];
    Arc::new(
        DigitalImage::with_cl(pts.iter().map(|&(x, y)| Point::new(vec![x, y])).collect(), 2)
            .expect("valid hexagon"),
    )
}

pub fn singleton(dim: usize) -> Arc<DigitalImage> {
    Arc::new(DigitalImage::singleton(Point::new(vec![0; dim])))
}

/// The step map `[0, 3] → [0, 1]` sending `{0, 1}` to 0 and `{2, 3}` to 1.
pub fn step_map() -> DigitalMap {
    DigitalMap::new(interval(0, 3), interval(0, 1), vec![0, 0, 1, 1]).expect("valid map")
}

/// The mirrored step map `[-3, 0] → [0, 1]`.
pub fn step_mirror() -> DigitalMap {
    DigitalMap::new(interval(-3, 0), interval(0, 1), vec![0, 0, 1, 1]).expect("valid map")
}

/// `h(x) = x − 3` and `k(x) = x + 3` between the domains of [`step_map`] and
/// [`step_mirror`].
pub fn step_shifts() -> (DigitalMap, DigitalMap) {
    let h = DigitalMap::from_fn(interval(0, 3), interval(-3, 0), |p| Point::new(vec![p.0[0] - 3]));
    let k = DigitalMap::from_fn(interval(-3, 0), interval(0, 3), |p| Point::new(vec![p.0[0] + 3]));
    (h.expect("valid map"), k.expect("valid map"))
}

/// The model fiber `[4, 5]` of the step map.
pub fn step_fiber() -> Arc<DigitalImage> {
    interval(4, 5)
}

/// A constant map from `[0, n]` onto a single point.
pub fn constant_map(n: i64) -> DigitalMap {
    DigitalMap::constant(interval(0, n), singleton(1), 0).expect("valid map")
}

/// The first projection `y × z → y`.
pub fn projection(y: &Arc<DigitalImage>, z: &Arc<DigitalImage>) -> DigitalMap {
    let prod = Arc::new(y.product(z));
    let zl = z.len();
    DigitalMap::new(prod, y.clone(), (0..y.len() * zl).map(|i| i / zl).collect()).expect("valid map")
}

/// The projection `C8(c1) × [0, 1] → C8(c1)`.
pub fn projection_c8() -> DigitalMap {
    projection(&c8(1), &interval(0, 1))
}

/// The antipodal map `x ↦ −x` on the eight-point circle under `c_l`.
pub fn antipodal(l: u32) -> DigitalMap {
    let c = c8(l);
    DigitalMap::from_fn(c.clone(), c, Point::negated).expect("the circle is symmetric")
}

/// The retraction `[0, 2] → [0, 1]` with `2 ↦ 1`.
pub fn retraction_0_2() -> DigitalMap {
    DigitalMap::new(interval(0, 2), interval(0, 1), vec![0, 1, 1]).expect("valid map")
}

/// Identity on an image.
pub fn identity(img: &Arc<DigitalImage>) -> DigitalMap {
    DigitalMap::identity(img.clone())
}

/// A named image, for command-line and corpus use.
pub fn image_by_name(name: &str) -> Option<Arc<DigitalImage>> {
    Some(match name {
        "c8-c1" => c8(1),
        "c8-c2" => c8(2),
        "h6" => h6(),
        "interval-0-3" => interval(0, 3),
        "interval-0-1" => interval(0, 1),
        "singleton" => singleton(2),
        _ => return None,
    })
}

/// A named map, for command-line and corpus use.
pub fn map_by_name(name: &str) -> Option<DigitalMap> {
    Some(match name {
        "constant" => constant_map(3),
        "step" => step_map(),
        "step-mirror" => step_mirror(),
        "projection-c8" => projection_c8(),
        "projection-h6" => projection(&h6(), &interval(0, 1)),
        "antipodal" => antipodal(1),
        "retraction" => retraction_0_2(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_instances_are_well_formed() {
        assert_eq!(c8(1).len(), 8);
        assert_eq!(c8(1).edge_count(), 8);
        assert_eq!(c8(2).edge_count(), 12);
        assert_eq!(h6().edge_count(), 6);
        for m in [step_map(), step_mirror(), projection_c8(), antipodal(1), retraction_0_2(), constant_map(2)] {
            assert!(m.is_continuous() && m.is_surjective());
        }
        let (h, k) = step_shifts();
        assert_eq!(h.then(&k).unwrap().table(), &[0, 1, 2, 3]);
        assert!(h.then(&step_mirror()).unwrap().table() == step_map().table());
        assert!(retraction_0_2().is_retraction(&[0, 1]).unwrap());
        assert!(antipodal(1).is_isomorphism());
    }
}
