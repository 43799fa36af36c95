//! Benchmark fixtures: the named images and maps the solvers are timed on.

use std::sync::Arc;

use digitc::catalog;
use digitc::{DigitalImage, DigitalMap};

/// Images whose TC and category are benchmarked.
pub fn images() -> Vec<(&'static str, Arc<DigitalImage>)> {
    vec![
        ("c8-c1", catalog::c8(1)),
        ("c8-c2", catalog::c8(2)),
        ("h6", catalog::h6()),
        ("interval-0-3", catalog::interval(0, 3)),
    ]
}

/// Maps whose TC and genus are benchmarked.
pub fn maps() -> Vec<(&'static str, DigitalMap)> {
    vec![
        ("constant", catalog::constant_map(3)),
        ("step", catalog::step_map()),
        ("antipodal", catalog::antipodal(1)),
        ("retraction", catalog::retraction_0_2()),
        ("projection-c8", catalog::projection_c8()),
    ]
}
