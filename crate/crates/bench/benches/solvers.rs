use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use digitc::bundle::{one_point_tests, spot_check_hlp, verify_fiber_bundle, BundleCandidate, DEFAULT_NEIGHBORHOOD_CAP};
use digitc::catalog;
use digitc::genus::{cat_space, genus_of_map, tc_map, tc_space};
use digitc::homotopy::are_fhe;
use digitc::path_space::pi_map;
use digitc::{GenusOptions, HomotopyBudget, PathSpace, SweepOptions};
use digitc_bench::{images, maps};

fn spaces(c: &mut Criterion) {
    let mut group = c.benchmark_group("tc_space");
    group.sample_size(10);
    for (name, img) in images() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &img, |b, img| {
            b.iter(|| tc_space(img, &SweepOptions::default()).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("cat_space");
    for (name, img) in images() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &img, |b, img| {
            b.iter(|| cat_space(img, &GenusOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn map_invariants(c: &mut Criterion) {
    let mut group = c.benchmark_group("tc_map");
    group.sample_size(10);
    for (name, g) in maps() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &g, |b, g| {
            b.iter(|| tc_map(g, &SweepOptions::default()).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("genus_of_map");
    for (name, g) in maps() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &g, |b, g| {
            b.iter(|| genus_of_map(g, &GenusOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn path_spaces(c: &mut Criterion) {
    let mut group = c.benchmark_group("path_space");
    for m in [4, 6] {
        group.bench_with_input(BenchmarkId::new("enumerate-c8-c1", m), &m, |b, &m| {
            b.iter(|| PathSpace::enumerate(catalog::c8(1), m).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pi-c8-c1", m), &m, |b, &m| b.iter(|| pi_map(catalog::c8(1), m).unwrap()));
    }
    group.finish();
}

fn bundles(c: &mut Criterion) {
    let candidate = BundleCandidate::new(catalog::step_map(), catalog::step_fiber()).unwrap();
    c.bench_function("bundle/step", |b| b.iter(|| verify_fiber_bundle(&candidate, DEFAULT_NEIGHBORHOOD_CAP).unwrap()));
    let (g1, g2) = (catalog::step_map(), catalog::step_mirror());
    c.bench_function("fhe/step-mirror", |b| b.iter(|| are_fhe(&g1, &g2, HomotopyBudget::default()).unwrap()));
    let p = catalog::projection_c8();
    let tests = one_point_tests(&p);
    c.bench_function("hlp/projection-c8", |b| b.iter(|| spot_check_hlp(&p, &tests, 1_000_000).unwrap()));
}

criterion_group!(benches, spaces, map_invariants, path_spaces, bundles);
criterion_main!(benches);
