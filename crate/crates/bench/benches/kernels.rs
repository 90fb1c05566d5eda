use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ucasimir::curved::{f_exact, phi_exact};
use ucasimir::dielectric::MaterialModel;
use ucasimir::numerics::linalg::logdet_one_minus;
use ucasimir::numerics::special::BesselTable;
use ucasimir::numerics::{integrate_semi_infinite, SquareMatrix};
use ucasimir::planar::{matsubara_term_slab, PlanarGeometry};
use ucasimir::{ChannelTruncation, CylinderPair, SpherePair, ThermalContext, TruncationConfig};

fn quadrature(c: &mut Criterion) {
    let cfg = TruncationConfig::default();
    c.bench_function("semi_infinite_zeta3", |b| {
        b.iter(|| integrate_semi_infinite(|x| x * (-(-x).exp()).ln_1p(), 1.0, black_box(&cfg)))
    });
}

fn dense_logdet(c: &mut Criterion) {
    let m = SquareMatrix::from_fn(64, |i, j| 0.3 / (1.0 + (i as f64 - j as f64).abs()).powi(2) / 8.0);
    c.bench_function("logdet_dense_64", |b| b.iter(|| logdet_one_minus(black_box(&m))));
}

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_table_x10_n200", |b| b.iter(|| BesselTable::new(black_box(10.0), 200)));
}

fn planar_term(c: &mut Criterion) {
    let water = MaterialModel::from_json(include_str!("../../../materials/water.json")).unwrap();
    let tet = MaterialModel::from_json(include_str!("../../../materials/tetradecane.json")).unwrap();
    let ctx = ThermalContext::new(293.0).unwrap();
    let geom = PlanarGeometry::slabs(10e-9, 6e-9).unwrap();
    let cfg = TruncationConfig::default();
    c.bench_function("matsubara_term_n1", |b| {
        b.iter(|| matsubara_term_slab(1, &geom, &water, &tet, &ctx, &cfg))
    });
}

fn scattering(c: &mut Criterion) {
    let mut group = c.benchmark_group("scattering");
    group.sample_size(10);
    let trunc = ChannelTruncation::default();
    let spheres = SpherePair::equal(1.0, 0.09).unwrap();
    group.bench_function("f_exact_x0.09", |b| b.iter(|| f_exact(black_box(&spheres), &trunc)));
    let cylinders = CylinderPair::new(3e-9, 3e-9, 6e-9, 15e-6).unwrap();
    group.bench_function("phi_exact_x4", |b| b.iter(|| phi_exact(black_box(&cylinders), &trunc)));
    group.finish();
}

criterion_group!(benches, quadrature, dense_logdet, bessel, planar_term, scattering);
criterion_main!(benches);
