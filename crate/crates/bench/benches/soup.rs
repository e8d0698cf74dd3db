use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use soupfall::carpet::{crossing_events, crossing_soup};
use soupfall::cluster::{crossing_graph, crossing_graph_brute};
use soupfall::geom::{filled_area, rasterize_interiors};
use soupfall::soup::sample_soup;
use soupfall::{Domain, ShapeMeasure, SoupSpec};
use std::hint::black_box;

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_soup");
    for eps_min in [0.05, 0.02, 0.01] {
        let spec = SoupSpec::new(1.0, ShapeMeasure::circle(), Domain::UnitDisk, eps_min).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(eps_min), &spec, |b, s| {
            b.iter(|| sample_soup(black_box(s), 1).unwrap())
        });
    }
    g.finish();
}

fn graphs(c: &mut Criterion) {
    let mut g = c.benchmark_group("crossing_graph");
    for eps_min in [0.05, 0.02] {
        let spec = SoupSpec::new(1.0, ShapeMeasure::stick(), Domain::UnitDisk, eps_min).unwrap();
        let soup = sample_soup(&spec, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("hashed", soup.len()), &soup, |b, s| b.iter(|| crossing_graph(black_box(s))));
        g.bench_with_input(BenchmarkId::new("brute", soup.len()), &soup, |b, s| {
            b.iter(|| crossing_graph_brute(black_box(&s.curves)))
        });
    }
    g.finish();
}

fn rasters(c: &mut Criterion) {
    let spec = SoupSpec::new(1.0, ShapeMeasure::circle(), Domain::UnitDisk, 0.02).unwrap();
    let soup = sample_soup(&spec, 3).unwrap();
    let mut g = c.benchmark_group("raster");
    for pitch in [1.0 / 128.0, 1.0 / 512.0] {
        g.bench_with_input(BenchmarkId::new("interiors", pitch), &pitch, |b, &p| {
            b.iter(|| rasterize_interiors(&soup.curves, &Domain::UnitDisk, p).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("filled_area", pitch), &pitch, |b, &p| {
            b.iter(|| filled_area(&soup.curves[..20], p).unwrap())
        });
    }
    g.finish();
}

fn crossings(c: &mut Criterion) {
    let mut g = c.benchmark_group("crossing_events");
    g.sample_size(20);
    for eps in [0.1, 0.025] {
        let pitch = eps / 8.0;
        let soup = crossing_soup(0.2, &ShapeMeasure::circle(), 2.0 * pitch, 4).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &e| {
            b.iter(|| crossing_events(&soup, &[e], pitch).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, graphs, rasters, crossings);
criterion_main!(benches);
