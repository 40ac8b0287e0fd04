use criterion::{black_box, criterion_group, criterion_main, Criterion};

use conecell::corpus::{borel_closure, standard_order, RUNNING_EXAMPLE};
use conecell::decomp::{rule_family, DEFAULT_RULE_BOUND};
use conecell::ek::{build_ek_cw, cellular_chain_complex};
use conecell::linalg::RankConfig;
use conecell::verify::{check_cellular_resolution, multigraded_betti, DEFAULT_TAYLOR_BOUND};
use conecell::{ht_resolution, parse_ideal, Monomial};

fn resolutions(c: &mut Criterion) {
    let running = parse_ideal(RUNNING_EXAMPLE).unwrap();
    let cube = standard_order(4, borel_closure(4, &[Monomial::from_exponents(vec![0, 0, 0, 3])]));
    c.bench_function("ht running example", |b| b.iter(|| ht_resolution(black_box(&running)).unwrap()));
    c.bench_function("ht (x1..x4)^3", |b| b.iter(|| ht_resolution(black_box(&cube)).unwrap()));
    c.bench_function("ek complex (x1..x4)^3", |b| b.iter(|| build_ek_cw(black_box(&cube)).unwrap()));
    c.bench_function("taylor betti running example", |b| {
        b.iter(|| multigraded_betti(black_box(&running), DEFAULT_TAYLOR_BOUND, RankConfig::default()).unwrap())
    });
    let x = build_ek_cw(&cube).unwrap();
    let cc = cellular_chain_complex(&x);
    let mut group = c.benchmark_group("strand check (x1..x4)^3");
    group.sample_size(10);
    group.bench_function("gf(p) prefilter", |b| {
        b.iter(|| check_cellular_resolution(black_box(&cc), &cube, RankConfig::default()).unwrap())
    });
    group.bench_function("rational", |b| {
        b.iter(|| check_cellular_resolution(black_box(&cc), &cube, RankConfig::rational_only()).unwrap())
    });
    group.finish();
    c.bench_function("rule family running example", |b| {
        b.iter(|| rule_family(black_box(&running), DEFAULT_RULE_BOUND).unwrap())
    });
}

criterion_group!(benches, resolutions);
criterion_main!(benches);
