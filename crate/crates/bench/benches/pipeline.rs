use criterion::{criterion_group, criterion_main, Criterion};

use ringmark::attack::{apply_attack, AttackChain};
use ringmark::codec::{decode_payload, detect_nonblind, embed_digital, DetectorConfig};
use ringmark::spectral::forward_dft_plane;
use ringmark_bench::{fixture, spec};

fn pipeline(c: &mut Criterion) {
    let spec = spec();
    let cfg = DetectorConfig::default();
    let (cover, marked) = fixture(1);
    let chain: AttackChain = "rotate:10;printscan:1,0.01,1.1".parse().unwrap();
    let attacked = apply_attack(&marked, &chain, 0).unwrap();

    c.bench_function("forward_dft 567x390", |b| b.iter(|| forward_dft_plane(&cover.carrier_plane())));
    c.bench_function("embed", |b| b.iter(|| embed_digital(&cover, &spec).unwrap()));
    c.bench_function("detect nonblind", |b| b.iter(|| detect_nonblind(&marked, &cover, &spec, &cfg).unwrap()));
    let mut g = c.benchmark_group("blind");
    g.sample_size(10);
    g.bench_function("decode clean", |b| b.iter(|| decode_payload(&marked, spec.layout(), &cfg).unwrap()));
    g.bench_function("decode rotated print-scan", |b| b.iter(|| decode_payload(&attacked, spec.layout(), &cfg)));
    g.bench_function("attack chain", |b| b.iter(|| apply_attack(&marked, &chain, 0).unwrap()));
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
