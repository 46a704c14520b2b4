use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use secrev_bench::comment_pairs;
use secrev_core::metrics::{bleu4, classification_report, secure_bleu, FieldWeights};
use secrev_core::{KeywordDictionary, SecurityType};

fn bleu(c: &mut Criterion) {
    let pairs = comment_pairs(64, 7);
    let rendered: Vec<(String, String)> = pairs.iter().map(|(p, r)| (p.render(), r.render())).collect();
    c.bench_function("bleu4/64 pairs", |b| {
        b.iter(|| rendered.iter().map(|(p, r)| bleu4(black_box(p), black_box(r))).sum::<f64>())
    });
}

fn secure(c: &mut Criterion) {
    let dict = KeywordDictionary::builtin();
    let weights = FieldWeights::default();
    let mut group = c.benchmark_group("secure_bleu");
    for n in [16, 128] {
        let pairs = comment_pairs(n, 11);
        group.bench_with_input(BenchmarkId::from_parameter(n), &pairs, |b, pairs| {
            b.iter(|| {
                pairs.iter().map(|(p, r)| secure_bleu(p, r, &dict, &weights).unwrap().final_score).sum::<f64>()
            })
        });
    }
    group.finish();
}

fn detection(c: &mut Criterion) {
    let pairs: Vec<(SecurityType, SecurityType)> =
        (0..5000).map(|i| (SecurityType::ALL[i * 7 % 8], SecurityType::ALL[i * 3 % 8])).collect();
    c.bench_function("classification_report/5000", |b| b.iter(|| classification_report(black_box(&pairs)).unwrap()));
}

criterion_group!(benches, bleu, secure, detection);
criterion_main!(benches);
