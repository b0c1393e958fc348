use criterion::{criterion_group, criterion_main, Criterion};
use shiftbound::{generate, train, ObjectiveWeights, ScenarioConfig, SettingKind};

fn trainers(c: &mut Criterion) {
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for (kind, seed) in [
        (SettingKind::StandardDa, 42),
        (SettingKind::OutputDa, 1),
        (SettingKind::AnalogyOda, 3),
        (SettingKind::DomainTransfer, 11),
    ] {
        let s = generate(&ScenarioConfig::new(kind, seed)).unwrap().setting;
        let w = ObjectiveWeights::default();
        group.bench_function(kind.cli_name(), |b| b.iter(|| train(&s, &w, false).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, trainers);
criterion_main!(benches);
