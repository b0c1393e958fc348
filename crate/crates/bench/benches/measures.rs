use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shiftbound::scenarios::random::{random_disc_instance, random_quad_instance};
use shiftbound::scenarios::ScenarioRng;
use shiftbound::{discrepancy, generate, quad_discrepancy, ScenarioConfig, SettingKind};

fn random_instances(c: &mut Criterion) {
    let disc = random_disc_instance(&mut ScenarioRng::new(42)).unwrap();
    let quad = random_quad_instance(&mut ScenarioRng::new(42)).unwrap();
    c.bench_function("discrepancy/random", |b| {
        let [d1, d2, _] = &disc.distributions;
        b.iter(|| discrepancy(&disc.class, d1, d2, &disc.loss).unwrap())
    });
    c.bench_function("quad_discrepancy/random", |b| {
        let [d11, d12, d21, d22] = &quad.distributions;
        b.iter(|| quad_discrepancy(&quad.class, d11, d12, d21, d22, &quad.loss).unwrap())
    });
}

fn class_size_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("discrepancy/H2");
    for size in [8, 32, 128] {
        let mut cfg = ScenarioConfig::new(SettingKind::StandardDa, 42);
        cfg.class_sizes.insert("H2".into(), size);
        let s = generate(&cfg).unwrap().setting;
        let f = &s.class("H1").unwrap().members()[0];
        let d_s = s.distribution("D_S").unwrap().pushforward(f).unwrap();
        let d_t = s.distribution("D_T").unwrap().pushforward(f).unwrap();
        let h2 = s.class("H2").unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, _| {
            b.iter(|| discrepancy(h2, &d_s, &d_t, s.loss()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, random_instances, class_size_scaling);
criterion_main!(benches);
