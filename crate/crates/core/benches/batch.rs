use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use terrascout_core::parallel::is_parallel_enabled;
use terrascout_core::policy::{Policy, RandomValid};
use terrascout_core::procgen::Requirements;
use terrascout_core::{run_batch, DifficultyVector, EnvConfig, Environment, GenSpec, Parallelism, PolicyKind, Shape};

fn batches(c: &mut Criterion) {
    let shape = Shape::square(21);
    let template = GenSpec::structured(shape, DifficultyVector::new(2, 2, 1).unwrap(), 0);
    let config = EnvConfig::new(shape);
    let mut group = c.benchmark_group("batch_21x21_16_episodes");
    group.sample_size(10);
    let modes: &[(&str, Parallelism)] = if is_parallel_enabled() {
        &[("sequential", Parallelism::Sequential), ("rayon", Parallelism::Auto)]
    } else {
        &[("sequential", Parallelism::Sequential)]
    };
    for policy in [PolicyKind::Cost, PolicyKind::Utility] {
        for &(label, parallelism) in modes {
            group.bench_with_input(BenchmarkId::new(policy.label(), label), &parallelism, |b, &p| {
                b.iter(|| run_batch(&template, &config, &policy, 16, p).unwrap())
            });
        }
    }
    group.finish();
}

fn env_step(c: &mut Criterion) {
    let config = EnvConfig::default();
    let spec = GenSpec::structured(config.shape, DifficultyVector::new(2, 2, 1).unwrap(), 0);
    let terrain = spec.generate(&Requirements::from(&config)).unwrap();
    let mut env = Environment::new(config, terrain).unwrap();
    let mut policy = RandomValid::new(0);
    c.bench_function("env_step_21x21_random_valid", |b| {
        b.iter(|| {
            let a = policy.next_action(env.observation()).unwrap();
            env.advance(a).unwrap();
            if env.is_done() {
                env.reset();
            }
        })
    });
}

criterion_group!(benches, batches, env_step);
criterion_main!(benches);
