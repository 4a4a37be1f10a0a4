use terrascout_core::harness::{
    accumulate_heatmap, aggregate_curves, episode_curve, metrics_csv, run_batch, verify_replay, EpisodeTrace,
    METRICS_HEADER,
};
use terrascout_core::planners::Belief;
use terrascout_core::procgen::{fundamental_positions, morphology_side, topology_radius};
use terrascout_core::{DifficultyVector, EnvConfig, GenSpec, Parallelism, PolicyKind, Shape, Termination};

fn small_batch(policy: PolicyKind, parallelism: Parallelism) -> terrascout_core::harness::BatchReport {
    let shape = Shape::square(16);
    let template = GenSpec::structured(shape, DifficultyVector::new(3, 2, 1).unwrap(), 40);
    run_batch(&template, &EnvConfig::new(shape), &policy, 6, parallelism).unwrap()
}

#[test]
fn batch_artifacts_are_consistent() {
    let report = small_batch(PolicyKind::Utility, Parallelism::Auto);
    assert_eq!(report.traces.len(), 6);

    let csv = metrics_csv(&report.traces, &report.indices);
    assert!(csv.starts_with(METRICS_HEADER));
    assert_eq!(csv.lines().count(), 7);

    let heatmap = accumulate_heatmap(&report.traces).unwrap();
    let visits: u64 = heatmap.visitation.iter().sum();
    let expected: usize = report.traces.iter().map(|t| t.steps + 1).sum();
    assert_eq!(visits as usize, expected);

    let curves: Vec<_> = report.traces.iter().map(|t| episode_curve(t).unwrap()).collect();
    for (c, t) in curves.iter().zip(&report.traces) {
        assert!(c.is_monotone());
        assert_eq!(c.points.last().unwrap().distance, t.distance());
        assert_eq!(c.points.last().unwrap().coverage, t.coverage_final);
    }
    let agg = aggregate_curves(&curves);
    assert_eq!(agg.episodes, 6);
    assert!(agg.mean.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn sequential_and_parallel_batches_agree() {
    for policy in [PolicyKind::Cost, PolicyKind::Random] {
        assert_eq!(small_batch(policy.clone(), Parallelism::Sequential), small_batch(policy, Parallelism::Threads(3)));
    }
}

#[test]
fn traces_survive_the_file_system() {
    let dir = tempfile::tempdir().unwrap();
    let report = small_batch(PolicyKind::Cost, Parallelism::Sequential);
    for (i, t) in report.traces.iter().enumerate() {
        let path = dir.path().join(format!("episode_{i}.json"));
        std::fs::write(&path, t.to_json()).unwrap();
        let back = EpisodeTrace::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(&back, t);
        verify_replay(&back).unwrap();
    }
}

#[test]
fn planners_only_see_the_observation() {
    // Two terrains that differ only in an unsensed region give the same
    // belief, hence the same decision.
    let shape = Shape::square(21);
    let config = EnvConfig::new(shape);
    let a = terrascout_core::TerrainMap::empty(shape);
    let b = terrascout_core::TerrainMap::with_obstacles(shape, [terrascout_core::Cell::new(20, 20)]);
    let ea = terrascout_core::Environment::new(config.clone(), a).unwrap();
    let eb = terrascout_core::Environment::new(config, b).unwrap();
    assert_eq!(ea.observation(), eb.observation());
    let (ba, bb) =
        (Belief::from_observation(ea.observation()).unwrap(), Belief::from_observation(eb.observation()).unwrap());
    assert_eq!(ba, bb);
}

#[test]
fn random_terrain_batches_complete_with_cost_policy() {
    let shape = Shape::square(21);
    let report =
        run_batch(&GenSpec::random(shape, 3), &EnvConfig::new(shape), &PolicyKind::Cost, 10, Parallelism::Auto)
            .unwrap();
    assert!(report.traces.iter().all(|t| t.termination == Termination::Complete));
}

#[test]
fn obstacle_free_batches_hit_nothing() {
    let shape = Shape::square(12);
    let report =
        run_batch(&GenSpec::empty(shape), &EnvConfig::new(shape), &PolicyKind::Random, 4, Parallelism::Auto).unwrap();
    let heatmap = accumulate_heatmap(&report.traces).unwrap();
    assert!(heatmap.obstacle_hits.iter().all(|&h| h == 0));
}

#[test]
fn structured_obstacle_hits_sit_near_the_lattice() {
    let shape = Shape::square(21);
    let difficulty = DifficultyVector::new(1, 1, 1).unwrap();
    let report = run_batch(
        &GenSpec::structured(shape, difficulty, 0),
        &EnvConfig::new(shape),
        &PolicyKind::Cost,
        20,
        Parallelism::Auto,
    )
    .unwrap();
    let heatmap = accumulate_heatmap(&report.traces).unwrap();
    let lattice = fundamental_positions(shape).unwrap();
    let (rho, s) = (topology_radius(21, 1), morphology_side(21, 1));
    let near = |v: usize, f: usize| v + rho >= f && v < f + rho + s;
    let mut total = 0;
    for cell in shape.iter() {
        let hits = heatmap.obstacle_hits[shape.index(cell)];
        if hits > 0 {
            assert!(lattice.iter().any(|f| near(cell.row, f.row) && near(cell.col, f.col)), "{cell}");
            total += hits;
        }
    }
    assert!(total > 0);
}
