//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use terrascout_core::env::{coverage_reached, FREE, OBSTACLE, ROBOT, UNKNOWN};
use terrascout_core::harness::{
    aggregate_curves, episode_curve, run_batch, throughput_bench, verify_replay, EpisodeTrace,
};
use terrascout_core::planners::{shortest_path, Belief, Knowledge};
use terrascout_core::procgen::{
    fundamental_positions, generate_structured_layout, is_solvable, topology_radius, Requirements,
};
use terrascout_core::sensing::sensor_sweep;
use terrascout_core::{
    Action, Cell, DifficultyVector, EnvConfig, Environment, GenSpec, Parallelism, PolicyKind, Shape, Termination,
    TerrainMap,
};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "reward conformance", limit: Some(Duration::from_secs(10)), run: reward_conformance },
        Criterion { name: "sensing oracle", limit: Some(Duration::from_secs(60)), run: sensing_oracle },
        Criterion { name: "discovery and alphabet fuzz", limit: Some(Duration::from_secs(30)), run: fuzz_alphabet },
        Criterion { name: "planner optimality and safety", limit: Some(Duration::from_secs(120)), run: planners },
        Criterion { name: "scaling 42x42 and 84x84", limit: Some(Duration::from_secs(600)), run: scaling },
        Criterion { name: "procgen contracts", limit: Some(Duration::from_secs(120)), run: procgen },
        Criterion { name: "throughput", limit: None, run: throughput },
        Criterion { name: "replay fidelity", limit: None, run: replay_fidelity },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(detail), Some(limit)) = (&outcome, c.limit) {
            if elapsed > limit {
                outcome = Err(format!("{detail}; took {:.1}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  {:<30} {detail} [{:.2}s]", c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:<30} {detail} [{:.2}s]", c.name, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_terrain(rng: &mut ChaCha8Rng, shape: Shape, density: f64, keep: Cell) -> TerrainMap {
    let obstacles: Vec<Cell> = shape.iter().filter(|&c| c != keep && rng.random_bool(density)).collect();
    TerrainMap::with_obstacles(shape, obstacles)
}

// ---------------------------------------------------------------------------
// Exact visibility: a cell is on the ray when its closed unit square meets the
// closed segment between the two cell centres. Coordinates are doubled so all
// arithmetic stays integral.

/// `num / den` with `den > 0`.
#[derive(Clone, Copy)]
struct Frac(i64, i64);

impl Frac {
    fn le(self, o: Frac) -> bool {
        self.0 * o.1 <= o.0 * self.1
    }
}

fn segment_meets_square(a: Cell, q: Cell, cell: Cell) -> bool {
    let mut lo = Frac(0, 1);
    let mut hi = Frac(1, 1);
    for (s, e, centre) in [(a.row, q.row, cell.row), (a.col, q.col, cell.col)] {
        let (s, e, centre) = (2 * s as i64, 2 * e as i64, 2 * centre as i64);
        let (min, max) = (centre - 1, centre + 1);
        let d = e - s;
        if d == 0 {
            if s < min || s > max {
                return false;
            }
            continue;
        }
        let (mut t0, mut t1) = (Frac(min - s, d), Frac(max - s, d));
        if d < 0 {
            t0 = Frac(s - min, -d);
            t1 = Frac(s - max, -d);
            std::mem::swap(&mut t0, &mut t1);
        }
        if !t0.le(lo) {
            lo = t0;
        }
        if t1.le(hi) {
            hi = t1;
        }
    }
    lo.le(hi)
}

fn exact_visible(terrain: &TerrainMap, pose: Cell, d: u32) -> Vec<Cell> {
    let shape = terrain.shape();
    let d2 = (d as u64) * (d as u64);
    shape
        .iter()
        .filter(|&q| pose.dist_sq(q) <= d2)
        .filter(|&q| {
            let (r0, r1) = (pose.row.min(q.row), pose.row.max(q.row));
            let (c0, c1) = (pose.col.min(q.col), pose.col.max(q.col));
            (r0..=r1).all(|r| {
                (c0..=c1).all(|c| {
                    let x = Cell::new(r, c);
                    x == pose || x == q || !terrain.is_obstacle(x) || !segment_meets_square(pose, q, x)
                })
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------

fn reward_conformance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut steps_checked = 0usize;
    let mut terminations = [0usize; 4];
    for episode in 0..1000 {
        let shape = Shape::new(rng.random_range(5..=21), rng.random_range(5..=21));
        let start = Cell::new(rng.random_range(0..shape.rows), rng.random_range(0..shape.cols));
        let density = rng.random_range(0.0..0.3);
        let terrain = random_terrain(&mut rng, shape, density, start);
        let n = shape.cells();
        let config = EnvConfig {
            sensor_radius: rng.random_range(0..=6),
            beta: [0.3, 0.6, 0.9, 0.99][rng.random_range(0..4)],
            bonuses_enabled: rng.random_bool(0.7),
            max_steps: rng.random_range(1..=60),
            start,
            seed: episode,
            ..EnvConfig::new(shape)
        };
        let mut env = Environment::new(config.clone(), terrain.clone()).map_err(|e| e.to_string())?;

        let mut known = vec![false; n];
        let mut count = 0usize;
        let discover = |pose: Cell, known: &mut Vec<bool>| {
            let mut fresh = 0;
            for c in exact_visible(&terrain, pose, config.sensor_radius) {
                let i = shape.index(c);
                if !known[i] {
                    known[i] = true;
                    fresh += 1;
                }
            }
            fresh
        };
        count += discover(start, &mut known);
        let initial = count;
        ensure(env.mask().count() == initial, || format!("episode {episode}: reset discovered count differs"))?;

        let mut pose = start;
        let mut explored_sum = 0usize;
        let mut reported_sum = 0usize;
        let mut steps = 0;
        loop {
            let action = Action::ALL[rng.random_range(0..4)];
            steps += 1;
            let (expected, expected_term) = match pose.step(action, shape).filter(|c| terrain.is_free(*c)) {
                None => (if config.bonuses_enabled { -(n as f64) } else { -config.r_move }, Termination::Invalid),
                Some(next) => {
                    pose = next;
                    let fresh = discover(next, &mut known);
                    count += fresh;
                    explored_sum += fresh;
                    let mut r = fresh as f64 - config.r_move;
                    let term = if coverage_reached(count, n, config.beta) {
                        if config.bonuses_enabled {
                            r += n as f64;
                        }
                        Termination::Complete
                    } else if steps >= config.max_steps {
                        Termination::StepLimit
                    } else {
                        Termination::None
                    };
                    (r, term)
                }
            };
            let out = env.step(action).map_err(|e| e.to_string())?;
            reported_sum += out.info.newly_discovered;
            steps_checked += 1;
            ensure(out.reward == expected, || {
                format!("episode {episode} step {steps}: reward {} expected {expected}", out.reward)
            })?;
            ensure(out.info.termination == expected_term, || {
                format!("episode {episode} step {steps}: {:?} expected {expected_term:?}", out.info.termination)
            })?;
            if out.done {
                terminations[expected_term as usize] += 1;
                break;
            }
        }
        ensure(
            explored_sum == count - initial && reported_sum == env.mask().count() - env.initial_discovered(),
            || format!("episode {episode}: telescoping identity broken"),
        )?;
    }
    Ok(format!(
        "1000 episodes, {steps_checked} steps exact; invalid {}, complete {}, step_limit {}",
        terminations[Termination::Invalid as usize],
        terminations[Termination::Complete as usize],
        terminations[Termination::StepLimit as usize]
    ))
}

/// Cells touched by densely sampling the segment, as a bitmask over a grid of
/// at most 64 cells.
fn sampled_ray_mask(a: Cell, q: Cell, cols: usize, rows: usize) -> u64 {
    const SPACING: f64 = 2e-3;
    const EPS: f64 = 1e-3;
    let (dy, dx) = (q.row as f64 - a.row as f64, q.col as f64 - a.col as f64);
    let samples = ((dy.hypot(dx) / SPACING).ceil() as usize).max(1);
    let mut mask = 0u64;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let (y, x) = (a.row as f64 + t * dy, a.col as f64 + t * dx);
        let (r_lo, r_hi) = ((y - 0.5 - EPS).ceil().max(0.0) as usize, (y + 0.5 + EPS).floor() as usize);
        let (c_lo, c_hi) = ((x - 0.5 - EPS).ceil().max(0.0) as usize, (x + 0.5 + EPS).floor() as usize);
        for r in r_lo..=r_hi.min(rows - 1) {
            for c in c_lo..=c_hi.min(cols - 1) {
                mask |= 1 << (r * cols + c);
            }
        }
    }
    mask
}

fn sensing_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut poses = 0;
    for t in 0..200 {
        let shape = Shape::new(rng.random_range(1..=7), rng.random_range(1..=7));
        let n = shape.cells();
        let k = rng.random_range(0..=3.min(n));
        let mut obstacles = Vec::new();
        while obstacles.len() < k {
            let c = shape.cell(rng.random_range(0..n));
            if !obstacles.contains(&c) {
                obstacles.push(c);
            }
        }
        let terrain = TerrainMap::with_obstacles(shape, obstacles);
        let obstacle_bits: u64 = terrain.obstacles().map(|c| 1u64 << shape.index(c)).sum();
        let d = rng.random_range(0..=9);
        let d2 = (d as u64) * (d as u64);
        for pose in shape.iter() {
            let expected: Vec<Cell> = shape
                .iter()
                .filter(|&q| pose.dist_sq(q) <= d2)
                .filter(|&q| {
                    let ends = (1u64 << shape.index(pose)) | (1u64 << shape.index(q));
                    sampled_ray_mask(pose, q, shape.cols, shape.rows) & obstacle_bits & !ends == 0
                })
                .collect();
            let got = sensor_sweep(&terrain, pose, d);
            ensure(got.cells() == expected.as_slice(), || {
                format!("terrain {t} ({shape}, d={d}) pose {pose}: got {:?}, oracle {expected:?}", got.cells())
            })?;
            poses += 1;
        }
    }
    Ok(format!("200 terrains, {poses} poses identical"))
}

fn fuzz_alphabet() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut steps = 0usize;
    let mut episodes = 0usize;
    while steps < 100_000 {
        let side = rng.random_range(8..=30);
        let shape = Shape::new(side, rng.random_range(8..=30));
        let config = EnvConfig { sensor_radius: rng.random_range(0..=7), ..EnvConfig::new(shape) };
        let spec = if rng.random_bool(0.5) {
            GenSpec::random(shape, rng.random())
        } else {
            let all = DifficultyVector::all();
            GenSpec::structured(shape, all[rng.random_range(0..all.len())], rng.random())
        };
        // Small sensing radii cannot reach 99% coverage on some layouts; draw again.
        let Ok(terrain) = spec.generate(&Requirements::from(&config)) else { continue };
        let mut env = Environment::new(config, terrain).map_err(|e| e.to_string())?;
        episodes += 1;
        let mut before: Vec<bool> = shape.iter().map(|c| env.mask().is_discovered(c)).collect();
        loop {
            // Mostly valid moves so episodes run long; occasionally anything.
            let action = loop {
                let a = Action::ALL[rng.random_range(0..4)];
                if rng.random_bool(0.02) || env.pose().step(a, shape).is_some_and(|c| env.terrain().is_free(c)) {
                    break a;
                }
            };
            let out = env.step(action).map_err(|e| e.to_string())?;
            steps += 1;
            let mut robots = 0;
            for (i, &v) in out.observation.values().iter().enumerate() {
                ensure([UNKNOWN, FREE, ROBOT, OBSTACLE].contains(&v), || format!("value {v} outside alphabet"))?;
                robots += usize::from(v == ROBOT);
                let now = env.mask().is_discovered(shape.cell(i));
                ensure(!before[i] || now, || format!("cell {} undiscovered at step {steps}", shape.cell(i)))?;
                ensure((v != UNKNOWN) == now, || format!("cell {} observation disagrees with mask", shape.cell(i)))?;
                before[i] = now;
            }
            ensure(robots == 1, || format!("{robots} robot markers at step {steps}"))?;
            if out.done || steps >= 100_000 {
                break;
            }
        }
    }
    Ok(format!("{steps} steps over {episodes} episodes"))
}

fn bfs_distances(free: &[bool], shape: Shape, from: Cell) -> Vec<Option<usize>> {
    let mut dist = vec![None; shape.cells()];
    dist[shape.index(from)] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        let dc = dist[shape.index(c)].unwrap();
        for a in Action::ALL {
            if let Some(nb) = c.step(a, shape) {
                let i = shape.index(nb);
                if free[i] && dist[i].is_none() {
                    dist[i] = Some(dc + 1);
                    queue.push_back(nb);
                }
            }
        }
    }
    dist
}

fn planners() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let shape = Shape::square(12);
    let mut pairs = 0usize;
    for m in 0..50 {
        let pose = Cell::new(rng.random_range(0..12), rng.random_range(0..12));
        let terrain = random_terrain(&mut rng, shape, 0.3, pose);
        let free: Vec<bool> = shape.iter().map(|c| terrain.is_free(c)).collect();
        let known = free.iter().map(|&f| if f { Knowledge::KnownFree } else { Knowledge::KnownObstacle }).collect();
        let belief = Belief::new(shape, known, pose);
        for s in shape.iter().filter(|&c| terrain.is_free(c)) {
            let dist = bfs_distances(&free, shape, s);
            for t in shape.iter().filter(|&c| terrain.is_free(c)) {
                let path = shortest_path(&belief, s, t);
                match (dist[shape.index(t)], path) {
                    (None, None) => {}
                    (Some(d), Some(path)) => {
                        ensure(path.len() == d, || format!("map {m} {s}->{t}: length {} vs {d}", path.len()))?;
                        let mut c = s;
                        for a in path {
                            c = c
                                .step(a, shape)
                                .filter(|x| terrain.is_free(*x))
                                .ok_or_else(|| format!("map {m} {s}->{t}: path leaves free space"))?;
                        }
                        ensure(c == t, || format!("map {m} {s}->{t}: path ends at {c}"))?;
                        pairs += 1;
                    }
                    (d, p) => return Err(format!("map {m} {s}->{t}: oracle {d:?}, planner {p:?}")),
                }
            }
        }
    }
    let template = GenSpec::structured(Shape::square(21), DifficultyVector::new(2, 2, 1).unwrap(), 0);
    let config = EnvConfig::default();
    let mut summary = vec![format!("{pairs} reachable pairs optimal")];
    for policy in [PolicyKind::Cost, PolicyKind::Utility] {
        let report = run_batch(&template, &config, &policy, 100, Parallelism::Auto).map_err(|e| e.to_string())?;
        let a = &report.aggregate;
        ensure(report.failures.is_empty(), || format!("{policy}: {:?}", report.failures))?;
        ensure(a.completed == 100 && a.invalid == 0, || {
            format!("{policy}: {} complete, {} invalid, {} stopped", a.completed, a.invalid, a.stopped)
        })?;
        summary.push(format!("{policy} 100/100 complete, 0 invalid"));
    }
    Ok(summary.join("; "))
}

fn scaling() -> Outcome {
    let difficulty = DifficultyVector::new(2, 2, 1).unwrap();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for side in [42, 84] {
        let shape = Shape::square(side);
        let config = EnvConfig::new(shape);
        for policy in [PolicyKind::Cost, PolicyKind::Utility] {
            let report =
                run_batch(&GenSpec::structured(shape, difficulty, 0), &config, &policy, 100, Parallelism::Auto)
                    .map_err(|e| e.to_string())?;
            if !report.failures.is_empty() {
                failures.push(format!("{side}/{policy}: {} episodes failed", report.failures.len()));
            }
            let curves =
                report.traces.iter().map(episode_curve).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            let monotone = curves.iter().filter(|c| c.is_monotone()).count();
            let agg = aggregate_curves(&curves);
            let agg_monotone = agg.mean.windows(2).all(|w| w[1] >= w[0]);
            let knees = curves.iter().filter(|c| c.end_stage_slowdown(config.beta).is_some_and(|r| r >= 1.5)).count();
            let coverage = report.aggregate.coverage.mean;
            if coverage < 0.99 {
                failures.push(format!("{side}/{policy}: mean coverage {coverage:.4}"));
            }
            if monotone != curves.len() || !agg_monotone {
                failures.push(format!(
                    "{side}/{policy}: {} of {} curves non-monotone",
                    curves.len() - monotone,
                    curves.len()
                ));
            }
            if policy == PolicyKind::Cost && knees < 60 {
                failures.push(format!("{side}/{policy}: knee in {knees}/100"));
            }
            summary.push(format!("{side}/{policy} cov {coverage:.4} knee {knees}"));
        }
    }
    let summary = summary.join(", ");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn procgen() -> Outcome {
    let shape = Shape::square(21);
    let req = Requirements::default();
    let lattice = fundamental_positions(shape).map_err(|e| e.to_string())?;
    let mut retries = 0u32;
    for difficulty in DifficultyVector::all() {
        let rho = topology_radius(21, difficulty.topology());
        for seed in 0..1000 {
            let a = generate_structured_layout(shape, difficulty, seed, &req)
                .map_err(|e| format!("{difficulty} seed {seed}: {e}"))?;
            let b = generate_structured_layout(shape, difficulty, seed, &req).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{difficulty} seed {seed}: not deterministic"))?;
            for (anchor, base) in a.anchors.iter().zip(&lattice) {
                ensure(anchor.row.abs_diff(base.row) <= rho && anchor.col.abs_diff(base.col) <= rho, || {
                    format!("{difficulty} seed {seed}: anchor {anchor} beyond {rho} of {base}")
                })?;
            }
            ensure(is_solvable(&a.terrain, req.start, 6, 0.99), || format!("{difficulty} seed {seed}: unsolvable"))?;
            retries += a.attempt;
        }
    }
    Ok(format!("12 levels x 1000 seeds deterministic, anchored, solvable; {retries} rejected draws"))
}

fn throughput() -> Outcome {
    let r = throughput_bench(&EnvConfig::default(), 1_000_000).map_err(|e| e.to_string())?;
    let line = format!("{:.0} steps/s over {} steps ({} episodes)", r.steps_per_second, r.steps, r.episodes);
    ensure(r.steps_per_second >= 100_000.0, || line.clone())?;
    Ok(line)
}

fn replay_fidelity() -> Outcome {
    let mut traces = Vec::new();
    let policies = [PolicyKind::Cost, PolicyKind::Utility, PolicyKind::Random];
    for i in 0..100u64 {
        let shape = Shape::square([12, 16, 21][i as usize % 3]);
        let spec = match i % 4 {
            0 => GenSpec::random(shape, i),
            _ => GenSpec::structured(shape, DifficultyVector::all()[i as usize % 12], i),
        };
        let config = EnvConfig { seed: i, ..EnvConfig::new(shape) };
        traces
            .push(terrascout_core::run_episode(&spec, &config, &policies[i as usize % 3]).map_err(|e| e.to_string())?);
    }
    for (i, t) in traces.iter().enumerate() {
        let parsed = EpisodeTrace::from_json(&t.to_json()).map_err(|e| format!("trace {i}: {e}"))?;
        let r = verify_replay(&parsed).map_err(|e| format!("trace {i}: {e}"))?;
        ensure(r.rewards == t.rewards, || format!("trace {i}: reward sequence differs"))?;
    }
    Ok(format!("100 traces, {} steps replayed identically", traces.iter().map(|t| t.steps).sum::<usize>()))
}
