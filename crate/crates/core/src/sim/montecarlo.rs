use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ObstacleSpec, ScenarioConfig};
use super::run::{run_scenario, Outcome, RunMetrics};
use crate::error::{Error, Result};
use crate::rng::{split, SplitMix64};
use crate::world::{Vec2, TAU};

/// Plan-call latency over a batch, milliseconds (nearest-rank percentiles).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencySummary {
    pub count: usize,
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl LatencySummary {
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank =
            |q: f64| sorted[((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1];
        Self {
            count: sorted.len(),
            mean_ms: sorted.iter().sum::<f64>() / sorted.len() as f64,
            p50_ms: rank(0.50),
            p95_ms: rank(0.95),
            p99_ms: rank(0.99),
            max_ms: sorted[sorted.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub runs: usize,
    pub obstacle_count: usize,
    pub seed: u64,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    /// Runs ending `DEADLOCK_UNRESOLVED`.
    pub deadlock_unresolved: usize,
    /// Deadlocked planning cycles summed over all runs.
    pub deadlock_events: u64,
    /// Per-run derived seeds, in run order.
    pub run_seeds: Vec<u64>,
    /// Per-run metrics, in run order.
    pub metrics: Vec<RunMetrics>,
    /// Wall-clock figures; excluded from the deterministic report.
    #[serde(skip)]
    pub latency: LatencySummary,
}

/// The scenario of one Monte Carlo run: `base` with its obstacles replaced
/// by `obstacle_count` constant-velocity vessels drawn from a SplitMix64
/// stream seeded with `run_seed`. Each obstacle draws east, north (rejected
/// and redrawn while inside the exclusion radius of the ego start or goal),
/// then speed, then course.
pub fn generate_scenario(
    base: &ScenarioConfig,
    obstacle_count: usize,
    run_seed: u64,
) -> ScenarioConfig {
    let mc = &base.monte_carlo;
    let half = 0.5 * mc.arena_size;
    let mut rng = SplitMix64::new(run_seed);
    let mut obstacles = Vec::with_capacity(obstacle_count);
    for _ in 0..obstacle_count {
        let position = loop {
            let p = Vec2::new(
                rng.uniform(mc.arena_center.east - half, mc.arena_center.east + half),
                rng.uniform(mc.arena_center.north - half, mc.arena_center.north + half),
            );
            if p.distance(base.ego.position) >= mc.exclusion_radius
                && p.distance(base.goal) >= mc.exclusion_radius
            {
                break p;
            }
        };
        let speed = rng.uniform(mc.min_speed, mc.max_speed);
        let course = rng.uniform(0.0, TAU);
        obstacles.push(ObstacleSpec::ConstantVelocity {
            position,
            course,
            speed,
            extent: [3.0, 1.5],
        });
    }
    ScenarioConfig {
        obstacles,
        rng_seed: run_seed,
        reactive_obstacles: false,
        ..base.clone()
    }
}

/// Runs `runs` random scenarios. Run `i` uses seed `split(seed, i)`; runs
/// execute in parallel (on `threads` workers when given) and are collected
/// in index order, so the report does not depend on scheduling.
pub fn monte_carlo(
    base: &ScenarioConfig,
    runs: usize,
    obstacle_count: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<MonteCarloReport> {
    if runs == 0 {
        return Err(Error::validation("runs", "must be at least 1"));
    }
    base.validate()?;
    let mc = &base.monte_carlo;
    let blocked = |p: Vec2| {
        p.distance(base.ego.position) < mc.exclusion_radius
            && p.distance(base.goal) < mc.exclusion_radius
    };
    if obstacle_count > 0 && mc.exclusion_radius * 2.0 >= mc.arena_size && blocked(mc.arena_center)
    {
        return Err(Error::validation(
            "monte_carlo.exclusion_radius",
            "leaves no room for obstacles",
        ));
    }
    let run_seeds: Vec<u64> = (0..runs as u64).map(|i| split(seed, i)).collect();
    let run_one = |&s: &u64| {
        run_scenario(&generate_scenario(base, obstacle_count, s), false).map(|o| o.metrics)
    };
    let results: Vec<Result<RunMetrics>> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::validation("threads", e.to_string()))?
            .install(|| run_seeds.par_iter().map(run_one).collect()),
        None => run_seeds.par_iter().map(run_one).collect(),
    };
    let metrics = results.into_iter().collect::<Result<Vec<_>>>()?;

    let n = runs as f64;
    let rate = |o: Outcome| metrics.iter().filter(|m| m.outcome == o).count() as f64 / n;
    let all_latencies: Vec<f64> = metrics
        .iter()
        .flat_map(|m| m.latencies_ms.iter().copied())
        .collect();
    Ok(MonteCarloReport {
        runs,
        obstacle_count,
        seed,
        success_rate: rate(Outcome::GoalReached),
        collision_rate: rate(Outcome::Collision),
        timeout_rate: rate(Outcome::Timeout),
        deadlock_unresolved: metrics
            .iter()
            .filter(|m| m.outcome == Outcome::DeadlockUnresolved)
            .count(),
        deadlock_events: metrics.iter().map(|m| m.deadlock_events as u64).sum(),
        run_seeds,
        latency: LatencySummary::from_samples(&all_latencies),
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            rng_seed: 0,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn percentiles_nearest_rank() {
        let samples: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        let s = LatencySummary::from_samples(&samples);
        assert_eq!(
            (s.p50_ms, s.p95_ms, s.p99_ms, s.max_ms),
            (50.0, 95.0, 99.0, 100.0)
        );
        assert_eq!(s.mean_ms, 50.5);
        assert_eq!(LatencySummary::from_samples(&[]).count, 0);
    }

    #[test]
    fn generated_obstacles_respect_distribution() {
        let b = base();
        let s = generate_scenario(&b, 200, 99);
        assert_eq!(s.obstacles.len(), 200);
        assert_eq!(s.rng_seed, 99);
        for o in &s.obstacles {
            let ObstacleSpec::ConstantVelocity {
                position,
                course,
                speed,
                ..
            } = o
            else {
                panic!()
            };
            assert!(position.east.abs() <= 500.0 && position.north.abs() <= 500.0);
            assert!(position.distance(b.ego.position) >= 100.0);
            assert!(position.distance(b.goal) >= 100.0);
            assert!((1.0..6.0).contains(speed));
            assert!((0.0..TAU).contains(course));
        }
        assert_eq!(generate_scenario(&b, 200, 99), s);
    }

    #[test]
    fn single_run_matches_run_scenario() {
        let report = monte_carlo(&base(), 1, 5, 42, None).unwrap();
        let direct = run_scenario(&generate_scenario(&base(), 5, split(42, 0)), false)
            .unwrap()
            .metrics;
        assert_eq!(report.metrics[0].outcome, direct.outcome);
        assert_eq!(
            serde_json::to_string(&report.metrics[0]).unwrap(),
            serde_json::to_string(&direct).unwrap()
        );
    }

    #[test]
    fn empty_arena_always_succeeds() {
        let report = monte_carlo(&base(), 50, 0, 3, None).unwrap();
        assert_eq!(report.success_rate, 1.0);
        assert_eq!(report.collision_rate, 0.0);
    }

    #[test]
    fn runs_are_independent_of_batch_size_and_threads() {
        let full = monte_carlo(&base(), 6, 10, 8, Some(3)).unwrap();
        let prefix = monte_carlo(&base(), 4, 10, 8, Some(1)).unwrap();
        for i in 0..4 {
            assert_eq!(
                serde_json::to_string(&full.metrics[i]).unwrap(),
                serde_json::to_string(&prefix.metrics[i]).unwrap()
            );
        }
    }

    #[test]
    fn zero_runs_rejected() {
        assert!(monte_carlo(&base(), 0, 1, 1, None).is_err());
    }
}
