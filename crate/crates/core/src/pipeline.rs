//! The two-phase procedure: split the waypoints, place depots with same-size
//! k-means on the first batch, then freeze the depots and optimally assign
//! every waypoint (both batches) by solving the transportation problem.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::balanced_kmeans::{run_balanced_kmeans, KMeansConfig, KMeansOutput};
use crate::error::{Error, Result};
use crate::eval::{metrics_for, MetricsReport};
use crate::exec::Execution;
use crate::model::{
    build_cost_matrix_with, capacities, AssignmentPlan, BalanceMode, CostExponent, DepotSet, Phase,
    WaypointSet,
};
use crate::transport::{solve_transport_with, CostMode, TransportInstance};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    /// Fraction of waypoints revealed in Phase I, strictly between 0 and 1.
    pub gamma: f64,
    pub seed: u64,
    pub cost_exponent: CostExponent,
    pub balance_mode: BalanceMode,
    pub max_iters: usize,
    pub convergence_epsilon: f64,
    /// Independent Phase I seedings (seed, seed+1, ...); the lowest objective
    /// wins, lowest seed on ties.
    pub restarts: usize,
    pub cost_mode: CostMode,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 9,
            gamma: 0.05,
            seed: 42,
            cost_exponent: CostExponent::Squared,
            balance_mode: BalanceMode::Strict,
            max_iters: 100,
            convergence_epsilon: 1e-9,
            restarts: 1,
            cost_mode: CostMode::Float,
            execution: Execution::default(),
        }
    }
}

impl RunConfig {
    pub fn new(k: usize) -> Self {
        RunConfig {
            k,
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("--k must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "--gamma must lie strictly between 0 and 1, got {}",
                self.gamma
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn kmeans(&self, seed: u64) -> KMeansConfig {
        KMeansConfig {
            k: self.k,
            max_iters: self.max_iters,
            seed,
            convergence_epsilon: self.convergence_epsilon,
            balance_mode: self.balance_mode,
            cost_exponent: self.cost_exponent,
        }
    }
}

/// Phase I size for `n` waypoints: round(gamma * n), snapped to the nearest
/// multiple of K (at least K) in strict mode.
pub fn phase1_size(n: usize, k: usize, gamma: f64, mode: BalanceMode) -> usize {
    let raw = (gamma * n as f64).round();
    match mode {
        BalanceMode::Strict => {
            let multiples = (raw / k as f64).round().max(1.0) as usize;
            multiples * k
        }
        BalanceMode::WithinOne => raw as usize,
    }
}

/// Two disjoint batches whose union is the input.
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    /// Indices into the input, Phase I batch (shuffled order).
    pub phase1: Vec<usize>,
    /// Indices into the input, Phase II batch (shuffled order).
    pub phase2: Vec<usize>,
}

impl Split {
    /// The input with every point tagged by the batch it landed in.
    pub fn tagged(&self, all: &WaypointSet) -> Result<WaypointSet> {
        let mut phases = vec![Phase::Two; all.len()];
        for &i in &self.phase1 {
            phases[i] = Phase::One;
        }
        all.clone().with_phases(phases)
    }
}

/// Uniform seeded shuffle, first `phase1_size` indices go to Phase I.
pub fn split_waypoints(
    all: &WaypointSet,
    k: usize,
    gamma: f64,
    mode: BalanceMode,
    seed: u64,
) -> Result<Split> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let n = all.len();
    let n1 = phase1_size(n, k, gamma, mode);
    if n1 < k {
        return Err(Error::Config(format!(
            "Phase I would hold {n1} waypoints, fewer than K = {k}"
        )));
    }
    if n1 >= n {
        return Err(Error::Config(format!(
            "Phase I would take all {n} waypoints (gamma {gamma}, K {k}); Phase II would be empty"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let phase2 = order.split_off(n1);
    Ok(Split {
        phase1: order,
        phase2,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    /// The input, tagged with each waypoint's batch; Phase II plan rows
    /// follow this order.
    pub waypoints: WaypointSet,
    pub split: Split,
    /// Depots fixed at the end of Phase I.
    pub depots: DepotSet,
    /// Over `split.phase1`, in that order.
    pub plan_phase1: AssignmentPlan,
    /// Over all waypoints in input order.
    pub plan_phase2: AssignmentPlan,
    pub metrics: MetricsReport,
    pub phase1: KMeansOutput,
    /// Seed of the winning Phase I restart.
    pub phase1_seed: u64,
    pub runtime_phase1: Duration,
    pub runtime_phase2: Duration,
}

/// Phase I only: same-size k-means with optional parallel restarts.
pub fn place_depots(waypoints: &WaypointSet, config: &RunConfig) -> Result<(KMeansOutput, u64)> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.restarts as u64)
        .map(|r| config.seed.wrapping_add(r))
        .collect();
    let runs = config.execution.map(&seeds, |&s| {
        run_balanced_kmeans(waypoints, &config.kmeans(s))
    });
    let mut best: Option<(KMeansOutput, u64)> = None;
    for (run, &seed) in runs.into_iter().zip(&seeds) {
        let run = run?;
        let better = match &best {
            None => true,
            Some((b, _)) => run.objective() < b.objective(),
        };
        if better {
            best = Some((run, seed));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Phase II only: assign `waypoints` to fixed `depots`.
pub fn assign_to_depots(
    waypoints: &WaypointSet,
    depots: &DepotSet,
    config: &RunConfig,
) -> Result<(AssignmentPlan, f64)> {
    let costs = build_cost_matrix_with(
        waypoints.points(),
        depots,
        config.cost_exponent,
        config.execution,
    );
    let caps = capacities(waypoints.len(), depots.k(), config.balance_mode)?;
    let instance = TransportInstance::new(costs, caps)?;
    let sol = solve_transport_with(&instance, config.cost_mode)?;
    Ok((sol.plan, sol.objective))
}

pub fn run_two_phase(all: &WaypointSet, config: &RunConfig) -> Result<RunResult> {
    config.validate()?;
    // Phase II covers every waypoint, so check its balance up front.
    capacities(all.len(), config.k, config.balance_mode)?;
    let split = split_waypoints(
        all,
        config.k,
        config.gamma,
        config.balance_mode,
        config.seed,
    )?;
    let tagged = split.tagged(all)?;
    let phase1_set = tagged.select(&split.phase1);

    let t0 = Instant::now();
    let (phase1, phase1_seed) = place_depots(&phase1_set, config)?;
    let runtime_phase1 = t0.elapsed();

    let depots = phase1.centroids.clone();
    let t1 = Instant::now();
    let (plan_phase2, objective_phase2) = assign_to_depots(&tagged, &depots, config)?;
    let runtime_phase2 = t1.elapsed();

    let metrics = metrics_for(
        config.k,
        &phase1_set,
        &phase1.plan,
        phase1.objective(),
        &tagged,
        &plan_phase2,
        objective_phase2,
        &depots,
    )?;

    Ok(RunResult {
        waypoints: tagged,
        split,
        depots,
        plan_phase1: phase1.plan.clone(),
        plan_phase2,
        metrics,
        phase1,
        phase1_seed,
        runtime_phase1,
        runtime_phase2,
    })
}
