//! Randomized cross-checks of the exact solver against both oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exec::Execution;
use crate::model::{build_cost_matrix, BalanceMode, CostExponent, DepotSet, Point2, WaypointSet};
use crate::transport::{brute_force_oracle, hungarian_oracle, solve_transport, TransportInstance};

/// Random strict-balance instance: `k` depots, `k * n_k` waypoints, all in a
/// 100 x 100 box.
pub fn random_instance(
    rng: &mut impl Rng,
    k: usize,
    n_k: usize,
    exponent: CostExponent,
) -> Result<TransportInstance> {
    let mut pt = || Point2::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
    let depots = DepotSet::new((0..k).map(|_| pt()).collect())?;
    let waypoints = WaypointSet::from_points((0..k * n_k).map(|_| pt()).collect())?;
    TransportInstance::balanced(
        build_cost_matrix(&waypoints, &depots, exponent),
        BalanceMode::Strict,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub oracle: &'static str,
    pub n: usize,
    pub k: usize,
    pub solver: f64,
    pub reference: f64,
}

impl CheckOutcome {
    pub fn relative_error(&self) -> f64 {
        (self.solver - self.reference).abs() / self.reference.abs().max(1.0)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.relative_error() <= tol
    }
}

fn check(inst: &TransportInstance, oracle: &'static str) -> Result<CheckOutcome> {
    let solver = solve_transport(inst)?.objective;
    let reference = match oracle {
        "brute-force" => brute_force_oracle(inst)?.objective,
        _ => hungarian_oracle(inst.costs(), inst.n_k())?.objective,
    };
    Ok(CheckOutcome {
        oracle,
        n: inst.n(),
        k: inst.k(),
        solver,
        reference,
    })
}

/// `small` brute-force checks (N <= 10, K in {2, 3}) followed by `medium`
/// Hungarian checks (N <= 60), all derived from `seed`.
pub fn cross_check(
    small: usize,
    medium: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(small + medium);
    for t in 0..small {
        let k = if t % 2 == 0 { 2 } else { 3 };
        let n_k = rng.random_range(1..=10 / k);
        let e = if rng.random::<bool>() {
            CostExponent::Squared
        } else {
            CostExponent::Linear
        };
        jobs.push((random_instance(&mut rng, k, n_k, e)?, "brute-force"));
    }
    for _ in 0..medium {
        let k = rng.random_range(1..=6);
        let n_k = rng.random_range(1..=60 / k);
        let e = if rng.random::<bool>() {
            CostExponent::Squared
        } else {
            CostExponent::Linear
        };
        jobs.push((random_instance(&mut rng, k, n_k, e)?, "hungarian"));
    }
    exec.map(&jobs, |(inst, oracle)| check(inst, oracle))
        .into_iter()
        .collect()
}
