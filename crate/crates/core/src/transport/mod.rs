//! Balanced transportation problem over fixed depots.
//!
//! Rows (waypoints) sum to one, columns (depots) sum to their capacity. The
//! constraint matrix is totally unimodular, so the exact solver here works
//! purely combinatorially and always returns an integral plan.
//!
//! Two independent oracles check it: [`hungarian_oracle`] solves the
//! column-duplicated square assignment problem, and [`brute_force_oracle`]
//! enumerates every balanced plan.

mod brute;
mod hungarian;
mod ssp;

pub use brute::{brute_force_oracle, multinomial_count, BRUTE_FORCE_LIMIT};
pub use hungarian::{hungarian_oracle, solve_assignment, DuplicatedCostMatrix};

use crate::error::{Error, Result};
use crate::model::{capacities, plan_cost, AssignmentPlan, BalanceMode, CostMatrix};

/// Scale factor of the fixed-point cost mode.
pub const FIXED_POINT_SCALE: f64 = 1e6;

/// A cost matrix plus per-depot capacities that sum to N.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportInstance {
    costs: CostMatrix,
    capacities: Vec<usize>,
}

impl TransportInstance {
    pub fn new(costs: CostMatrix, capacities: Vec<usize>) -> Result<Self> {
        if capacities.len() != costs.k() {
            return Err(Error::Contract(format!(
                "{} capacities for {} depots",
                capacities.len(),
                costs.k()
            )));
        }
        let total: usize = capacities.iter().sum();
        if total != costs.n() {
            return Err(Error::Contract(format!(
                "capacities sum to {total} but there are {} waypoints",
                costs.n()
            )));
        }
        if let Some(v) = costs.values().iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite cost entry {v}")));
        }
        Ok(TransportInstance { costs, capacities })
    }

    /// Capacities derived from the balance mode (N/K each in strict mode).
    pub fn balanced(costs: CostMatrix, mode: BalanceMode) -> Result<Self> {
        let caps = capacities(costs.n(), costs.k(), mode)?;
        Self::new(costs, caps)
    }

    pub fn costs(&self) -> &CostMatrix {
        &self.costs
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn n(&self) -> usize {
        self.costs.n()
    }

    pub fn k(&self) -> usize {
        self.costs.k()
    }

    /// Smallest capacity, used as the plan's nominal per-depot load.
    pub fn n_k(&self) -> usize {
        self.capacities.iter().copied().min().unwrap_or(0)
    }
}

/// An optimal plan and its objective under the instance's float costs.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportSolution {
    pub plan: AssignmentPlan,
    pub objective: f64,
}

/// How the exact solver compares costs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CostMode {
    /// Double precision with a relative 1e-12 tie tolerance.
    #[default]
    Float,
    /// Costs multiplied by 10^6 and rounded to integers; the search is then
    /// exact and bit-reproducible. The reported objective still uses the
    /// float costs.
    FixedPoint,
}

/// Exact solve with float costs.
pub fn solve_transport(instance: &TransportInstance) -> Result<TransportSolution> {
    solve_transport_with(instance, CostMode::Float)
}

pub fn solve_transport_with(
    instance: &TransportInstance,
    mode: CostMode,
) -> Result<TransportSolution> {
    let costs = instance.costs();
    let caps = instance.capacities();
    let assigned = match mode {
        CostMode::Float => ssp::solve(costs.n(), costs.k(), caps, |i, j| costs.get(i, j))?,
        CostMode::FixedPoint => {
            let scaled: Vec<i64> = costs
                .values()
                .iter()
                .map(|&v| (v * FIXED_POINT_SCALE).round() as i64)
                .collect();
            let k = costs.k();
            ssp::solve(costs.n(), k, caps, |i, j| scaled[i * k + j])?
        }
    };
    let plan = AssignmentPlan::new(assigned, costs.k(), instance.n_k())?;
    let objective = plan_cost(&plan, costs)?;
    Ok(TransportSolution { plan, objective })
}

/// Optimality certificate: a balanced plan is optimal exactly when no cyclic
/// exchange of waypoints between depots lowers the cost. Returns the gain of
/// the most improving cycle found (0 when none beats `tol`).
pub fn improving_cycle_gain(plan: &AssignmentPlan, costs: &CostMatrix, tol: f64) -> f64 {
    let k = costs.k();
    // edge[a][b]: cheapest way to push one waypoint from depot a into b
    let mut dist = vec![f64::INFINITY; k * k];
    for (i, &a) in plan.assigned().iter().enumerate() {
        for b in 0..k {
            if b != a {
                let e = costs.get(i, b) - costs.get(i, a);
                if e < dist[a * k + b] {
                    dist[a * k + b] = e;
                }
            }
        }
    }
    for m in 0..k {
        for a in 0..k {
            let am = dist[a * k + m];
            if !am.is_finite() {
                continue;
            }
            for b in 0..k {
                let cand = am + dist[m * k + b];
                if cand < dist[a * k + b] {
                    dist[a * k + b] = cand;
                }
            }
        }
    }
    let worst = (0..k).map(|a| dist[a * k + a]).fold(0.0, f64::min);
    if worst < -tol {
        -worst
    } else {
        0.0
    }
}
