//! Exhaustive enumeration of balanced plans; test oracle only.

use crate::error::{Error, Result};
use crate::model::{plan_cost, AssignmentPlan};

use super::{TransportInstance, TransportSolution};

/// Largest number of candidate plans the oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// N! / Π cap_j!, the number of plans meeting the capacities exactly.
pub fn multinomial_count(capacities: &[usize]) -> f64 {
    let mut remaining: usize = capacities.iter().sum();
    let mut total = 1.0f64;
    for &c in capacities {
        total *= binomial(remaining, c);
        remaining -= c;
    }
    total
}

fn binomial(n: usize, r: usize) -> f64 {
    let r = r.min(n - r);
    (0..r)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

/// Global minimum over every plan that fills each depot exactly to capacity.
/// Among ties the lexicographically smallest plan wins.
pub fn brute_force_oracle(instance: &TransportInstance) -> Result<TransportSolution> {
    let plans = multinomial_count(instance.capacities());
    if plans > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            plans,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let mut search = Search {
        costs: instance.costs(),
        remaining: instance.capacities().to_vec(),
        current: vec![0; instance.n()],
        best: None,
        best_cost: f64::INFINITY,
    };
    search.descend(0, 0.0);
    let best = search
        .best
        .ok_or_else(|| Error::Contract("no balanced plan exists".into()))?;
    let plan = AssignmentPlan::new(best, instance.k(), instance.n_k())?;
    let objective = plan_cost(&plan, instance.costs())?;
    Ok(TransportSolution { plan, objective })
}

struct Search<'a> {
    costs: &'a crate::model::CostMatrix,
    remaining: Vec<usize>,
    current: Vec<usize>,
    best: Option<Vec<usize>>,
    best_cost: f64,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, partial: f64) {
        // costs are non-negative, so a partial sum at or above the incumbent
        // can never produce a strictly better plan
        if partial >= self.best_cost {
            return;
        }
        if i == self.current.len() {
            self.best_cost = partial;
            self.best = Some(self.current.clone());
            return;
        }
        for j in 0..self.remaining.len() {
            if self.remaining[j] == 0 {
                continue;
            }
            self.remaining[j] -= 1;
            self.current[i] = j;
            self.descend(i + 1, partial + self.costs.get(i, j));
            self.remaining[j] += 1;
        }
    }
}
