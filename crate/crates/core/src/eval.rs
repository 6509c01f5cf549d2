//! Quality metrics and the K sweep harness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{squared_distance, AssignmentPlan, DepotSet, WaypointSet};
use crate::pipeline::{run_two_phase, RunConfig, RunResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub k: usize,
    pub mse_phase1: f64,
    pub mse_phase2: f64,
    pub pct_change: f64,
    pub objective_phase1: f64,
    pub objective_phase2: f64,
    pub n_phase1: usize,
    pub n_phase2: usize,
}

/// Mean squared Euclidean distance from each waypoint to its depot,
/// whatever exponent the solver optimized.
pub fn mse(plan: &AssignmentPlan, waypoints: &WaypointSet, depots: &DepotSet) -> Result<f64> {
    if plan.n() != waypoints.len() {
        return Err(Error::Contract(format!(
            "plan covers {} of {} waypoints",
            plan.n(),
            waypoints.len()
        )));
    }
    if plan.k() != depots.k() {
        return Err(Error::Contract(format!(
            "plan has {} depots, depot set {}",
            plan.k(),
            depots.k()
        )));
    }
    if waypoints.is_empty() {
        return Err(Error::Contract("MSE of an empty waypoint set".into()));
    }
    let d = depots.points();
    let total: f64 = waypoints
        .points()
        .iter()
        .zip(plan.assigned())
        .map(|(&w, &j)| squared_distance(w, d[j]))
        .sum();
    Ok(total / waypoints.len() as f64)
}

/// Relative MSE deterioration from Phase I to Phase II, normalized by the
/// Phase II value.
pub fn percent_change(mse1: f64, mse2: f64) -> Result<f64> {
    if mse2 == 0.0 {
        return Err(Error::Contract(
            "percent change undefined when Phase II MSE is 0".into(),
        ));
    }
    Ok((mse2 - mse1) / mse2)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn metrics_for(
    k: usize,
    phase1: &WaypointSet,
    plan1: &AssignmentPlan,
    objective_phase1: f64,
    all: &WaypointSet,
    plan2: &AssignmentPlan,
    objective_phase2: f64,
    depots: &DepotSet,
) -> Result<MetricsReport> {
    let mse_phase1 = mse(plan1, phase1, depots)?;
    let mse_phase2 = mse(plan2, all, depots)?;
    // a perfect Phase II fit leaves nothing to compare against; report 0
    let pct_change = if mse_phase2 == 0.0 && mse_phase1 == 0.0 {
        0.0
    } else {
        percent_change(mse_phase1, mse_phase2)?
    };
    Ok(MetricsReport {
        k,
        mse_phase1,
        mse_phase2,
        pct_change,
        objective_phase1,
        objective_phase2,
        n_phase1: phase1.len(),
        n_phase2: all.len(),
    })
}

/// One row of a sweep; failures are kept so the sweep can continue.
#[derive(Debug)]
pub struct SweepRow {
    pub k: usize,
    pub outcome: Result<RunResult>,
}

impl SweepRow {
    pub fn metrics(&self) -> Option<&MetricsReport> {
        self.outcome.as_ref().ok().map(|r| &r.metrics)
    }
}

/// Run the full pipeline once per K. Runs go through the configured
/// execution mode; rows come back sorted by K.
pub fn sweep_k(all: &WaypointSet, k_values: &[usize], base: &RunConfig) -> Vec<SweepRow> {
    let mut rows = base.execution.map(k_values, |&k| SweepRow {
        k,
        outcome: run_two_phase(all, &RunConfig { k, ..base.clone() }),
    });
    rows.sort_by_key(|r| r.k);
    rows
}

/// CSV rendering of a sweep: `k,mse_phase1,mse_phase2,pct_change,error`.
pub fn metrics_table_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("k,mse_phase1,mse_phase2,pct_change,error\n");
    for row in rows {
        match &row.outcome {
            Ok(r) => {
                let m = &r.metrics;
                out.push_str(&format!(
                    "{},{:.6},{:.6},{:.6},\n",
                    row.k, m.mse_phase1, m.mse_phase2, m.pct_change
                ));
            }
            Err(e) => {
                let msg = e.to_string().replace(['"', '\n'], " ");
                out.push_str(&format!("{},,,,\"{msg}\"\n", row.k));
            }
        }
    }
    out
}
