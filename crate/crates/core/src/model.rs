//! Shared domain types: points, waypoint/depot sets, cost matrices and
//! assignment plans, plus the plan cost and balance checks every phase uses.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Absolute tolerance for real-valued comparisons.
pub const ABS_TOL: f64 = 1e-9;

/// A planar coordinate. `x` is longitude-like, `y` latitude-like; both are
/// treated as raw Euclidean values with no projection.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Like [`Point2::new`] but rejects NaN and infinities.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Point2 { x, y })
        } else {
            Err(Error::Data(format!("non-finite coordinate ({x}, {y})")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Point2::new(self.x * s, self.y * s)
    }
}

#[inline]
pub fn euclidean_distance(a: Point2, b: Point2) -> f64 {
    squared_distance(a, b).sqrt()
}

#[inline]
pub fn squared_distance(a: Point2, b: Point2) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

/// Which batch a waypoint was revealed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    One,
    Two,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::One => f.write_str("I"),
            Phase::Two => f.write_str("II"),
        }
    }
}

/// Ordered waypoints with unique external ids and a phase tag per point.
#[derive(Clone, Debug, PartialEq)]
pub struct WaypointSet {
    points: Vec<Point2>,
    ids: Vec<String>,
    phases: Vec<Phase>,
}

impl WaypointSet {
    pub fn new(points: Vec<Point2>, ids: Vec<String>, phases: Vec<Phase>) -> Result<Self> {
        if points.len() != ids.len() || points.len() != phases.len() {
            return Err(Error::Contract(format!(
                "waypoint set columns differ in length: {} points, {} ids, {} phases",
                points.len(),
                ids.len(),
                phases.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite coordinate ({}, {})",
                p.x, p.y
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Data(format!("duplicate waypoint id `{id}`")));
            }
        }
        Ok(WaypointSet {
            points,
            ids,
            phases,
        })
    }

    /// Points with ids `"0"`, `"1"`, ... all tagged Phase I.
    pub fn from_points(points: Vec<Point2>) -> Result<Self> {
        let ids = (0..points.len()).map(|i| i.to_string()).collect();
        let phases = vec![Phase::One; points.len()];
        Self::new(points, ids, phases)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// Sub-set in the given index order, keeping ids and tags.
    pub fn select(&self, indices: &[usize]) -> WaypointSet {
        WaypointSet {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            phases: indices.iter().map(|&i| self.phases[i]).collect(),
        }
    }

    pub fn with_phases(mut self, phases: Vec<Phase>) -> Result<Self> {
        if phases.len() != self.points.len() {
            return Err(Error::Contract(
                "phase tag count differs from point count".into(),
            ));
        }
        self.phases = phases;
        Ok(self)
    }

    /// Every coordinate multiplied by `s`.
    pub fn scaled(&self, s: f64) -> WaypointSet {
        WaypointSet {
            points: self.points.iter().map(|p| p.scaled(s)).collect(),
            ids: self.ids.clone(),
            phases: self.phases.clone(),
        }
    }
}

/// K depot locations, K >= 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DepotSet {
    points: Vec<Point2>,
}

impl DepotSet {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config(
                "depot set must contain at least one depot".into(),
            ));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Data(format!("non-finite depot ({}, {})", p.x, p.y)));
        }
        Ok(DepotSet { points })
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn scaled(&self, s: f64) -> DepotSet {
        DepotSet {
            points: self.points.iter().map(|p| p.scaled(s)).collect(),
        }
    }
}

/// Whether cost entries are plain distances or squared distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CostExponent {
    Linear,
    #[default]
    Squared,
}

impl CostExponent {
    pub fn from_int(e: u32) -> Result<Self> {
        match e {
            1 => Ok(CostExponent::Linear),
            2 => Ok(CostExponent::Squared),
            other => Err(Error::Config(format!(
                "cost exponent must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            CostExponent::Linear => 1,
            CostExponent::Squared => 2,
        }
    }

    #[inline]
    pub fn cost(self, a: Point2, b: Point2) -> f64 {
        match self {
            CostExponent::Linear => euclidean_distance(a, b),
            CostExponent::Squared => squared_distance(a, b),
        }
    }

    /// Cost from an already computed distance.
    #[inline]
    pub fn apply(self, distance: f64) -> f64 {
        match self {
            CostExponent::Linear => distance,
            CostExponent::Squared => distance * distance,
        }
    }
}

/// Dense row-major N×K matrix of waypoint-to-depot costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    values: Vec<f64>,
    n: usize,
    k: usize,
    exponent: CostExponent,
}

impl CostMatrix {
    /// Wrap precomputed values. Entries must be finite and non-negative.
    pub fn from_rows(rows: &[Vec<f64>], exponent: CostExponent) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if n == 0 || k == 0 {
            return Err(Error::Contract("cost matrix must be at least 1x1".into()));
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Contract("ragged cost matrix".into()));
        }
        let values: Vec<f64> = rows.iter().flatten().copied().collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Data(format!(
                "cost entry {v} is not a finite non-negative real"
            )));
        }
        Ok(CostMatrix {
            values,
            n,
            k,
            exponent,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn exponent(&self) -> CostExponent {
        self.exponent
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column `j` as a fresh vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }
}

/// Build the cost matrix using the default execution mode.
pub fn build_cost_matrix(
    waypoints: &WaypointSet,
    depots: &DepotSet,
    exponent: CostExponent,
) -> CostMatrix {
    build_cost_matrix_with(waypoints.points(), depots, exponent, Execution::default())
}

/// Rows are filled independently, so the parallel and sequential results are
/// bit-identical.
pub fn build_cost_matrix_with(
    waypoints: &[Point2],
    depots: &DepotSet,
    exponent: CostExponent,
    exec: Execution,
) -> CostMatrix {
    const ROWS_PER_CHUNK: usize = 512;
    let n = waypoints.len();
    let k = depots.k();
    let mut values = vec![0.0; n * k];
    let dp = depots.points();
    exec.for_each_chunk(&mut values, ROWS_PER_CHUNK * k, |chunk_idx, chunk| {
        let first = chunk_idx * ROWS_PER_CHUNK;
        for (r, row) in chunk.chunks_mut(k).enumerate() {
            let w = waypoints[first + r];
            for (slot, &d) in row.iter_mut().zip(dp) {
                *slot = exponent.cost(w, d);
            }
        }
    });
    CostMatrix {
        values,
        n,
        k,
        exponent,
    }
}

/// Balance requirement on per-depot loads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BalanceMode {
    /// Every depot gets exactly N/K waypoints; K must divide N.
    #[default]
    Strict,
    /// Loads are floor(N/K) or ceil(N/K).
    WithinOne,
}

/// Per-depot capacities summing to `n`. In within-one mode the lowest depot
/// indices receive the larger loads.
pub fn capacities(n: usize, k: usize, mode: BalanceMode) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    if n < k {
        return Err(Error::Config(format!(
            "{n} waypoints cannot fill {k} depots"
        )));
    }
    let base = n / k;
    let rem = n % k;
    match mode {
        BalanceMode::Strict if rem != 0 => Err(Error::Config(format!(
            "{n} not divisible by {k} (strict balance needs equal depot loads)"
        ))),
        _ => Ok((0..k).map(|j| base + usize::from(j < rem)).collect()),
    }
}

/// A total map waypoint -> depot with the per-depot load bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentPlan {
    assigned: Vec<usize>,
    n_k: usize,
    counts: Vec<usize>,
}

impl AssignmentPlan {
    /// `n_k` is the target per-depot load (floor(N/K) in within-one mode).
    pub fn new(assigned: Vec<usize>, k: usize, n_k: usize) -> Result<Self> {
        let mut counts = vec![0; k];
        for (i, &d) in assigned.iter().enumerate() {
            if d >= k {
                return Err(Error::Contract(format!(
                    "waypoint {i} assigned to depot {d}, but only {k} depots exist"
                )));
            }
            counts[d] += 1;
        }
        Ok(AssignmentPlan {
            assigned,
            n_k,
            counts,
        })
    }

    /// Plan with `n_k = floor(N / K)`.
    pub fn with_default_target(assigned: Vec<usize>, k: usize) -> Result<Self> {
        let n_k = assigned.len().checked_div(k).unwrap_or(0);
        Self::new(assigned, k, n_k)
    }

    pub fn assigned(&self) -> &[usize] {
        &self.assigned
    }

    pub fn depot_of(&self, i: usize) -> usize {
        self.assigned[i]
    }

    pub fn n(&self) -> usize {
        self.assigned.len()
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub(crate) fn reassign(&mut self, i: usize, to: usize) {
        let from = self.assigned[i];
        self.counts[from] -= 1;
        self.counts[to] += 1;
        self.assigned[i] = to;
    }

    /// Waypoint indices grouped by depot, each group in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> =
            self.counts.iter().map(|&c| Vec::with_capacity(c)).collect();
        for (i, &d) in self.assigned.iter().enumerate() {
            groups[d].push(i);
        }
        groups
    }
}

/// Total cost of a plan: the sum of each waypoint's cost to its depot.
pub fn plan_cost(plan: &AssignmentPlan, costs: &CostMatrix) -> Result<f64> {
    if plan.n() != costs.n() || plan.k() != costs.k() {
        return Err(Error::Contract(format!(
            "plan is {}x{} but cost matrix is {}x{}",
            plan.n(),
            plan.k(),
            costs.n(),
            costs.k()
        )));
    }
    Ok(plan
        .assigned
        .iter()
        .enumerate()
        .map(|(i, &d)| costs.get(i, d))
        .sum())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// Row constraint: exactly one valid depot per waypoint.
    pub rows_ok: bool,
    /// Column constraint: per-depot loads match the target.
    pub columns_ok: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.rows_ok && self.columns_ok
    }
}

/// Check row sums (every waypoint on one depot in `[0, k)`) and column sums
/// (load == n_k when `strict`, |load - n_k| <= 1 otherwise).
pub fn validate_plan(plan: &AssignmentPlan, n: usize, k: usize, strict: bool) -> ValidationReport {
    let mut report = ValidationReport {
        rows_ok: true,
        columns_ok: true,
        failures: Vec::new(),
    };
    if plan.n() != n {
        report.rows_ok = false;
        report
            .failures
            .push(format!("plan covers {} waypoints, expected {n}", plan.n()));
    }
    if let Some((i, d)) = plan.assigned.iter().enumerate().find(|(_, &d)| d >= k) {
        report.rows_ok = false;
        report
            .failures
            .push(format!("waypoint {i} on depot {d} outside [0, {k})"));
    }
    if plan.k() != k {
        report.columns_ok = false;
        report
            .failures
            .push(format!("plan has {} depot columns, expected {k}", plan.k()));
    }
    let mut recount = vec![0usize; plan.k()];
    for &d in &plan.assigned {
        if d < recount.len() {
            recount[d] += 1;
        }
    }
    if recount != plan.counts {
        report.columns_ok = false;
        report
            .failures
            .push("stored depot loads disagree with the map".into());
    }
    for (j, &c) in recount.iter().enumerate() {
        let ok = if strict {
            c == plan.n_k
        } else {
            c.abs_diff(plan.n_k) <= 1
        };
        if !ok {
            report.columns_ok = false;
            report
                .failures
                .push(format!("depot {j} has load {c}, target {}", plan.n_k));
        }
    }
    report
}
