//! Same-size k-means: Lloyd iterations whose assignment step keeps every
//! cluster at its prescribed size.
//!
//! One run goes
//!
//! 1. k-means++ seeding ([`initialize_centroids`]),
//! 2. greedy regret-ordered assignment into capacity-limited clusters
//!    ([`balanced_initialize`]),
//! 3. swap/transfer refinement in priority order ([`refine_by_swaps`]),
//! 4. then alternating centroid updates and warm-started refinement until the
//!    plan stops changing, the relative objective gain drops below epsilon,
//!    or the iteration cap is hit ([`run_balanced_kmeans`]).
//!
//! Refinement only accepts moves that lower the objective by more than
//! [`MIN_IMPROVEMENT`], so the objective trace is strictly decreasing and the
//! search terminates on the finite set of balanced plans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{
    build_cost_matrix_with, capacities, plan_cost, AssignmentPlan, BalanceMode, CostExponent,
    CostMatrix, DepotSet, Point2, WaypointSet,
};

/// Minimum absolute objective decrease for a swap or transfer to count.
pub const MIN_IMPROVEMENT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Relative objective improvement below which the outer loop stops.
    pub convergence_epsilon: f64,
    pub balance_mode: BalanceMode,
    pub cost_exponent: CostExponent,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        KMeansConfig {
            k,
            max_iters: 100,
            seed: 42,
            convergence_epsilon: 1e-9,
            balance_mode: BalanceMode::Strict,
            cost_exponent: CostExponent::Squared,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_balance(mut self, mode: BalanceMode) -> Self {
        self.balance_mode = mode;
        self
    }

    pub fn with_exponent(mut self, exponent: CostExponent) -> Self {
        self.cost_exponent = exponent;
        self
    }

    /// Per-cluster sizes for `n` points; errors when the balance mode cannot
    /// be met.
    pub fn capacities(&self, n: usize) -> Result<Vec<usize>> {
        capacities(n, self.k, self.balance_mode)
    }
}

/// Working state of the balanced assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringState {
    pub centroids: DepotSet,
    pub plan: AssignmentPlan,
    /// Waypoint indices, most eager to leave their cluster first.
    pub priority_order: Vec<usize>,
    /// Per depot, waypoints that stayed put during the last pass and would
    /// accept a swap out of it.
    pub transfer_lists: Vec<Vec<usize>>,
    /// Current total cost of `plan` against `centroids`.
    pub objective: f64,
}

/// Outcome of [`refine_by_swaps`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RefineStats {
    pub swaps: usize,
    pub transfers: usize,
    pub passes: usize,
    /// Objective after the initial state and after every accepted move.
    pub trace: Vec<f64>,
}

impl RefineStats {
    pub fn moves(&self) -> usize {
        self.swaps + self.transfers
    }
}

/// Unconstrained nearest-centroid assignment; ties go to the lowest index.
pub fn kmeans_assign(waypoints: &WaypointSet, centroids: &DepotSet) -> AssignmentPlan {
    let k = centroids.k();
    let assigned = waypoints
        .points()
        .iter()
        .map(|&w| nearest(w, centroids.points()))
        .collect();
    AssignmentPlan::with_default_target(assigned, k).expect("nearest index is always < k")
}

fn nearest(w: Point2, centroids: &[Point2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &c) in centroids.iter().enumerate() {
        let d = crate::model::squared_distance(w, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Centroids after a mean update, and which clusters had to be reseeded.
#[derive(Clone, Debug, PartialEq)]
pub struct CentroidUpdate {
    pub centroids: DepotSet,
    pub reseeded: Vec<usize>,
}

/// Component-wise mean of each cluster. An empty cluster is reseeded onto the
/// waypoint farthest from its own (freshly updated) centroid, lowest index on
/// ties; each such point is used at most once.
pub fn update_centroids(
    waypoints: &WaypointSet,
    plan: &AssignmentPlan,
    k: usize,
) -> Result<CentroidUpdate> {
    if plan.n() != waypoints.len() || plan.k() != k {
        return Err(Error::Contract(format!(
            "plan is {}x{}, waypoints {} and k {k}",
            plan.n(),
            plan.k(),
            waypoints.len()
        )));
    }
    let pts = waypoints.points();
    let mut sums = vec![(0.0f64, 0.0f64); k];
    for (p, &d) in pts.iter().zip(plan.assigned()) {
        sums[d].0 += p.x;
        sums[d].1 += p.y;
    }
    let mut centroids: Vec<Point2> = sums
        .iter()
        .zip(plan.counts())
        .map(|(&(sx, sy), &c)| {
            if c == 0 {
                Point2::default()
            } else {
                Point2::new(sx / c as f64, sy / c as f64)
            }
        })
        .collect();

    let empty: Vec<usize> = (0..k).filter(|&j| plan.counts()[j] == 0).collect();
    if !empty.is_empty() {
        if pts.len() < k {
            return Err(Error::Config(format!(
                "cannot reseed {} empty clusters from {} waypoints",
                empty.len(),
                pts.len()
            )));
        }
        let mut order: Vec<(f64, usize)> = pts
            .iter()
            .zip(plan.assigned())
            .enumerate()
            .map(|(i, (&p, &d))| (crate::model::squared_distance(p, centroids[d]), i))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (&j, &(_, i)) in empty.iter().zip(&order) {
            centroids[j] = pts[i];
        }
    }
    Ok(CentroidUpdate {
        centroids: DepotSet::new(centroids)?,
        reseeded: empty,
    })
}

/// k-means++ seeding: the first centroid uniformly, each next one with
/// probability proportional to squared distance from the nearest chosen
/// centroid. Once every remaining point coincides with a chosen one, the rest
/// are drawn uniformly among unchosen points. Returns K distinct waypoints.
pub fn initialize_centroids(waypoints: &WaypointSet, config: &KMeansConfig) -> Result<DepotSet> {
    let n = waypoints.len();
    let k = config.k;
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    if n < k {
        return Err(Error::Config(format!(
            "{n} waypoints cannot seed {k} centroids"
        )));
    }
    let pts = waypoints.points();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut chosen_mask = vec![false; n];
    let mut chosen = Vec::with_capacity(k);

    let first = rng.random_range(0..n);
    chosen.push(first);
    chosen_mask[first] = true;
    let mut d2: Vec<f64> = pts
        .iter()
        .map(|&p| crate::model::squared_distance(p, pts[first]))
        .collect();

    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen_mask[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        chosen_mask[next] = true;
        let c = pts[next];
        for (slot, &p) in d2.iter_mut().zip(pts) {
            let d = crate::model::squared_distance(p, c);
            if d < *slot {
                *slot = d;
            }
        }
        d2[next] = 0.0;
    }
    DepotSet::new(chosen.iter().map(|&i| pts[i]).collect())
}

/// Best and second-best depot of a cost row (lowest index on ties).
fn best_two(row: &[f64]) -> (usize, usize) {
    let mut best = 0;
    let mut second = usize::MAX;
    for j in 1..row.len() {
        if row[j] < row[best] {
            second = best;
            best = j;
        } else if second == usize::MAX || row[j] < row[second] {
            second = j;
        }
    }
    (best, if second == usize::MAX { best } else { second })
}

/// Greedy balanced assignment. Waypoints are ranked by regret, the cost gap
/// between their best and second-best depot (largest first, lowest index on
/// ties), then each takes the cheapest depot that still has room.
pub fn balanced_initialize(
    waypoints: &WaypointSet,
    centroids: &DepotSet,
    config: &KMeansConfig,
) -> Result<ClusteringState> {
    let costs = build_cost_matrix_with(
        waypoints.points(),
        centroids,
        config.cost_exponent,
        Execution::Sequential,
    );
    balanced_initialize_with_costs(&costs, centroids, config)
}

pub(crate) fn balanced_initialize_with_costs(
    costs: &CostMatrix,
    centroids: &DepotSet,
    config: &KMeansConfig,
) -> Result<ClusteringState> {
    let n = costs.n();
    let k = costs.k();
    if k != config.k {
        return Err(Error::Contract(format!(
            "{k} centroids but config asks for {}",
            config.k
        )));
    }
    let caps = config.capacities(n)?;
    let regret: Vec<f64> = (0..n)
        .map(|i| {
            let row = costs.row(i);
            let (b, s) = best_two(row);
            row[s] - row[b]
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| regret[b].total_cmp(&regret[a]).then(a.cmp(&b)));

    let mut room = caps.clone();
    let mut assigned = vec![0usize; n];
    for &i in &order {
        let row = costs.row(i);
        let mut pick = usize::MAX;
        for j in 0..k {
            if room[j] > 0 && (pick == usize::MAX || row[j] < row[pick]) {
                pick = j;
            }
        }
        // total room equals n, so some depot always has space
        room[pick] -= 1;
        assigned[i] = pick;
    }
    let plan = AssignmentPlan::new(assigned, k, n / k)?;
    let objective = plan_cost(&plan, costs)?;
    Ok(ClusteringState {
        centroids: centroids.clone(),
        plan,
        priority_order: order,
        transfer_lists: vec![Vec::new(); k],
        objective,
    })
}

/// Improve a balanced plan against fixed costs.
///
/// Each pass ranks waypoints by how much they would gain from their best
/// alternative depot. Walking that order, a waypoint `w` in depot `d` visits
/// the other depots by its own preference; for each depot `d'` it first looks
/// for a partner in `d'`'s transfer list whose exchange with `w` lowers the
/// objective, and failing that moves alone if the balance mode leaves room
/// and the move pays off. A waypoint that finds nothing joins its depot's
/// transfer list for the rest of the pass. Any pair that could still be
/// swapped is examined by whichever member comes later, so a pass without
/// moves proves the plan swap-optimal. Passes repeat until one makes no move
/// or `config.max_iters` passes have run.
pub fn refine_by_swaps(
    mut state: ClusteringState,
    costs: &CostMatrix,
    config: &KMeansConfig,
) -> Result<(ClusteringState, RefineStats)> {
    let n = costs.n();
    let k = costs.k();
    if state.plan.n() != n || state.plan.k() != k {
        return Err(Error::Contract(
            "clustering state does not match cost matrix".into(),
        ));
    }
    let caps = config.capacities(n)?;
    let (lo, hi) = match config.balance_mode {
        BalanceMode::Strict => (caps[0], caps[0]),
        BalanceMode::WithinOne => (n / k, n.div_ceil(k)),
    };

    state.objective = plan_cost(&state.plan, costs)?;
    let mut stats = RefineStats {
        trace: vec![state.objective],
        ..RefineStats::default()
    };
    if k == 1 {
        return Ok((state, stats));
    }

    let mut gain = vec![0.0f64; n];
    let mut prefs: Vec<usize> = Vec::with_capacity(k);
    let mut moved = vec![false; n];

    while stats.passes < config.max_iters {
        stats.passes += 1;
        let moves_before = stats.moves();

        for (i, g) in gain.iter_mut().enumerate() {
            let row = costs.row(i);
            let here = row[state.plan.depot_of(i)];
            let best = row.iter().copied().fold(f64::INFINITY, f64::min);
            *g = here - best;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| gain[b].total_cmp(&gain[a]).then(a.cmp(&b)));
        for list in &mut state.transfer_lists {
            list.clear();
        }
        moved.iter_mut().for_each(|m| *m = false);

        for &w in &order {
            if moved[w] {
                continue;
            }
            let d = state.plan.depot_of(w);
            let row = costs.row(w);
            prefs.clear();
            prefs.extend((0..k).filter(|&j| j != d));
            prefs.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));

            let mut done = false;
            for &target in &prefs {
                let w_gain = row[d] - row[target];
                let list = &state.transfer_lists[target];
                let partner = list.iter().position(|&u| {
                    let ur = costs.row(u);
                    w_gain + (ur[target] - ur[d]) > MIN_IMPROVEMENT
                });
                if let Some(pos) = partner {
                    let u = state.transfer_lists[target].remove(pos);
                    let ur = costs.row(u);
                    let delta = w_gain + (ur[target] - ur[d]);
                    state.plan.reassign(w, target);
                    state.plan.reassign(u, d);
                    moved[w] = true;
                    moved[u] = true;
                    state.objective -= delta;
                    stats.swaps += 1;
                    stats.trace.push(state.objective);
                    done = true;
                    break;
                }
                if w_gain > MIN_IMPROVEMENT
                    && state.plan.counts()[d] > lo
                    && state.plan.counts()[target] < hi
                {
                    state.plan.reassign(w, target);
                    moved[w] = true;
                    state.objective -= w_gain;
                    stats.transfers += 1;
                    stats.trace.push(state.objective);
                    done = true;
                    break;
                }
            }
            if !done {
                state.transfer_lists[d].push(w);
            }
        }

        // resync to kill accumulated rounding in the running total
        state.objective = plan_cost(&state.plan, costs)?;
        if stats.moves() == moves_before {
            break;
        }
    }
    state.priority_order = {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| gain[b].total_cmp(&gain[a]).then(a.cmp(&b)));
        order
    };
    Ok((state, stats))
}

/// Result of a full same-size k-means run.
#[derive(Clone, Debug, PartialEq)]
pub struct KMeansOutput {
    pub centroids: DepotSet,
    pub plan: AssignmentPlan,
    /// Objective after the initial refinement and after every outer iteration.
    pub trace: Vec<f64>,
    /// Outer iterations executed (centroid updates).
    pub iterations: usize,
    /// True when the run stopped because the plan was a fixed point.
    pub converged: bool,
    /// Clusters that had to be reseeded during centroid updates.
    pub reseeded: usize,
}

impl KMeansOutput {
    pub fn objective(&self) -> f64 {
        self.trace.last().copied().unwrap_or(0.0)
    }
}

/// Same-size k-means on `waypoints`. The returned centroids are always the
/// means of the returned plan.
pub fn run_balanced_kmeans(waypoints: &WaypointSet, config: &KMeansConfig) -> Result<KMeansOutput> {
    let n = waypoints.len();
    let k = config.k;
    config.capacities(n)?;
    let centroids = initialize_centroids(waypoints, config)?;
    let pts = waypoints.points();
    let exec = Execution::Sequential;

    let costs = build_cost_matrix_with(pts, &centroids, config.cost_exponent, exec);
    let state = balanced_initialize_with_costs(&costs, &centroids, config)?;
    let (mut state, _) = refine_by_swaps(state, &costs, config)?;
    let mut trace = vec![state.objective];
    let mut iterations = 0;
    let mut converged = false;
    let mut reseeded = 0;
    let mut means_current = false;

    while iterations < config.max_iters {
        iterations += 1;
        let update = update_centroids(waypoints, &state.plan, k)?;
        reseeded += update.reseeded.len();
        let costs = build_cost_matrix_with(pts, &update.centroids, config.cost_exponent, exec);
        state.centroids = update.centroids;
        let previous = *trace.last().expect("trace is non-empty");
        let (next, stats) = refine_by_swaps(state, &costs, config)?;
        state = next;
        trace.push(state.objective);
        if stats.moves() == 0 {
            converged = true;
            means_current = true;
            break;
        }
        let rel = if previous > 0.0 {
            (previous - state.objective) / previous
        } else {
            0.0
        };
        if rel < config.convergence_epsilon {
            break;
        }
    }

    if !means_current {
        let update = update_centroids(waypoints, &state.plan, k)?;
        reseeded += update.reseeded.len();
        let costs = build_cost_matrix_with(pts, &update.centroids, config.cost_exponent, exec);
        let objective = plan_cost(&state.plan, &costs)?;
        state.centroids = update.centroids;
        state.objective = objective;
        trace.push(objective);
    }

    Ok(KMeansOutput {
        centroids: state.centroids,
        plan: state.plan,
        trace,
        iterations,
        converged,
        reseeded,
    })
}

/// Largest objective decrease achievable by exchanging one pair of
/// waypoints between two different depots (0 when none improves). O(N^2).
pub fn best_pair_swap_gain(plan: &AssignmentPlan, costs: &CostMatrix) -> f64 {
    let n = plan.n();
    let mut best = 0.0f64;
    for a in 0..n {
        let da = plan.depot_of(a);
        let ra = costs.row(a);
        for b in a + 1..n {
            let db = plan.depot_of(b);
            if da == db {
                continue;
            }
            let rb = costs.row(b);
            let g = ra[da] + rb[db] - ra[db] - rb[da];
            if g > best {
                best = g;
            }
        }
    }
    best
}
