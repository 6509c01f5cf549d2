use facility_planner::io::generate_synthetic;
use facility_planner::model::build_cost_matrix;
use facility_planner::{
    hungarian_oracle, plan_cost, run_two_phase, split_waypoints, validate_plan, BalanceMode,
    CostExponent, Point2, RunConfig, WaypointSet,
};

fn two_clusters() -> WaypointSet {
    let mut pts = Vec::new();
    for (cx, cy) in [(0.0, 0.0), (60.0, 40.0)] {
        for (dx, dy) in [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)] {
            pts.push(Point2::new(cx + dx, cy + dy));
        }
    }
    WaypointSet::from_points(pts).unwrap()
}

#[test]
fn two_tight_clusters_stay_whole() {
    let all = two_clusters();
    let mut checked = 0;
    for seed in 0..40u64 {
        let config = RunConfig {
            gamma: 0.5,
            seed,
            ..RunConfig::new(2)
        };
        let split = split_waypoints(&all, 2, 0.5, BalanceMode::Strict, seed).unwrap();
        if split.phase1.iter().filter(|&&i| i < 4).count() != 2 {
            continue;
        }
        checked += 1;
        let r = run_two_phase(&all, &config).unwrap();
        let a = r.plan_phase2.assigned();
        assert!(a[..4].iter().all(|&d| d == a[0]));
        assert!(a[4..].iter().all(|&d| d == a[4]));
        assert_ne!(a[0], a[4]);
        // each depot sits inside its cluster
        for (i, &d) in a.iter().enumerate() {
            let p = all.points()[i];
            let c = r.depots.points()[d];
            assert!((p.x - c.x).abs() <= 0.5 && (p.y - c.y).abs() <= 0.5);
        }
        let (m1, m2) = (r.metrics.mse_phase1, r.metrics.mse_phase2);
        assert!(m1 < 0.5 && m2 < 0.5, "{m1} {m2}");
        assert!((m1 - m2).abs() < 0.25);
    }
    assert!(checked >= 5, "only {checked} even splits");
}

#[test]
fn single_depot_at_phase1_mean() {
    let all = generate_synthetic(40, 3, 5.0, 9).unwrap();
    let r = run_two_phase(
        &all,
        &RunConfig {
            gamma: 0.25,
            ..RunConfig::new(1)
        },
    )
    .unwrap();
    let p1: Vec<Point2> = r.split.phase1.iter().map(|&i| all.points()[i]).collect();
    let mx = p1.iter().map(|p| p.x).sum::<f64>() / p1.len() as f64;
    let my = p1.iter().map(|p| p.y).sum::<f64>() / p1.len() as f64;
    let d = r.depots.points()[0];
    assert!((d.x - mx).abs() < 1e-9 && (d.y - my).abs() < 1e-9);
    let costs = build_cost_matrix(&all, &r.depots, CostExponent::Squared);
    let total: f64 = (0..all.len()).map(|i| costs.get(i, 0)).sum();
    assert!((r.metrics.objective_phase2 - total).abs() <= 1e-9 * total);
}

/// Keep Phase I assignments, then fill the remaining capacity greedily in
/// input order, each new waypoint to its cheapest depot with room.
fn inherited_cost(r: &facility_planner::RunResult, all: &WaypointSet) -> f64 {
    let k = r.depots.k();
    let costs = build_cost_matrix(all, &r.depots, CostExponent::Squared);
    let n_k = all.len() / k;
    let mut room = vec![n_k; k];
    let mut total = 0.0;
    for (pos, &i) in r.split.phase1.iter().enumerate() {
        let d = r.plan_phase1.assigned()[pos];
        room[d] -= 1;
        total += costs.get(i, d);
    }
    let mut rest = r.split.phase2.clone();
    rest.sort_unstable();
    for i in rest {
        let d = (0..k)
            .filter(|&j| room[j] > 0)
            .min_by(|&a, &b| costs.get(i, a).total_cmp(&costs.get(i, b)))
            .unwrap();
        room[d] -= 1;
        total += costs.get(i, d);
    }
    total
}

#[test]
fn phase2_beats_inherited_plan_and_matches_oracle() {
    for seed in 0..12u64 {
        for k in [2usize, 3, 4] {
            let n = 12 * k;
            let all = generate_synthetic(n, 4, 6.0, seed).unwrap();
            let config = RunConfig {
                gamma: 0.25,
                seed,
                ..RunConfig::new(k)
            };
            let r = run_two_phase(&all, &config).unwrap();
            assert!(validate_plan(&r.plan_phase2, n, k, true).passed());
            let obj = r.metrics.objective_phase2;
            assert!(obj <= inherited_cost(&r, &all) + 1e-9);

            let costs = build_cost_matrix(&all, &r.depots, CostExponent::Squared);
            let oracle = hungarian_oracle(&costs, n / k).unwrap();
            assert!((oracle.objective - obj).abs() <= 1e-9 * obj.max(1.0));
            assert!(
                (plan_cost(&r.plan_phase2, &costs).unwrap() - obj).abs() <= 1e-9 * obj.max(1.0)
            );
        }
    }
}

#[test]
fn coverage_immutability_determinism() {
    let all = generate_synthetic(600, 12, 4.0, 3).unwrap();
    let config = RunConfig {
        gamma: 0.1,
        restarts: 3,
        ..RunConfig::new(6)
    };
    let a = run_two_phase(&all, &config).unwrap();
    let b = run_two_phase(&all, &config).unwrap();
    assert_eq!(a.plan_phase2, b.plan_phase2);
    assert_eq!(a.depots, b.depots);
    assert_eq!(a.metrics, b.metrics);

    assert_eq!(a.plan_phase2.assigned().len(), 600);
    assert_eq!(a.plan_phase2.counts(), &[100; 6]);
    for (x, y) in a.depots.points().iter().zip(a.phase1.centroids.points()) {
        assert_eq!(x.x.to_bits(), y.x.to_bits());
        assert_eq!(x.y.to_bits(), y.y.to_bits());
    }
    let ids: std::collections::HashSet<&str> =
        a.waypoints.ids().iter().map(String::as_str).collect();
    assert_eq!(ids.len(), 600);
}

#[test]
fn sequential_matches_parallel() {
    let all = generate_synthetic(500, 8, 4.0, 11).unwrap();
    let base = RunConfig {
        gamma: 0.2,
        restarts: 2,
        balance_mode: BalanceMode::WithinOne,
        ..RunConfig::new(7)
    };
    let seq = run_two_phase(
        &all,
        &RunConfig {
            execution: facility_planner::Execution::Sequential,
            ..base.clone()
        },
    )
    .unwrap();
    let par = run_two_phase(
        &all,
        &RunConfig {
            execution: facility_planner::Execution::Parallel,
            ..base
        },
    )
    .unwrap();
    assert_eq!(seq.plan_phase2, par.plan_phase2);
    assert_eq!(seq.metrics, par.metrics);
}

#[test]
fn strict_divisibility_error() {
    let all = generate_synthetic(100, 4, 3.0, 1).unwrap();
    let err = run_two_phase(&all, &RunConfig::new(7)).unwrap_err();
    assert!(err.to_string().contains("100 not divisible by 7"), "{err}");
}
