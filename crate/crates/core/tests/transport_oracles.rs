use facility_planner::model::build_cost_matrix;
use facility_planner::transport::{
    improving_cycle_gain, solve_transport_with, CostMode, DuplicatedCostMatrix,
};
use facility_planner::{
    brute_force_oracle, hungarian_oracle, plan_cost, solve_transport, AssignmentPlan, BalanceMode,
    CostExponent, CostMatrix, DepotSet, Point2, TransportInstance, WaypointSet,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(w: &[(f64, f64)], d: &[(f64, f64)], e: CostExponent) -> TransportInstance {
    let w = WaypointSet::from_points(w.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap();
    let d = DepotSet::new(d.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap();
    TransportInstance::balanced(build_cost_matrix(&w, &d, e), BalanceMode::Strict).unwrap()
}

/// Independent enumeration of 2-depot, n_k=2 plans over 4 waypoints.
fn enumerate_four(costs: &CostMatrix) -> (Vec<usize>, f64, usize) {
    let mut best = (vec![], f64::INFINITY);
    let mut count = 0;
    for mask in 0u32..16 {
        if mask.count_ones() != 2 {
            continue;
        }
        count += 1;
        let plan: Vec<usize> = (0..4).map(|i| ((mask >> i) & 1) as usize).collect();
        let c: f64 = plan.iter().enumerate().map(|(i, &j)| costs.get(i, j)).sum();
        if c < best.1 {
            best = (plan, c);
        }
    }
    (best.0, best.1, count)
}

#[test]
fn separated_pairs_match_enumeration() {
    let inst = instance(
        &[(1.0, 0.0), (2.0, 0.0), (8.0, 0.0), (9.0, 0.0)],
        &[(0.0, 0.0), (10.0, 0.0)],
        CostExponent::Linear,
    );
    let (plan, cost, count) = enumerate_four(inst.costs());
    assert_eq!(count, 6);
    assert_eq!(plan, vec![0, 0, 1, 1]);
    assert_eq!(cost, 6.0);

    for sol in [
        solve_transport(&inst).unwrap(),
        brute_force_oracle(&inst).unwrap(),
        hungarian_oracle(inst.costs(), 2).unwrap(),
    ] {
        assert_eq!(sol.plan.assigned(), &[0, 0, 1, 1]);
        assert!((sol.objective - 6.0).abs() < 1e-12);
    }
}

#[test]
fn displacement_matches_enumeration() {
    let inst = instance(
        &[(0.0, 1.0), (0.0, 2.0), (0.0, 3.0), (10.0, 1.0)],
        &[(0.0, 0.0), (10.0, 0.0)],
        CostExponent::Linear,
    );
    let (plan, cost, _) = enumerate_four(inst.costs());
    assert_eq!(plan, vec![0, 0, 1, 1]);
    assert!((cost - 14.4403).abs() < 1e-4);
    assert!((cost - (4.0 + 109f64.sqrt())).abs() < 1e-12);

    let ours = solve_transport(&inst).unwrap();
    let hung = hungarian_oracle(inst.costs(), 2).unwrap();
    let brute = brute_force_oracle(&inst).unwrap();
    assert!((ours.objective - cost).abs() < 1e-12);
    assert!((hung.objective - cost).abs() < 1e-12);
    assert!((brute.objective - cost).abs() < 1e-12);
    // nearest-depot assignment would overload depot 0
    assert_eq!(ours.plan.assigned()[2], 1);
}

#[test]
fn duplicated_matrix_blocks() {
    let inst = instance(
        &[
            (0.0, 1.0),
            (0.0, 2.0),
            (0.0, 3.0),
            (10.0, 1.0),
            (4.0, 4.0),
            (5.0, -2.0),
        ],
        &[(0.0, 0.0), (10.0, 0.0), (5.0, 5.0)],
        CostExponent::Squared,
    );
    let dup = DuplicatedCostMatrix::new(inst.costs(), 2).unwrap();
    assert_eq!(dup.size(), 6);
    for j in 0..3 {
        for col in j * 2..(j + 1) * 2 {
            for i in 0..6 {
                assert_eq!(dup.get(i, col).to_bits(), inst.costs().get(i, j).to_bits());
            }
        }
    }
}

#[test]
fn random_plans_never_beat_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<(f64, f64)> = (0..48)
        .map(|i| ((i as f64 * 1.7).sin() * 40.0, (i as f64 * 0.9).cos() * 30.0))
        .collect();
    let inst = instance(
        &pts,
        &[(-20.0, 0.0), (0.0, 10.0), (25.0, -5.0), (5.0, -25.0)],
        CostExponent::Squared,
    );
    let best = solve_transport(&inst).unwrap().objective;
    let mut base: Vec<usize> = (0..48).map(|i| i % 4).collect();
    for _ in 0..1000 {
        base.shuffle(&mut rng);
        let plan = AssignmentPlan::new(base.clone(), 4, 12).unwrap();
        assert!(plan_cost(&plan, inst.costs()).unwrap() >= best - 1e-9);
    }
}

#[test]
fn fixed_point_mode_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|_| {
                (
                    rand::Rng::random_range(&mut rng, 0.0..50.0),
                    rand::Rng::random_range(&mut rng, 0.0..50.0),
                )
            })
            .collect();
        let inst = instance(
            &pts,
            &[(10.0, 10.0), (40.0, 10.0), (25.0, 40.0), (25.0, 25.0)],
            CostExponent::Linear,
        );
        let float = solve_transport_with(&inst, CostMode::Float).unwrap();
        let fixed = solve_transport_with(&inst, CostMode::FixedPoint).unwrap();
        // rounding to 1e-6 perturbs each entry by at most 5e-7
        assert!((float.objective - fixed.objective).abs() <= 40.0 * 1e-6);
    }
}

fn square_instance() -> impl Strategy<Value = TransportInstance> {
    (1usize..=5, 1usize..=8).prop_flat_map(|(k, n_k)| {
        let n = k * n_k;
        (
            prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), n),
            prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), k),
            any::<bool>(),
        )
            .prop_map(|(w, d, sq)| {
                instance(
                    &w,
                    &d,
                    if sq {
                        CostExponent::Squared
                    } else {
                        CostExponent::Linear
                    },
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn solver_matches_hungarian(inst in square_instance()) {
        let ours = solve_transport(&inst).unwrap();
        let hung = hungarian_oracle(inst.costs(), inst.n_k()).unwrap();
        let tol = 1e-9 * hung.objective.abs().max(1.0);
        prop_assert!((ours.objective - hung.objective).abs() <= tol,
            "{} vs {}", ours.objective, hung.objective);
        prop_assert_eq!(ours.plan.counts(), inst.capacities());
        prop_assert_eq!(improving_cycle_gain(&ours.plan, inst.costs(), 1e-9), 0.0);
    }

    #[test]
    fn solver_matches_brute_force_with_uneven_caps(
        costs in prop::collection::vec(0.0f64..10.0, 9 * 3),
    ) {
        let rows: Vec<Vec<f64>> = costs.chunks(3).map(<[f64]>::to_vec).collect();
        let m = CostMatrix::from_rows(&rows, CostExponent::Linear).unwrap();
        let inst = TransportInstance::new(m, vec![4, 3, 2]).unwrap();
        let ours = solve_transport(&inst).unwrap();
        let brute = brute_force_oracle(&inst).unwrap();
        prop_assert!((ours.objective - brute.objective).abs() <= 1e-9 * brute.objective.max(1.0));
        prop_assert_eq!(ours.plan.counts(), &[4, 3, 2]);
    }

    #[test]
    fn scaling_keeps_plan(inst in square_instance(), s in 0.5f64..4.0) {
        // integer-valued costs keep ties exact under scaling
        let rows: Vec<Vec<f64>> = (0..inst.n()).map(|i| inst.costs().row(i).iter().map(|v| v.round()).collect()).collect();
        let scaled_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * s.round()).collect()).collect();
        let a = TransportInstance::balanced(CostMatrix::from_rows(&rows, CostExponent::Linear).unwrap(), BalanceMode::Strict).unwrap();
        let b = TransportInstance::balanced(CostMatrix::from_rows(&scaled_rows, CostExponent::Linear).unwrap(), BalanceMode::Strict).unwrap();
        let pa = solve_transport_with(&a, CostMode::FixedPoint).unwrap();
        let pb = solve_transport_with(&b, CostMode::FixedPoint).unwrap();
        prop_assert_eq!(pa.plan, pb.plan);
    }
}
