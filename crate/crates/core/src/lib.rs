//! Two-phase facility planning.
//!
//! Phase I places K depots with same-size k-means over an initial batch of
//! waypoints. Phase II keeps those depots fixed and assigns the full waypoint
//! set by solving the balanced transportation problem exactly.
//!
//! ```
//! use facility_planner::{run_two_phase, Point2, RunConfig, WaypointSet};
//!
//! let pts = (0..40)
//!     .map(|i| Point2::new((i % 8) as f64 + if i < 20 { 0.0 } else { 50.0 }, (i / 8) as f64))
//!     .collect();
//! let all = WaypointSet::from_points(pts).unwrap();
//! let mut config = RunConfig::new(2);
//! config.gamma = 0.25;
//! let result = run_two_phase(&all, &config).unwrap();
//! assert_eq!(result.plan_phase2.counts(), &[20, 20]);
//! ```

pub mod balanced_kmeans;
pub mod cli;
pub mod error;
pub mod eval;
pub mod exec;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod transport;
pub mod verify;

pub use balanced_kmeans::{
    balanced_initialize, initialize_centroids, kmeans_assign, refine_by_swaps, run_balanced_kmeans,
    update_centroids, ClusteringState, KMeansConfig, KMeansOutput,
};
pub use error::{Error, Result};
pub use eval::{mse, percent_change, sweep_k, MetricsReport};
pub use exec::Execution;
pub use model::{
    build_cost_matrix, euclidean_distance, plan_cost, validate_plan, AssignmentPlan, BalanceMode,
    CostExponent, CostMatrix, DepotSet, Phase, Point2, ValidationReport, WaypointSet,
};
pub use pipeline::{run_two_phase, split_waypoints, RunConfig, RunResult};
pub use transport::{
    brute_force_oracle, hungarian_oracle, solve_transport, TransportInstance, TransportSolution,
};
