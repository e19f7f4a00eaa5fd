//! Coverage evaluation: a leader-follower fleet sweeps a rectangle in a
//! chosen formation while an EKF-SLAM estimator tracks every pose and two
//! unknown landmarks from ranges, odometry and leader GPS.

pub mod control;
pub mod ekf;
pub mod landmark;
pub mod montecarlo;
pub mod sim;
pub mod waypoints;

pub use control::{control_step, ControlGains};
pub use ekf::EkfState;
pub use montecarlo::{aggregate, monte_carlo, percent_reduction, Aggregate, TrialRecord};
pub use sim::{run_coverage_sim, simulate_truth, RangeSchedule, SimConfig, SimMetrics};
pub use waypoints::{formation_sweep_width, generate_waypoints};
