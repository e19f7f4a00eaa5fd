//! Multi-robot formation design under range-based observability.
//!
//! Formations of `N` two-tag robots are found by momentum descent over
//! `SE(2)^{N-1}` on user-composable costs, and then evaluated in a coverage
//! simulation with a range/GPS EKF-SLAM estimator. Runnable walkthroughs live
//! in `examples/`; `cargo run --example <name>`.

pub mod assignment;
pub mod commands;
pub mod costs;
pub mod covsim;
pub mod design;
pub mod error;
pub mod heatmap;
pub mod optimizer;
pub mod output;
pub mod ranging;
pub mod scenario;
pub mod se2;
pub mod team;

pub use error::{Error, Result};
